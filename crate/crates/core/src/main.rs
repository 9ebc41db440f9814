use clap::Parser;

fn main() {
    let cli = adcov::cli::Cli::parse();
    std::process::exit(adcov::cli::execute(cli));
}
