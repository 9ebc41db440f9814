//! SVG renderings of a decomposition and the accompanying data exports.
//!
//! Output is a pure function of the inputs: no timestamps, fixed six
//! significant digit formatting, panels emitted in feature order. Equal
//! inputs give byte-identical files.

mod color;
mod embed;
mod svg;

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use color::{DivergingMap, SequentialMap};

use crate::adc::{weight_profile, AdcDecomposition, ContributionRanking};
use crate::data::{header_of, rows_of, write_table, PairedDataset, SampleSet};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::spectral::EigenSystem;
use color::DEGENERATE_GRAY;
use svg::{num, Anchor, Scale, Svg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EmbedMethod {
    #[default]
    Pca,
}

impl EmbedMethod {
    pub fn name(self) -> &'static str {
        match self {
            EmbedMethod::Pca => "PCA",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VizConfig {
    /// Leading X features shown (I).
    pub features_x: usize,
    /// Leading Y features shown (J).
    pub features_y: usize,
    pub diverging: DivergingMap,
    pub sequential: SequentialMap,
    /// Width of each figure in pixels.
    pub image_size: u32,
    pub embed_method: EmbedMethod,
    /// Log-scale eigenvalue shares in the weight-decay plot.
    pub log_scale: bool,
}

impl Default for VizConfig {
    fn default() -> Self {
        Self {
            features_x: 6,
            features_y: 6,
            diverging: DivergingMap::default(),
            sequential: SequentialMap::default(),
            image_size: 900,
            embed_method: EmbedMethod::Pca,
            log_scale: false,
        }
    }
}

impl VizConfig {
    pub fn check(&self, n: usize) -> Result<()> {
        for (name, v) in [("I", self.features_x), ("J", self.features_y)] {
            if v == 0 || v > n {
                return Err(Error::InvalidViz(format!("{name} = {v} must lie in 1..={n}")));
            }
        }
        if self.image_size < 200 {
            return Err(Error::InvalidViz(format!("image size {} is below 200 pixels", self.image_size)));
        }
        Ok(())
    }

    fn width(&self) -> f64 {
        self.image_size as f64
    }
}

const TITLE_SIZE: f64 = 16.0;
const LABEL_SIZE: f64 = 11.0;
const POINT_COLOR: &str = "#1f4e79";
const X_COLOR: &str = "#1f4e79";
const Y_COLOR: &str = "#c0392b";
const AXIS_COLOR: &str = "#444444";

fn axes_box(doc: &mut Svg, x0: f64, y0: f64, w: f64, h: f64) {
    doc.rect(x0, y0, w, h, "none", Some(AXIS_COLOR));
}

fn range_labels(doc: &mut Svg, sx: &Scale, sy: &Scale, x0: f64, y0: f64, w: f64, h: f64) {
    let (xa, xb) = sx.domain();
    let (ya, yb) = sy.domain();
    doc.text(x0, y0 + h + 12.0, 9.0, Anchor::Start, AXIS_COLOR, &num(xa));
    doc.text(x0 + w, y0 + h + 12.0, 9.0, Anchor::End, AXIS_COLOR, &num(xb));
    doc.text(x0 - 3.0, y0 + h, 9.0, Anchor::End, AXIS_COLOR, &num(ya));
    doc.text(x0 - 3.0, y0 + 9.0, 9.0, Anchor::End, AXIS_COLOR, &num(yb));
}

fn dictionary(set: &SampleSet, sys: &EigenSystem, count: usize, symbol: &str, cfg: &VizConfig) -> String {
    let p = set.dim();
    let cols = count.min(3);
    let rows = count.div_ceil(cols);
    let panel = cfg.width() / cols as f64;
    let header = 36.0;
    let mut doc = Svg::new(cfg.width(), header + rows as f64 * panel);
    let mut title = format!("Feature dictionary for {} (n = {}, p = {p})", set.group_name(), set.n());
    if p > 2 {
        title.push_str(&format!(", embedding: {}", cfg.embed_method.name()));
    }
    doc.text(cfg.width() / 2.0, 24.0, TITLE_SIZE, Anchor::Middle, "black", &title);

    let coords: DMatrix<f64> = match p {
        1 => set.values().clone(),
        2 => set.values().clone(),
        _ => embed::pca_2d(set.values()),
    };
    let (xlabel, ylabel) = match p {
        1 => (set.column_labels()[0].clone(), String::new()),
        2 => (set.column_labels()[0].clone(), set.column_labels()[1].clone()),
        _ => ("PC1".to_string(), "PC2".to_string()),
    };
    let shares = weight_profile(sys);
    let radius = if set.n() > 400 { 1.8 } else { 2.6 };

    for (k, share) in shares.iter().enumerate().take(count) {
        let (pr, pc) = (k / cols, k % cols);
        let ox = pc as f64 * panel;
        let oy = header + pr as f64 * panel;
        let (x0, y0) = (ox + 48.0, oy + 28.0);
        let (w, h) = (panel - 64.0, panel - 64.0);
        let degenerate = sys.is_degenerate(k);
        let feature = sys.feature(k);

        let mut t = format!("{symbol}{} share {}", k + 1, num(share.share));
        if degenerate {
            t.push_str(" (degenerate)");
        }
        doc.text(ox + panel / 2.0, oy + 18.0, 12.0, Anchor::Middle, "black", &t);
        axes_box(&mut doc, x0, y0, w, h);

        let xs: Vec<f64> = coords.column(0).iter().copied().collect();
        let ys: Vec<f64> = if p == 1 { feature.clone() } else { coords.column(1).iter().copied().collect() };
        let sx = Scale::fit(xs.iter().copied(), x0, x0 + w);
        let sy = Scale::fit(ys.iter().copied(), y0 + h, y0);
        let amax = feature.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for r in 0..set.n() {
            let fill = if degenerate {
                DEGENERATE_GRAY.to_string()
            } else if p == 1 {
                POINT_COLOR.to_string()
            } else {
                cfg.diverging.color(if amax > 0.0 { feature[r] / amax } else { 0.0 })
            };
            doc.circle(sx.apply(xs[r]), sy.apply(ys[r]), radius, &fill);
        }
        range_labels(&mut doc, &sx, &sy, x0, y0, w, h);
        doc.text(x0 + w / 2.0, y0 + h + 26.0, LABEL_SIZE, Anchor::Middle, AXIS_COLOR, &xlabel);
        let yl = if p == 1 { format!("{symbol}{}", k + 1) } else { ylabel.clone() };
        doc.text(ox + 4.0, y0 + h / 2.0, LABEL_SIZE, Anchor::Start, AXIS_COLOR, &yl);
    }
    doc.finish()
}

/// Feature dictionaries for X (`phi`) and Y (`psi`): one panel per leading
/// feature, titled with its index and eigenvalue share. One-dimensional
/// groups plot sample value against feature value; two-dimensional groups
/// color the sample scatter by feature value; wider groups are first
/// embedded to two dimensions. Degenerate features are drawn gray.
pub fn render_feature_dictionary(
    ds: &PairedDataset,
    adc: &AdcDecomposition,
    cfg: &VizConfig,
) -> Result<(String, String)> {
    check_sizes(ds, adc, cfg)?;
    Ok((
        dictionary(&ds.x, &adc.x_system, cfg.features_x, "φ", cfg),
        dictionary(&ds.y, &adc.y_system, cfg.features_y, "ψ", cfg),
    ))
}

fn check_sizes(ds: &PairedDataset, adc: &AdcDecomposition, cfg: &VizConfig) -> Result<()> {
    if ds.n() != adc.n() {
        return Err(Error::DimensionMismatch(ds.n(), adc.n()));
    }
    cfg.check(adc.n())
}

struct Heatmap<'a> {
    title: &'a str,
    values: DMatrix<f64>,
    domain_max: f64,
    footer: Vec<String>,
}

fn heatmap(map: Heatmap<'_>, cfg: &VizConfig) -> String {
    let (rows, cols) = map.values.shape();
    let (left, top, right) = (60.0, 56.0, 90.0);
    let cell = ((cfg.width() - left - right) / cols.max(rows) as f64).min(90.0);
    let grid_w = cell * cols as f64;
    let grid_h = cell * rows as f64;
    let height = top + grid_h + 30.0 + 18.0 * map.footer.len() as f64 + 10.0;
    let mut doc = Svg::new(cfg.width(), height.max(top + 200.0));
    doc.text(cfg.width() / 2.0, 24.0, TITLE_SIZE, Anchor::Middle, "black", map.title);

    let annotate = rows * cols <= 64;
    let scale = if map.domain_max > 0.0 { map.domain_max } else { 1.0 };
    for i in 0..rows {
        for j in 0..cols {
            let v = map.values[(i, j)];
            let t = v / scale;
            let (x, y) = (left + j as f64 * cell, top + i as f64 * cell);
            doc.rect(x, y, cell, cell, &cfg.sequential.color(t), None);
            if annotate {
                let size = (cell / 5.0).clamp(6.0, 12.0);
                doc.text(x + cell / 2.0, y + cell / 2.0 + size / 3.0, size, Anchor::Middle, cfg.sequential.label_color(t), &num(v));
            }
        }
    }
    axes_box(&mut doc, left, top, grid_w, grid_h);
    let step = rows.max(cols).div_ceil(20);
    for i in (0..rows).step_by(step) {
        doc.text(left - 4.0, top + (i as f64 + 0.5) * cell + 4.0, LABEL_SIZE, Anchor::End, "black", &format!("φ{}", i + 1));
    }
    for j in (0..cols).step_by(step) {
        doc.text(left + (j as f64 + 0.5) * cell, top - 6.0, LABEL_SIZE, Anchor::Middle, "black", &format!("ψ{}", j + 1));
    }

    // legend
    let (lx, lh) = (left + grid_w + 24.0, grid_h.min(240.0));
    let steps = 24;
    for s in 0..steps {
        let t = 1.0 - (s as f64 + 0.5) / steps as f64;
        doc.rect(lx, top + s as f64 * lh / steps as f64, 14.0, lh / steps as f64, &cfg.sequential.color(t), None);
    }
    axes_box(&mut doc, lx, top, 14.0, lh);
    doc.text(lx + 18.0, top + 9.0, 9.0, Anchor::Start, "black", &num(scale));
    doc.text(lx + 18.0, top + lh, 9.0, Anchor::Start, "black", "0");

    for (k, line) in map.footer.iter().enumerate() {
        doc.text(left, top + grid_h + 28.0 + 18.0 * k as f64, LABEL_SIZE, Anchor::Start, "black", line);
    }
    doc.finish()
}

/// Raw map of `corr(phi_i, psi_j)^2` on the fixed domain `[0, 1]`, and the
/// weighted map of `lambda_i sigma_j corr^2`. Rows are `phi_i`, columns
/// `psi_j`. The weighted footer reports `(4/n^2)` times the sum over all
/// `n^2` cells and the share of that total carried by the displayed cells.
pub fn render_correlation_maps(adc: &AdcDecomposition, cfg: &VizConfig) -> Result<(String, String)> {
    cfg.check(adc.n())?;
    let (ri, rj) = (cfg.features_x, cfg.features_y);
    let raw = adc.corr.view((0, 0), (ri, rj)).map(|c| c * c);
    let weighted = adc.contributions.view((0, 0), (ri, rj)).clone_owned();
    let displayed = compensated_sum(weighted.iter().copied());
    let total = adc.total_contribution();
    let share = if total > 0.0 { displayed / total } else { 0.0 };
    let n = adc.n();
    let wmax = weighted.iter().copied().fold(0.0, f64::max);

    let raw_svg = heatmap(
        Heatmap {
            title: &format!("Raw correlation map: corr(φi, ψj)² for i ≤ {ri}, j ≤ {rj}"),
            values: raw,
            domain_max: 1.0,
            footer: vec![format!("n = {n}")],
        },
        cfg,
    );
    let weighted_svg = heatmap(
        Heatmap {
            title: &format!("Weighted correlation map: λi σj corr(φi, ψj)² for i ≤ {ri}, j ≤ {rj}"),
            values: weighted,
            domain_max: wmax,
            footer: vec![
                format!("(4/n²) × sum over all {n}×{n} cells = {}", num(adc.v_hat_reconstructed)),
                format!("displayed cells carry {} of the total", num(share)),
            ],
        },
        cfg,
    );
    Ok((raw_svg, weighted_svg))
}

type Series<'a> = (&'a str, &'a str, Vec<(f64, f64)>);

struct Chart<'a> {
    title: &'a str,
    xlabel: &'a str,
    ylabel: &'a str,
    /// `(label, color, points)` per series.
    series: &'a [Series<'a>],
    footer: &'a [String],
    /// Fixed axis ranges; `None` fits the data with padding.
    x_domain: Option<(f64, f64)>,
    y_domain: Option<(f64, f64)>,
}

fn line_chart(chart: Chart<'_>, cfg: &VizConfig) -> String {
    let Chart { title, xlabel, ylabel, series, footer, x_domain, y_domain } = chart;
    let w = cfg.width();
    let h = (w * 0.62).round() + 18.0 * footer.len() as f64;
    let (x0, y0) = (70.0, 48.0);
    let pw = w - x0 - 30.0;
    let ph = w * 0.62 - y0 - 50.0;
    let mut doc = Svg::new(w, h);
    doc.text(w / 2.0, 24.0, TITLE_SIZE, Anchor::Middle, "black", title);
    let sx = match x_domain {
        Some((a, b)) => Scale::new(a, b, x0, x0 + pw),
        None => Scale::fit(series.iter().flat_map(|s| s.2.iter().map(|p| p.0)), x0, x0 + pw),
    };
    let sy = match y_domain {
        Some((a, b)) => Scale::new(a, b, y0 + ph, y0),
        None => Scale::fit(series.iter().flat_map(|s| s.2.iter().map(|p| p.1)), y0 + ph, y0),
    };
    axes_box(&mut doc, x0, y0, pw, ph);
    range_labels(&mut doc, &sx, &sy, x0, y0, pw, ph);
    doc.text(x0 + pw / 2.0, y0 + ph + 28.0, LABEL_SIZE, Anchor::Middle, AXIS_COLOR, xlabel);
    doc.text(8.0, y0 + ph / 2.0, LABEL_SIZE, Anchor::Start, AXIS_COLOR, ylabel);
    doc.rect(x0 + pw - 156.0, y0 + 2.0, 152.0, 16.0 * series.len() as f64 + 4.0, "white", Some("#cccccc"));
    for (k, (name, color, pts)) in series.iter().enumerate() {
        let mapped: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (sx.apply(x), sy.apply(y))).collect();
        doc.polyline(&mapped, color, k > 0);
        let ly = y0 + 14.0 + 16.0 * k as f64;
        doc.line(x0 + pw - 150.0, ly - 4.0, x0 + pw - 126.0, ly - 4.0, color);
        doc.text(x0 + pw - 120.0, ly, LABEL_SIZE, Anchor::Start, "black", name);
    }
    for (k, line) in footer.iter().enumerate() {
        doc.text(x0, y0 + ph + 48.0 + 18.0 * k as f64, LABEL_SIZE, Anchor::Start, "black", line);
    }
    doc.finish()
}

const DECAY_INDICES: usize = 50;

/// Eigenvalue share against feature index for both groups, over the first
/// 50 indices. With `cfg.log_scale` the vertical axis is `log10(share)` and
/// zero shares are omitted.
pub fn render_weight_decay(x_sys: &EigenSystem, y_sys: &EigenSystem, cfg: &VizConfig) -> String {
    let len = x_sys.len().max(y_sys.len()).min(DECAY_INDICES);
    let curve = |sys: &EigenSystem| -> Vec<(f64, f64)> {
        weight_profile(sys)
            .into_iter()
            .take(len)
            .filter(|w| !cfg.log_scale || w.share > 0.0)
            .map(|w| (w.index as f64, if cfg.log_scale { w.share.log10() } else { w.share }))
            .collect()
    };
    let ylabel = if cfg.log_scale { "log10 share" } else { "share" };
    let series = [("λi (X)", X_COLOR, curve(x_sys)), ("σj (Y)", Y_COLOR, curve(y_sys))];
    let top = series.iter().flat_map(|s| s.2.iter().map(|p| p.1)).fold(0.0, f64::max);
    let covered = |sys: &EigenSystem| num(weight_profile(sys).iter().take(len).map(|w| w.share).sum());
    let footer = [format!(
        "first {len} of {} features; shares covered: X {}, Y {}",
        x_sys.len(),
        covered(x_sys),
        covered(y_sys)
    )];
    line_chart(
        Chart {
            title: "Feature weights: eigenvalue share by index",
            xlabel: "feature index",
            ylabel,
            series: &series,
            footer: &footer,
            x_domain: Some((1.0, len as f64)),
            y_domain: if cfg.log_scale { None } else { Some((0.0, top)) },
        },
        cfg,
    )
}

/// Points `(k, 1 - cumulative_share[k])` of the coverage curve. Every `k`
/// up to 200 is kept; beyond that `k` grows geometrically. The final pair is
/// always included.
pub fn coverage_points(rank: &ContributionRanking) -> Vec<(usize, f64)> {
    let len = rank.pairs.len();
    let mut ks: Vec<usize> = (1..=len.min(200)).collect();
    let mut k = 200.0f64;
    while (k as usize) < len {
        k *= 1.05;
        ks.push((k.round() as usize).min(len));
    }
    ks.dedup();
    if ks.last() != Some(&len) && len > 0 {
        ks.push(len);
    }
    ks.into_iter().map(|k| (k, rank.remaining_after(k))).collect()
}

/// Share of the total left uncovered by the top `k` pairs, `k` on a log axis.
/// Errors if the curve is not nonincreasing or does not end at 0.
pub fn render_coverage_curve(rank: &ContributionRanking, cfg: &VizConfig) -> Result<String> {
    let pts = coverage_points(rank);
    if pts.windows(2).any(|w| w[1].1 > w[0].1) {
        return Err(Error::InvalidViz("coverage curve is not nonincreasing".into()));
    }
    if pts.last().map(|p| p.1) != Some(0.0) {
        return Err(Error::InvalidViz("coverage curve does not end at 0".into()));
    }
    let footer: Vec<String> = [1usize, 3, 10]
        .iter()
        .filter(|&&k| k <= rank.pairs.len())
        .map(|&k| format!("top {k}: {} remaining", num(rank.remaining_after(k))))
        .collect();
    let curve: Vec<(f64, f64)> = pts.iter().map(|&(k, r)| ((k as f64).log10(), r)).collect();
    let top = curve.first().map_or(0.0, |p| p.1);
    let series = [("1 - cumulative share", X_COLOR, curve)];
    Ok(line_chart(
        Chart {
            title: "Contribution coverage: share not covered by the top k pairs",
            xlabel: "log10 k",
            ylabel: "remaining",
            series: &series,
            footer: &[footer.join("; ")],
            x_domain: Some((0.0, (rank.pairs.len() as f64).log10())),
            y_domain: Some((0.0, top)),
        },
        cfg,
    ))
}

/// Y values split by the sign of a feature, each sorted ascending.
/// Rows where the feature is exactly zero join the positive group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedEcdf {
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
}

pub fn ecdf(sorted: &[f64], t: f64) -> f64 {
    sorted.partition_point(|&v| v <= t) as f64 / sorted.len() as f64
}

pub fn grouped_ecdf(y: &SampleSet, feature: &[f64]) -> Result<GroupedEcdf> {
    if y.dim() != 1 {
        return Err(Error::InvalidViz(format!("grouped ECDF needs one Y column, got {}", y.dim())));
    }
    if feature.len() != y.n() {
        return Err(Error::DimensionMismatch(y.n(), feature.len()));
    }
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for (r, &f) in feature.iter().enumerate() {
        let v = y.values()[(r, 0)];
        if f >= 0.0 {
            positive.push(v);
        } else {
            negative.push(v);
        }
    }
    if positive.is_empty() {
        return Err(Error::DegenerateGroup("positive"));
    }
    if negative.is_empty() {
        return Err(Error::DegenerateGroup("negative"));
    }
    positive.sort_by(f64::total_cmp);
    negative.sort_by(f64::total_cmp);
    Ok(GroupedEcdf { positive, negative })
}

fn steps(sorted: &[f64], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let m = sorted.len() as f64;
    let mut pts = vec![(lo, 0.0)];
    for (k, &v) in sorted.iter().enumerate() {
        pts.push((v, k as f64 / m));
        pts.push((v, (k + 1) as f64 / m));
    }
    pts.push((hi, 1.0));
    pts
}

/// Empirical distribution functions of Y for rows where `feature >= 0` and
/// where `feature < 0`.
pub fn render_grouped_ecdf(y: &SampleSet, feature: &[f64], label: &str, cfg: &VizConfig) -> Result<String> {
    let g = grouped_ecdf(y, feature)?;
    let lo = g.positive[0].min(g.negative[0]);
    let hi = g.positive[g.positive.len() - 1].max(g.negative[g.negative.len() - 1]);
    let pos = format!("{label} ≥ 0 (n = {})", g.positive.len());
    let neg = format!("{label} < 0 (n = {})", g.negative.len());
    let series = [(pos.as_str(), Y_COLOR, steps(&g.positive, lo, hi)), (neg.as_str(), X_COLOR, steps(&g.negative, lo, hi))];
    Ok(line_chart(
        Chart {
            title: &format!("Distribution of {} grouped by the sign of {label}", y.column_labels()[0]),
            xlabel: &y.column_labels()[0],
            ylabel: "ECDF",
            series: &series,
            footer: &[],
            x_domain: None,
            y_domain: Some((0.0, 1.0)),
        },
        cfg,
    ))
}

/// Writes the original columns followed by `phi_1..phi_I` and
/// `psi_1..psi_J`, in row order.
pub fn export_augmented_csv(
    ds: &PairedDataset,
    adc: &AdcDecomposition,
    features_x: usize,
    features_y: usize,
    path: impl AsRef<Path>,
) -> Result<()> {
    let cfg = VizConfig { features_x, features_y, ..VizConfig::default() };
    check_sizes(ds, adc, &cfg)?;
    let extra_names: Vec<String> = (1..=features_x)
        .map(|i| format!("phi_{i}"))
        .chain((1..=features_y).map(|j| format!("psi_{j}")))
        .collect();
    let extra: Vec<Vec<f64>> = (0..ds.n())
        .map(|r| {
            (0..features_x)
                .map(|i| adc.x_system.eigenvectors[(r, i)])
                .chain((0..features_y).map(|j| adc.y_system.eigenvectors[(r, j)]))
                .collect()
        })
        .collect();
    write_table(path, &header_of(ds, &extra_names), &rows_of(ds, &extra))
}

/// One file listed in a report bundle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub file: String,
    pub kind: String,
    pub description: String,
}

impl Artifact {
    pub fn new(file: &str, kind: &str, description: &str) -> Self {
        Self { file: file.into(), kind: kind.into(), description: description.into() }
    }
}

fn write_text(dir: &Path, file: &str, content: &str) -> Result<()> {
    let path = dir.join(file);
    std::fs::write(&path, content).map_err(|e| Error::io(&path, e))
}

/// Renders every figure plus the augmented CSV into `dir`. The grouped ECDF
/// is produced only for one-dimensional Y when `phi_1` splits the rows into
/// two nonempty groups.
pub fn write_visualizations(
    ds: &PairedDataset,
    adc: &AdcDecomposition,
    rank: &ContributionRanking,
    cfg: &VizConfig,
    dir: &Path,
) -> Result<Vec<Artifact>> {
    let mut out = Vec::new();
    let (fx, fy) = render_feature_dictionary(ds, adc, cfg)?;
    write_text(dir, "features_x.svg", &fx)?;
    out.push(Artifact::new("features_x.svg", "svg", "feature dictionary for X"));
    write_text(dir, "features_y.svg", &fy)?;
    out.push(Artifact::new("features_y.svg", "svg", "feature dictionary for Y"));

    let (raw, weighted) = render_correlation_maps(adc, cfg)?;
    write_text(dir, "corr_raw.svg", &raw)?;
    out.push(Artifact::new("corr_raw.svg", "svg", "raw correlation map"));
    write_text(dir, "corr_weighted.svg", &weighted)?;
    out.push(Artifact::new("corr_weighted.svg", "svg", "weighted correlation map"));

    write_text(dir, "weight_decay.svg", &render_weight_decay(&adc.x_system, &adc.y_system, cfg))?;
    out.push(Artifact::new("weight_decay.svg", "svg", "eigenvalue share decay"));
    write_text(dir, "coverage.svg", &render_coverage_curve(rank, cfg)?)?;
    out.push(Artifact::new("coverage.svg", "svg", "contribution coverage curve"));

    if ds.y.dim() == 1 && !adc.x_system.is_degenerate(0) {
        match render_grouped_ecdf(&ds.y, &adc.x_system.feature(0), "φ1", cfg) {
            Ok(svg) => {
                write_text(dir, "ecdf_phi1.svg", &svg)?;
                out.push(Artifact::new("ecdf_phi1.svg", "svg", "ECDF of Y grouped by the sign of phi_1"));
            }
            Err(Error::DegenerateGroup(_)) => {}
            Err(e) => return Err(e),
        }
    }

    export_augmented_csv(ds, adc, cfg.features_x, cfg.features_y, dir.join("features.csv"))?;
    out.push(Artifact::new("features.csv", "csv", "data with leading feature columns appended"));
    Ok(out)
}
