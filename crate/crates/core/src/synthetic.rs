//! Seeded generators for the experiment datasets and null fixtures.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`. Uniform
//! variates use the 53-bit `[0, 1)` conversion of `rand`; Gaussian variates
//! use `rand_distr::StandardNormal` (ziggurat). Within each row the draws are
//! made in the order documented on each generator, so a given
//! `(name, n, seed, params)` always produces the same bits.
//!
//! `w_shape`, `parabola` and `circle` are parameterised reconstructions of
//! classic one-dimensional dependence shapes, not copies of any published
//! dataset.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{PairedDataset, SampleSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorName {
    Case12d,
    Case22d,
    WShape,
    Parabola,
    Circle,
    IndependentGaussian,
    CustomLatent,
}

impl GeneratorName {
    pub const ALL: [GeneratorName; 7] = [
        GeneratorName::Case12d,
        GeneratorName::Case22d,
        GeneratorName::WShape,
        GeneratorName::Parabola,
        GeneratorName::Circle,
        GeneratorName::IndependentGaussian,
        GeneratorName::CustomLatent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorName::Case12d => "case1_2d",
            GeneratorName::Case22d => "case2_2d",
            GeneratorName::WShape => "w_shape",
            GeneratorName::Parabola => "parabola",
            GeneratorName::Circle => "circle",
            GeneratorName::IndependentGaussian => "independent_gaussian",
            GeneratorName::CustomLatent => "custom_latent",
        }
    }

    /// Accepted parameters with their defaults.
    fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            GeneratorName::Case12d | GeneratorName::Case22d => &[],
            GeneratorName::WShape | GeneratorName::Parabola => &[("noise", 0.1)],
            GeneratorName::Circle => &[("noise", 0.05)],
            GeneratorName::IndependentGaussian => &[("p", 1.0), ("q", 1.0)],
            GeneratorName::CustomLatent => &[
                ("p", 24.0),
                ("loaded", 6.0),
                ("signal", 1.0),
                ("noise", 0.5),
                ("y_noise", 0.5),
            ],
        }
    }
}

impl FromStr for GeneratorName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        GeneratorName::ALL
            .into_iter()
            .find(|g| g.as_str() == key)
            .ok_or_else(|| Error::UnknownGenerator(s.to_string()))
    }
}

impl fmt::Display for GeneratorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: GeneratorName,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl GeneratorSpec {
    pub fn new(name: GeneratorName, n: usize, seed: u64) -> Self {
        Self { name, n, seed, params: BTreeMap::new() }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    fn check(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidGeneratorSpec(format!("n must be at least 2, got {}", self.n)));
        }
        let defaults = self.name.defaults();
        if let Some(k) = self.params.keys().find(|k| !defaults.iter().any(|(d, _)| d == k)) {
            return Err(Error::InvalidGeneratorSpec(format!("`{}` has no parameter `{k}`", self.name)));
        }
        for (k, v) in &self.params {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::InvalidGeneratorSpec(format!("`{k}` must be finite and >= 0")));
            }
        }
        Ok(())
    }

    fn param(&self, key: &str) -> f64 {
        self.params.get(key).copied().unwrap_or_else(|| {
            self.name.defaults().iter().find(|(k, _)| *k == key).map(|(_, v)| *v).expect("known parameter")
        })
    }

    fn count(&self, key: &str) -> Result<usize> {
        let v = self.param(key);
        if v < 1.0 || v.fract() != 0.0 {
            return Err(Error::InvalidGeneratorSpec(format!("`{key}` must be a positive integer, got {v}")));
        }
        Ok(v as usize)
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:n={},seed={}", self.name, self.n, self.seed)?;
        for (k, v) in &self.params {
            write!(f, ",{k}={v}")?;
        }
        Ok(())
    }
}

/// Parses `name:n=500,seed=7,noise=0.1`; `seed` defaults to 0.
impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let name: GeneratorName = name.parse()?;
        let bad = || Error::InvalidGeneratorSpec(format!("cannot parse `{s}`"));
        let mut n = None;
        let mut seed = 0;
        let mut params = BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(bad)?;
            match k.trim() {
                "n" => n = Some(v.trim().parse().map_err(|_| bad())?),
                "seed" => seed = v.trim().parse().map_err(|_| bad())?,
                key => {
                    params.insert(key.to_string(), v.trim().parse().map_err(|_| bad())?);
                }
            }
        }
        let n = n.ok_or_else(|| Error::InvalidGeneratorSpec(format!("`{s}` is missing n=<count>")))?;
        let spec = GeneratorSpec { name, n, seed, params };
        spec.check()?;
        Ok(spec)
    }
}

const P0: [f64; 2] = [0.0, 0.0];
const P1: [f64; 2] = [-1.0, 0.0];
const P2: [f64; 2] = [1.0, 0.0];
const P3: [f64; 2] = [0.0, 0.5];
const P4: [f64; 2] = [0.0, -0.5];

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// The case-2 response: `(|X-P1| + |X-P3| - |X-P0|, |X-P2| + |X-P4| - |X-P0|)`.
pub fn case2_response(x: [f64; 2]) -> [f64; 2] {
    let d0 = dist2(x, P0);
    [dist2(x, P1) + dist2(x, P3) - d0, dist2(x, P2) + dist2(x, P4) - d0]
}

/// Piecewise-linear W on `[-1, 1]`: 1 at the integers, 0 at the half-integers.
pub fn w_profile(x: f64) -> f64 {
    1.0 - 2.0 * (x - x.round()).abs()
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>()
}

fn symmetric(rng: &mut ChaCha8Rng) -> f64 {
    2.0 * rng.random::<f64>() - 1.0
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Draws the dataset described by `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<PairedDataset> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut ys: Vec<Vec<f64>> = Vec::with_capacity(n);
    match spec.name {
        // per row: U, Z, R, theta
        GeneratorName::Case12d => {
            for _ in 0..n {
                let (u, z, r) = (uniform(&mut rng), uniform(&mut rng), uniform(&mut rng));
                let theta = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let angle = 2.0 * PI * u;
                xs.push(vec![z * angle.cos(), z * angle.sin()]);
                let phase = PI * theta * z;
                ys.push(vec![r * phase.cos(), r * phase.sin()]);
            }
        }
        // per row: U, Z
        GeneratorName::Case22d => {
            for _ in 0..n {
                let (u, z) = (uniform(&mut rng), uniform(&mut rng));
                let angle = 2.0 * PI * u;
                let x = [z * angle.cos(), z * angle.sin()];
                xs.push(x.to_vec());
                ys.push(case2_response(x).to_vec());
            }
        }
        // per row: x ~ U(-1,1), e ~ U(-1,1)
        GeneratorName::WShape | GeneratorName::Parabola => {
            let noise = spec.param("noise");
            for _ in 0..n {
                let x = symmetric(&mut rng);
                let e = symmetric(&mut rng);
                let f = if spec.name == GeneratorName::WShape { w_profile(x) } else { x * x };
                xs.push(vec![x]);
                ys.push(vec![f + noise * e]);
            }
        }
        // per row: t ~ U(0, 2pi), two Gaussians
        GeneratorName::Circle => {
            let noise = spec.param("noise");
            for _ in 0..n {
                let t = 2.0 * PI * uniform(&mut rng);
                let (ex, ey) = (gaussian(&mut rng), gaussian(&mut rng));
                xs.push(vec![t.cos() + noise * ex]);
                ys.push(vec![t.sin() + noise * ey]);
            }
        }
        // per row: p Gaussians for X, then q for Y
        GeneratorName::IndependentGaussian => {
            let (p, q) = (spec.count("p")?, spec.count("q")?);
            for _ in 0..n {
                xs.push((0..p).map(|_| gaussian(&mut rng)).collect());
                ys.push((0..q).map(|_| gaussian(&mut rng)).collect());
            }
        }
        // per row: latent z, p column noises, one Y noise.
        // The first `loaded` X columns are signal * z + noise * e; the rest are pure noise.
        GeneratorName::CustomLatent => {
            let p = spec.count("p")?;
            let loaded = spec.count("loaded")?.min(p);
            let (signal, noise, y_noise) = (spec.param("signal"), spec.param("noise"), spec.param("y_noise"));
            for _ in 0..n {
                let z = gaussian(&mut rng);
                let row = (0..p)
                    .map(|k| {
                        let e = gaussian(&mut rng);
                        if k < loaded { signal * z + noise * e } else { e }
                    })
                    .collect();
                xs.push(row);
                ys.push(vec![z + y_noise * gaussian(&mut rng)]);
            }
        }
    }
    PairedDataset::new(SampleSet::from_rows(&xs, "x", "X")?, SampleSet::from_rows(&ys, "y", "Y")?)
}
