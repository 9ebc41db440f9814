use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type Rgb = [u8; 3];

/// Maps for signed feature values; the midpoint is the neutral color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DivergingMap {
    #[default]
    RedBlue,
    PurpleOrange,
}

/// Maps for nonnegative magnitudes such as squared correlations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SequentialMap {
    #[default]
    Viridis,
    Greys,
}

const RED_BLUE: [Rgb; 5] = [[33, 102, 172], [146, 197, 222], [247, 247, 247], [244, 165, 130], [178, 24, 43]];
const PURPLE_ORANGE: [Rgb; 5] = [[84, 39, 136], [178, 171, 210], [247, 247, 247], [253, 184, 99], [179, 88, 6]];
const VIRIDIS: [Rgb; 9] = [
    [68, 1, 84],
    [71, 44, 122],
    [59, 81, 139],
    [44, 113, 142],
    [33, 144, 141],
    [39, 173, 129],
    [92, 200, 99],
    [170, 220, 50],
    [253, 231, 37],
];
const GREYS: [Rgb; 2] = [[255, 255, 255], [20, 20, 20]];

pub(crate) const DEGENERATE_GRAY: &str = "#9e9e9e";

fn interpolate(stops: &[Rgb], t: f64) -> Rgb {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let pos = t * (stops.len() - 1) as f64;
    let k = (pos.floor() as usize).min(stops.len() - 2);
    let f = pos - k as f64;
    let mut out = [0u8; 3];
    for c in 0..3 {
        let a = stops[k][c] as f64;
        let b = stops[k + 1][c] as f64;
        out[c] = (a + f * (b - a)).round() as u8;
    }
    out
}

pub(crate) fn hex(c: Rgb) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

impl DivergingMap {
    /// `t` in `[-1, 1]`.
    pub fn color(self, t: f64) -> String {
        let stops: &[Rgb] = match self {
            DivergingMap::RedBlue => &RED_BLUE,
            DivergingMap::PurpleOrange => &PURPLE_ORANGE,
        };
        hex(interpolate(stops, 0.5 * (t + 1.0)))
    }

    pub fn name(self) -> &'static str {
        match self {
            DivergingMap::RedBlue => "red-blue",
            DivergingMap::PurpleOrange => "purple-orange",
        }
    }
}

impl SequentialMap {
    /// `t` in `[0, 1]`.
    pub fn color(self, t: f64) -> String {
        hex(interpolate(self.stops(), t))
    }

    fn stops(self) -> &'static [Rgb] {
        match self {
            SequentialMap::Viridis => &VIRIDIS,
            SequentialMap::Greys => &GREYS,
        }
    }

    /// Text color that stays readable on top of `color(t)`.
    pub(crate) fn label_color(self, t: f64) -> &'static str {
        let [r, g, b] = interpolate(self.stops(), t);
        let luma = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
        if luma < 140.0 {
            "white"
        } else {
            "black"
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SequentialMap::Viridis => "viridis",
            SequentialMap::Greys => "greys",
        }
    }
}

impl FromStr for DivergingMap {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [DivergingMap::RedBlue, DivergingMap::PurpleOrange]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidViz(format!("unknown diverging colormap `{s}`")))
    }
}

impl FromStr for SequentialMap {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [SequentialMap::Viridis, SequentialMap::Greys]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidViz(format!("unknown sequential colormap `{s}`")))
    }
}

impl fmt::Display for DivergingMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for SequentialMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
