use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

impl FromStr for Scale {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" | "lin" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            other => Err(format!("unknown scale '{other}' (expected linear or log)")),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        })
    }
}

/// A closed one-dimensional sampling grid `[min, max]` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub scale: Scale,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(scale: Scale, min: f64, max: f64, n: usize) -> Result<Self, String> {
        if n == 0 {
            return Err("grid needs at least one point".into());
        }
        if !(min.is_finite() && max.is_finite()) {
            return Err("grid bounds must be finite".into());
        }
        if n > 1 && min >= max {
            return Err(format!("grid bounds must satisfy min < max (got {min} .. {max})"));
        }
        if scale == Scale::Log && min <= 0.0 {
            return Err("log grid requires a positive lower bound".into());
        }
        Ok(Grid { scale, min, max, n })
    }

    pub fn linear(min: f64, max: f64, n: usize) -> Self {
        Grid::new(Scale::Linear, min, max, n).expect("invalid linear grid")
    }

    pub fn log(min: f64, max: f64, n: usize) -> Self {
        Grid::new(Scale::Log, min, max, n).expect("invalid log grid")
    }

    pub fn point(&self, k: usize) -> f64 {
        if self.n == 1 {
            return self.min;
        }
        if k == 0 {
            return self.min;
        }
        if k + 1 == self.n {
            return self.max;
        }
        let frac = k as f64 / (self.n - 1) as f64;
        match self.scale {
            Scale::Linear => self.min + frac * (self.max - self.min),
            Scale::Log => (self.min.ln() + frac * (self.max.ln() - self.min.ln())).exp(),
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.point(k)).collect()
    }
}
