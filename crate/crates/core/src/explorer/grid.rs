use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        })
    }
}

impl FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" | "lin" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            other => Err(format!("unknown scale `{other}` (expected linear or log)")),
        }
    }
}

/// Closed interval sampled at `points` grid nodes, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub scale: Scale,
}

impl AxisRange {
    pub fn linear(from: f64, to: f64, points: usize) -> Self {
        AxisRange { from, to, points, scale: Scale::Linear }
    }

    pub fn log(from: f64, to: f64, points: usize) -> Self {
        AxisRange { from, to, points, scale: Scale::Log }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.from.is_finite() && self.to.is_finite()) {
            return Err("axis bounds must be finite".into());
        }
        if !(self.from < self.to) {
            return Err(format!("axis needs from < to, got {} .. {}", self.from, self.to));
        }
        if self.points < 2 {
            return Err(format!("axis needs at least 2 points, got {}", self.points));
        }
        if self.scale == Scale::Log && self.from <= 0.0 {
            return Err(format!("log axis needs from > 0, got {}", self.from));
        }
        Ok(())
    }

    /// Grid nodes in ascending order; the endpoints are exact.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let last = (n - 1) as f64;
        (0..n)
            .map(|k| {
                if k == 0 {
                    return self.from;
                }
                if k == n - 1 {
                    return self.to;
                }
                let t = k as f64 / last;
                match self.scale {
                    Scale::Linear => self.from + t * (self.to - self.from),
                    Scale::Log => (self.from.ln() + t * (self.to.ln() - self.from.ln())).exp(),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_endpoints_and_ratio() {
        let v = AxisRange::log(0.01, 1.0, 3).values();
        assert_eq!(v[0], 0.01);
        assert!((v[1] - 0.1).abs() < 1e-15);
        assert_eq!(v[2], 1.0);
    }

    #[test]
    fn validation() {
        assert!(AxisRange::linear(1.0, 1.0, 5).validate().is_err());
        assert!(AxisRange::linear(0.0, 1.0, 1).validate().is_err());
        assert!(AxisRange::log(0.0, 1.0, 5).validate().is_err());
        assert!(AxisRange::linear(f64::NAN, 1.0, 5).validate().is_err());
        assert!(AxisRange::linear(0.0, 1.0, 2).validate().is_ok());
    }
}
