//! Time moduli (`φ`, `γ`, `c`, `k`) in closed form, and their local
//! integrability function `θ(σ) = sup { ∫_J |m| : |J| ≤ σ }`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum Modulus {
    Constant { value: f64 },
    /// `values[i]` on `[breaks[i], breaks[i+1])`; the last value extends to `+∞`.
    /// `breaks[0]` must be `0`.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
    /// `a + b t`. Only usable pointwise; `θ` is unbounded when `b > 0`.
    Affine { a: f64, b: f64 },
}

impl Modulus {
    pub fn constant(value: f64) -> Self {
        Modulus::Constant { value }
    }

    pub fn piecewise(breaks: Vec<f64>, values: Vec<f64>) -> Self {
        Modulus::PiecewiseConstant { breaks, values }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Modulus::Constant { value } if *value >= 0.0 && value.is_finite() => Ok(()),
            Modulus::Constant { value } => Err(Error::UnsupportedModulusForm(format!(
                "constant modulus must be finite and nonnegative, got {value}"
            ))),
            Modulus::PiecewiseConstant { breaks, values } => {
                if breaks.is_empty() || breaks.len() != values.len() {
                    return Err(Error::UnsupportedModulusForm(
                        "piecewise modulus needs one value per break".into(),
                    ));
                }
                if breaks[0] != 0.0 || breaks.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::UnsupportedModulusForm(
                        "breaks must start at 0 and increase strictly".into(),
                    ));
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::UnsupportedModulusForm(
                        "piecewise values must be finite and nonnegative".into(),
                    ));
                }
                Ok(())
            }
            Modulus::Affine { a, b } if *a >= 0.0 && *b >= 0.0 => Ok(()),
            Modulus::Affine { .. } => Err(Error::UnsupportedModulusForm(
                "affine modulus must have nonnegative coefficients".into(),
            )),
        }
    }

    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            Modulus::Constant { value } => *value,
            Modulus::PiecewiseConstant { breaks, values } => {
                let idx = breaks.partition_point(|&b| b <= t).saturating_sub(1);
                values[idx]
            }
            Modulus::Affine { a, b } => a + b * t.max(0.0),
        }
    }

    /// `∫_a^b m(s) ds` for `0 ≤ a ≤ b`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self {
            Modulus::Constant { value } => value * (b - a),
            Modulus::PiecewiseConstant { breaks, values } => {
                let mut total = 0.0;
                for (i, v) in values.iter().enumerate() {
                    let lo = breaks[i].max(a);
                    let hi = breaks.get(i + 1).copied().unwrap_or(f64::INFINITY).min(b);
                    if hi > lo {
                        total += v * (hi - lo);
                    }
                }
                total
            }
            Modulus::Affine { a: c0, b: c1 } => c0 * (b - a) + 0.5 * c1 * (b * b - a * a),
        }
    }

    /// Supremum of the modulus over `t ≥ 0` (may be `+∞`).
    pub fn sup(&self) -> f64 {
        match self {
            Modulus::Constant { value } => *value,
            Modulus::PiecewiseConstant { values, .. } => values.iter().cloned().fold(0.0, f64::max),
            Modulus::Affine { a, b } => {
                if *b > 0.0 {
                    f64::INFINITY
                } else {
                    *a
                }
            }
        }
    }

    /// `limsup_{t→∞} (1/t) ∫_0^t m`.
    pub fn limsup_average(&self) -> f64 {
        match self {
            Modulus::Constant { value } => *value,
            Modulus::PiecewiseConstant { values, .. } => *values.last().unwrap_or(&0.0),
            Modulus::Affine { a, b } => {
                if *b > 0.0 {
                    f64::INFINITY
                } else {
                    *a
                }
            }
        }
    }
}

/// `θ_m(σ)`: the largest integral of the modulus over a time set of measure
/// at most `σ`. For piecewise-constant moduli this is the integral of the
/// decreasing rearrangement over `[0, σ]`.
pub fn theta_modulus(modulus: &Modulus, sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::UnsupportedModulusForm(format!("sigma must be >= 0, got {sigma}")));
    }
    modulus.validate()?;
    match modulus {
        Modulus::Constant { value } => Ok(value * sigma),
        Modulus::PiecewiseConstant { breaks, values } => {
            let mut pieces: Vec<(f64, f64)> = values
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let len = breaks.get(i + 1).map_or(f64::INFINITY, |b| b - breaks[i]);
                    (v, len)
                })
                .collect();
            pieces.sort_by(|a, b| b.0.total_cmp(&a.0));
            let mut remaining = sigma;
            let mut total = 0.0;
            for (v, len) in pieces {
                if remaining <= 0.0 {
                    break;
                }
                let take = remaining.min(len);
                total += v * take;
                remaining -= take;
            }
            Ok(total)
        }
        Modulus::Affine { a, b } => {
            if *b > 0.0 {
                Err(Error::UnsupportedModulusForm(
                    "growing affine modulus is not locally uniformly integrable on the half-line".into(),
                ))
            } else {
                Ok(a * sigma)
            }
        }
    }
}
