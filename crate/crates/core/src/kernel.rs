//! Distance kernels with closed-form first and second antiderivatives.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Kernel `φ(r)`; the transfer integrand is `φ(R) / (4πR²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// `φ = 4πr²`, turning the transfer integral into `V_i V_j`.
    Ball,
    /// `φ = e^{-σr}`.
    Exp { sigma: f64 },
    /// `φ = 1`.
    Const,
}

pub fn builtin_kernels() -> Vec<Kernel> {
    vec![Kernel::Ball, Kernel::Exp { sigma: 1.0 }, Kernel::Const]
}

impl Kernel {
    pub fn exp(sigma: f64) -> Result<Kernel> {
        if sigma.is_finite() && sigma > 0.0 {
            Ok(Kernel::Exp { sigma })
        } else {
            Err(Error::InvalidKernel(format!(
                "sigma must be positive, got {sigma}"
            )))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Ball => "ball",
            Kernel::Exp { .. } => "exp",
            Kernel::Const => "const",
        }
    }

    pub fn phi(&self, r: f64) -> f64 {
        match *self {
            Kernel::Ball => 4.0 * PI * r * r,
            Kernel::Exp { sigma } => (-sigma * r).exp(),
            Kernel::Const => 1.0,
        }
    }

    /// `φ(R) / (4πR²)`.
    pub fn point_kernel(&self, r: f64) -> f64 {
        match self {
            Kernel::Ball => 1.0,
            _ => self.phi(r) / (4.0 * PI * r * r),
        }
    }

    /// Whether `φ(0) ≠ 0`, making the point kernel singular at zero distance.
    pub fn singular_at_origin(&self) -> bool {
        self.phi(0.0) != 0.0
    }

    /// `∫₀ˣ φ`, for `x ≥ 0`.
    pub fn phi1(&self, x: f64) -> f64 {
        match *self {
            Kernel::Ball => 4.0 * PI * x * x * x / 3.0,
            Kernel::Exp { sigma } => -(-sigma * x).exp_m1() / sigma,
            Kernel::Const => x,
        }
    }

    /// `∫₀ˣ Φ₁`, for `x ≥ 0`.
    pub fn phi2(&self, x: f64) -> f64 {
        match *self {
            Kernel::Ball => PI * x.powi(4) / 3.0,
            Kernel::Exp { sigma } => {
                let y = sigma * x;
                let g = if y < 1e-3 {
                    y * y * (0.5 - y * (1.0 / 6.0 - y * (1.0 / 24.0 - y / 120.0)))
                } else {
                    y + (-y).exp_m1()
                };
                g / (sigma * sigma)
            }
            Kernel::Const => 0.5 * x * x,
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Exp { sigma } => write!(f, "exp:sigma={sigma}"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for Kernel {
    type Err = Error;

    /// Accepts `ball`, `const` and `exp:sigma=<float>`.
    fn from_str(s: &str) -> Result<Kernel> {
        match s {
            "ball" => Ok(Kernel::Ball),
            "const" => Ok(Kernel::Const),
            _ => {
                let sigma = s
                    .strip_prefix("exp:sigma=")
                    .ok_or_else(|| Error::InvalidKernel(format!("unknown kernel '{s}'")))?;
                let sigma: f64 = sigma
                    .parse()
                    .map_err(|_| Error::InvalidKernel(format!("bad sigma in '{s}'")))?;
                Kernel::exp(sigma)
            }
        }
    }
}
