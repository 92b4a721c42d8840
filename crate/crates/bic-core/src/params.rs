use crate::error::{BicError, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Dimensionless system definition, energies in units of the boson mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterArrayParams {
    pub n: usize,
    pub epsilon: f64,
    pub d: f64,
    pub gamma: f64,
}

impl EmitterArrayParams {
    pub fn new(n: usize, epsilon: f64, d: f64, gamma: f64) -> Result<Self> {
        if n < 2 {
            return Err(BicError::Domain(format!("n must be at least 2, got {n}")));
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(BicError::Domain(format!("spacing must be positive, got {d}")));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(BicError::Domain(format!("gamma must be positive, got {gamma}")));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(BicError::Domain(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { n, epsilon, d, gamma })
    }

    /// Rescale dimensional inputs: energies by m, lengths by 1/m, γ by m².
    pub fn from_dimensional(n: usize, m: f64, epsilon: f64, d: f64, gamma: f64) -> Result<Self> {
        if !(m > 0.0) {
            return Err(BicError::Domain(format!("mass must be positive, got {m}")));
        }
        Self::new(n, epsilon / m, d * m, gamma / (m * m))
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Self::new(self.n, epsilon, self.d, self.gamma)
    }

    pub fn with_d(self, d: f64) -> Result<Self> {
        Self::new(self.n, self.epsilon, d, self.gamma)
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        Self::new(self.n, self.epsilon, self.d, gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sheet {
    First,
    Second,
    Third,
}

impl FromStr for Sheet {
    type Err = BicError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "1" | "first" | "First" => Ok(Sheet::First),
            "II" | "2" | "second" | "Second" => Ok(Sheet::Second),
            "III" | "3" | "third" | "Third" => Ok(Sheet::Third),
            _ => Err(BicError::Label(format!("unknown sheet {s}"))),
        }
    }
}

impl fmt::Display for Sheet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sheet::First => "I",
            Sheet::Second => "II",
            Sheet::Third => "III",
        })
    }
}

/// Reflection parity about the array midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ParitySector {
    Antisymmetric,
    Symmetric,
}

impl ParitySector {
    pub fn sign(self) -> f64 {
        match self {
            ParitySector::Antisymmetric => -1.0,
            ParitySector::Symmetric => 1.0,
        }
    }

    pub fn block_size(self, n: usize) -> usize {
        match self {
            ParitySector::Antisymmetric => n / 2,
            ParitySector::Symmetric => n - n / 2,
        }
    }

    pub fn both() -> [ParitySector; 2] {
        [ParitySector::Antisymmetric, ParitySector::Symmetric]
    }

    pub fn label(self) -> &'static str {
        match self {
            ParitySector::Antisymmetric => "a",
            ParitySector::Symmetric => "s",
        }
    }
}

impl FromStr for ParitySector {
    type Err = BicError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s" | "+" | "sym" | "symmetric" | "Symmetric" => Ok(ParitySector::Symmetric),
            "a" | "-" | "anti" | "antisymmetric" | "Antisymmetric" => Ok(ParitySector::Antisymmetric),
            _ => Err(BicError::Label(format!("unknown sector {s}"))),
        }
    }
}

impl fmt::Display for ParitySector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Numerical tolerances shared by the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// absolute tolerance of scalar special functions
    pub quad_abs: f64,
    pub quad_rel: f64,
    pub max_subdivisions: usize,
    /// σ_min ≤ singular · σ_max declares a block singular
    pub singular: f64,
    pub grid_points: usize,
    pub root_tol: f64,
    pub newton_max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quad_abs: 1e-11,
            quad_rel: 1e-12,
            max_subdivisions: 4000,
            singular: 1e-8,
            grid_points: 400,
            root_tol: 1e-14,
            newton_max_iter: 100,
        }
    }
}
