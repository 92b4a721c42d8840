//! Atomic excitation probability and its closed-form approximants.

use super::{resonant_energy, BoundStateInContinuum};
use crate::error::{BicError, Result};
use crate::params::ParitySector;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Eigenstate classes with a closed-form probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProbabilityClass {
    /// n = 3, amplitudes ∝ (1, −2(−1)^ν, 1)
    N3Symmetric,
    /// n = 3, amplitudes ∝ (1, 0, −1)
    N3Antisymmetric,
    /// n = 4 antisymmetric, even ν: a₁ = φ₊a₂ = −φ₊a₃ = −a₄ (Minus: φ₋)
    N4GoldenAntisymmetricPlus,
    N4GoldenAntisymmetricMinus,
    /// n = 4 symmetric, odd ν: a₁ = −φ₊a₂ = −φ₊a₃ = a₄ (Minus: φ₋)
    N4GoldenSymmetricPlus,
    N4GoldenSymmetricMinus,
    /// n = 4 symmetric even ν (1,−1,−1,1) or antisymmetric odd ν (1,1,−1,−1)
    N4Persistent,
    /// n = 4, a₁ ≈ ±0.33 a₂
    N4Numerical,
}

impl ProbabilityClass {
    pub const ALL: [ProbabilityClass; 8] = [
        ProbabilityClass::N3Symmetric,
        ProbabilityClass::N3Antisymmetric,
        ProbabilityClass::N4GoldenAntisymmetricPlus,
        ProbabilityClass::N4GoldenAntisymmetricMinus,
        ProbabilityClass::N4GoldenSymmetricPlus,
        ProbabilityClass::N4GoldenSymmetricMinus,
        ProbabilityClass::N4Persistent,
        ProbabilityClass::N4Numerical,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ProbabilityClass::N3Symmetric => "n3-s",
            ProbabilityClass::N3Antisymmetric => "n3-a",
            ProbabilityClass::N4GoldenAntisymmetricPlus => "n4-golden-a+",
            ProbabilityClass::N4GoldenAntisymmetricMinus => "n4-golden-a-",
            ProbabilityClass::N4GoldenSymmetricPlus => "n4-golden-s+",
            ProbabilityClass::N4GoldenSymmetricMinus => "n4-golden-s-",
            ProbabilityClass::N4Persistent => "n4-persistent",
            ProbabilityClass::N4Numerical => "n4-numerical",
        }
    }

    pub fn n(self) -> usize {
        match self {
            ProbabilityClass::N3Symmetric | ProbabilityClass::N3Antisymmetric => 3,
            _ => 4,
        }
    }

    /// Coefficients (c₁, c₂) of p = 1/(1 + c₁γdE/(E²−1) + c₂γ/(π(E+1))).
    pub fn coefficients(self) -> (f64, f64) {
        let r5 = 5f64.sqrt();
        match self {
            ProbabilityClass::N3Symmetric => (2.0 / 3.0, 1.0),
            ProbabilityClass::N3Antisymmetric => (2.0, 2.0),
            // (2x² + (x ∓ y)²)/(x² + y²) for a = (x, y, ±y, ±x), |x/y| = |φ±|
            ProbabilityClass::N4GoldenAntisymmetricPlus | ProbabilityClass::N4GoldenSymmetricPlus => {
                ((13.0 + 5.0 * r5) / (5.0 + r5), 1.0)
            }
            ProbabilityClass::N4GoldenAntisymmetricMinus | ProbabilityClass::N4GoldenSymmetricMinus => {
                ((13.0 - 5.0 * r5) / (5.0 - r5), 1.0)
            }
            ProbabilityClass::N4Persistent => (1.0, 1.0),
            ProbabilityClass::N4Numerical => (0.6, 1.0),
        }
    }
}

impl std::fmt::Display for ProbabilityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for ProbabilityClass {
    type Err = BicError;
    fn from_str(s: &str) -> Result<Self> {
        ProbabilityClass::ALL
            .iter()
            .copied()
            .find(|c| c.label() == s)
            .ok_or_else(|| BicError::Label(format!("unknown probability class {s}")))
    }
}

/// p = aᴴa for a fully normalized state.
pub fn atomic_probability(st: &BoundStateInContinuum) -> f64 {
    st.amplitudes.iter().map(|a| a.norm_sqr()).sum()
}

/// Closed-form probability of `class` at the resonance E_ν(d).
pub fn probability_approximant(class: ProbabilityClass, nu: u32, d: f64, gamma: f64) -> Result<f64> {
    let e = resonant_energy(nu, d)?;
    let (c1, c2) = class.coefficients();
    Ok(1.0 / (1.0 + c1 * gamma * d * e / (e * e - 1.0) + c2 * gamma / (PI * (e + 1.0))))
}

/// Class of a solved state, from its size, sector, resonance parity and
/// whether it sits exactly at E_ν.
pub fn class_state(st: &BoundStateInContinuum) -> Option<ProbabilityClass> {
    let sector = st.sector?;
    let odd = st.nu_nearest % 2 == 1;
    match st.n {
        3 => Some(match sector {
            ParitySector::Symmetric => ProbabilityClass::N3Symmetric,
            ParitySector::Antisymmetric => ProbabilityClass::N3Antisymmetric,
        }),
        4 => {
            let a = &st.amplitudes;
            let ratio = (a[0] / a[1]).re;
            Some(match (sector, odd, st.exact_resonance) {
                (ParitySector::Symmetric, true, true) if ratio.abs() > 1.0 => ProbabilityClass::N4GoldenSymmetricPlus,
                (ParitySector::Symmetric, true, true) => ProbabilityClass::N4GoldenSymmetricMinus,
                (ParitySector::Antisymmetric, false, true) if ratio.abs() > 1.0 => ProbabilityClass::N4GoldenAntisymmetricPlus,
                (ParitySector::Antisymmetric, false, true) => ProbabilityClass::N4GoldenAntisymmetricMinus,
                (ParitySector::Symmetric, true, false) | (ParitySector::Antisymmetric, false, false) => {
                    ProbabilityClass::N4Numerical
                }
                _ => ProbabilityClass::N4Persistent,
            })
        }
        _ => None,
    }
}
