//! Deformation parameters: the covector `a`, the scalar `s` and the
//! Minkowski metric `diag(-1, 1, ..., 1)`.

use num::{BigRational, Zero};
use serde::{Deserialize, Serialize};

use crate::error::AlgebraError;
use crate::scalar::rational_to_f64;

/// Exact deformation parameters over the rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeformationParams {
    n: usize,
    a: Vec<BigRational>,
    s: BigRational,
}

impl DeformationParams {
    pub fn new(n: usize, a: Vec<BigRational>, s: BigRational) -> Result<Self, AlgebraError> {
        if n < 2 {
            return Err(AlgebraError::DegenerateDimension(n));
        }
        if a.len() != n {
            return Err(AlgebraError::DimensionMismatch {
                expected: n,
                got: a.len(),
            });
        }
        Ok(Self { n, a, s })
    }

    pub fn undeformed(n: usize) -> Result<Self, AlgebraError> {
        Self::new(n, vec![BigRational::zero(); n], BigRational::zero())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Lower-index component `a_mu`.
    pub fn a(&self, mu: usize) -> &BigRational {
        &self.a[mu]
    }

    pub fn a_all(&self) -> &[BigRational] {
        &self.a
    }

    pub fn s(&self) -> &BigRational {
        &self.s
    }

    /// Metric entry `eta_{mu mu}`: -1 for the time component, +1 otherwise.
    pub fn eta(&self, mu: usize) -> i64 {
        if mu == 0 {
            -1
        } else {
            1
        }
    }

    /// Raised component `a^mu = eta^{mu mu} a_mu`.
    pub fn a_upper(&self, mu: usize) -> BigRational {
        if mu == 0 {
            -self.a[0].clone()
        } else {
            self.a[mu].clone()
        }
    }

    /// Invariant square `a^2 = eta^{mu nu} a_mu a_nu`; may be negative.
    pub fn a_squared(&self) -> BigRational {
        let mut acc = -(&self.a[0] * &self.a[0]);
        for mu in 1..self.n {
            acc += &self.a[mu] * &self.a[mu];
        }
        acc
    }

    /// `a^2 - s`, the combination that drives the B series.
    pub fn a2_minus_s(&self) -> BigRational {
        self.a_squared() - &self.s
    }

    pub fn is_undeformed(&self) -> bool {
        self.s.is_zero() && self.a.iter().all(Zero::is_zero)
    }

    pub fn to_float(&self) -> FloatParams {
        FloatParams {
            n: self.n,
            a: self.a.iter().map(rational_to_f64).collect(),
            s: rational_to_f64(&self.s),
        }
    }

    /// Scaled parameters `(eps * a, eps^2 * s)`, used by the coproduct fit.
    pub fn scaled(&self, eps: &BigRational) -> Self {
        Self {
            n: self.n,
            a: self.a.iter().map(|c| c * eps).collect(),
            s: &self.s * eps * eps,
        }
    }
}

/// Floating mirror of [`DeformationParams`] for the numeric modules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloatParams {
    pub n: usize,
    pub a: Vec<f64>,
    pub s: f64,
}

impl FloatParams {
    pub fn new(n: usize, a: Vec<f64>, s: f64) -> Self {
        assert!(n >= 2 && a.len() == n, "invalid float params");
        Self { n, a, s }
    }

    pub fn undeformed(n: usize) -> Self {
        Self::new(n, vec![0.0; n], 0.0)
    }

    /// Minkowski scalar product of two lower-index covectors.
    pub fn dot(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut acc = -u[0] * v[0];
        for mu in 1..self.n {
            acc += u[mu] * v[mu];
        }
        acc
    }

    pub fn square(&self, u: &[f64]) -> f64 {
        self.dot(u, u)
    }

    pub fn a_dot(&self, u: &[f64]) -> f64 {
        self.dot(&self.a, u)
    }

    pub fn a_squared(&self) -> f64 {
        self.square(&self.a.clone())
    }

    pub fn scaled(&self, eps: f64) -> Self {
        Self {
            n: self.n,
            a: self.a.iter().map(|c| c * eps).collect(),
            s: self.s * eps * eps,
        }
    }

    /// Uniform scaling of both `a` and `s`, for continuity-at-zero sweeps.
    pub fn scaled_linearly(&self, theta: f64) -> Self {
        Self {
            n: self.n,
            a: self.a.iter().map(|c| c * theta).collect(),
            s: self.s * theta,
        }
    }
}

/// Convenience constructor from integer fractions, used heavily in tests.
pub fn params_from_fractions(
    n: usize,
    a: &[(i64, i64)],
    s: (i64, i64),
) -> Result<DeformationParams, AlgebraError> {
    let a = a
        .iter()
        .map(|&(p, q)| BigRational::new(p.into(), q.into()))
        .collect();
    DeformationParams::new(n, a, BigRational::new(s.0.into(), s.1.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Signed;

    #[test]
    fn a_squared_uses_the_metric() {
        let p = params_from_fractions(2, &[(1, 2), (1, 3)], (0, 1)).unwrap();
        // -1/4 + 1/9 = -5/36
        assert_eq!(p.a_squared(), BigRational::new((-5).into(), 36.into()));
        assert!(p.a_squared().is_negative());
    }

    #[test]
    fn undeformed_flag() {
        assert!(DeformationParams::undeformed(3).unwrap().is_undeformed());
        let p = params_from_fractions(2, &[(0, 1), (0, 1)], (1, 5)).unwrap();
        assert!(!p.is_undeformed());
    }

    #[test]
    fn dimension_one_is_rejected() {
        assert_eq!(
            DeformationParams::new(1, vec![BigRational::zero()], BigRational::zero()),
            Err(AlgebraError::DegenerateDimension(1))
        );
    }

    #[test]
    fn float_dot_signature() {
        let p = FloatParams::new(3, vec![0.0, 0.0, 0.0], 0.0);
        assert_eq!(p.dot(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), -1.0 + 4.0 + 9.0);
    }
}
