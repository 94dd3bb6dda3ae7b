//! Exact bivariate truncated power series in two momentum covectors `k`
//! and `q`, the carrier for the deformed momentum addition and the star
//! product. Truncation is by total order; term keys are ordered graded
//! lexicographically so serialized output is deterministic.

use std::collections::BTreeMap;
use std::fmt;

use num::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::AlgebraError;
use crate::index::MultiIndex;
use crate::scalar::{binomial_half, rational_to_f64, ExactScalar};

/// Graded-lexicographic key on the pair of exponent vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiKey {
    pub k_exp: MultiIndex,
    pub q_exp: MultiIndex,
}

impl BiKey {
    pub fn total_degree(&self) -> u32 {
        self.k_exp.degree() + self.q_exp.degree()
    }
}

impl Ord for BiKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.k_exp.cmp(&other.k_exp))
            .then_with(|| self.q_exp.cmp(&other.q_exp))
    }
}

impl PartialOrd for BiKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiSeries {
    n: usize,
    trunc: u32,
    terms: BTreeMap<BiKey, ExactScalar>,
}

/// One serialized term.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BiTerm {
    pub k_exp: Vec<u32>,
    pub q_exp: Vec<u32>,
    pub coeff: String,
}

impl BiSeries {
    pub fn zero(n: usize, trunc: u32) -> Self {
        Self {
            n,
            trunc,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, trunc: u32, value: ExactScalar) -> Self {
        let mut s = Self::zero(n, trunc);
        s.add_term(MultiIndex::zero(n), MultiIndex::zero(n), value);
        s
    }

    pub fn one(n: usize, trunc: u32) -> Self {
        Self::constant(n, trunc, ExactScalar::one())
    }

    /// The variable `k_mu`.
    pub fn k_var(n: usize, trunc: u32, mu: usize) -> Self {
        let mut s = Self::zero(n, trunc);
        s.add_term(
            MultiIndex::unit(n, mu),
            MultiIndex::zero(n),
            ExactScalar::one(),
        );
        s
    }

    /// The variable `q_mu`.
    pub fn q_var(n: usize, trunc: u32, mu: usize) -> Self {
        let mut s = Self::zero(n, trunc);
        s.add_term(
            MultiIndex::zero(n),
            MultiIndex::unit(n, mu),
            ExactScalar::one(),
        );
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BiKey, &ExactScalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, k_exp: &MultiIndex, q_exp: &MultiIndex) -> ExactScalar {
        self.terms
            .get(&BiKey {
                k_exp: k_exp.clone(),
                q_exp: q_exp.clone(),
            })
            .cloned()
            .unwrap_or_else(ExactScalar::zero)
    }

    pub fn constant_term(&self) -> ExactScalar {
        self.coeff(&MultiIndex::zero(self.n), &MultiIndex::zero(self.n))
    }

    pub fn add_term(&mut self, k_exp: MultiIndex, q_exp: MultiIndex, coeff: ExactScalar) {
        if coeff.is_zero() || k_exp.degree() + q_exp.degree() > self.trunc {
            return;
        }
        let key = BiKey { k_exp, q_exp };
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = &*o.get() + &coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.trunc = self.trunc.min(other.trunc);
        out.terms.retain(|k, _| k.total_degree() <= out.trunc);
        for (key, c) in &other.terms {
            out.add_term(key.k_exp.clone(), key.q_exp.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.n, self.trunc);
        for (key, c) in &self.terms {
            out.terms.insert(key.clone(), -c);
        }
        out
    }

    pub fn scale(&self, factor: &ExactScalar) -> Self {
        let mut out = Self::zero(self.n, self.trunc);
        if factor.is_zero() {
            return out;
        }
        for (key, c) in &self.terms {
            out.terms.insert(key.clone(), c * factor);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let trunc = self.trunc.min(other.trunc);
        let mut out = Self::zero(self.n, trunc);
        for (k1, c1) in &self.terms {
            let d1 = k1.total_degree();
            if d1 > trunc {
                continue;
            }
            for (k2, c2) in &other.terms {
                if d1 + k2.total_degree() > trunc {
                    continue;
                }
                out.add_term(
                    k1.k_exp.add(&k2.k_exp),
                    k1.q_exp.add(&k2.q_exp),
                    c1 * c2,
                );
            }
        }
        out
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one(self.n, self.trunc);
        for _ in 0..exp {
            acc = acc.mul(self);
        }
        acc
    }

    /// Substitute `k_mu -> g[mu]` leaving the q variables alone. The
    /// substituted series must share dimension and truncation.
    pub fn substitute_k(&self, g: &[Self]) -> Self {
        let trunc = self.trunc;
        let n = self.n;
        // Cache powers of each component as needed.
        let mut powers: Vec<Vec<Self>> = g
            .iter()
            .map(|s| vec![Self::one(n, trunc), s.clone()])
            .collect();
        let mut out = Self::zero(n, trunc);
        for (key, c) in &self.terms {
            let mut factor = Self::constant(n, trunc, c.clone());
            for mu in 0..n {
                let e = key.k_exp.get(mu) as usize;
                if e == 0 {
                    continue;
                }
                while powers[mu].len() <= e {
                    let next = powers[mu].last().unwrap().mul(&g[mu]);
                    powers[mu].push(next);
                }
                factor = factor.mul(&powers[mu][e]);
            }
            // Reattach the untouched q part.
            let mut shifted = Self::zero(n, trunc);
            for (fk, fc) in &factor.terms {
                shifted.add_term(
                    fk.k_exp.clone(),
                    fk.q_exp.add(&key.q_exp),
                    fc.clone(),
                );
            }
            out = out.add(&shifted);
        }
        out
    }

    /// Restriction to `q = 0`.
    pub fn set_q_zero(&self) -> Self {
        let mut out = Self::zero(self.n, self.trunc);
        for (key, c) in &self.terms {
            if key.q_exp.degree() == 0 {
                out.terms.insert(key.clone(), c.clone());
            }
        }
        out
    }

    /// Restriction to `k = 0`.
    pub fn set_k_zero(&self) -> Self {
        let mut out = Self::zero(self.n, self.trunc);
        for (key, c) in &self.terms {
            if key.k_exp.degree() == 0 {
                out.terms.insert(key.clone(), c.clone());
            }
        }
        out
    }

    /// Multiplicative inverse, for a nonzero constant term.
    pub fn invert(&self) -> Result<Self, AlgebraError> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(AlgebraError::ZeroConstantTerm);
        }
        let c0_inv = c0.inv()?;
        // z = c0 (1 + u); 1/z = (1/c0) sum (-u)^m.
        let u = self
            .scale(&c0_inv)
            .sub(&Self::one(self.n, self.trunc));
        let mut acc = Self::zero(self.n, self.trunc);
        let mut u_pow = Self::one(self.n, self.trunc);
        for m in 0..=self.trunc {
            if m % 2 == 0 {
                acc = acc.add(&u_pow);
            } else {
                acc = acc.sub(&u_pow);
            }
            if m < self.trunc {
                u_pow = u_pow.mul(&u);
                if u_pow.is_zero() {
                    break;
                }
            }
        }
        Ok(acc.scale(&c0_inv))
    }

    /// Float evaluation at concrete momenta.
    pub fn eval_f64(&self, k: &[f64], q: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (key, c) in &self.terms {
            let mut factor = c.to_f64();
            for mu in 0..self.n {
                for _ in 0..key.k_exp.get(mu) {
                    factor *= k[mu];
                }
                for _ in 0..key.q_exp.get(mu) {
                    factor *= q[mu];
                }
            }
            acc += factor;
        }
        acc
    }

    pub fn to_term_list(&self) -> Vec<BiTerm> {
        self.terms
            .iter()
            .map(|(key, c)| BiTerm {
                k_exp: key.k_exp.0.clone(),
                q_exp: key.q_exp.0.clone(),
                coeff: c.to_string(),
            })
            .collect()
    }
}

impl fmt::Display for BiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (key, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c}) k^{} q^{}", key.k_exp, key.q_exp)?;
        }
        Ok(())
    }
}

/// `sqrt(1 + u)` for a series `u` with zero constant term.
pub fn sqrt_one_plus(u: &BiSeries) -> BiSeries {
    debug_assert!(u.constant_term().is_zero());
    let n = u.n();
    let trunc = u.trunc();
    let mut acc = BiSeries::zero(n, trunc);
    let mut u_pow = BiSeries::one(n, trunc);
    for m in 0..=trunc {
        let c = ExactScalar::from_rational(binomial_half(m));
        acc = acc.add(&u_pow.scale(&c));
        if m < trunc {
            u_pow = u_pow.mul(u);
            if u_pow.is_zero() {
                break;
            }
        }
    }
    acc
}

/// `sinh(W)/W` as a series in `x = W^2`: `sum x^m / (2m+1)!`.
pub fn sinhc_series(x: &BiSeries) -> BiSeries {
    even_kernel_series(x, 1)
}

/// `(cosh(W) - 1)/W^2` as a series in `x = W^2`: `sum x^m / (2m+2)!`.
pub fn coshm1_series(x: &BiSeries) -> BiSeries {
    even_kernel_series(x, 2)
}

fn even_kernel_series(x: &BiSeries, offset: u64) -> BiSeries {
    debug_assert!(x.constant_term().is_zero());
    let n = x.n();
    let trunc = x.trunc();
    let mut acc = BiSeries::zero(n, trunc);
    let mut x_pow = BiSeries::one(n, trunc);
    let mut factorial = BigRational::from_integer(1.into());
    for j in 1..=offset {
        factorial *= BigRational::from_integer(j.into());
    }
    let mut arg = offset;
    for m in 0..=trunc {
        let c = ExactScalar::from_rational(BigRational::from_integer(1.into()) / &factorial);
        acc = acc.add(&x_pow.scale(&c));
        if m < trunc {
            x_pow = x_pow.mul(x);
            if x_pow.is_zero() {
                break;
            }
            factorial *= BigRational::from_integer((arg + 1).into());
            factorial *= BigRational::from_integer((arg + 2).into());
            arg += 2;
        }
    }
    acc
}
