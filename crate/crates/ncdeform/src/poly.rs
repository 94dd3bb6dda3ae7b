//! Commutative polynomials in the coordinates `X_mu`, the module the Weyl
//! algebra acts on. The unit polynomial plays the role of the vacuum: every
//! derivative annihilates it.

use std::collections::BTreeMap;
use std::fmt;

use crate::index::MultiIndex;
use crate::scalar::ExactScalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<MultiIndex, ExactScalar>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    /// The unit polynomial `1`, i.e. the vacuum.
    pub fn one(n: usize) -> Self {
        let mut p = Self::zero(n);
        p.add_term(MultiIndex::zero(n), ExactScalar::one());
        p
    }

    /// The coordinate monomial `X_mu`.
    pub fn coordinate(n: usize, mu: usize) -> Self {
        let mut p = Self::zero(n);
        p.add_term(MultiIndex::unit(n, mu), ExactScalar::one());
        p
    }

    pub fn monomial(n: usize, exps: MultiIndex) -> Self {
        let mut p = Self::zero(n);
        p.add_term(exps, ExactScalar::one());
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &ExactScalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &MultiIndex) -> ExactScalar {
        self.terms.get(exps).cloned().unwrap_or_else(ExactScalar::zero)
    }

    pub fn add_term(&mut self, exps: MultiIndex, coeff: ExactScalar) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps);
        match entry {
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
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }

    pub fn scale(&self, factor: &ExactScalar) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * factor);
        }
        out
    }

    /// Pointwise (commutative) product.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.add_term(e1.add(e2), c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (exps, coeff) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({coeff})")?;
            for (mu, e) in exps.0.iter().enumerate() {
                if *e == 1 {
                    write!(f, " X_{mu}")?;
                } else if *e > 1 {
                    write!(f, " X_{mu}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_degree() {
        let x0 = Polynomial::coordinate(2, 0);
        let x1 = Polynomial::coordinate(2, 1);
        let p = x0.mul(&x1).add(&Polynomial::one(2));
        assert_eq!(p.degree(), 2);
        assert_eq!(p.coeff(&MultiIndex(vec![1, 1])), ExactScalar::one());
        assert_eq!(p.coeff(&MultiIndex(vec![0, 0])), ExactScalar::one());
    }

    #[test]
    fn cancellation_removes_terms() {
        let x0 = Polynomial::coordinate(2, 0);
        assert!(x0.sub(&x0).is_zero());
    }
}
