//! Pure series in the derivatives, and the univariate series calculus that
//! feeds them.
//!
//! Two formal building blocks recur everywhere: `A = i a_alpha D^alpha`
//! (derivative order 1) and `B = (a^2 - s) D_alpha D^alpha` (order 2).
//! Univariate coefficient streams in either variable are substituted into
//! the Weyl algebra at a fixed truncation.

use num::{BigRational, One, Zero};

use crate::error::AlgebraError;
use crate::index::MultiIndex;
use crate::params::DeformationParams;
use crate::scalar::{binomial_half, ExactScalar};
use crate::weyl::{normal_product, WeylElement};

/// Truncated univariate power series over the rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct USeries {
    coeffs: Vec<BigRational>,
}

impl USeries {
    /// Series from coefficients `c_0, c_1, ...`, truncated/padded to
    /// `order + 1` entries.
    pub fn new(mut coeffs: Vec<BigRational>, order: usize) -> Self {
        coeffs.resize(order + 1, BigRational::zero());
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    pub fn one(order: usize) -> Self {
        Self::new(vec![BigRational::one()], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, m: usize) -> BigRational {
        self.coeffs.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        Self::new(
            (0..=order).map(|m| self.coeff(m) + other.coeff(m)).collect(),
            order,
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        Self::new(
            (0..=order).map(|m| self.coeff(m) - other.coeff(m)).collect(),
            order,
        )
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut out = vec![BigRational::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Self { coeffs: out }
    }

    /// Formal derivative `d/dt`.
    pub fn derivative(&self) -> Self {
        let order = self.order();
        let mut out = vec![BigRational::zero(); order + 1];
        for m in 1..=order {
            out[m - 1] = &self.coeffs[m] * BigRational::from_integer(m.into());
        }
        Self { coeffs: out }
    }

    /// Multiplication by the variable `t`.
    pub fn shift_up(&self) -> Self {
        let order = self.order();
        let mut out = vec![BigRational::zero(); order + 1];
        for m in 0..order {
            out[m + 1] = self.coeffs[m].clone();
        }
        Self { coeffs: out }
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn invert(&self) -> Result<Self, AlgebraError> {
        let c0 = self.coeff(0);
        if c0.is_zero() {
            return Err(AlgebraError::ZeroConstantTerm);
        }
        let order = self.order();
        let mut out = vec![BigRational::zero(); order + 1];
        out[0] = BigRational::one() / &c0;
        for m in 1..=order {
            let mut acc = BigRational::zero();
            for j in 1..=m {
                acc += &self.coeffs[j] * &out[m - j];
            }
            out[m] = -acc / &c0;
        }
        Ok(Self { coeffs: out })
    }

    pub fn div(&self, other: &Self) -> Result<Self, AlgebraError> {
        Ok(self.mul(&other.invert()?))
    }

    /// `sqrt(1 - t)` as a power series.
    pub fn sqrt_one_minus_t(order: usize) -> Self {
        let coeffs = (0..=order)
            .map(|m| {
                let sign = if m % 2 == 0 {
                    BigRational::one()
                } else {
                    -BigRational::one()
                };
                binomial_half(m as u32) * sign
            })
            .collect();
        Self::new(coeffs, order)
    }
}

/// A Weyl element whose every term is a pure function of the derivatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DSeries(WeylElement);

impl DSeries {
    pub fn from_element(el: WeylElement) -> Self {
        debug_assert!(el.is_d_series(), "DSeries must not contain X factors");
        Self(el)
    }

    pub fn element(&self) -> &WeylElement {
        &self.0
    }

    pub fn into_element(self) -> WeylElement {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn one(n: usize, trunc: u32) -> Self {
        Self(WeylElement::identity(n).with_trunc(Some(trunc)))
    }

    pub fn zero(n: usize, trunc: u32) -> Self {
        Self(WeylElement::zero(n).with_trunc(Some(trunc)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn constant_term(&self) -> ExactScalar {
        self.0
            .coeff(&MultiIndex::zero(self.n()), &MultiIndex::zero(self.n()))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.sub(&other.0))
    }

    pub fn scale(&self, factor: &ExactScalar) -> Self {
        Self(self.0.scale(factor))
    }

    /// Product of two D-series; commutative, no reordering happens.
    pub fn mul(&self, other: &Self) -> Self {
        Self(normal_product(&self.0, &other.0).expect("dimension checked"))
    }

    /// The operator `A = i a_alpha D^alpha`, truncated.
    pub fn a_operator(params: &DeformationParams, trunc: u32) -> Self {
        let n = params.n();
        let mut el = WeylElement::zero(n).with_trunc(Some(trunc));
        for mu in 0..n {
            el.add_term(
                MultiIndex::zero(n),
                MultiIndex::unit(n, mu),
                ExactScalar::imaginary(params.a_upper(mu)),
            );
        }
        Self(el)
    }

    /// The operator `B = (a^2 - s) D_alpha D^alpha`, truncated.
    pub fn b_operator(params: &DeformationParams, trunc: u32) -> Self {
        let n = params.n();
        let factor = params.a2_minus_s();
        let mut el = WeylElement::zero(n).with_trunc(Some(trunc));
        for mu in 0..n {
            let mut d_exp = MultiIndex::zero(n);
            d_exp = d_exp.bump(mu, 2);
            let eta = BigRational::from_integer(params.eta(mu).into());
            el.add_term(
                MultiIndex::zero(n),
                d_exp,
                ExactScalar::from_rational(&factor * eta),
            );
        }
        Self(el)
    }

    /// The Lorentz-scalar operator `D_alpha D^alpha` alone.
    pub fn d_squared(n: usize, trunc: u32) -> Self {
        let mut el = WeylElement::zero(n).with_trunc(Some(trunc));
        for mu in 0..n {
            let mut d_exp = MultiIndex::zero(n);
            d_exp = d_exp.bump(mu, 2);
            let eta = if mu == 0 { -1 } else { 1 };
            el.add_term(MultiIndex::zero(n), d_exp, ExactScalar::from_int(eta));
        }
        Self(el)
    }

    /// Substitute the series `sum_m c_m t^m` at `t = B`. Each power of B
    /// contributes derivative order 2, so coefficients up to `trunc/2` enter.
    pub fn from_b_series(stream: &USeries, params: &DeformationParams, trunc: u32) -> Self {
        Self::substitute(stream, &Self::b_operator(params, trunc), trunc, 2)
    }

    /// Substitute the series `sum_m c_m t^m` at `t = A`.
    pub fn from_a_series(stream: &USeries, params: &DeformationParams, trunc: u32) -> Self {
        Self::substitute(stream, &Self::a_operator(params, trunc), trunc, 1)
    }

    fn substitute(stream: &USeries, base: &Self, trunc: u32, order_per_power: u32) -> Self {
        let n = base.n();
        let mut acc = Self::zero(n, trunc);
        let mut base_power = Self::one(n, trunc);
        let max_m = (trunc / order_per_power) as usize;
        for m in 0..=max_m.min(stream.order()) {
            let c = stream.coeff(m);
            if !c.is_zero() {
                acc = acc.add(&base_power.scale(&ExactScalar::from_rational(c)));
            }
            if m < max_m.min(stream.order()) {
                base_power = base_power.mul(base);
            }
        }
        acc
    }

    /// `sqrt(1 - B)` as a D-series.
    pub fn sqrt_one_minus_b(params: &DeformationParams, trunc: u32) -> Self {
        let stream = USeries::sqrt_one_minus_t((trunc / 2) as usize);
        Self::from_b_series(&stream, params, trunc)
    }

    /// Multiplicative inverse, order by order over the graded components.
    pub fn invert(&self) -> Result<Self, AlgebraError> {
        let z0 = self.constant_term();
        if z0.is_zero() {
            return Err(AlgebraError::ZeroConstantTerm);
        }
        let n = self.n();
        let trunc = self.0.trunc().unwrap_or(self.0.d_degree());
        let z0_inv = z0.inv()?;

        // Graded pieces of self by derivative degree.
        let mut graded: Vec<WeylElement> =
            vec![WeylElement::zero(n).with_trunc(Some(trunc)); (trunc + 1) as usize];
        for ((x, d), c) in self.0.terms() {
            graded[d.degree() as usize].add_term(x.clone(), d.clone(), c.clone());
        }

        let mut inv_graded: Vec<WeylElement> =
            vec![WeylElement::zero(n).with_trunc(Some(trunc)); (trunc + 1) as usize];
        inv_graded[0] = WeylElement::scalar(n, z0_inv.clone()).with_trunc(Some(trunc));
        for m in 1..=trunc as usize {
            let mut acc = WeylElement::zero(n).with_trunc(Some(trunc));
            for j in 1..=m {
                if graded[j].is_zero() || inv_graded[m - j].is_zero() {
                    continue;
                }
                acc = acc.add(&normal_product(&graded[j], &inv_graded[m - j]).expect("same dim"));
            }
            inv_graded[m] = acc.scale(&z0_inv).neg();
        }

        let mut out = WeylElement::zero(n).with_trunc(Some(trunc));
        for piece in inv_graded {
            out = out.add(&piece);
        }
        Ok(Self(out))
    }

    /// Evaluate at `D_mu -> i q_mu` for exact rational `q`.
    pub fn eval_at_iq(&self, q: &[BigRational]) -> ExactScalar {
        let mut acc = ExactScalar::zero();
        for ((_, d), c) in self.0.terms() {
            let mut factor = ExactScalar::one();
            for (mu, &e) in d.0.iter().enumerate() {
                if e > 0 {
                    let iq = ExactScalar::imaginary(q[mu].clone());
                    factor = &factor * &iq.pow(e);
                }
            }
            acc += &(c * &factor);
        }
        acc
    }
}
