//! The normal-ordered Weyl algebra: finite sums of terms
//! `coeff * X^alpha * D^beta` with the relation `[D_mu, X_nu] = eta_{mu nu}`.
//!
//! Elements that stand for infinite series in the derivatives carry a
//! truncation order: coefficients with derivative degree beyond it are
//! unknown and are dropped. Multiplying by a factor of X-degree `d` pulls
//! information down from up to `d` orders above, so the product of a series
//! valid through order `N` with such a factor is only valid through `N - d`.
//! The engine tracks this validity order through every operation; exact
//! polynomials (no dropped tail) carry no truncation at all.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational};
use serde::{Deserialize, Serialize};

use crate::error::AlgebraError;
use crate::index::MultiIndex;
use crate::poly::Polynomial;
use crate::scalar::ExactScalar;

/// Validity order: `None` means exact to all orders.
pub type Trunc = Option<u32>;

pub fn min_trunc(a: Trunc, b: Trunc) -> Trunc {
    match (a, b) {
        (None, t) | (t, None) => t,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

type Key = (MultiIndex, MultiIndex);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeylElement {
    n: usize,
    trunc: Trunc,
    terms: BTreeMap<Key, ExactScalar>,
}

/// One serialized term of the canonical form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeylTerm {
    pub x_exp: Vec<u32>,
    pub d_exp: Vec<u32>,
    pub coeff: String,
}

impl WeylElement {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            trunc: None,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, ExactScalar::one())
    }

    pub fn scalar(n: usize, value: ExactScalar) -> Self {
        let mut el = Self::zero(n);
        el.add_term(MultiIndex::zero(n), MultiIndex::zero(n), value);
        el
    }

    /// The coordinate operator `X_mu`.
    pub fn x(n: usize, mu: usize) -> Self {
        let mut el = Self::zero(n);
        el.add_term(
            MultiIndex::unit(n, mu),
            MultiIndex::zero(n),
            ExactScalar::one(),
        );
        el
    }

    /// The derivative operator `D_mu`.
    pub fn d(n: usize, mu: usize) -> Self {
        let mut el = Self::zero(n);
        el.add_term(
            MultiIndex::zero(n),
            MultiIndex::unit(n, mu),
            ExactScalar::one(),
        );
        el
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn trunc(&self) -> Trunc {
        self.trunc
    }

    pub fn set_trunc(&mut self, trunc: Trunc) {
        self.trunc = trunc;
        if let Some(order) = trunc {
            self.terms.retain(|(_, d), _| d.degree() <= order);
        }
    }

    pub fn with_trunc(mut self, trunc: Trunc) -> Self {
        self.set_trunc(trunc);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &ExactScalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, x_exp: &MultiIndex, d_exp: &MultiIndex) -> ExactScalar {
        self.terms
            .get(&(x_exp.clone(), d_exp.clone()))
            .cloned()
            .unwrap_or_else(ExactScalar::zero)
    }

    /// Largest X-degree among the terms.
    pub fn x_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|(x, _)| x.degree())
            .max()
            .unwrap_or(0)
    }

    /// Largest retained derivative degree among the terms.
    pub fn d_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|(_, d)| d.degree())
            .max()
            .unwrap_or(0)
    }

    /// True when every term is a pure function of the derivatives.
    pub fn is_d_series(&self) -> bool {
        self.terms.keys().all(|(x, _)| x.degree() == 0)
    }

    pub fn add_term(&mut self, x_exp: MultiIndex, d_exp: MultiIndex, coeff: ExactScalar) {
        if coeff.is_zero() {
            return;
        }
        if let Some(order) = self.trunc {
            if d_exp.degree() > order {
                return;
            }
        }
        match self.terms.entry((x_exp, d_exp)) {
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
        out.set_trunc(min_trunc(self.trunc, other.trunc));
        for ((x, d), c) in &other.terms {
            out.add_term(x.clone(), d.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.n);
        out.trunc = self.trunc;
        for ((x, d), c) in &self.terms {
            out.terms.insert((x.clone(), d.clone()), -c);
        }
        out
    }

    pub fn scale(&self, factor: &ExactScalar) -> Self {
        let mut out = Self::zero(self.n);
        out.trunc = self.trunc;
        if factor.is_zero() {
            return out;
        }
        for ((x, d), c) in &self.terms {
            out.terms.insert((x.clone(), d.clone()), c * factor);
        }
        out
    }

    pub fn scale_rational(&self, factor: &BigRational) -> Self {
        self.scale(&ExactScalar::from_rational(factor.clone()))
    }

    /// Multiply by `X_mu` on the left. No reordering is needed because X
    /// factors already stand leftmost in the canonical form.
    pub fn mul_x_left(&self, mu: usize) -> Self {
        let mut out = Self::zero(self.n);
        out.trunc = self.trunc;
        for ((x, d), c) in &self.terms {
            out.terms.insert((x.bump(mu, 1), d.clone()), c.clone());
        }
        out
    }

    /// Multiply by `D_mu` on the right; never requires reordering.
    pub fn mul_d_right(&self, mu: usize) -> Self {
        let mut out = Self::zero(self.n);
        out.trunc = self.trunc;
        for ((x, d), c) in &self.terms {
            let key = (x.clone(), d.bump(mu, 1));
            if let Some(order) = self.trunc {
                if key.1.degree() > order {
                    continue;
                }
            }
            out.terms.insert(key, c.clone());
        }
        out
    }

    /// Exact equality of all retained coefficients up to derivative order
    /// `order` (inclusive).
    pub fn eq_through(&self, other: &Self, order: u32) -> bool {
        self.sub(other).is_zero_through(order)
    }

    pub fn is_zero_through(&self, order: u32) -> bool {
        self.terms
            .iter()
            .all(|((_, d), c)| d.degree() > order || c.is_zero())
    }

    /// First nonzero term with derivative order at most `order`, rendered
    /// for failure reports.
    pub fn witness_through(&self, order: u32) -> Option<String> {
        self.terms
            .iter()
            .find(|((_, d), c)| d.degree() <= order && !c.is_zero())
            .map(|((x, d), c)| format!("({c}) X^{x} D^{d}"))
    }

    /// The validity order shared by this element and `other`, when both are
    /// truncated; `u32::MAX` when both are exact.
    pub fn common_order(&self, other: &Self) -> u32 {
        min_trunc(self.trunc, other.trunc).unwrap_or(u32::MAX)
    }

    pub fn to_term_list(&self) -> Vec<WeylTerm> {
        self.terms
            .iter()
            .map(|((x, d), c)| WeylTerm {
                x_exp: x.0.clone(),
                d_exp: d.0.clone(),
                coeff: c.to_string(),
            })
            .collect()
    }

    pub fn from_term_list(
        n: usize,
        trunc: Trunc,
        terms: &[WeylTerm],
    ) -> Result<Self, AlgebraError> {
        let mut out = Self::zero(n);
        out.trunc = trunc;
        for term in terms {
            if term.x_exp.len() != n || term.d_exp.len() != n {
                return Err(AlgebraError::DimensionMismatch {
                    expected: n,
                    got: term.x_exp.len().max(term.d_exp.len()),
                });
            }
            let coeff: ExactScalar = term.coeff.parse()?;
            out.add_term(
                MultiIndex(term.x_exp.clone()),
                MultiIndex(term.d_exp.clone()),
                coeff,
            );
        }
        Ok(out)
    }
}

impl fmt::Display for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((x, d), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (mu, e) in x.0.iter().enumerate() {
                if *e == 1 {
                    write!(f, " X_{mu}")?;
                } else if *e > 1 {
                    write!(f, " X_{mu}^{e}")?;
                }
            }
            for (mu, e) in d.0.iter().enumerate() {
                if *e == 1 {
                    write!(f, " D_{mu}")?;
                } else if *e > 1 {
                    write!(f, " D_{mu}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Canonical normal-ordered product of two elements.
///
/// Per pair of terms the reordering of `D^beta1` past `X^alpha2` is the
/// finite contraction sum over multi-indices `tau <= min(beta1, alpha2)`:
/// each component contributes `C(beta1,tau) C(alpha2,tau) tau! eta^tau`.
pub fn normal_product(u: &WeylElement, v: &WeylElement) -> Result<WeylElement, AlgebraError> {
    if u.n != v.n {
        return Err(AlgebraError::DimensionMismatch {
            expected: u.n,
            got: v.n,
        });
    }
    let n = u.n;
    let loss = v.x_degree();
    let trunc = min_trunc(u.trunc.map(|t| t.saturating_sub(loss)), v.trunc);
    let mut out = WeylElement::zero(n);
    out.trunc = trunc;

    let mut tau = vec![0u32; n];
    for ((x1, d1), c1) in &u.terms {
        for ((x2, d2), c2) in &v.terms {
            if let Some(order) = trunc {
                // Cheapest possible skip: contraction can remove at most
                // min(|d1|, |x2|) derivative orders.
                let min_reachable =
                    (d1.degree() + d2.degree()).saturating_sub(d1.degree().min(x2.degree()));
                if min_reachable > order {
                    continue;
                }
            }
            let c12 = c1 * c2;
            let cap = d1.min_with(x2);
            // Enumerate tau <= cap componentwise.
            tau.iter_mut().for_each(|t| *t = 0);
            loop {
                let mut weight: i64 = 1;
                for mu in 0..n {
                    let t = tau[mu];
                    if t > 0 {
                        let mut w = crate::index::binomial(d1.get(mu), t)
                            * crate::index::binomial(x2.get(mu), t);
                        for j in 1..=t {
                            w *= j as u64;
                        }
                        let mut w = w as i64;
                        if mu == 0 && t % 2 == 1 {
                            w = -w;
                        }
                        weight *= w;
                    }
                }
                let x_out = x1.add(&x2.checked_sub(&MultiIndex(tau.clone())).unwrap());
                let d_out = d2.add(&d1.checked_sub(&MultiIndex(tau.clone())).unwrap());
                let keep = match trunc {
                    Some(order) => d_out.degree() <= order,
                    None => true,
                };
                if keep {
                    let coeff = &c12 * &ExactScalar::from_int(weight);
                    out.add_term(x_out, d_out, coeff);
                }
                // Advance tau in mixed radix bounded by cap.
                let mut pos = 0;
                loop {
                    if pos == n {
                        break;
                    }
                    if tau[pos] < cap.get(pos) {
                        tau[pos] += 1;
                        break;
                    }
                    tau[pos] = 0;
                    pos += 1;
                }
                if pos == n {
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// `[u, v] = u v - v u`.
pub fn commutator(u: &WeylElement, v: &WeylElement) -> Result<WeylElement, AlgebraError> {
    Ok(normal_product(u, v)?.sub(&normal_product(v, u)?))
}

/// Product of a list of elements, left to right.
pub fn product_chain(factors: &[&WeylElement]) -> Result<WeylElement, AlgebraError> {
    let mut acc = factors[0].clone();
    for f in &factors[1..] {
        acc = normal_product(&acc, f)?;
    }
    Ok(acc)
}

/// Left action of an operator on a polynomial. Exact whenever the polynomial
/// degree does not exceed the operator's validity order.
pub fn apply(u: &WeylElement, p: &Polynomial) -> Result<Polynomial, AlgebraError> {
    if u.n != p.n() {
        return Err(AlgebraError::DimensionMismatch {
            expected: u.n,
            got: p.n(),
        });
    }
    if let Some(order) = u.trunc {
        let degree = p.degree();
        if degree > order {
            return Err(AlgebraError::DegreeExceedsTruncation {
                degree,
                trunc: order,
            });
        }
    }
    let n = u.n;
    let mut out = Polynomial::zero(n);
    for ((x, d), c) in &u.terms {
        for (w, pc) in p.terms() {
            // D^d annihilates X^w unless d <= w componentwise.
            if !d.le(w) {
                continue;
            }
            let mut weight: i64 = 1;
            for mu in 0..n {
                let k = d.get(mu);
                if k > 0 {
                    let mut f = crate::index::falling_factorial(w.get(mu), k) as i64;
                    if mu == 0 && k % 2 == 1 {
                        f = -f;
                    }
                    weight *= f;
                }
            }
            if weight == 0 {
                continue;
            }
            let exps = x.add(&w.checked_sub(d).unwrap());
            let coeff = &(c * pc) * &ExactScalar::from_int(weight);
            out.add_term(exps, coeff);
        }
    }
    Ok(out)
}

/// `u^k` by repeated multiplication.
pub fn power(u: &WeylElement, k: u32) -> Result<WeylElement, AlgebraError> {
    let mut acc = WeylElement::identity(u.n()).with_trunc(u.trunc());
    for _ in 0..k {
        acc = normal_product(&acc, u)?;
    }
    Ok(acc)
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sc(v: i64) -> ExactScalar {
        ExactScalar::from_int(v)
    }

    /// Brute-force oracle: reduce a free word of X/D generators to normal
    /// form by applying `D_mu X_nu = X_nu D_mu + eta_{mu nu}` one swap at a
    /// time.
    #[derive(Clone, Copy, PartialEq)]
    enum Gen {
        X(usize),
        D(usize),
    }

    fn reduce_word(n: usize, word: &[Gen], coeff: ExactScalar, out: &mut WeylElement) {
        for i in 0..word.len().saturating_sub(1) {
            if let (Gen::D(mu), Gen::X(nu)) = (word[i], word[i + 1]) {
                // Swap...
                let mut swapped = word.to_vec();
                swapped.swap(i, i + 1);
                reduce_word(n, &swapped, coeff.clone(), out);
                // ...and contract when eta_{mu nu} != 0.
                if mu == nu {
                    let eta = if mu == 0 { -1 } else { 1 };
                    let mut contracted = word.to_vec();
                    contracted.drain(i..=i + 1);
                    reduce_word(n, &contracted, &coeff * &sc(eta), out);
                }
                return;
            }
        }
        // Already normal ordered.
        let mut x = MultiIndex::zero(n);
        let mut d = MultiIndex::zero(n);
        for g in word {
            match g {
                Gen::X(mu) => x = x.bump(*mu, 1),
                Gen::D(mu) => d = d.bump(*mu, 1),
            }
        }
        out.add_term(x, d, coeff);
    }

    fn word_to_element(n: usize, word: &[Gen]) -> WeylElement {
        let mut acc = WeylElement::identity(n);
        for g in word {
            let f = match g {
                Gen::X(mu) => WeylElement::x(n, *mu),
                Gen::D(mu) => WeylElement::d(n, *mu),
            };
            acc = normal_product(&acc, &f).unwrap();
        }
        acc
    }

    #[test]
    fn single_commutation_with_time_metric() {
        // D_0 X_0 = X_0 D_0 + eta_00 = X_0 D_0 - 1
        let p = normal_product(&WeylElement::d(2, 0), &WeylElement::x(2, 0)).unwrap();
        let mut expected = WeylElement::zero(2);
        expected.add_term(MultiIndex(vec![1, 0]), MultiIndex(vec![1, 0]), sc(1));
        expected.add_term(MultiIndex::zero(2), MultiIndex::zero(2), sc(-1));
        assert_eq!(p, expected);
    }

    #[test]
    fn already_ordered_product_is_unchanged() {
        let p = normal_product(&WeylElement::x(2, 1), &WeylElement::d(2, 1)).unwrap();
        let mut expected = WeylElement::zero(2);
        expected.add_term(MultiIndex(vec![0, 1]), MultiIndex(vec![0, 1]), sc(1));
        assert_eq!(p, expected);
    }

    #[test]
    fn shuffle_oracle_agrees_on_nested_product() {
        // ((X_0 D_0) D_0) * X_1 and a few heavier words in n = 2.
        let words: Vec<Vec<Gen>> = vec![
            vec![Gen::X(0), Gen::D(0), Gen::D(0), Gen::X(1)],
            vec![Gen::D(0), Gen::D(0), Gen::X(0), Gen::X(0)],
            vec![Gen::D(1), Gen::X(1), Gen::D(1), Gen::X(1)],
            vec![Gen::D(0), Gen::X(0), Gen::D(1), Gen::X(1), Gen::D(0), Gen::X(0)],
        ];
        for word in words {
            let via_engine = word_to_element(2, &word);
            let mut via_oracle = WeylElement::zero(2);
            reduce_word(2, &word, ExactScalar::one(), &mut via_oracle);
            assert_eq!(via_engine, via_oracle, "word mismatch");
        }
    }

    #[test]
    fn defining_commutators() {
        for n in [2, 3] {
            for mu in 0..n {
                for nu in 0..n {
                    let c =
                        commutator(&WeylElement::d(n, mu), &WeylElement::x(n, nu)).unwrap();
                    let eta = if mu == nu {
                        if mu == 0 {
                            -1
                        } else {
                            1
                        }
                    } else {
                        0
                    };
                    assert_eq!(c, WeylElement::scalar(n, sc(eta)));
                    assert!(commutator(&WeylElement::x(n, mu), &WeylElement::x(n, nu))
                        .unwrap()
                        .is_zero());
                    assert!(commutator(&WeylElement::d(n, mu), &WeylElement::d(n, nu))
                        .unwrap()
                        .is_zero());
                }
            }
        }
    }

    #[test]
    fn apply_examples() {
        // D_0 1 = 0
        let vac = Polynomial::one(2);
        assert!(apply(&WeylElement::d(2, 0), &vac).unwrap().is_zero());
        // (X_0 D_1)(X_1) = X_0
        let op = normal_product(&WeylElement::x(2, 0), &WeylElement::d(2, 1)).unwrap();
        let res = apply(&op, &Polynomial::coordinate(2, 1)).unwrap();
        assert_eq!(res, Polynomial::coordinate(2, 0));
    }

    #[test]
    fn apply_degree_guard() {
        let op = WeylElement::d(2, 0).with_trunc(Some(1));
        let p = Polynomial::coordinate(2, 0).mul(&Polynomial::coordinate(2, 0));
        assert_eq!(
            apply(&op, &p),
            Err(AlgebraError::DegreeExceedsTruncation {
                degree: 2,
                trunc: 1
            })
        );
    }

    #[test]
    fn truncation_loses_order_per_x_factor() {
        // A pure D-series times X_mu keeps one order less.
        let series = WeylElement::d(2, 1).with_trunc(Some(4));
        let x = WeylElement::x(2, 1);
        let prod = normal_product(&series, &x).unwrap();
        assert_eq!(prod.trunc(), Some(3));
        let prod2 = normal_product(&x, &series).unwrap();
        assert_eq!(prod2.trunc(), Some(4));
    }

    #[test]
    fn term_list_round_trip() {
        let mut el = WeylElement::zero(2);
        el.add_term(
            MultiIndex(vec![1, 0]),
            MultiIndex(vec![0, 2]),
            "1/2-3/4*i".parse().unwrap(),
        );
        el.add_term(MultiIndex::zero(2), MultiIndex::zero(2), sc(7));
        let listed = el.to_term_list();
        let back = WeylElement::from_term_list(2, None, &listed).unwrap();
        assert_eq!(el, back);
    }

    fn arb_element() -> impl Strategy<Value = WeylElement> {
        // Small random exact elements in n = 2.
        proptest::collection::vec(
            (0u32..3, 0u32..3, 0u32..3, 0u32..3, -4i64..5),
            1..4,
        )
        .prop_map(|terms| {
            let mut el = WeylElement::zero(2);
            for (x0, x1, d0, d1, c) in terms {
                el.add_term(MultiIndex(vec![x0, x1]), MultiIndex(vec![d0, d1]), sc(c));
            }
            el
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn product_is_associative(u in arb_element(), v in arb_element(), w in arb_element()) {
            let left = normal_product(&normal_product(&u, &v).unwrap(), &w).unwrap();
            let right = normal_product(&u, &normal_product(&v, &w).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn action_is_a_module_homomorphism(u in arb_element(), v in arb_element()) {
            let p = Polynomial::coordinate(2, 0)
                .mul(&Polynomial::coordinate(2, 1))
                .add(&Polynomial::coordinate(2, 1));
            let uv = normal_product(&u, &v).unwrap();
            let lhs = apply(&uv, &p).unwrap();
            let rhs = apply(&u, &apply(&v, &p).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn commutator_is_antisymmetric(u in arb_element(), v in arb_element()) {
            let c1 = commutator(&u, &v).unwrap();
            let c2 = commutator(&v, &u).unwrap();
            prop_assert_eq!(c1, c2.neg());
        }
    }
}
