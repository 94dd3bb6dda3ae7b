//! Momentum-space flow: the one-parameter conjugation of the momenta by a
//! plane wave in the noncommutative coordinates.
//!
//! The closed-form solution, the defining ODE integrated by a fixed-step
//! Runge-Kutta oracle, the momentum map `K` and its Newton inverse, and the
//! scalar identities tying the shift operator and the d'Alembertian to
//! `K^{-1}` all live here, along with the nested-commutator cross-check that
//! ties the floating world back to the exact engine.
//!
//! The frequency `W = sqrt((ak)^2 - s k^2)` may be imaginary; every
//! occurrence enters through even functions of `W`, so the module computes
//! with `w2 = W^2` and continues trigonometrically for `w2 < 0`. No complex
//! arithmetic, no branch cuts.

use num::{BigRational, Zero};

use crate::dseries::DSeries;
use crate::error::{AlgebraError, FlowError};
use crate::index::MultiIndex;
use crate::params::FloatParams;
use crate::poly::Polynomial;
use crate::realization::{build_xhat, RealizationSpec};
use crate::scalar::{rational_to_f64, ExactScalar};
use crate::weyl::{commutator, WeylElement};

/// Lower-index momentum components.
pub type MomentumVector = Vec<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowDiagnostics {
    pub w2: f64,
    pub radicand: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub p: MomentumVector,
    pub diagnostics: FlowDiagnostics,
}

/// `sinh(W)/W` and `(cosh(W) - 1)/W^2` as even analytic functions of `W`,
/// parametrized by `w2 = W^2`. Continuous across `w2 = 0`.
pub fn even_kernels(w2: f64) -> (f64, f64) {
    const SERIES_WINDOW: f64 = 1e-8;
    if w2.abs() < SERIES_WINDOW {
        let sh = 1.0 + w2 / 6.0 + w2 * w2 / 120.0;
        let ch = 0.5 + w2 / 24.0 + w2 * w2 / 720.0;
        (sh, ch)
    } else if w2 > 0.0 {
        let w = w2.sqrt();
        // cosh(w) - 1 = 2 sinh^2(w/2) avoids cancellation for small w.
        let half = (0.5 * w).sinh();
        (w.sinh() / w, 2.0 * half * half / w2)
    } else {
        let w = (-w2).sqrt();
        // (cos(w) - 1)/w2 = 2 sin^2(w/2) / (-w2), likewise stable.
        let half = (0.5 * w).sin();
        (w.sin() / w, 2.0 * half * half / (-w2))
    }
}

/// The scalar `Z^{-1}(q) = (aq) + sqrt(1 + (a^2 - s) q^2)`.
pub fn z_inverse_of(q: &[f64], params: &FloatParams) -> Result<f64, FlowError> {
    check_dim(q, params)?;
    let radicand = 1.0 + (params.a_squared() - params.s) * params.square(q);
    if radicand < 0.0 {
        return Err(FlowError::Domain { radicand });
    }
    Ok(params.a_dot(q) + radicand.sqrt())
}

fn check_dim(v: &[f64], params: &FloatParams) -> Result<(), FlowError> {
    if v.len() != params.n {
        return Err(FlowError::DimensionMismatch {
            expected: params.n,
            got: v.len(),
        });
    }
    Ok(())
}

/// Squared flow frequency `w2 = (ak)^2 - s k^2`.
pub fn flow_frequency_squared(k: &[f64], params: &FloatParams) -> f64 {
    let ak = params.a_dot(k);
    ak * ak - params.s * params.square(k)
}

/// Closed-form flow at parameter `t`, for the sqrt realization.
pub fn flow_closed_form(
    k: &[f64],
    q: &[f64],
    t: f64,
    params: &FloatParams,
) -> Result<FlowResult, FlowError> {
    check_dim(k, params)?;
    check_dim(q, params)?;
    let z = z_inverse_of(q, params)?;
    let radicand = 1.0 + (params.a_squared() - params.s) * params.square(q);
    let w2 = flow_frequency_squared(k, params);
    let (sh, ch) = even_kernels(t * t * w2);
    // sinh(tW)/W = t * sh(t^2 w2); (cosh(tW) - 1)/W^2 = t^2 * ch(t^2 w2).
    let sin_factor = t * sh;
    let cos_factor = t * t * ch;

    let ak = params.a_dot(k);
    let kq = params.dot(k, q);
    let k2 = params.square(k);
    let mut p = vec![0.0; params.n];
    for mu in 0..params.n {
        let linear = k[mu] * z - params.a[mu] * kq;
        let quadratic =
            (k[mu] * ak - params.a[mu] * k2) * z + params.a[mu] * ak * kq - params.s * k[mu] * kq;
        p[mu] = q[mu] + linear * sin_factor + quadratic * cos_factor;
    }
    Ok(FlowResult {
        p,
        diagnostics: FlowDiagnostics {
            w2,
            radicand,
            iterations: 0,
        },
    })
}

/// The flow vector field
/// `dP_mu/dt = k_mu [(aP) + sqrt(1 + (a^2 - s) P^2)] - a_mu (kP)`.
fn flow_rhs(k: &[f64], p: &[f64], params: &FloatParams) -> Result<Vec<f64>, FlowError> {
    let radicand = 1.0 + (params.a_squared() - params.s) * params.square(p);
    if radicand < 0.0 {
        return Err(FlowError::Domain { radicand });
    }
    let bracket = params.a_dot(p) + radicand.sqrt();
    let kp = params.dot(k, p);
    Ok((0..params.n)
        .map(|mu| k[mu] * bracket - params.a[mu] * kp)
        .collect())
}

/// Classic fixed-step fourth-order Runge-Kutta integration of the flow ODE.
/// This is the independent oracle for the closed form.
pub fn flow_ode(
    k: &[f64],
    q: &[f64],
    t: f64,
    params: &FloatParams,
    steps: usize,
) -> Result<FlowResult, FlowError> {
    check_dim(k, params)?;
    check_dim(q, params)?;
    let h = t / steps as f64;
    let mut p = q.to_vec();
    for _ in 0..steps {
        let k1 = flow_rhs(k, &p, params)?;
        let mid1: Vec<f64> = p.iter().zip(&k1).map(|(y, d)| y + 0.5 * h * d).collect();
        let k2 = flow_rhs(k, &mid1, params)?;
        let mid2: Vec<f64> = p.iter().zip(&k2).map(|(y, d)| y + 0.5 * h * d).collect();
        let k3 = flow_rhs(k, &mid2, params)?;
        let end: Vec<f64> = p.iter().zip(&k3).map(|(y, d)| y + h * d).collect();
        let k4 = flow_rhs(k, &end, params)?;
        for mu in 0..params.n {
            p[mu] += h / 6.0 * (k1[mu] + 2.0 * k2[mu] + 2.0 * k3[mu] + k4[mu]);
        }
    }
    let radicand = 1.0 + (params.a_squared() - params.s) * params.square(&p);
    Ok(FlowResult {
        p,
        diagnostics: FlowDiagnostics {
            w2: flow_frequency_squared(k, params),
            radicand,
            iterations: steps,
        },
    })
}

/// The momentum map `K_mu(k) = [k_mu (ak) - a_mu k^2] (cosh W - 1)/W^2
/// + k_mu sinh(W)/W`, i.e. the flow from the origin at `t = 1`.
pub fn big_k(k: &[f64], params: &FloatParams) -> MomentumVector {
    let w2 = flow_frequency_squared(k, params);
    let (sh, ch) = even_kernels(w2);
    let ak = params.a_dot(k);
    let k2 = params.square(k);
    (0..params.n)
        .map(|mu| (k[mu] * ak - params.a[mu] * k2) * ch + k[mu] * sh)
        .collect()
}

/// Newton inversion of the momentum map on its identity branch.
///
/// Central-difference Jacobian with step `1e-6 (1 + |k|)`, initial guess
/// `p = k`.
pub fn big_k_inverse(
    k: &[f64],
    params: &FloatParams,
    tol: f64,
    max_iter: usize,
) -> Result<FlowResult, FlowError> {
    check_dim(k, params)?;
    let n = params.n;
    let norm = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = 1e-6 * (1.0 + norm);
    let mut p = k.to_vec();
    let mut residual = f64::INFINITY;
    for iter in 0..max_iter {
        let image = big_k(&p, params);
        let f: Vec<f64> = (0..n).map(|mu| image[mu] - k[mu]).collect();
        residual = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if residual <= tol {
            return Ok(FlowResult {
                p,
                diagnostics: FlowDiagnostics {
                    w2: flow_frequency_squared(k, params),
                    radicand: 0.0,
                    iterations: iter,
                },
            });
        }
        // Central-difference Jacobian of K at p.
        let mut jac = vec![vec![0.0; n]; n];
        for j in 0..n {
            let mut plus = p.clone();
            plus[j] += h;
            let mut minus = p.clone();
            minus[j] -= h;
            let kp = big_k(&plus, params);
            let km = big_k(&minus, params);
            for i in 0..n {
                jac[i][j] = (kp[i] - km[i]) / (2.0 * h);
            }
        }
        let delta = solve_linear(&mut jac, &f).ok_or(FlowError::NoConvergence {
            iterations: iter,
            residual,
        })?;
        for mu in 0..n {
            p[mu] -= delta[mu];
        }
    }
    Err(FlowError::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Gaussian elimination with partial pivoting for the tiny Newton systems.
fn solve_linear(a: &mut [Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= factor * a[col][c];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for c in row + 1..n {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Both sides of the scalar identities expressing the inverse shift and the
/// d'Alembertian through `K^{-1}(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KIdentityReport {
    pub shift_lhs: f64,
    pub shift_rhs: f64,
    pub shift_abs_err: f64,
    pub box_lhs: f64,
    pub box_rhs: f64,
    pub box_abs_err: f64,
    pub newton_iterations: usize,
}

pub fn check_k_identities(
    k: &[f64],
    params: &FloatParams,
    newton_tol: f64,
    max_iter: usize,
) -> Result<KIdentityReport, FlowError> {
    let shift_lhs = z_inverse_of(k, params)?;
    let inverse = big_k_inverse(k, params, newton_tol, max_iter)?;
    let p = &inverse.p;
    let w2 = flow_frequency_squared(p, params);
    let (sh, ch) = even_kernels(w2);
    let cosh_w = 1.0 + w2 * ch;
    let shift_rhs = cosh_w + params.a_dot(p) * sh;

    // The d'Alembertian value is rationalized so the interpolation point
    // a^2 = s stays regular: 2(1 - sqrt(1 + c k^2))/c = -2 k^2 / (1 + sqrt).
    let k2 = params.square(k);
    let radicand = 1.0 + (params.a_squared() - params.s) * k2;
    if radicand < 0.0 {
        return Err(FlowError::Domain { radicand });
    }
    let box_lhs = -2.0 * k2 / (1.0 + radicand.sqrt());
    let p2 = params.square(p);
    // (1 - cosh W)/W^2 = -ch.
    let box_rhs = -2.0 * p2 * ch;

    Ok(KIdentityReport {
        shift_lhs,
        shift_rhs,
        shift_abs_err: (shift_lhs - shift_rhs).abs(),
        box_lhs,
        box_rhs,
        box_abs_err: (box_lhs - box_rhs).abs(),
        newton_iterations: inverse.diagnostics.iterations,
    })
}

/// Minkowski square of a lower-index momentum with `eta = diag(-1,1,...,1)`.
pub fn minkowski_square(k: &[f64]) -> f64 {
    let mut acc = -k[0] * k[0];
    for v in &k[1..] {
        acc += v * v;
    }
    acc
}

/// The dispersion relation `k^2 + m^2`; undeformed for every realization,
/// hence independent of the deformation parameters by construction.
pub fn mass_shell(k: &[f64], m: f64) -> f64 {
    minkowski_square(k) + m * m
}

// ---------------------------------------------------------------------------
// Nested-commutator cross-check against the exact engine.
// ---------------------------------------------------------------------------

/// Per-order result of the nested-commutator expansion check: the
/// conjugated momentum expanded in powers of k must match the Taylor
/// expansion of the closed-form flow, coefficientwise in q (exact) and at
/// probe momenta (float).
#[derive(Debug, Clone)]
pub struct BchOrderReport {
    pub order: usize,
    pub series_exact: bool,
    pub witness: Option<String>,
    pub float_max_err: f64,
}

#[derive(Debug, Clone)]
pub struct BchReport {
    pub orders: Vec<BchOrderReport>,
}

impl BchReport {
    pub fn all_passed(&self, float_tol: f64) -> bool {
        self.orders
            .iter()
            .all(|o| o.series_exact && o.float_max_err <= float_tol)
    }
}

/// Truncate a polynomial (viewed as a series in the momentum components) to
/// total degree `max_deg`.
fn truncate_poly(p: &Polynomial, max_deg: u32) -> Polynomial {
    let mut out = Polynomial::zero(p.n());
    for (w, c) in p.terms() {
        if w.degree() <= max_deg {
            out.add_term(w.clone(), c.clone());
        }
    }
    out
}

/// `sqrt(1 + u)` for a polynomial `u` with zero constant term, as a series
/// truncated at total degree `max_deg`.
fn sqrt_one_plus_poly(u: &Polynomial, max_deg: u32) -> Polynomial {
    let n = u.n();
    let mut acc = Polynomial::zero(n);
    let mut u_power = Polynomial::one(n);
    let min_order = 1.max(u.terms().map(|(w, _)| w.degree()).min().unwrap_or(1));
    let max_m = (max_deg / min_order) as usize;
    for m in 0..=max_m {
        let c = crate::scalar::binomial_half(m as u32);
        acc = acc.add(&u_power.scale(&ExactScalar::from_rational(c)));
        if m < max_m {
            u_power = truncate_poly(&u_power.mul(u), max_deg);
        }
    }
    acc
}

/// The exact q-series of `Z^{-1}(q) = (aq) + sqrt(1 + (a^2 - s) q^2)`,
/// truncated at total degree `max_deg`. Variables are the components of q.
fn z_inverse_q_series(spec: &RealizationSpec, max_deg: u32) -> Polynomial {
    let n = spec.n();
    let params = spec.params();
    let mut aq = Polynomial::zero(n);
    for mu in 0..n {
        aq.add_term(
            MultiIndex::unit(n, mu),
            ExactScalar::from_rational(params.a_upper(mu)),
        );
    }
    let mut q2 = Polynomial::zero(n);
    for mu in 0..n {
        let eta = if mu == 0 { -1 } else { 1 };
        let mut w = MultiIndex::zero(n);
        w = w.bump(mu, 2);
        q2.add_term(w, ExactScalar::from_int(eta));
    }
    let u = q2.scale(&ExactScalar::from_rational(params.a2_minus_s()));
    aq.add(&sqrt_one_plus_poly(&u, max_deg))
}

/// View a D-series as a polynomial in q by the substitution `D -> i q`.
fn dseries_to_q_poly(series: &WeylElement) -> Polynomial {
    let n = series.n();
    let mut out = Polynomial::zero(n);
    for ((x, d), c) in series.terms() {
        debug_assert_eq!(x.degree(), 0, "expected a pure D series");
        let coeff = c * &ExactScalar::i().pow(d.degree());
        out.add_term(d.clone(), coeff);
    }
    out
}

/// The homogeneous order-j terms of the closed-form flow at `t = 1`,
/// expanded in powers of k, as exact q-series per component.
fn closed_form_taylor_terms(
    spec: &RealizationSpec,
    k: &[BigRational],
    order: usize,
    max_deg: u32,
) -> Vec<Vec<Polynomial>> {
    let n = spec.n();
    let params = spec.params();
    let z = z_inverse_q_series(spec, max_deg);

    let upper = |mu: usize, v: &BigRational| {
        if mu == 0 {
            -v.clone()
        } else {
            v.clone()
        }
    };
    // Scalars built from k and a.
    let mut ak = BigRational::zero();
    let mut k2 = BigRational::zero();
    for mu in 0..n {
        ak += upper(mu, params.a(mu)) * &k[mu];
        k2 += upper(mu, &k[mu]) * &k[mu];
    }
    let w2 = &ak * &ak - params.s() * &k2;

    // (kq) as a linear form in q.
    let mut kq = Polynomial::zero(n);
    for mu in 0..n {
        kq.add_term(
            MultiIndex::unit(n, mu),
            ExactScalar::from_rational(upper(mu, &k[mu])),
        );
    }

    let mut terms = Vec::with_capacity(order + 1);
    for j in 0..=order {
        let mut per_mu = Vec::with_capacity(n);
        for mu in 0..n {
            let k_mu = ExactScalar::from_rational(k[mu].clone());
            let a_mu = ExactScalar::from_rational(params.a(mu).clone());
            let poly = match j {
                0 => Polynomial::coordinate(n, mu),
                1 => z.scale(&k_mu).sub(&kq.scale(&a_mu)),
                2 => {
                    let c1 = ExactScalar::from_rational(&k[mu] * &ak - params.a(mu) * &k2);
                    let c2 = ExactScalar::from_rational(params.a(mu) * &ak);
                    let c3 = ExactScalar::from_rational(params.s() * &k[mu]);
                    z.scale(&c1)
                        .add(&kq.scale(&c2))
                        .sub(&kq.scale(&c3))
                        .scale(&ExactScalar::from_ratio(1, 2))
                }
                3 => {
                    let factor = ExactScalar::from_rational(&w2 / BigRational::from_integer(6.into()));
                    z.scale(&k_mu).sub(&kq.scale(&a_mu)).scale(&factor)
                }
                _ => Polynomial::zero(n),
            };
            per_mu.push(truncate_poly(&poly, max_deg));
        }
        terms.push(per_mu);
    }
    terms
}

/// Compute `e^{-ik xhat} (-i D_mu) e^{ik xhat}` as nested commutators
/// through the given order in k and compare with the Taylor expansion of the
/// closed-form flow, exactly (coefficientwise in q) and at float probes.
///
/// Requires the sqrt realization and `order <= 3` (the closed form's Taylor
/// terms are wired through cubic order).
pub fn bch_cross_check(
    spec: &RealizationSpec,
    k: &[BigRational],
    probes: &[Vec<BigRational>],
    order: usize,
) -> Result<BchReport, AlgebraError> {
    assert!(order <= 3, "closed-form Taylor terms wired through order 3");
    let n = spec.n();
    let trunc = spec.trunc();

    // Y = i k xhat = i k^alpha xhat_alpha.
    let mut y = WeylElement::zero(n).with_trunc(Some(trunc));
    for alpha in 0..n {
        let k_upper = if alpha == 0 {
            -k[alpha].clone()
        } else {
            k[alpha].clone()
        };
        if !k_upper.is_zero() {
            let xh = build_xhat(spec, alpha);
            y = y.add(&xh.scale(&ExactScalar::imaginary(k_upper)));
        }
    }

    let taylor = closed_form_taylor_terms(spec, k, order, trunc);
    let fparams = spec.params().to_float();
    let kf: Vec<f64> = k.iter().map(rational_to_f64).collect();

    let mut report = BchReport { orders: Vec::new() };
    for mu in 0..n {
        // term_0 = -i D_mu; term_j = (1/j) [term_{j-1}, Y]. Evaluated at
        // D -> i q each term is directly the order-j part of the flow.
        let mut term = WeylElement::d(n, mu).scale(&-&ExactScalar::i());
        for j in 0..=order {
            debug_assert!(term.is_d_series(), "conjugation left a coordinate factor");
            let as_q = dseries_to_q_poly(&term);
            let usable = term.trunc().unwrap_or(trunc);
            let expected = truncate_poly(&taylor[j][mu], usable);
            let got = truncate_poly(&as_q, usable);
            let diff = got.sub(&expected);
            let series_exact = diff.is_zero();
            let witness = diff
                .terms()
                .next()
                .map(|(w, c)| format!("q^{w}: {c}"));

            // Float leg at the probe momenta; the value must come out real.
            let mut float_max_err = 0.0f64;
            for q in probes {
                let qf: Vec<f64> = q.iter().map(rational_to_f64).collect();
                let (got_f, imag_leak) = DSeries::from_element(term.clone())
                    .eval_at_iq(q)
                    .to_complex_f64();
                let expected_f = closed_form_taylor_value(&fparams, &kf, &qf, j, mu);
                float_max_err = float_max_err
                    .max((got_f - expected_f).abs())
                    .max(imag_leak.abs());
            }

            if mu == 0 {
                report.orders.push(BchOrderReport {
                    order: j,
                    series_exact,
                    witness,
                    float_max_err,
                });
            } else {
                let entry = &mut report.orders[j];
                entry.series_exact &= series_exact;
                if entry.witness.is_none() {
                    entry.witness = witness;
                }
                entry.float_max_err = entry.float_max_err.max(float_max_err);
            }

            if j < order {
                term = commutator(&term, &y)?
                    .scale(&ExactScalar::from_ratio(1, (j as i64) + 1));
            }
        }
    }
    Ok(report)
}

/// Float value of the order-j Taylor term of the closed-form flow at `t=1`.
fn closed_form_taylor_value(
    params: &FloatParams,
    k: &[f64],
    q: &[f64],
    order: usize,
    mu: usize,
) -> f64 {
    let z = params.a_dot(q)
        + (1.0 + (params.a_squared() - params.s) * params.square(q)).sqrt();
    let ak = params.a_dot(k);
    let kq = params.dot(k, q);
    let k2 = params.square(k);
    let w2 = ak * ak - params.s * k2;
    match order {
        0 => q[mu],
        1 => k[mu] * z - params.a[mu] * kq,
        2 => 0.5 * ((k[mu] * ak - params.a[mu] * k2) * z + params.a[mu] * ak * kq
            - params.s * k[mu] * kq),
        3 => (k[mu] * z - params.a[mu] * kq) * w2 / 6.0,
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::params_from_fractions;
    use crate::realization::FKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fparams(n: usize, a: &[f64], s: f64) -> FloatParams {
        FloatParams::new(n, a.to_vec(), s)
    }

    #[test]
    fn kernels_at_reference_points() {
        let (sh, ch) = even_kernels(0.0);
        assert_eq!((sh, ch), (1.0, 0.5));

        let (sh, ch) = even_kernels(1.0);
        assert!((sh - 1.0f64.sinh()).abs() < 1e-15);
        assert!((ch - (1.0f64.cosh() - 1.0)).abs() < 1e-15);

        // Imaginary frequency: W = i pi.
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let (sh, ch) = even_kernels(-pi2);
        assert!(sh.abs() < 1e-15, "sinh(i pi)/(i pi) = sin(pi)/pi = 0");
        // (cosh(i pi) - 1)/(i pi)^2 = (cos(pi) - 1)/(-pi^2) = +2/pi^2
        assert!((ch - 2.0 / pi2).abs() < 1e-15, "got {ch}");
    }

    #[test]
    fn kernels_are_continuous_at_zero() {
        for w2 in [1e-8, -1e-8] {
            let (sh_series, ch_series) = even_kernels(w2 * 0.999_999);
            let (sh_direct, ch_direct) = even_kernels(w2 * 1.000_001);
            assert!((sh_series - sh_direct).abs() < 1e-12);
            assert!((ch_series - ch_direct).abs() < 1e-12);
        }
    }

    #[test]
    fn z_inverse_reference_values() {
        let p = fparams(2, &[0.0, 0.0], 0.04);
        assert_eq!(z_inverse_of(&[0.0, 0.0], &p).unwrap(), 1.0);

        // Timelike q with q^2 = -m^2: radicand 1 + s m^2.
        let m: f64 = 0.6;
        let q = [m, 0.0];
        let expect = (1.0 + 0.04 * m * m).sqrt();
        assert!((z_inverse_of(&q, &p).unwrap() - expect).abs() < 1e-15);

        let un = FloatParams::undeformed(2);
        assert_eq!(z_inverse_of(&[0.3, -0.4], &un).unwrap(), 1.0);
    }

    #[test]
    fn z_inverse_domain_error() {
        // a^2 - s very negative and q large pushes the radicand below zero.
        let p = fparams(2, &[0.0, 0.0], 2.0);
        let q = [0.0, 1.0];
        assert!(matches!(
            z_inverse_of(&q, &p),
            Err(FlowError::Domain { .. })
        ));
    }

    #[test]
    fn flow_boundary_and_undeformed() {
        let p = fparams(2, &[0.1, 0.05], 0.03);
        let k = [0.3, -0.2];
        let q = [0.7, 0.4];
        let at0 = flow_closed_form(&k, &q, 0.0, &p).unwrap();
        assert_eq!(at0.p, q.to_vec());

        let un = FloatParams::undeformed(2);
        let t = 0.75;
        let res = flow_closed_form(&k, &q, t, &un).unwrap();
        for mu in 0..2 {
            assert!((res.p[mu] - (q[mu] + t * k[mu])).abs() < 1e-15);
        }
    }

    #[test]
    fn ode_with_zero_k_is_constant() {
        let p = fparams(2, &[0.1, 0.0], 0.05);
        let q = [0.4, -0.3];
        let res = flow_ode(&[0.0, 0.0], &q, 1.0, &p, 100).unwrap();
        for mu in 0..2 {
            assert!((res.p[mu] - q[mu]).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_matches_ode_oracle() {
        let p = fparams(2, &[0.1, 0.0], 0.05);
        let k = [0.3, -0.2];
        let q = [0.7, 0.4];
        let closed = flow_closed_form(&k, &q, 1.0, &p).unwrap();
        let ode = flow_ode(&k, &q, 1.0, &p, 1000).unwrap();
        for mu in 0..2 {
            assert!(
                (closed.p[mu] - ode.p[mu]).abs() < 1e-9,
                "mu={mu}: {} vs {}",
                closed.p[mu],
                ode.p[mu]
            );
        }
    }

    #[test]
    fn closed_form_matches_ode_on_seeded_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1701);
        let mut max_err = 0.0f64;
        for _ in 0..25 {
            let n = 2 + (rng.gen::<u32>() % 3) as usize;
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.2..0.2)).collect();
            let s = rng.gen_range(-0.2..0.2);
            let params = FloatParams::new(n, a, s);
            let k: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let closed = match flow_closed_form(&k, &q, 1.0, &params) {
                Ok(r) => r,
                Err(FlowError::Domain { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            let ode = flow_ode(&k, &q, 1.0, &params, 1000).unwrap();
            for mu in 0..n {
                max_err = max_err.max((closed.p[mu] - ode.p[mu]).abs());
            }
        }
        assert!(max_err < 1e-9, "max err {max_err}");
    }

    #[test]
    fn rk4_error_ratio_is_fourth_order() {
        let p = fparams(2, &[0.15, 0.1], 0.08);
        let k = [0.5, -0.4];
        let q = [0.6, 0.3];
        let exact = flow_closed_form(&k, &q, 1.0, &p).unwrap().p;
        let err = |steps: usize| -> f64 {
            let got = flow_ode(&k, &q, 1.0, &p, steps).unwrap().p;
            got.iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let e1 = err(8);
        let e2 = err(16);
        let ratio = e1 / e2;
        assert!(
            (12.0..=20.0).contains(&ratio),
            "RK4 ratio {ratio} (errors {e1}, {e2})"
        );
    }

    #[test]
    fn flow_semigroup_property() {
        let p = fparams(3, &[0.1, 0.05, -0.08], 0.06);
        let k = [0.3, -0.2, 0.1];
        let q = [0.5, 0.4, -0.3];
        let t1 = 0.4;
        let t2 = 0.35;
        let step1 = flow_closed_form(&k, &q, t1, &p).unwrap().p;
        let chained = flow_closed_form(&k, &step1, t2, &p).unwrap().p;
        let direct = flow_closed_form(&k, &q, t1 + t2, &p).unwrap().p;
        for mu in 0..3 {
            assert!((chained[mu] - direct[mu]).abs() < 1e-9);
        }
    }

    #[test]
    fn closed_form_satisfies_the_ode() {
        let p = fparams(2, &[0.12, -0.07], 0.04);
        let k = [0.4, 0.2];
        let q = [0.3, -0.5];
        let h = 1e-6;
        for t in [0.0, 0.25, 0.5, 1.0] {
            let plus = flow_closed_form(&k, &q, t + h, &p).unwrap().p;
            let minus = flow_closed_form(&k, &q, t - h, &p).unwrap().p;
            let at = flow_closed_form(&k, &q, t, &p).unwrap().p;
            let rhs = flow_rhs(&k, &at, &p).unwrap();
            for mu in 0..2 {
                let derivative = (plus[mu] - minus[mu]) / (2.0 * h);
                assert!(
                    (derivative - rhs[mu]).abs() < 1e-9,
                    "t={t} mu={mu}: {derivative} vs {}",
                    rhs[mu]
                );
            }
        }
    }

    #[test]
    fn big_k_reference_points() {
        let un = FloatParams::undeformed(3);
        let k = [0.3, -0.2, 0.7];
        assert_eq!(big_k(&k, &un), k.to_vec());

        let p = fparams(2, &[0.1, 0.2], 0.05);
        assert_eq!(big_k(&[0.0, 0.0], &p), vec![0.0, 0.0]);

        // K(k) must equal the flow from the origin at t = 1.
        let k = [0.4, -0.3];
        let via_flow = flow_closed_form(&k, &[0.0, 0.0], 1.0, &p).unwrap().p;
        let direct = big_k(&k, &p);
        for mu in 0..2 {
            assert!((via_flow[mu] - direct[mu]).abs() < 1e-15);
        }

        // a = 0: K_mu = k_mu sinh(W)/W with W^2 = -s k^2.
        let snyder = fparams(2, &[0.0, 0.0], 0.07);
        let k = [0.5, 0.2];
        let w2 = -0.07 * minkowski_square(&k);
        let (sh, _) = even_kernels(w2);
        let got = big_k(&k, &snyder);
        for mu in 0..2 {
            assert!((got[mu] - k[mu] * sh).abs() < 1e-15);
        }
    }

    #[test]
    fn newton_round_trips_on_seeded_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let mut max_err = 0.0f64;
        for _ in 0..25 {
            let n = 2 + (rng.gen::<u32>() % 3) as usize;
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.15..0.15)).collect();
            let s = rng.gen_range(-0.15..0.15);
            let params = FloatParams::new(n, a, s);
            let k: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.8..0.8)).collect();
            let image = big_k(&k, &params);
            let back = big_k_inverse(&image, &params, 1e-12, 50).unwrap();
            for mu in 0..n {
                max_err = max_err.max((back.p[mu] - k[mu]).abs());
            }
        }
        assert!(max_err < 1e-10, "round-trip error {max_err}");
    }

    #[test]
    fn newton_on_undeformed_converges_immediately() {
        let un = FloatParams::undeformed(2);
        let k = [0.3, 0.4];
        let res = big_k_inverse(&k, &un, 1e-12, 50).unwrap();
        assert_eq!(res.p, k.to_vec());
        assert_eq!(res.diagnostics.iterations, 0);
        let zero = big_k_inverse(&[0.0, 0.0], &un, 1e-12, 50).unwrap();
        assert_eq!(zero.p, vec![0.0, 0.0]);
    }

    #[test]
    fn k_identities_hold_numerically() {
        let p = fparams(2, &[0.1, 0.05], 0.03);
        let k = [0.4, 0.1];
        let rep = check_k_identities(&k, &p, 1e-13, 60).unwrap();
        assert!(rep.shift_abs_err < 1e-9, "{rep:?}");
        assert!(rep.box_abs_err < 1e-9, "{rep:?}");

        // Snyder slice: shift identity collapses to sqrt(1 - s k^2) = cosh W.
        let sn = fparams(2, &[0.0, 0.0], 0.06);
        let k = [0.3, -0.2];
        let rep = check_k_identities(&k, &sn, 1e-13, 60).unwrap();
        assert!(rep.shift_abs_err < 1e-10, "{rep:?}");
        let lhs = (1.0 - 0.06 * minkowski_square(&k)).sqrt();
        assert!((rep.shift_lhs - lhs).abs() < 1e-15);
    }

    #[test]
    fn k_identities_in_undeformed_limit() {
        let un = FloatParams::undeformed(2);
        let k = [0.25, -0.4];
        let rep = check_k_identities(&k, &un, 1e-13, 50).unwrap();
        assert_eq!(rep.shift_lhs, 1.0);
        assert!(rep.shift_abs_err < 1e-12);
        // Both box sides reduce to -k^2.
        assert!((rep.box_lhs + minkowski_square(&k)).abs() < 1e-15);
        assert!(rep.box_abs_err < 1e-12);
    }

    #[test]
    fn mass_shell_reference_points() {
        assert!(mass_shell(&[0.7, 0.0], 0.7).abs() < 1e-15);
        assert_eq!(mass_shell(&[0.0, 0.0], 0.0), 0.0);
        // Independence from the deformation: the function never sees a or s.
        assert_eq!(mass_shell(&[0.3, 0.2], 0.5), mass_shell(&[0.3, 0.2], 0.5));
    }

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn bch_matches_closed_form_taylor() {
        let params = params_from_fractions(2, &[(1, 10), (0, 1)], (1, 20)).unwrap();
        let spec = RealizationSpec::new(params, FKind::SqrtOneMinusB, 10).unwrap();
        let k = vec![rat(3, 10), rat(-1, 5)];
        let probes = vec![vec![rat(1, 10), rat(-1, 20)], vec![rat(0, 1), rat(0, 1)]];
        let report = bch_cross_check(&spec, &k, &probes, 3).unwrap();
        for entry in &report.orders {
            assert!(
                entry.series_exact,
                "order {} witness {:?}",
                entry.order, entry.witness
            );
            assert!(entry.float_max_err < 1e-9, "order {}: {}", entry.order, entry.float_max_err);
        }
    }

    #[test]
    fn bch_with_zero_k_gives_q_at_every_order() {
        let params = params_from_fractions(2, &[(1, 8), (1, 16)], (1, 10)).unwrap();
        let spec = RealizationSpec::new(params, FKind::SqrtOneMinusB, 8).unwrap();
        let k = vec![rat(0, 1), rat(0, 1)];
        let probes = vec![vec![rat(1, 10), rat(1, 10)]];
        let report = bch_cross_check(&spec, &k, &probes, 3).unwrap();
        assert!(report.all_passed(1e-12));
    }

    #[test]
    fn bch_undeformed_is_plain_translation() {
        let params = crate::params::DeformationParams::undeformed(2).unwrap();
        let spec = RealizationSpec::new(params, FKind::SqrtOneMinusB, 8).unwrap();
        let k = vec![rat(2, 5), rat(-1, 3)];
        let probes = vec![vec![rat(1, 7), rat(1, 9)]];
        let report = bch_cross_check(&spec, &k, &probes, 3).unwrap();
        assert!(report.all_passed(1e-13));
    }
}
