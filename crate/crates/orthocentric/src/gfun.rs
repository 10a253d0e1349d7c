//! Numerical evaluation of the orthant-probability function
//! `g_d(λ0; λ1..λd; ε1..εd)` in every admissible regime, the
//! shifted-threshold orthant probability, and the two rectangular limit
//! formulas.
//!
//! Three closed-form branches cover the admissible tuples:
//!
//! * all λj > 0 with λ0 > 0 — a real integral of a product of normal CDFs;
//! * all λj > 0 with λ0 < -(λ1+…+λd) — the same integral with purely
//!   imaginary CDF arguments, evaluated through bounded scaled mantissas;
//! * exactly one λk < 0 (λ0 > 0, total sum negative) — a two-integral
//!   formula whose second integrand is again assembled from scaled
//!   mantissas so that only the strictly negative net exponent
//!   `(λ0+…+λd) y²/2` is ever exponentiated.
//!
//! The integrands mix feature scales `1/√λj` with decay scales that can be
//! many orders of magnitude longer, so every integral runs over a geometric
//! breakpoint ladder (see [`crate::quad`]).

use crate::gram::{CaseLabel, ConeParams};
use crate::quad::{self, Quadrature, QuadratureConfig};
use crate::specfun::{
    dawson_scaled, normal_cdf, normal_cdf_complex, normal_tail_scaled, ComplexValue,
    PHI_BOUND_CONSTANT, PHI_COMPLEX_DEFAULT_TERMS, PHI_COMPLEX_MAX_RADIUS, SQRT_2PI,
};
use crate::{Error, Result};

/// Which closed form produced an [`AngleResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GBranch {
    AllPositiveL0Pos,
    AllPositiveL0Neg,
    OneNegative,
    LimitRectangularBeta,
    LimitRectangularGamma,
    Degenerate,
}

/// A solid angle / orthant probability with an attached numerical error
/// estimate (quadrature error plus truncation tail bound).
#[derive(Debug, Clone, Copy)]
pub struct AngleResult {
    pub value: f64,
    pub err_estimate: f64,
    pub branch: GBranch,
}

impl AngleResult {
    fn exact(value: f64, branch: GBranch) -> Self {
        Self { value, err_estimate: 0.0, branch }
    }
}

/// `g_d` for a validated parameter tuple, dispatching on the admissibility
/// case. `g_0 = 1` by convention.
pub fn g(params: &ConeParams, cfg: &QuadratureConfig) -> Result<AngleResult> {
    if params.dim() == 0 {
        return Ok(AngleResult::exact(1.0, GBranch::Degenerate));
    }
    match params.case() {
        CaseLabel::CaseA | CaseLabel::CaseB { negative_index: 0 } => {
            g_all_positive(params.lambda0(), params.lambdas(), params.eps(), cfg)
        }
        CaseLabel::CaseB { .. } => {
            g_one_negative(params.lambda0(), params.lambdas(), params.eps(), cfg)
        }
        CaseLabel::Invalid { .. } => unreachable!("ConeParams is valid by construction"),
    }
}

/// Convenience: `g` from raw arguments.
pub fn g_raw(lambda0: f64, lambdas: &[f64], eps: &[i8], cfg: &QuadratureConfig) -> Result<AngleResult> {
    if lambdas.is_empty() {
        return Ok(AngleResult::exact(1.0, GBranch::Degenerate));
    }
    g(&ConeParams::new(lambda0, lambdas.to_vec(), eps.to_vec())?, cfg)
}

/// `g_d` when all λj > 0 and either λ0 > 0 or λ0 < -(λ1+…+λd):
/// `(2π)^{-1/2} ∫ Π_j Φ(ε_j √(λj/λ0) x) e^{-x²/2} dx` with the convention
/// `√λ0 = i √(-λ0)` for negative λ0.
pub fn g_all_positive(
    lambda0: f64,
    lambdas: &[f64],
    eps: &[i8],
    cfg: &QuadratureConfig,
) -> Result<AngleResult> {
    if lambdas.is_empty() {
        return Ok(AngleResult::exact(1.0, GBranch::Degenerate));
    }
    if lambdas.iter().any(|&l| l <= 0.0) {
        return Err(Error::InvalidParams("g_all_positive requires all λj > 0".into()));
    }
    if eps.len() != lambdas.len() {
        return Err(Error::InvalidParams("sign vector length mismatch".into()));
    }
    let sum: f64 = lambdas.iter().sum();
    if lambda0 > 0.0 {
        let b: Vec<f64> = lambdas.iter().map(|l| (l / lambda0).sqrt()).collect();
        let e: Vec<f64> = eps.iter().map(|&s| f64::from(s)).collect();
        let y = cfg.truncation_point(1.0);
        let bmax = b.iter().cloned().fold(1.0f64, f64::max);
        let pts = quad::geometric_breakpoints(y, 0.125 / bmax);
        let q = quad::integrate(
            |x| {
                let mut p1 = 1.0;
                let mut p2 = 1.0;
                for (bj, ej) in b.iter().zip(&e) {
                    p1 *= normal_cdf(ej * bj * x);
                    p2 *= normal_cdf(-ej * bj * x);
                }
                (p1 + p2) * (-0.5 * x * x).exp() / SQRT_2PI
            },
            &pts,
            cfg,
        )?;
        let tail = cfg.tail_bound(1.0, y, 2.0 / SQRT_2PI);
        Ok(AngleResult {
            value: q.value,
            err_estimate: q.err + tail,
            branch: GBranch::AllPositiveL0Pos,
        })
    } else if lambda0 < -sum {
        // folded form: 2 Re Π_j (½ e^{-bj²x²/2} + i ε_j d̃(bj x)) e^{-ρ x²/2}
        // with bj = √(λj/(-λ0)) < 1 and ρ = (−λ0−Σλ)/(−λ0) > 0.
        let b: Vec<f64> = lambdas.iter().map(|l| (l / -lambda0).sqrt()).collect();
        let e: Vec<f64> = eps.iter().map(|&s| f64::from(s)).collect();
        let rho = (lambda0 + sum) / lambda0; // = (−λ0−Σ)/(−λ0), positive
        let y = cfg.truncation_point(rho);
        let pts = quad::geometric_breakpoints(y, 0.125);
        let q = quad::integrate(
            |x| {
                let (re, _) = signed_imag_product_mantissa(&b, &e, x);
                2.0 * re * (-0.5 * rho * x * x).exp() / SQRT_2PI
            },
            &pts,
            cfg,
        )?;
        let tail = cfg.tail_bound(rho, y, 2.0 / SQRT_2PI);
        Ok(AngleResult {
            value: q.value,
            err_estimate: q.err + tail,
            branch: GBranch::AllPositiveL0Neg,
        })
    } else {
        Err(Error::InvalidParams(format!(
            "λ0 = {lambda0} must be positive or below -(λ1+…+λd) = {}",
            -sum
        )))
    }
}

/// `g_d` when exactly one λk < 0 (with λ0 > 0 and λ0+…+λd < 0):
/// the two-integral formula whose second integrand is evaluated in scaled
/// form with net exponential rate `(λ0+…+λd)/2 < 0`.
pub fn g_one_negative(
    lambda0: f64,
    lambdas: &[f64],
    eps: &[i8],
    cfg: &QuadratureConfig,
) -> Result<AngleResult> {
    if lambda0 <= 0.0 {
        return Err(Error::InvalidParams("g_one_negative requires λ0 > 0".into()));
    }
    if eps.len() != lambdas.len() {
        return Err(Error::InvalidParams("sign vector length mismatch".into()));
    }
    let negatives: Vec<usize> = (0..lambdas.len()).filter(|&j| lambdas[j] < 0.0).collect();
    let [k] = negatives[..] else {
        return Err(Error::InvalidParams(format!(
            "g_one_negative requires exactly one negative λj, found {}",
            negatives.len()
        )));
    };
    let total: f64 = lambda0 + lambdas.iter().sum::<f64>();
    if total >= 0.0 {
        return Err(Error::InvalidParams(format!("total sum {total} must be negative")));
    }
    let ek = f64::from(eps[k]);
    let others: Vec<(f64, f64)> = lambdas
        .iter()
        .zip(eps)
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, (&l, &e))| (l, f64::from(e)))
        .collect();
    let lam_max = lambdas
        .iter()
        .map(|l| l.abs())
        .chain(std::iter::once(lambda0))
        .fold(1.0f64, f64::max);
    let h0 = 0.125 / lam_max.sqrt();

    // ∫_0^∞ e^{-λ0 y²/2} Π_{j≠k} Φ(εk εj √λj y) dy
    let y1 = cfg.truncation_point(lambda0);
    let q1 = quad::integrate(
        |y| {
            let mut p = 1.0;
            for &(lj, ej) in &others {
                p *= normal_cdf(ek * ej * lj.sqrt() * y);
            }
            p * (-0.5 * lambda0 * y * y).exp()
        },
        &quad::geometric_breakpoints(y1, h0),
        cfg,
    )?;
    let tail1 = cfg.tail_bound(lambda0, y1, 1.0);

    // 2 ∫_0^∞ e^{λ0 y²/2} Φ(-√(-λk) y) Im Π_{j≠k} Φ(i εk εj √λj y) dy,
    // assembled as 2 e^{total·y²/2} φ̃(√(-λk) y) Im(mantissa product)
    let (q2, tail2) = if others.is_empty() {
        (Quadrature { value: 0.0, err: 0.0 }, 0.0)
    } else {
        let b: Vec<f64> = others.iter().map(|&(l, _)| l.sqrt()).collect();
        let e: Vec<f64> = others.iter().map(|&(_, s)| ek * s).collect();
        let neg_rate = -total;
        let y2 = cfg.truncation_point(neg_rate);
        let sk = (-lambdas[k]).sqrt();
        let q = quad::integrate(
            |y| {
                let (_, im) = signed_imag_product_mantissa(&b, &e, y);
                2.0 * (0.5 * total * y * y).exp() * normal_tail_scaled(sk * y) * im
            },
            &quad::geometric_breakpoints(y2, h0),
            cfg,
        )?;
        (q, cfg.tail_bound(neg_rate, y2, 1.0))
    };

    let pref = (lambda0 / (2.0 * std::f64::consts::PI)).sqrt();
    Ok(AngleResult {
        value: pref * (q1.value + q2.value),
        err_estimate: pref * (q1.err + q2.err + tail1 + tail2),
        branch: GBranch::OneNegative,
    })
}

/// Mantissa of `Π_j Φ(i e_j b_j x)` with the growth `e^{(Σ b_j²) x²/2}`
/// factored out: the product of `½ e^{-b_j²x²/2} + i e_j d̃(b_j x)`.
fn signed_imag_product_mantissa(b: &[f64], e: &[f64], x: f64) -> (f64, f64) {
    let mut re = 1.0f64;
    let mut im = 0.0f64;
    for (bj, ej) in b.iter().zip(e) {
        let a = bj * x;
        let mre = 0.5 * (-0.5 * a * a).exp();
        let mim = ej * dawson_scaled(a);
        (re, im) = (re * mre - im * mim, re * mim + im * mre);
    }
    (re, im)
}

/// Shared validation for the shifted-orthant family.
fn shifted_checks(lambdas: &[f64], r: f64, thresholds: &[f64], eps: &[i8]) -> Result<f64> {
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::InvalidParams("thresholded orthant requires all λj > 0".into()));
    }
    if thresholds.len() != lambdas.len() || eps.len() != lambdas.len() {
        return Err(Error::InvalidParams("length mismatch among λ, t, ε".into()));
    }
    let sum: f64 = lambdas.iter().sum();
    let rho = 1.0 + r * sum;
    if !(rho > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParams(format!(
            "r = {r} must exceed -1/(λ1+…+λd) = {}",
            -1.0 / sum
        )));
    }
    Ok(rho)
}

/// For r < 0, the largest x such that every complex argument stays inside
/// the Taylor-series radius, or an error if even x = 0 is outside.
fn series_safe_upper(lambdas: &[f64], thresholds: &[f64], r: f64) -> Result<f64> {
    let mut y_safe = f64::INFINITY;
    for (&l, &t) in lambdas.iter().zip(thresholds) {
        let margin = PHI_COMPLEX_MAX_RADIUS * PHI_COMPLEX_MAX_RADIUS / l - t * t;
        if margin <= 0.0 {
            return Err(Error::DomainTooLarge(format!(
                "threshold argument |t√λ| = {:.3} already exceeds the series radius",
                (t * t * l).sqrt()
            )));
        }
        y_safe = y_safe.min((margin / -r).sqrt());
    }
    Ok(y_safe)
}

fn negative_r_truncation(
    lambdas: &[f64],
    thresholds: &[f64],
    r: f64,
    rho: f64,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let y_req = cfg.truncation_point(rho);
    let y_safe = series_safe_upper(lambdas, thresholds, r)?;
    if y_req <= y_safe {
        return Ok((y_req, cfg.tail_bound(rho, y_req, 2.0 / SQRT_2PI)));
    }
    // integrate only over the series-safe region and bound the rest by the
    // |Φ| majorant; refuse if that bound is not small
    let mantissa = 2.0 * PHI_BOUND_CONSTANT.powi(lambdas.len() as i32) / SQRT_2PI;
    let tail = cfg.tail_bound(rho, y_safe, mantissa);
    if tail > 1e-6 {
        return Err(Error::DomainTooLarge(format!(
            "complex arguments leave the series region at x = {y_safe:.3} \
             with tail bound {tail:.2e} above the 1e-6 cap"
        )));
    }
    Ok((y_safe, tail))
}

/// `P[ε1 η1 ≥ t1, …, εd ηd ≥ td]` for the covariance `r + δij/λi`, by the
/// folded half-line form. Requires all λj > 0 and `r > -1/(λ1+…+λd)`.
///
/// For r < 0 the integrand needs Φ at genuinely complex arguments; those are
/// evaluated by the Taylor branch, and the integral is truncated to the
/// series-safe region (the neglected tail, bounded via the |Φ| majorant,
/// must stay below 1e-6 or the call fails with `DomainTooLarge`).
pub fn shifted_orthant(
    lambdas: &[f64],
    r: f64,
    thresholds: &[f64],
    eps: &[i8],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let rho = shifted_checks(lambdas, r, thresholds, eps)?;
    let e: Vec<f64> = eps.iter().map(|&s| f64::from(s)).collect();
    let sl: Vec<f64> = lambdas.iter().map(|l| l.sqrt()).collect();
    if r >= 0.0 {
        let sr = r.sqrt();
        let y = cfg.truncation_point(rho.min(1.0));
        let mut pts = quad::geometric_breakpoints(y, feature_scale(&sl, sr));
        if sr > 0.0 {
            for (tj, ej) in thresholds.iter().zip(&e) {
                let knee = (tj / (ej * sr)).abs();
                if knee > 0.0 && knee < y {
                    pts.push(knee);
                }
            }
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * y);
        }
        let q = quad::integrate(
            |x| {
                let mut p1 = 1.0;
                let mut p2 = 1.0;
                for j in 0..sl.len() {
                    p1 *= normal_cdf((e[j] * sr * x - thresholds[j]) * sl[j]);
                    p2 *= normal_cdf((-e[j] * sr * x - thresholds[j]) * sl[j]);
                }
                (p1 + p2) * (-0.5 * x * x).exp() / SQRT_2PI
            },
            &pts,
            cfg,
        )?;
        Ok(q.value)
    } else {
        let (y, _tail) = negative_r_truncation(lambdas, thresholds, r, rho, cfg)?;
        let sr = (-r).sqrt();
        let pts = quad::geometric_breakpoints(y, feature_scale(&sl, sr));
        let mut failure: Option<Error> = None;
        let q = quad::integrate(
            |x| {
                let mut prod = ComplexValue::new(1.0, 0.0);
                for j in 0..sl.len() {
                    let z = ComplexValue::new(-thresholds[j] * sl[j], e[j] * sr * x * sl[j]);
                    match normal_cdf_complex(z, PHI_COMPLEX_DEFAULT_TERMS) {
                        Ok(v) => prod = prod.mul(v),
                        Err(err) => {
                            failure.get_or_insert(err);
                            return 0.0;
                        }
                    }
                }
                2.0 * prod.re * (-0.5 * x * x).exp() / SQRT_2PI
            },
            &pts,
            cfg,
        )?;
        if let Some(err) = failure {
            return Err(err);
        }
        Ok(q.value)
    }
}

/// The full-line form of the same probability (the two forms are equal by
/// analytic continuation); kept as an independent numerical route for the
/// equivalence tests.
pub fn shifted_orthant_unfolded(
    lambdas: &[f64],
    r: f64,
    thresholds: &[f64],
    eps: &[i8],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let rho = shifted_checks(lambdas, r, thresholds, eps)?;
    let e: Vec<f64> = eps.iter().map(|&s| f64::from(s)).collect();
    let sl: Vec<f64> = lambdas.iter().map(|l| l.sqrt()).collect();
    if r >= 0.0 {
        let sr = r.sqrt();
        let y = cfg.truncation_point(rho.min(1.0));
        let knees: Vec<f64> = if sr > 0.0 {
            thresholds.iter().zip(&e).map(|(tj, ej)| tj / (ej * sr)).collect()
        } else {
            Vec::new()
        };
        let pts = quad::symmetric_breakpoints(y, &knees);
        let q = quad::integrate(
            |x| {
                let mut p = 1.0;
                for j in 0..sl.len() {
                    p *= normal_cdf((e[j] * sr * x - thresholds[j]) * sl[j]);
                }
                p * (-0.5 * x * x).exp() / SQRT_2PI
            },
            &pts,
            cfg,
        )?;
        Ok(q.value)
    } else {
        let (y, _tail) = negative_r_truncation(lambdas, thresholds, r, rho, cfg)?;
        let sr = (-r).sqrt();
        let pts = quad::symmetric_breakpoints(y, &[]);
        let mut failure: Option<Error> = None;
        // the odd imaginary part integrates to zero over the symmetric
        // interval, so the real part carries the whole value
        let q = quad::integrate(
            |x| {
                let mut prod = ComplexValue::new(1.0, 0.0);
                for j in 0..sl.len() {
                    let z = ComplexValue::new(-thresholds[j] * sl[j], e[j] * sr * x * sl[j]);
                    match normal_cdf_complex(z, PHI_COMPLEX_DEFAULT_TERMS) {
                        Ok(v) => prod = prod.mul(v),
                        Err(err) => {
                            failure.get_or_insert(err);
                            return 0.0;
                        }
                    }
                }
                prod.re * (-0.5 * x * x).exp() / SQRT_2PI
            },
            &pts,
            cfg,
        )?;
        if let Some(err) = failure {
            return Err(err);
        }
        Ok(q.value)
    }
}

/// The boundary case `r = -1/(λ1+…+λd)` (differences from a weighted mean),
/// evaluated at r slightly above the boundary. The continuity of the limit
/// is not quantified, so the returned value carries an unavoidable offset
/// error of relative size ~1e-8 on top of the quadrature error.
pub fn shifted_orthant_at_boundary(
    lambdas: &[f64],
    thresholds: &[f64],
    eps: &[i8],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let sum: f64 = lambdas.iter().sum();
    if !(sum > 0.0) {
        return Err(Error::InvalidParams("λ sum must be positive".into()));
    }
    let r = -(1.0 - 1e-8) / sum;
    shifted_orthant(lambdas, r, thresholds, eps, cfg)
}

fn feature_scale(sqrt_lambdas: &[f64], sr: f64) -> f64 {
    let m = sqrt_lambdas.iter().cloned().fold(0.0f64, f64::max) * sr.max(1.0);
    0.125 / m.max(1.0)
}

/// `lim_{λ1→-∞} g_d(λ0; λ1, rest…) =
/// (2π)^{-1/2} ∫_0^∞ Π_{j≥2} Φ(ε1 εj √(λj/λ0) x) e^{-x²/2} dx`.
///
/// `eps` carries the full sign vector `(ε1, ε2, …)`, one entry more than
/// `rest`. This is the external-angle formula of rectangular simplices.
pub fn g_limit_lambda1_neg_inf(
    lambda0: f64,
    rest: &[f64],
    eps: &[i8],
    cfg: &QuadratureConfig,
) -> Result<AngleResult> {
    if !(lambda0 > 0.0) || rest.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidParams("limit formula requires λ0, rest > 0".into()));
    }
    if eps.len() != rest.len() + 1 {
        return Err(Error::InvalidParams("eps must have one entry per λ including λ1".into()));
    }
    if rest.is_empty() {
        return Ok(AngleResult::exact(0.5, GBranch::LimitRectangularGamma));
    }
    let e1 = f64::from(eps[0]);
    let b: Vec<f64> = rest.iter().map(|l| (l / lambda0).sqrt()).collect();
    let e: Vec<f64> = eps[1..].iter().map(|&s| e1 * f64::from(s)).collect();
    let y = cfg.truncation_point(1.0);
    let bmax = b.iter().cloned().fold(1.0f64, f64::max);
    let q = quad::integrate(
        |x| {
            let mut p = 1.0;
            for (bj, ej) in b.iter().zip(&e) {
                p *= normal_cdf(ej * bj * x);
            }
            p * (-0.5 * x * x).exp() / SQRT_2PI
        },
        &quad::geometric_breakpoints(y, 0.125 / bmax),
        cfg,
    )?;
    Ok(AngleResult {
        value: q.value,
        err_estimate: q.err + cfg.tail_bound(1.0, y, 1.0 / SQRT_2PI),
        branch: GBranch::LimitRectangularGamma,
    })
}

/// `lim_{λ1→-∞} g_d(-λ0-λ1; λ1, rest…) = 2^{-d} + ∫_0^∞ (π y)^{-1}
/// e^{-λ0 y²/2} Im Π_{j≥2} Φ(i ε1 εj √λj y) dy`, requiring
/// `λ0 > λ2+…+λd`. This is the internal-angle formula of rectangular
/// simplices; the integrand extends continuously to y = 0.
pub fn g_limit_rectangular(
    lambda0: f64,
    rest: &[f64],
    eps: &[i8],
    cfg: &QuadratureConfig,
) -> Result<AngleResult> {
    if rest.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidParams("limit formula requires rest > 0".into()));
    }
    if eps.len() != rest.len() + 1 {
        return Err(Error::InvalidParams("eps must have one entry per λ including λ1".into()));
    }
    let rest_sum: f64 = rest.iter().sum();
    if !(lambda0 > rest_sum) {
        return Err(Error::InvalidParams(format!(
            "rectangular limit requires λ0 = {lambda0} > λ2+…+λd = {rest_sum}"
        )));
    }
    let ell = rest.len() + 1;
    let base = 0.5f64.powi(ell as i32);
    if rest.is_empty() {
        return Ok(AngleResult::exact(0.5, GBranch::LimitRectangularBeta));
    }
    let e1 = f64::from(eps[0]);
    let b: Vec<f64> = rest.iter().map(|l| l.sqrt()).collect();
    let e: Vec<f64> = eps[1..].iter().map(|&s| e1 * f64::from(s)).collect();
    let rho = lambda0 - rest_sum;
    let y = cfg.truncation_point(rho);
    let bmax = b.iter().cloned().fold(1.0f64, f64::max);
    // Im Π/y -> (1/2)^{ℓ-2} Σ_j e_j b_j / √(2π) as y -> 0
    let limit0 = 0.5f64.powi(ell as i32 - 2) * b.iter().zip(&e).map(|(bj, ej)| bj * ej).sum::<f64>()
        / (SQRT_2PI * std::f64::consts::PI);
    let q = quad::integrate(
        |yv| {
            if yv == 0.0 {
                return limit0;
            }
            let (_, im) = signed_imag_product_mantissa(&b, &e, yv);
            im / (std::f64::consts::PI * yv) * (-0.5 * rho * yv * yv).exp()
        },
        &quad::geometric_breakpoints(y, 0.125 / bmax),
        cfg,
    )?;
    let tail = cfg.tail_bound(rho, y, 1.0 / (std::f64::consts::PI * y));
    Ok(AngleResult {
        value: base + q.value,
        err_estimate: q.err + tail,
        branch: GBranch::LimitRectangularBeta,
    })
}
