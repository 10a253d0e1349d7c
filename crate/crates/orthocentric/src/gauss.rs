//! Closed-form expectations for the scaled Gaussian polytope
//! `[g_1/τ_1, …, g_n/τ_n] ⊂ R^d`: expected face counts, the Euclidean
//! intrinsic volumes of the acute model simplex, and the expected volume.
//!
//! The polytope is the image of the acute model (n-1)-simplex under a
//! standard Gaussian projection, so the expected f-vector is a finite
//! double sum of external × internal angles of that simplex and the
//! expected volume follows from its d-th intrinsic volume.

use crate::gfun;
use crate::quad::QuadratureConfig;
use crate::subsets::{self, binomial};
use crate::{Error, Result};

/// Cap on the number of `g` evaluations a single expectation may spend.
pub const DEFAULT_G_EVAL_BUDGET: u64 = 10_000_000;

/// Dimensions and scale parameters of the polytope `[g_1/τ_1 … g_n/τ_n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolytopeSpec {
    d: usize,
    n: usize,
    tau: Vec<f64>,
}

impl GaussianPolytopeSpec {
    pub fn new(d: usize, n: usize, tau: Vec<f64>) -> Result<Self> {
        if d == 0 || n < d + 1 {
            return Err(Error::InvalidParams(format!(
                "need n ≥ d+1 Gaussian points in dimension d ≥ 1, got n = {n}, d = {d}"
            )));
        }
        if tau.len() != n {
            return Err(Error::InvalidParams(format!("{} τ values for n = {n}", tau.len())));
        }
        if let Some(&bad) = tau.iter().find(|&&t| !(t > 0.0) || !t.is_finite()) {
            return Err(Error::NonPositiveTau(bad));
        }
        Ok(Self { d, n, tau })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }
}

/// Expected face counts `E f_0 … E f_{d-1}` with per-entry error estimates.
#[derive(Debug, Clone)]
pub struct ExpectedFVector {
    pub values: Vec<f64>,
    pub err_estimates: Vec<f64>,
}

fn fvector_g_eval_count(d: usize, n: usize, k: usize) -> u64 {
    let mut total = 0u64;
    let mut s = 0usize;
    while d >= 1 + 2 * s + k {
        let h_verts = (d - 2 * s) as u64;
        let outer = binomial(n as u64, h_verts);
        let inner = binomial(h_verts, (k + 1) as u64);
        total = total.saturating_add(outer.saturating_mul(1 + inner));
        s += 1;
    }
    total
}

/// Expected number of k-faces for every k ∈ 0..d, via the projection
/// formula: `E f_k = 2 Σ_s Σ_{|I|=d-2s} γ(H_I, T) Σ_{F ⊂ H_I, dim F = k}
/// β(F, H_I)` where T is the acute model (n-1)-simplex.
pub fn expected_f_vector(
    spec: &GaussianPolytopeSpec,
    cfg: &QuadratureConfig,
) -> Result<ExpectedFVector> {
    let (d, n, tau) = (spec.d, spec.n, &spec.tau);
    let budget = (0..d).fold(0u64, |acc, k| acc.saturating_add(fvector_g_eval_count(d, n, k)));
    if budget > DEFAULT_G_EVAL_BUDGET {
        return Err(Error::CombinatorialBudgetExceeded(format!(
            "{budget} g-evaluations needed, cap is {DEFAULT_G_EVAL_BUDGET}"
        )));
    }
    let tau_sq: Vec<f64> = tau.iter().map(|t| t * t).collect();
    let mut values = vec![0.0; d];
    let mut errs = vec![0.0; d];
    for k in 0..d {
        let mut total = 0.0;
        let mut err = 0.0;
        let mut s = 0usize;
        // faces H of dimension d-1-2s ≥ k, i.e. d-2s vertices
        while d >= 1 + 2 * s + k {
            let h_verts = d - 2 * s;
            let mut failure: Option<Error> = None;
            subsets::for_each_subset(n, h_verts, |h_idx| {
                if failure.is_some() {
                    return;
                }
                let run = || -> Result<(f64, f64)> {
                    let h_sum: f64 = h_idx.iter().map(|&i| tau_sq[i]).sum();
                    // external angle of H in T: g_{n-d+2s}(Σ_H τ²; τ²_comp)
                    let comp = subsets::complement(n, h_idx);
                    let comp_sq: Vec<f64> = comp.iter().map(|&i| tau_sq[i]).collect();
                    let gamma =
                        gfun::g_raw(h_sum, &comp_sq, &vec![1; comp_sq.len()], cfg)?;
                    // Σ over k-faces F of H of β(F, H) =
                    // Σ over (h_verts - k - 1)-subsets M of H's vertices of
                    // g(-Σ_H τ²; τ²_M)
                    let mut beta_sum = 0.0;
                    let mut beta_err = 0.0;
                    let mut inner_failure: Option<Error> = None;
                    subsets::for_each_subset(h_verts, h_verts - k - 1, |m_idx| {
                        if inner_failure.is_some() {
                            return;
                        }
                        let m_sq: Vec<f64> =
                            m_idx.iter().map(|&j| tau_sq[h_idx[j]]).collect();
                        match gfun::g_raw(-h_sum, &m_sq, &vec![1; m_sq.len()], cfg) {
                            Ok(b) => {
                                beta_sum += b.value;
                                beta_err += b.err_estimate;
                            }
                            Err(e) => inner_failure = Some(e),
                        }
                    });
                    if let Some(e) = inner_failure {
                        return Err(e);
                    }
                    Ok((
                        gamma.value * beta_sum,
                        gamma.err_estimate * beta_sum + gamma.value * beta_err,
                    ))
                };
                match run() {
                    Ok((v, e)) => {
                        total += v;
                        err += e;
                    }
                    Err(e) => failure = Some(e),
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
            s += 1;
        }
        values[k] = 2.0 * total;
        errs[k] = 2.0 * err;
    }
    Ok(ExpectedFVector { values, err_estimates: errs })
}

/// Euclidean intrinsic volumes `V_0 … V_d` of the acute model simplex
/// `[e_0/τ_0, …, e_d/τ_d]`: each k-face contributes its k-volume
/// `√(Σ_F τ²) / (k! Π_F τ)` times its external angle.
pub fn simplex_intrinsic_volumes(tau: &[f64], cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    if tau.is_empty() {
        return Err(Error::InvalidParams("need at least one τ".into()));
    }
    if let Some(&bad) = tau.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::NonPositiveTau(bad));
    }
    let d = tau.len() - 1;
    let tau_sq: Vec<f64> = tau.iter().map(|t| t * t).collect();
    let mut out = Vec::with_capacity(d + 1);
    let mut k_factorial = 1.0f64;
    for k in 0..=d {
        if k > 0 {
            k_factorial *= k as f64;
        }
        let mut total = 0.0;
        let mut failure: Option<Error> = None;
        subsets::for_each_subset(d + 1, k + 1, |idx| {
            if failure.is_some() {
                return;
            }
            let face_sum: f64 = idx.iter().map(|&i| tau_sq[i]).sum();
            let face_prod: f64 = idx.iter().map(|&i| tau[i]).product();
            let comp = subsets::complement(d + 1, idx);
            let comp_sq: Vec<f64> = comp.iter().map(|&i| tau_sq[i]).collect();
            match gfun::g_raw(face_sum, &comp_sq, &vec![1; comp_sq.len()], cfg) {
                Ok(g) => total += face_sum.sqrt() / face_prod * g.value,
                Err(e) => failure = Some(e),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        out.push(total / k_factorial);
    }
    Ok(out)
}

/// Γ(m/2) for positive integer m, exactly (Γ(1/2) = √π).
fn gamma_half_integer(m: u64) -> f64 {
    debug_assert!(m >= 1);
    let mut acc = if m % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut x = if m % 2 == 0 { 2 } else { 1 };
    while x < m {
        acc *= x as f64 / 2.0;
        x += 2;
    }
    acc
}

/// Expected volume of `[g_1/τ_1, …, g_n/τ_n]`:
/// `(2^{d/2} Γ((d+1)/2) / (√π d!)) Σ_{|I|=d+1} √(Σ_I τ²)/Π_I τ ·
/// g_{n-d-1}(Σ_I τ²; τ²_complement; +…+)`.
pub fn expected_volume(spec: &GaussianPolytopeSpec, cfg: &QuadratureConfig) -> Result<f64> {
    let (d, n, tau) = (spec.d, spec.n, &spec.tau);
    let terms = binomial(n as u64, (d + 1) as u64);
    if terms > DEFAULT_G_EVAL_BUDGET {
        return Err(Error::CombinatorialBudgetExceeded(format!(
            "{terms} g-evaluations needed, cap is {DEFAULT_G_EVAL_BUDGET}"
        )));
    }
    let tau_sq: Vec<f64> = tau.iter().map(|t| t * t).collect();
    let mut total = 0.0;
    let mut failure: Option<Error> = None;
    subsets::for_each_subset(n, d + 1, |idx| {
        if failure.is_some() {
            return;
        }
        let face_sum: f64 = idx.iter().map(|&i| tau_sq[i]).sum();
        let face_prod: f64 = idx.iter().map(|&i| tau[i]).product();
        let comp = subsets::complement(n, idx);
        let comp_sq: Vec<f64> = comp.iter().map(|&i| tau_sq[i]).collect();
        match gfun::g_raw(face_sum, &comp_sq, &vec![1; comp_sq.len()], cfg) {
            Ok(g) => total += face_sum.sqrt() / face_prod * g.value,
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let mut d_factorial = 1.0f64;
    for i in 2..=d {
        d_factorial *= i as f64;
    }
    let pref = 2f64.powf(d as f64 / 2.0) * gamma_half_integer(d as u64 + 1)
        / (std::f64::consts::PI.sqrt() * d_factorial);
    Ok(pref * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn gamma_half_integers() {
        assert!((gamma_half_integer(1) - std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert!((gamma_half_integer(2) - 1.0).abs() < 1e-15);
        assert!((gamma_half_integer(3) - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert!((gamma_half_integer(4) - 1.0).abs() < 1e-15);
        assert!((gamma_half_integer(6) - 2.0).abs() < 1e-15);
        assert!((gamma_half_integer(8) - 6.0).abs() < 1e-15);
    }

    #[test]
    fn simplex_is_its_own_hull() {
        // n = d+1: every subset of the d+1 points is a.s. a face
        for (d, n) in [(2usize, 3usize), (3, 4)] {
            let spec = GaussianPolytopeSpec::new(d, n, vec![1.0; n]).unwrap();
            let f = expected_f_vector(&spec, &cfg()).unwrap();
            for k in 0..d {
                let want = binomial((d + 1) as u64, (k + 1) as u64) as f64;
                assert!(
                    (f.values[k] - want).abs() < 1e-8,
                    "d={d} k={k}: {} vs {want}",
                    f.values[k]
                );
            }
        }
        // mixed taus too
        let spec = GaussianPolytopeSpec::new(2, 3, vec![1.0, 2.0, 0.5]).unwrap();
        let f = expected_f_vector(&spec, &cfg()).unwrap();
        assert!((f.values[0] - 3.0).abs() < 1e-8);
        assert!((f.values[1] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn euler_relation() {
        for (d, n) in [(2usize, 5usize), (3, 5), (3, 6)] {
            let tau: Vec<f64> = (0..n).map(|i| 1.0 + 0.3 * i as f64).collect();
            let spec = GaussianPolytopeSpec::new(d, n, tau).unwrap();
            let f = expected_f_vector(&spec, &cfg()).unwrap();
            let mut alt = 0.0;
            for k in 0..d {
                alt += if k % 2 == 0 { f.values[k] } else { -f.values[k] };
            }
            let want = 1.0 - if d % 2 == 0 { 1.0 } else { -1.0 };
            assert!((alt - want).abs() < 1e-8, "(d,n)=({d},{n}): {alt} vs {want}");
        }
    }

    #[test]
    fn f_vector_bounds() {
        let spec = GaussianPolytopeSpec::new(2, 6, vec![1.0, 1.0, 2.0, 2.0, 0.7, 1.3]).unwrap();
        let f = expected_f_vector(&spec, &cfg()).unwrap();
        assert!(f.values[0] <= 6.0 && f.values[0] >= 3.0);
        assert!(f.values[1] >= 3.0);
    }

    #[test]
    fn intrinsic_volumes_triangle() {
        // equilateral side-√2 triangle: V0 = 1, V2 = √3/2
        let v = simplex_intrinsic_volumes(&[1.0, 1.0, 1.0], &cfg()).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-9, "V0 = {}", v[0]);
        assert!((v[2] - 3f64.sqrt() / 2.0).abs() < 1e-9, "V2 = {}", v[2]);
        // V1 = half the perimeter of the side-√2 triangle
        assert!((v[1] - 1.5 * 2f64.sqrt()).abs() < 1e-9, "V1 = {}", v[1]);
        // segment: V1 = length √2
        let v = simplex_intrinsic_volumes(&[1.0, 1.0], &cfg()).unwrap();
        assert!((v[1] - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn expected_volume_values() {
        // d=2, n=3, τ=1: √3/2 by the Gaussian determinant identity
        let spec = GaussianPolytopeSpec::new(2, 3, vec![1.0; 3]).unwrap();
        let v = expected_volume(&spec, &cfg()).unwrap();
        assert!((v - 3f64.sqrt() / 2.0).abs() < 1e-8, "{v}");
        // d=1, n=2: E|g1 - g2| = 2/√π
        let spec = GaussianPolytopeSpec::new(1, 2, vec![1.0; 2]).unwrap();
        let v = expected_volume(&spec, &cfg()).unwrap();
        assert!((v - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-9, "{v}");
    }

    #[test]
    fn volume_single_term_specialization() {
        // n = d+1: E Vol = (2^{d/2} Γ((d+1)/2)/√π) √(Στ²)/(d! Πτ)
        let tau = [1.0f64, 2.0, 0.5, 1.5];
        let d = 3;
        let spec = GaussianPolytopeSpec::new(d, 4, tau.to_vec()).unwrap();
        let v = expected_volume(&spec, &cfg()).unwrap();
        let sum_sq: f64 = tau.iter().map(|t| t * t).sum();
        let prod: f64 = tau.iter().product();
        let want = 2f64.powf(1.5) * gamma_half_integer(4) / std::f64::consts::PI.sqrt()
            * sum_sq.sqrt()
            / (6.0 * prod);
        assert!((v - want).abs() < 1e-10 * want, "{v} vs {want}");
    }

    #[test]
    fn scaling_laws() {
        // multiplying τ by s leaves E f unchanged and divides E Vol by s^d
        let tau = vec![1.0, 1.3, 0.8, 2.0, 1.1];
        let spec1 = GaussianPolytopeSpec::new(2, 5, tau.clone()).unwrap();
        let spec2 =
            GaussianPolytopeSpec::new(2, 5, tau.iter().map(|t| 3.0 * t).collect()).unwrap();
        let f1 = expected_f_vector(&spec1, &cfg()).unwrap();
        let f2 = expected_f_vector(&spec2, &cfg()).unwrap();
        assert!((f1.values[0] - f2.values[0]).abs() < 1e-9);
        let v1 = expected_volume(&spec1, &cfg()).unwrap();
        let v2 = expected_volume(&spec2, &cfg()).unwrap();
        assert!((v1 / v2 - 9.0).abs() < 1e-8);
    }

    #[test]
    fn monotone_in_n() {
        // appending a point can only grow the hull
        let spec3 = GaussianPolytopeSpec::new(2, 3, vec![1.0; 3]).unwrap();
        let spec4 = GaussianPolytopeSpec::new(2, 4, vec![1.0; 4]).unwrap();
        let v3 = expected_volume(&spec3, &cfg()).unwrap();
        let v4 = expected_volume(&spec4, &cfg()).unwrap();
        assert!(v4 > v3);
    }

    #[test]
    fn spec_validation() {
        assert!(GaussianPolytopeSpec::new(2, 2, vec![1.0; 2]).is_err());
        assert!(GaussianPolytopeSpec::new(2, 4, vec![1.0; 3]).is_err());
        assert!(GaussianPolytopeSpec::new(2, 3, vec![1.0, -1.0, 1.0]).is_err());
        assert!(GaussianPolytopeSpec::new(0, 3, vec![1.0; 3]).is_err());
    }

    #[test]
    fn budget_guard() {
        let spec = GaussianPolytopeSpec::new(20, 60, vec![1.0; 60]).unwrap();
        assert!(matches!(
            expected_f_vector(&spec, &cfg()),
            Err(Error::CombinatorialBudgetExceeded(_))
        ));
    }
}
