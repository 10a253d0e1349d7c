//! Parameter validation, Gram matrices and explicit generator realizations
//! for orthocentric cones.
//!
//! A parameter tuple `(λ0; λ1..λd)` of nonzero reals is admissible exactly
//! when either all entries are positive (case A) or exactly one is negative
//! and the total sum is negative (case B). In both cases the matrix with
//! entries `1/λ0 + δij/λi` is positive definite and is the Gram matrix of
//! `d` linearly independent generators.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Relative tolerance at which `λ0 + … + λd ≈ 0` is treated as a boundary
/// rather than a valid case-B tuple.
const SUM_BOUNDARY_REL_TOL: f64 = 1e-12;

/// Admissibility verdict for a parameter tuple.
///
/// `negative_index` is 0 for λ0 and `i` for the i-th entry of the λ list
/// (1-based), matching the tuple ordering `(λ0, λ1, …, λd)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaseLabel {
    CaseA,
    CaseB { negative_index: usize },
    Invalid { reason: String },
}

impl CaseLabel {
    pub fn is_valid(&self) -> bool {
        !matches!(self, CaseLabel::Invalid { .. })
    }
}

/// Classify a parameter tuple by exact sign logic (no eigendecomposition).
///
/// The sign vector is only checked for well-formedness; admissibility
/// depends on the λ's alone.
pub fn validate(lambda0: f64, lambdas: &[f64], eps: &[i8]) -> Result<CaseLabel> {
    if lambda0 == 0.0 || !lambda0.is_finite() {
        return Err(Error::ZeroParameter(format!("lambda0 = {lambda0}")));
    }
    for (i, &l) in lambdas.iter().enumerate() {
        if l == 0.0 || !l.is_finite() {
            return Err(Error::ZeroParameter(format!("lambda[{}] = {l}", i + 1)));
        }
    }
    if eps.len() != lambdas.len() {
        return Ok(CaseLabel::Invalid {
            reason: format!("{} signs for {} lambdas", eps.len(), lambdas.len()),
        });
    }
    if let Some(&bad) = eps.iter().find(|&&e| e != 1 && e != -1) {
        return Ok(CaseLabel::Invalid { reason: format!("sign entry {bad} is not ±1") });
    }

    let negatives: Vec<usize> = std::iter::once(lambda0)
        .chain(lambdas.iter().copied())
        .enumerate()
        .filter(|(_, l)| *l < 0.0)
        .map(|(i, _)| i)
        .collect();
    match negatives.len() {
        0 => Ok(CaseLabel::CaseA),
        1 => {
            let sum = lambda0 + lambdas.iter().sum::<f64>();
            let scale = lambda0.abs() + lambdas.iter().map(|l| l.abs()).sum::<f64>();
            if sum.abs() <= SUM_BOUNDARY_REL_TOL * scale {
                Ok(CaseLabel::Invalid {
                    reason: format!("sum {sum:e} is on the degeneracy boundary (|sum| <= {SUM_BOUNDARY_REL_TOL:e} * scale)"),
                })
            } else if sum < 0.0 {
                Ok(CaseLabel::CaseB { negative_index: negatives[0] })
            } else {
                Ok(CaseLabel::Invalid {
                    reason: format!("one negative entry but sum = {sum} >= 0"),
                })
            }
        }
        n => Ok(CaseLabel::Invalid { reason: format!("{n} negative entries") }),
    }
}

/// The validated tuple `(λ0; λ1..λd; ε1..εd)` parametrizing an orthocentric
/// cone. Construction fails unless the tuple satisfies case (A) or (B), so
/// a value of this type is admissible by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeParams {
    lambda0: f64,
    lambdas: Vec<f64>,
    eps: Vec<i8>,
    case: CaseLabel,
}

impl ConeParams {
    pub fn new(lambda0: f64, lambdas: Vec<f64>, eps: Vec<i8>) -> Result<Self> {
        let case = validate(lambda0, &lambdas, &eps)?;
        if let CaseLabel::Invalid { reason } = &case {
            return Err(Error::InvalidParams(reason.clone()));
        }
        Ok(Self { lambda0, lambdas, eps, case })
    }

    /// Convenience constructor with all signs +1.
    pub fn all_plus(lambda0: f64, lambdas: Vec<f64>) -> Result<Self> {
        let eps = vec![1i8; lambdas.len()];
        Self::new(lambda0, lambdas, eps)
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn eps(&self) -> &[i8] {
        &self.eps
    }

    pub fn case(&self) -> &CaseLabel {
        &self.case
    }

    /// λ0 + λ1 + … + λd.
    pub fn total_sum(&self) -> f64 {
        self.lambda0 + self.lambdas.iter().sum::<f64>()
    }
}

/// Gram matrix with entries `1/λ0 + δij/λi`; positive definite for every
/// admissible tuple.
pub fn gram_matrix(params: &ConeParams) -> DMatrix<f64> {
    let d = params.dim();
    let off = 1.0 / params.lambda0();
    let mut g = DMatrix::from_element(d, d, off);
    for i in 0..d {
        g[(i, i)] += 1.0 / params.lambdas()[i];
    }
    g
}

/// Closed-form principal minor of the Gram matrix over the index set
/// `subset` (0-based indices into the λ list):
/// `(λ0 + Σ_{i∈I} λi) / (λ0 · Π_{i∈I} λi)`.
pub fn principal_minor(params: &ConeParams, subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut sum = params.lambda0();
    let mut prod = params.lambda0();
    for &i in subset {
        let l = *params
            .lambdas()
            .get(i)
            .ok_or_else(|| Error::InvalidSubset(format!("index {i} out of range")))?;
        sum += l;
        prod *= l;
    }
    Ok(sum / prod)
}

/// Closed-form inverse of the Gram matrix:
/// entries `-λi λj / (λ0 + Σλ) + λi δij`.
pub fn gram_inverse(params: &ConeParams) -> DMatrix<f64> {
    let d = params.dim();
    let s = params.total_sum();
    let l = params.lambdas();
    DMatrix::from_fn(d, d, |i, j| {
        let mut v = -l[i] * l[j] / s;
        if i == j {
            v += l[i];
        }
        v
    })
}

/// Explicit generators `v1..vd ⊂ R^{d+1}` with `⟨vi, vj⟩ = 1/λ0 + δij/λi`,
/// one construction per admissibility branch. The cone itself is
/// `pos(ε1 v1, …, εd vd)`; see [`signed_generators`] for the signed set.
pub fn realize_generators(params: &ConeParams) -> Vec<DVector<f64>> {
    let d = params.dim();
    let l = params.lambdas();
    let l0 = params.lambda0();
    let mut gens = Vec::with_capacity(d);
    match params.case() {
        CaseLabel::CaseA => {
            // v_i = e_i/√λ_i − e_0/√λ_0
            for i in 0..d {
                let mut v = DVector::zeros(d + 1);
                v[i + 1] = 1.0 / l[i].sqrt();
                v[0] = -1.0 / l0.sqrt();
                gens.push(v);
            }
        }
        CaseLabel::CaseB { negative_index: 0 } => {
            // v_i = (√(-S) e_0 + Σ_j √λ_j e_j)/λ_0 + e_i/√λ_i with S = λ0+Σλ
            let s = params.total_sum();
            let mut base = DVector::zeros(d + 1);
            base[0] = (-s).sqrt() / l0;
            for j in 0..d {
                base[j + 1] = l[j].sqrt() / l0;
            }
            for i in 0..d {
                let mut v = base.clone();
                v[i + 1] += 1.0 / l[i].sqrt();
                gens.push(v);
            }
        }
        CaseLabel::CaseB { negative_index } => {
            // λ_k < 0 with k = negative_index - 1 into the λ list:
            // v_i = e_i/√λ_i − e_k/√λ_0 for i ≠ k, and
            // v_k = (√(-S) e_0 + √λ_0 e_k + Σ_{j≠k} √λ_j e_j)/(−λ_k) − e_k/√λ_0
            let k = negative_index - 1;
            let s = params.total_sum();
            for i in 0..d {
                let mut v = DVector::zeros(d + 1);
                if i == k {
                    v[0] = (-s).sqrt() / (-l[k]);
                    v[k + 1] = l0.sqrt() / (-l[k]);
                    for j in 0..d {
                        if j != k {
                            v[j + 1] = l[j].sqrt() / (-l[k]);
                        }
                    }
                } else {
                    v[i + 1] = 1.0 / l[i].sqrt();
                }
                v[k + 1] -= 1.0 / l0.sqrt();
                gens.push(v);
            }
        }
        CaseLabel::Invalid { .. } => unreachable!("ConeParams is valid by construction"),
    }
    gens
}

/// The generators of the cone itself: `ε_i v_i`.
pub fn signed_generators(params: &ConeParams) -> Vec<DVector<f64>> {
    realize_generators(params)
        .into_iter()
        .zip(params.eps())
        .map(|(v, &e)| if e < 0 { -v } else { v })
        .collect()
}
