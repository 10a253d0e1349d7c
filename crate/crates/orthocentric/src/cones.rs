//! The closed algebra of orthocentric cones: polar, faces, tangent and
//! normal cones, solid angle, and conic intrinsic volumes.
//!
//! All operations stay inside the parametric family: the polar of
//! `C_d(λ0; λ; ε)` is `C_d(-λ0-Σλ; λ; ε·sgn λ)`, faces restrict the λ list,
//! and tangent/normal cones at a face shift λ0 by the face's λ sum. Angles
//! then reduce to [`crate::gfun::g`] evaluations.

use nalgebra::DMatrix;

use crate::gfun::{self, AngleResult};
use crate::gram::{self, ConeParams};
use crate::quad::QuadratureConfig;
use crate::subsets;
use crate::{Error, Result};

/// An orthocentric cone, identified (up to isometry) by its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthocentricCone {
    params: ConeParams,
}

/// The conic intrinsic volumes `υ_0..υ_d`, a probability vector.
#[derive(Debug, Clone)]
pub struct IntrinsicVolumeVector {
    pub values: Vec<f64>,
    pub err_estimates: Vec<f64>,
}

impl OrthocentricCone {
    pub fn new(params: ConeParams) -> Self {
        Self { params }
    }

    pub fn from_raw(lambda0: f64, lambdas: Vec<f64>, eps: Vec<i8>) -> Result<Self> {
        Ok(Self::new(ConeParams::new(lambda0, lambdas, eps)?))
    }

    pub fn params(&self) -> &ConeParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    pub fn gram(&self) -> DMatrix<f64> {
        gram::gram_matrix(&self.params)
    }

    /// The polar cone `C_d(-λ0-Σλ; λ; ε·sgn λ)`.
    pub fn polar(&self) -> Result<OrthocentricCone> {
        let p = &self.params;
        let eps = p
            .eps()
            .iter()
            .zip(p.lambdas())
            .map(|(&e, &l)| if l < 0.0 { -e } else { e })
            .collect();
        Self::from_raw(-p.total_sum(), p.lambdas().to_vec(), eps)
    }

    /// The face spanned by the selected generators (0-based indices into
    /// the λ list): `C_{|I|}(λ0; λ_I; ε_I)`.
    pub fn face(&self, subset: &[usize]) -> Result<OrthocentricCone> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        let p = &self.params;
        let mut lambdas = Vec::with_capacity(subset.len());
        let mut eps = Vec::with_capacity(subset.len());
        for &i in subset {
            if i >= p.dim() {
                return Err(Error::InvalidSubset(format!("index {i} out of range")));
            }
            lambdas.push(p.lambdas()[i]);
            eps.push(p.eps()[i]);
        }
        Self::from_raw(p.lambda0(), lambdas, eps)
    }

    /// Tangent and normal cones at the face spanned by `subset` (a proper
    /// nonempty selection of generators). The tangent cone is the direct
    /// orthogonal sum of the face's span and the returned pointed cone
    /// `C_{d-k}(λ0+Σ_I λ; λ_rest; ε_rest)`; the normal cone is
    /// `C_{d-k}(-λ0-Σλ; λ_rest; ε_rest·sgn λ_rest)`.
    pub fn tangent_normal_at_face(
        &self,
        subset: &[usize],
    ) -> Result<(OrthocentricCone, OrthocentricCone)> {
        let p = &self.params;
        if subset.is_empty() || subset.len() >= p.dim() {
            return Err(Error::InvalidSubset(format!(
                "face must be proper and nonempty, got {} of {} generators",
                subset.len(),
                p.dim()
            )));
        }
        let mut in_face = vec![false; p.dim()];
        for &i in subset {
            if i >= p.dim() {
                return Err(Error::InvalidSubset(format!("index {i} out of range")));
            }
            in_face[i] = true;
        }
        let face_sum: f64 = subset.iter().map(|&i| p.lambdas()[i]).sum();
        let rest: Vec<usize> = (0..p.dim()).filter(|&i| !in_face[i]).collect();
        let rest_lambdas: Vec<f64> = rest.iter().map(|&i| p.lambdas()[i]).collect();
        let tangent_eps: Vec<i8> = rest.iter().map(|&i| p.eps()[i]).collect();
        let normal_eps: Vec<i8> = rest
            .iter()
            .map(|&i| if p.lambdas()[i] < 0.0 { -p.eps()[i] } else { p.eps()[i] })
            .collect();
        let tangent =
            Self::from_raw(p.lambda0() + face_sum, rest_lambdas.clone(), tangent_eps)?;
        let normal = Self::from_raw(-p.total_sum(), rest_lambdas, normal_eps)?;
        Ok((tangent, normal))
    }

    /// Solid angle `α(C) = g_d(-λ0-Σλ; λ; ε·sgn λ)`.
    pub fn solid_angle(&self, cfg: &QuadratureConfig) -> Result<AngleResult> {
        let polar = self.polar()?;
        gfun::g(polar.params(), cfg)
    }

    /// Conic intrinsic volumes by the subset-sum formula:
    /// `υ_k = Σ_{|I|=k} α(face_I) · α(N(face_I, C))`, each factor a `g`
    /// evaluation. Exhaustive over all 2^d subsets, so d is capped at 25.
    pub fn conic_intrinsic_volumes(&self, cfg: &QuadratureConfig) -> Result<IntrinsicVolumeVector> {
        let p = &self.params;
        let d = p.dim();
        if d > 25 {
            return Err(Error::CombinatorialBudgetExceeded(format!(
                "2^{d} subset terms; the exhaustive formula is capped at d = 25"
            )));
        }
        let l = p.lambdas();
        let eps = p.eps();
        let mut values = vec![0.0; d + 1];
        let mut errs = vec![0.0; d + 1];
        for k in 0..=d {
            let mut total = 0.0;
            let mut err = 0.0;
            let mut failure: Option<Error> = None;
            subsets::for_each_subset(d, k, |idx| {
                if failure.is_some() {
                    return;
                }
                let run = || -> Result<(f64, f64)> {
                    let face_sum: f64 = idx.iter().map(|&i| l[i]).sum();
                    // α(face): g_k(-λ0-Σ_I λ; λ_I; ε_I sgn λ_I)
                    let face_lambdas: Vec<f64> = idx.iter().map(|&i| l[i]).collect();
                    let face_eps: Vec<i8> = idx
                        .iter()
                        .map(|&i| if l[i] < 0.0 { -eps[i] } else { eps[i] })
                        .collect();
                    let alpha_face = checked_g(
                        -(p.lambda0() + face_sum),
                        &face_lambdas,
                        &face_eps,
                        cfg,
                        "face angle",
                    )?;
                    // α(N(face, C)): g_{d-k}(λ0+Σ_I λ; λ_rest; ε_rest)
                    let rest = subsets::complement(d, idx);
                    let rest_lambdas: Vec<f64> = rest.iter().map(|&i| l[i]).collect();
                    let rest_eps: Vec<i8> = rest.iter().map(|&i| eps[i]).collect();
                    let alpha_normal = checked_g(
                        p.lambda0() + face_sum,
                        &rest_lambdas,
                        &rest_eps,
                        cfg,
                        "normal angle",
                    )?;
                    Ok((
                        alpha_face.value * alpha_normal.value,
                        alpha_face.err_estimate * alpha_normal.value.abs()
                            + alpha_face.value.abs() * alpha_normal.err_estimate,
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
            values[k] = total;
            errs[k] = err;
        }
        Ok(IntrinsicVolumeVector { values, err_estimates: errs })
    }
}

/// g on an intermediate tuple of the intrinsic-volume formula; invalid
/// tuples are reported as such rather than silently assumed admissible.
fn checked_g(
    lambda0: f64,
    lambdas: &[f64],
    eps: &[i8],
    cfg: &QuadratureConfig,
    what: &str,
) -> Result<AngleResult> {
    if lambdas.is_empty() {
        return gfun::g_raw(lambda0, lambdas, eps, cfg);
    }
    match ConeParams::new(lambda0, lambdas.to_vec(), eps.to_vec()) {
        Ok(p) => gfun::g(&p, cfg),
        Err(Error::InvalidParams(reason)) => Err(Error::InvalidIntermediateParams(format!(
            "{what} tuple (λ0={lambda0}, λ={lambdas:?}): {reason}"
        ))),
        Err(e) => Err(e),
    }
}
