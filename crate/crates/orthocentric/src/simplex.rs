//! Construction, classification, canonicalization and angle computation
//! for orthocentric simplices.
//!
//! A d-simplex (d ≥ 2) is orthocentric when its altitudes meet in a point
//! w. The common value `c = ⟨vi - w, vj - w⟩` over vertex pairs classifies
//! it: acute (c < 0, w inside), rectangular (c = 0, w a vertex) or obtuse
//! (c > 0, w outside). Each class has a canonical τ-parametrized form, and
//! all internal/external angles reduce to `g` evaluations (or, in the
//! rectangular case, to the two limit formulas).

use nalgebra::{DMatrix, DVector};

use crate::gfun::{self, AngleResult, GBranch};
use crate::quad::QuadratureConfig;
use crate::{cones::OrthocentricCone, Error, Result};

/// d+1 affinely independent points in R^N.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSet {
    points: Vec<DVector<f64>>,
}

impl VertexSet {
    pub fn new(points: Vec<DVector<f64>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::DegenerateVertices("need at least two vertices".into()));
        }
        let n = points[0].len();
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::DegenerateVertices("inconsistent coordinate dimensions".into()));
        }
        if points.len() > n + 1 {
            return Err(Error::DegenerateVertices(format!(
                "{} points cannot be affinely independent in R^{n}",
                points.len()
            )));
        }
        Ok(Self { points })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows.iter().map(|r| DVector::from_vec(r.clone())).collect())
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    /// Simplex dimension d (= number of vertices - 1).
    pub fn simplex_dim(&self) -> usize {
        self.points.len() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.points[0].len()
    }

    /// Max squared pairwise distance; the affine-invariant scale used by
    /// the classification tolerances.
    pub fn squared_diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                best = best.max((&self.points[i] - &self.points[j]).norm_squared());
            }
        }
        best
    }
}

/// Orthocentricity verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Acute,
    Rectangular { vertex: usize },
    Obtuse { negative_mu_index: usize },
    NotOrthocentric,
}

/// Full classification record: orthocenter, obtuseness c, the μ weights
/// `μi = 1/(‖vi - w‖² - c)` and the canonical τ vector.
///
/// For `NotOrthocentric` the orthocenter is still the least-squares altitude
/// solution and `residual` quantifies the failure; c is NaN and μ/τ are
/// empty. For the rectangular class the μ entry of the orthocenter vertex
/// is infinite and the canonical τ has d entries (one per non-orthocenter
/// vertex); oblique classes carry d+1 entries.
#[derive(Debug, Clone)]
pub struct SimplexClassification {
    pub verdict: Verdict,
    pub orthocenter: DVector<f64>,
    pub obtuseness: f64,
    pub mu: Vec<f64>,
    pub canonical_tau: Vec<f64>,
    /// Max altitude-equation violation divided by the squared diameter.
    pub residual: f64,
    /// Set when the verdict was within a factor of 32 of the tolerance
    /// boundary between rectangular and oblique.
    pub boundary_warning: bool,
}

fn check_taus(tau: &[f64]) -> Result<()> {
    if let Some(&bad) = tau.iter().find(|&&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::NonPositiveTau(bad));
    }
    Ok(())
}

fn unit(dim: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(dim);
    v[i] = 1.0;
    v
}

/// The acute model simplex `[e0/τ0, …, ed/τd] ⊂ R^{d+1}` with orthocenter
/// `(Σ τi ei)/(Σ τi²)` in its relative interior.
pub fn build_acute(tau: &[f64]) -> Result<VertexSet> {
    check_taus(tau)?;
    if tau.len() < 3 {
        return Err(Error::DegenerateVertices("acute model needs d ≥ 2, i.e. ≥ 3 taus".into()));
    }
    let n = tau.len();
    VertexSet::new((0..n).map(|i| unit(n, i) / tau[i]).collect())
}

/// The obtuse model simplex `[w, e1/τ1, …, ed/τd] ⊂ R^{d+1}` with
/// `w = (Σ τi ei)/(Σ τi²)`; its orthocenter is `e0/τ0`, outside the simplex.
pub fn build_obtuse(tau: &[f64]) -> Result<VertexSet> {
    check_taus(tau)?;
    if tau.len() < 3 {
        return Err(Error::DegenerateVertices("obtuse model needs d ≥ 2, i.e. ≥ 3 taus".into()));
    }
    let n = tau.len();
    let sum_sq: f64 = tau.iter().map(|t| t * t).sum();
    let w = DVector::from_iterator(n, tau.iter().map(|&t| t / sum_sq));
    let mut pts = vec![w];
    for i in 1..n {
        pts.push(unit(n, i) / tau[i]);
    }
    VertexSet::new(pts)
}

/// The rectangular model simplex `[0, e1/τ1, …, ed/τd] ⊂ R^d` with
/// orthocenter at the vertex 0.
pub fn build_rectangular(tau: &[f64]) -> Result<VertexSet> {
    check_taus(tau)?;
    if tau.len() < 2 {
        return Err(Error::DegenerateVertices("rectangular model needs d ≥ 2 taus".into()));
    }
    let d = tau.len();
    let mut pts = vec![DVector::zeros(d)];
    for i in 0..d {
        pts.push(unit(d, i) / tau[i]);
    }
    VertexSet::new(pts)
}

/// The one-parameter family `[νH, e1/τ1, …, ed/τd] ⊂ R^d` with
/// `H = (Σ τi ei)/(Σ τi²)`, sweeping through all three classes: obtuse for
/// ν ∈ (0,1), rectangular at ν = 0, acute for ν < 0 (and mirrored for
/// ν > 1). The orthocenter sits at `-ν/(1-ν) · H`.
pub fn build_nu_family(nu: f64, tau: &[f64]) -> Result<VertexSet> {
    if nu == 1.0 || !nu.is_finite() {
        return Err(Error::NuEqualsOne);
    }
    check_taus(tau)?;
    if tau.len() < 2 {
        return Err(Error::DegenerateVertices("nu family needs d ≥ 2 taus".into()));
    }
    let d = tau.len();
    let sum_sq: f64 = tau.iter().map(|t| t * t).sum();
    let h = DVector::from_iterator(d, tau.iter().map(|&t| t / sum_sq));
    let mut pts = vec![h * nu];
    for i in 0..d {
        pts.push(unit(d, i) / tau[i]);
    }
    VertexSet::new(pts)
}

/// Classify a vertex set: find the least-squares solution w of the altitude
/// system `⟨vi - w, vj - vk⟩ = 0` within the affine hull, and read off the
/// class from the sign of the common product c when the residual passes.
pub fn classify(vs: &VertexSet, tol: f64) -> Result<SimplexClassification> {
    let pts = vs.points();
    let m = pts.len();
    let d = m - 1;
    if d < 2 {
        return Err(Error::DegenerateVertices("classification requires d ≥ 2".into()));
    }
    let scale = vs.squared_diameter();
    if !(scale > 0.0) {
        return Err(Error::DegenerateVertices("coincident vertices".into()));
    }

    // orthonormal chart of the affine hull
    let diffs = DMatrix::from_columns(
        &(1..m).map(|i| &pts[i] - &pts[0]).collect::<Vec<_>>(),
    );
    let qr = diffs.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let rank_tol = 1e-10 * scale.sqrt();
    for i in 0..d {
        if r[(i, i)].abs() <= rank_tol {
            return Err(Error::DegenerateVertices(format!(
                "difference matrix is rank deficient (pivot {i})"
            )));
        }
    }

    // altitude equations: for each vertex i and pair {j,k} not containing i,
    // ⟨w, vj - vk⟩ = ⟨vi, vj - vk⟩, with w = v0 + Q y
    let n_eq = m * (d * (d + 1) / 2 - d) + m * 0 + {
        // (m choose 2) pairs minus the d pairs containing each i, summed:
        // just count directly below instead
        0
    };
    let _ = n_eq;
    let mut rows: Vec<DVector<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for i in 0..m {
        for j in 0..m {
            for k in j + 1..m {
                if j == i || k == i {
                    continue;
                }
                let dir = &pts[j] - &pts[k];
                rows.push(q.transpose() * &dir);
                rhs.push((&pts[i] - &pts[0]).dot(&dir));
            }
        }
    }
    let a = DMatrix::from_rows(&rows.iter().map(|r| r.transpose()).collect::<Vec<_>>());
    let b = DVector::from_vec(rhs);
    let svd = a.clone().svd(true, true);
    let y = svd
        .solve(&b, 1e-13 * scale)
        .map_err(|e| Error::DegenerateVertices(e.to_string()))?;
    let w = &pts[0] + &q * &y;
    let residual_abs = (&a * &y - &b).abs().max();
    let residual = residual_abs / scale;

    if residual_abs > tol * scale {
        return Ok(SimplexClassification {
            verdict: Verdict::NotOrthocentric,
            orthocenter: w,
            obtuseness: f64::NAN,
            mu: Vec::new(),
            canonical_tau: Vec::new(),
            residual,
            boundary_warning: false,
        });
    }

    // common product c and its spread
    let mut c_sum = 0.0;
    let mut n_pairs = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            c_sum += (&pts[i] - &w).dot(&(&pts[j] - &w));
            n_pairs += 1.0;
        }
    }
    let c = c_sum / n_pairs;
    let mut c_dev = 0.0f64;
    for i in 0..m {
        for j in i + 1..m {
            c_dev = c_dev.max(((&pts[i] - &w).dot(&(&pts[j] - &w)) - c).abs());
        }
    }
    if c_dev > 8.0 * tol * scale {
        return Ok(SimplexClassification {
            verdict: Verdict::NotOrthocentric,
            orthocenter: w,
            obtuseness: f64::NAN,
            mu: Vec::new(),
            canonical_tau: Vec::new(),
            residual: residual.max(c_dev / scale),
            boundary_warning: false,
        });
    }

    let dist_sq: Vec<f64> = pts.iter().map(|p| (p - &w).norm_squared()).collect();
    let nearest = dist_sq
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();

    // rectangular needs both c ≈ 0 and w at a vertex; ties go oblique
    let c_small = c.abs() <= tol * scale;
    let w_at_vertex = dist_sq[nearest].sqrt() <= tol * scale.sqrt();
    let boundary_warning = (c.abs() <= 32.0 * tol * scale && !c_small)
        || (c_small && !w_at_vertex)
        || (w_at_vertex && !c_small);

    if c_small && w_at_vertex {
        let mu: Vec<f64> = dist_sq
            .iter()
            .enumerate()
            .map(|(i, &ds)| if i == nearest { f64::INFINITY } else { 1.0 / ds })
            .collect();
        let canonical_tau: Vec<f64> = dist_sq
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != nearest)
            .map(|(_, &ds)| 1.0 / ds.sqrt())
            .collect();
        return Ok(SimplexClassification {
            verdict: Verdict::Rectangular { vertex: nearest },
            orthocenter: w,
            obtuseness: 0.0,
            mu,
            canonical_tau,
            residual,
            boundary_warning,
        });
    }

    let mu: Vec<f64> = dist_sq.iter().map(|&ds| 1.0 / (ds - c)).collect();
    if c < 0.0 {
        // acute: τi = √μi = 1/√(‖vi-w‖² - c)
        let canonical_tau = mu.iter().map(|&m| m.sqrt()).collect();
        Ok(SimplexClassification {
            verdict: Verdict::Acute,
            orthocenter: w,
            obtuseness: c,
            mu,
            canonical_tau,
            residual,
            boundary_warning,
        })
    } else {
        // obtuse: exactly one μ is negative (the special vertex, sorted to
        // slot 0 of the canonical τ); τ0 = √(1/c)
        let neg: Vec<usize> = (0..m).filter(|&i| mu[i] < 0.0).collect();
        let [i0] = neg[..] else {
            return Ok(SimplexClassification {
                verdict: Verdict::NotOrthocentric,
                orthocenter: w,
                obtuseness: c,
                mu,
                canonical_tau: Vec::new(),
                residual,
                boundary_warning,
            });
        };
        let mut canonical_tau = vec![(1.0 / c).sqrt()];
        for (i, &m_i) in mu.iter().enumerate() {
            if i != i0 {
                canonical_tau.push(m_i.sqrt());
            }
        }
        Ok(SimplexClassification {
            verdict: Verdict::Obtuse { negative_mu_index: i0 },
            orthocenter: w,
            obtuseness: c,
            mu,
            canonical_tau,
            residual,
            boundary_warning,
        })
    }
}

/// A classified simplex reduced to its canonical parameters; the input to
/// all angle formulas.
///
/// For the oblique classes `tau` has d+1 entries; the obtuse slot 0 is the
/// special vertex w (the non-orthocenter apex). For the rectangular class
/// `tau` has d entries and the special vertex is the right-angle corner.
#[derive(Debug, Clone, PartialEq)]
pub enum CanonicalSimplex {
    Acute { tau: Vec<f64> },
    Obtuse { tau: Vec<f64> },
    Rectangular { tau: Vec<f64> },
}

impl CanonicalSimplex {
    pub fn acute(tau: Vec<f64>) -> Result<Self> {
        check_taus(&tau)?;
        if tau.len() < 3 {
            return Err(Error::DegenerateVertices("acute class needs d ≥ 2".into()));
        }
        Ok(Self::Acute { tau })
    }

    pub fn obtuse(tau: Vec<f64>) -> Result<Self> {
        check_taus(&tau)?;
        if tau.len() < 3 {
            return Err(Error::DegenerateVertices("obtuse class needs d ≥ 2".into()));
        }
        Ok(Self::Obtuse { tau })
    }

    pub fn rectangular(tau: Vec<f64>) -> Result<Self> {
        check_taus(&tau)?;
        if tau.len() < 2 {
            return Err(Error::DegenerateVertices("rectangular class needs d ≥ 2".into()));
        }
        Ok(Self::Rectangular { tau })
    }

    pub fn from_classification(cl: &SimplexClassification) -> Result<Self> {
        match cl.verdict {
            Verdict::Acute => Self::acute(cl.canonical_tau.clone()),
            Verdict::Obtuse { .. } => Self::obtuse(cl.canonical_tau.clone()),
            Verdict::Rectangular { .. } => Self::rectangular(cl.canonical_tau.clone()),
            Verdict::NotOrthocentric => {
                Err(Error::InvalidParams("simplex is not orthocentric".into()))
            }
        }
    }

    /// Simplex dimension d.
    pub fn dim(&self) -> usize {
        match self {
            Self::Acute { tau } | Self::Obtuse { tau } => tau.len() - 1,
            Self::Rectangular { tau } => tau.len(),
        }
    }

    pub fn tau(&self) -> &[f64] {
        match self {
            Self::Acute { tau } | Self::Obtuse { tau } | Self::Rectangular { tau } => tau,
        }
    }

    /// The μ weights of the oblique classes (acute: τi²; obtuse: slot 0
    /// carries -Στ²).
    fn mu(&self) -> Option<Vec<f64>> {
        match self {
            Self::Acute { tau } => Some(tau.iter().map(|t| t * t).collect()),
            Self::Obtuse { tau } => {
                let total: f64 = tau.iter().map(|t| t * t).sum();
                let mut mu = vec![-total];
                mu.extend(tau.iter().skip(1).map(|t| t * t));
                Some(mu)
            }
            Self::Rectangular { .. } => None,
        }
    }
}

/// Selects a face of a canonical simplex.
///
/// Vertex indexing: 0 is the special vertex (the w apex for obtuse, the
/// right-angle corner for rectangular, e0/τ0 for acute) and 1..=d are the
/// remaining canonical vertices. `Canonical { contains_special, k }` is the
/// k-dimensional face spanned by the first k+1 vertices of the requested
/// kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FaceSelector {
    Vertices(Vec<usize>),
    Canonical { contains_special: bool, k: usize },
}

impl FaceSelector {
    /// Normalize to (contains vertex 0, sorted other indices in 1..=d).
    fn resolve(&self, d: usize) -> Result<(bool, Vec<usize>)> {
        match self {
            FaceSelector::Vertices(idx) => {
                if idx.is_empty() {
                    return Err(Error::FaceOutOfRange("empty vertex set".into()));
                }
                let mut s = idx.clone();
                s.sort_unstable();
                s.dedup();
                if s.len() != idx.len() {
                    return Err(Error::FaceOutOfRange("repeated vertex index".into()));
                }
                if *s.last().unwrap() > d {
                    return Err(Error::FaceOutOfRange(format!(
                        "vertex {} out of range 0..={d}",
                        s.last().unwrap()
                    )));
                }
                let has0 = s[0] == 0;
                let others = if has0 { s[1..].to_vec() } else { s };
                Ok((has0, others))
            }
            FaceSelector::Canonical { contains_special, k } => {
                if *k > d {
                    return Err(Error::FaceOutOfRange(format!("k = {k} exceeds d = {d}")));
                }
                if *contains_special {
                    Ok((true, (1..=*k).collect()))
                } else {
                    if *k + 1 > d {
                        return Err(Error::FaceOutOfRange(format!(
                            "face without the special vertex has at most {} vertices",
                            d
                        )));
                    }
                    Ok((false, (1..=*k + 1).collect()))
                }
            }
        }
    }
}

/// Tangent or normal cone of a face, which for rectangular simplices can
/// leave the orthocentric family.
#[derive(Debug, Clone)]
pub enum FaceCone {
    Cone(OrthocentricCone),
    /// A coordinate orthant of the given dimension.
    Orthant { dim: usize },
    /// A cone specified by the Gram matrix of its generators.
    ExplicitGram(DMatrix<f64>),
}

struct ResolvedFace {
    has_special: bool,
    /// Indices into 1..=d of non-special vertices in the face.
    others: Vec<usize>,
    k: usize,
}

fn resolve_face(s: &CanonicalSimplex, face: &FaceSelector) -> Result<ResolvedFace> {
    let d = s.dim();
    let (has_special, others) = face.resolve(d)?;
    let k = others.len() + usize::from(has_special) - 1;
    Ok(ResolvedFace { has_special, others, k })
}

/// Internal angle β(F, S) of the face selected by `face`.
pub fn internal_angle(
    s: &CanonicalSimplex,
    face: &FaceSelector,
    cfg: &QuadratureConfig,
) -> Result<AngleResult> {
    let f = resolve_face(s, face)?;
    let d = s.dim();
    if f.k == d {
        return Ok(AngleResult { value: 1.0, err_estimate: 0.0, branch: GBranch::Degenerate });
    }
    let tau = s.tau();
    match s {
        CanonicalSimplex::Acute { .. } => {
            // β = g_{d-k}(-Στ²; τ²_complement; +…+)
            let total: f64 = tau.iter().map(|t| t * t).sum();
            let rest = complement_taus(tau, &f);
            gfun::g_raw(-total, &sq(&rest), &plus(rest.len()), cfg)
        }
        CanonicalSimplex::Obtuse { .. } => {
            let t0sq = tau[0] * tau[0];
            if f.has_special {
                // β = g_{d-k}(τ0²; τ²_complement; +…+)
                let rest = complement_taus(tau, &f);
                gfun::g_raw(t0sq, &sq(&rest), &plus(rest.len()), cfg)
            } else {
                // β = g_{d-k}(τ0²; -Στ², τ²_rest; -1, +…+) where the rest
                // runs over the non-face ordinary vertices only
                let total: f64 = tau.iter().map(|t| t * t).sum();
                let rest = complement_taus_nonspecial(tau, &f);
                let mut lambdas = vec![-total];
                lambdas.extend(sq(&rest));
                let mut eps = vec![-1i8];
                eps.extend(plus(rest.len()));
                gfun::g_raw(t0sq, &lambdas, &eps, cfg)
            }
        }
        CanonicalSimplex::Rectangular { .. } => {
            if f.has_special {
                let v = 0.5f64.powi((d - f.k) as i32);
                Ok(AngleResult {
                    value: v,
                    err_estimate: 0.0,
                    branch: GBranch::LimitRectangularBeta,
                })
            } else {
                // explicit limit formula with λ0 = Στ² over all of 1..d
                let total: f64 = tau.iter().map(|t| t * t).sum();
                let rest = complement_taus_rect(tau, &f);
                let mut eps = vec![-1i8];
                eps.extend(plus(rest.len()));
                gfun::g_limit_rectangular(total, &sq(&rest), &eps, cfg)
            }
        }
    }
}

/// External angle γ(F, S) of the face selected by `face`.
pub fn external_angle(
    s: &CanonicalSimplex,
    face: &FaceSelector,
    cfg: &QuadratureConfig,
) -> Result<AngleResult> {
    let f = resolve_face(s, face)?;
    let d = s.dim();
    if f.k == d {
        return Ok(AngleResult { value: 1.0, err_estimate: 0.0, branch: GBranch::Degenerate });
    }
    let tau = s.tau();
    match s {
        CanonicalSimplex::Acute { .. } => {
            // γ = g_{d-k}(Σ_F τ²; τ²_complement; +…+)
            let face_sum = face_tau_sq_sum(tau, &f);
            let rest = complement_taus(tau, &f);
            gfun::g_raw(face_sum, &sq(&rest), &plus(rest.len()), cfg)
        }
        CanonicalSimplex::Obtuse { .. } => {
            if f.has_special {
                // γ = g_{d-k}(-τ0² - Σ_rest τ²; τ²_rest; +…+)
                let rest = complement_taus(tau, &f);
                let rest_sq = sq(&rest);
                let lambda0 = -(tau[0] * tau[0]) - rest_sq.iter().sum::<f64>();
                gfun::g_raw(lambda0, &rest_sq, &plus(rest.len()), cfg)
            } else {
                // γ = g_{d-k}(Σ_F τ²; -Στ², τ²_rest; +…+)
                let total: f64 = tau.iter().map(|t| t * t).sum();
                let face_sum: f64 = f.others.iter().map(|&i| tau[i] * tau[i]).sum();
                let rest = complement_taus_nonspecial(tau, &f);
                let mut lambdas = vec![-total];
                lambdas.extend(sq(&rest));
                gfun::g_raw(face_sum, &lambdas, &plus(rest.len() + 1), cfg)
            }
        }
        CanonicalSimplex::Rectangular { .. } => {
            if f.has_special {
                let v = 0.5f64.powi((d - f.k) as i32);
                Ok(AngleResult {
                    value: v,
                    err_estimate: 0.0,
                    branch: GBranch::LimitRectangularGamma,
                })
            } else {
                // γ = (2π)^{-1/2} ∫_0^∞ Π Φ(τj x / √(Σ_F τ²)) e^{-x²/2} dx
                let face_sum: f64 =
                    f.others.iter().map(|&i| tau[i - 1] * tau[i - 1]).sum();
                let rest = complement_taus_rect(tau, &f);
                gfun::g_limit_lambda1_neg_inf(face_sum, &sq(&rest), &plus(rest.len() + 1), cfg)
            }
        }
    }
}

/// Taus of vertices NOT in the face for the oblique classes, where tau has
/// d+1 entries indexed directly by vertex id.
fn complement_taus(tau: &[f64], f: &ResolvedFace) -> Vec<f64> {
    let mut in_face = vec![false; tau.len()];
    if f.has_special {
        in_face[0] = true;
    }
    for &i in &f.others {
        in_face[i] = true;
    }
    tau.iter()
        .enumerate()
        .filter(|&(i, _)| !in_face[i])
        .map(|(_, &t)| t)
        .collect()
}

/// Complement over the ordinary vertices 1..=d only, for obtuse faces that
/// do not contain the special vertex (τ0 enters those formulas separately).
fn complement_taus_nonspecial(tau: &[f64], f: &ResolvedFace) -> Vec<f64> {
    let mut in_face = vec![false; tau.len()];
    for &i in &f.others {
        in_face[i] = true;
    }
    (1..tau.len()).filter(|&i| !in_face[i]).map(|i| tau[i]).collect()
}

/// Same for the rectangular class, where vertex 0 is the right-angle corner
/// (no tau) and vertex i ∈ 1..=d carries tau[i-1].
fn complement_taus_rect(tau: &[f64], f: &ResolvedFace) -> Vec<f64> {
    let mut in_face = vec![false; tau.len() + 1];
    if f.has_special {
        in_face[0] = true;
    }
    for &i in &f.others {
        in_face[i] = true;
    }
    (1..=tau.len()).filter(|&i| !in_face[i]).map(|i| tau[i - 1]).collect()
}

fn face_tau_sq_sum(tau: &[f64], f: &ResolvedFace) -> f64 {
    let mut s = 0.0;
    if f.has_special {
        s += tau[0] * tau[0];
    }
    for &i in &f.others {
        s += tau[i] * tau[i];
    }
    s
}

fn sq(ts: &[f64]) -> Vec<f64> {
    ts.iter().map(|t| t * t).collect()
}

fn plus(n: usize) -> Vec<i8> {
    vec![1i8; n]
}

/// Tangent and normal cones (pointed parts) at the selected face. Oblique
/// classes stay orthocentric; rectangular faces through the right-angle
/// corner give orthants and the remaining rectangular faces give explicit
/// Gram matrices related by `N · M / Σ_F τ² = Id`.
pub fn tangent_normal_cones(
    s: &CanonicalSimplex,
    face: &FaceSelector,
) -> Result<(FaceCone, FaceCone)> {
    let f = resolve_face(s, face)?;
    let d = s.dim();
    if f.k >= d {
        return Err(Error::FaceOutOfRange("tangent/normal cones need a proper face".into()));
    }
    if let Some(mu) = s.mu() {
        let mut in_face = vec![false; d + 1];
        if f.has_special {
            in_face[0] = true;
        }
        for &i in &f.others {
            in_face[i] = true;
        }
        let face_sum: f64 = (0..=d).filter(|&i| in_face[i]).map(|i| mu[i]).sum();
        let total: f64 = mu.iter().sum();
        let rest: Vec<f64> = (0..=d).filter(|&i| !in_face[i]).map(|i| mu[i]).collect();
        let tangent =
            OrthocentricCone::from_raw(face_sum, rest.clone(), plus(rest.len()))?;
        let normal_eps: Vec<i8> = rest.iter().map(|&m| if m < 0.0 { -1 } else { 1 }).collect();
        let normal = OrthocentricCone::from_raw(-total, rest, normal_eps)?;
        Ok((FaceCone::Cone(tangent), FaceCone::Cone(normal)))
    } else {
        // rectangular
        let tau = s.tau();
        if f.has_special {
            return Ok((FaceCone::Orthant { dim: d - f.k }, FaceCone::Orthant { dim: d - f.k }));
        }
        let p: f64 = tau.iter().map(|t| t * t).sum();
        let q: f64 = f.others.iter().map(|&i| tau[i - 1] * tau[i - 1]).sum();
        let rest = complement_taus_rect(tau, &f);
        let r = rest.len();
        // normal Gram: [[p, -τ_R'], [-τ_R, Id]]
        let mut ng = DMatrix::identity(r + 1, r + 1);
        ng[(0, 0)] = p;
        for (j, &t) in rest.iter().enumerate() {
            ng[(0, j + 1)] = -t;
            ng[(j + 1, 0)] = -t;
        }
        // tangent Gram: [[1, τ_R'], [τ_R, q·Id + τ_R τ_R']]
        let mut tg = DMatrix::zeros(r + 1, r + 1);
        tg[(0, 0)] = 1.0;
        for (j, &t) in rest.iter().enumerate() {
            tg[(0, j + 1)] = t;
            tg[(j + 1, 0)] = t;
            for (l, &u) in rest.iter().enumerate() {
                tg[(j + 1, l + 1)] = t * u + if j == l { q } else { 0.0 };
            }
        }
        Ok((FaceCone::ExplicitGram(tg), FaceCone::ExplicitGram(ng)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    const TOL: f64 = 1e-9;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn acute_build_and_classify() {
        let vs = build_acute(&[2.0, 1.0, 1.0]).unwrap();
        let cl = classify(&vs, TOL).unwrap();
        assert_eq!(cl.verdict, Verdict::Acute);
        let want_c = -1.0 / 6.0;
        assert!((cl.obtuseness - want_c).abs() < 1e-12, "c = {}", cl.obtuseness);
        // μi = τi², orthocenter weights τi²/Στ²
        for (mu, want) in cl.mu.iter().zip([4.0, 1.0, 1.0]) {
            assert!((mu - want).abs() < 1e-9);
        }
        let mut tau = cl.canonical_tau.clone();
        tau.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((tau[0] - 2.0).abs() < 1e-8 && (tau[1] - 1.0).abs() < 1e-8);
        // orthocenter formula (Σ τi ei)/(Σ τi²)
        let sum_sq = 6.0;
        for i in 0..3 {
            assert!((cl.orthocenter[i] - [2.0, 1.0, 1.0][i] / sum_sq).abs() < 1e-10);
        }
    }

    #[test]
    fn equilateral_triangle_side() {
        let vs = build_acute(&[1.0, 1.0, 1.0]).unwrap();
        let p = vs.points();
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(((&p[i] - &p[j]).norm() - 2.0f64.sqrt()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn obtuse_build_and_classify() {
        let tau = [0.8, 1.1, 0.6];
        let vs = build_obtuse(&tau).unwrap();
        let cl = classify(&vs, TOL).unwrap();
        assert_eq!(cl.verdict, Verdict::Obtuse { negative_mu_index: 0 });
        assert!((cl.obtuseness - 1.0 / (0.8 * 0.8)).abs() < 1e-9);
        let total: f64 = tau.iter().map(|t| t * t).sum();
        assert!((cl.mu[0] + total).abs() < 1e-8, "μ0 = {}", cl.mu[0]);
        assert!((cl.mu[1] - 1.1 * 1.1).abs() < 1e-8);
        // canonical τ recovered in order (special vertex first)
        for (a, b) in cl.canonical_tau.iter().zip(tau) {
            assert!((a - b).abs() < 1e-8, "{:?} vs {:?}", cl.canonical_tau, tau);
        }
        // orthocenter is e0/τ0
        assert!((cl.orthocenter[0] - 1.0 / 0.8).abs() < 1e-9);
        assert!(cl.orthocenter[1].abs() < 1e-9);
    }

    #[test]
    fn rectangular_build_and_classify() {
        let vs = build_rectangular(&[1.0, 2.0]).unwrap();
        let cl = classify(&vs, TOL).unwrap();
        assert_eq!(cl.verdict, Verdict::Rectangular { vertex: 0 });
        assert_eq!(cl.obtuseness, 0.0);
        assert!((cl.canonical_tau[0] - 1.0).abs() < 1e-10);
        assert!((cl.canonical_tau[1] - 2.0).abs() < 1e-10);
        // edges from the corner are orthogonal
        let p = vs.points();
        assert!((&p[1] - &p[0]).dot(&(&p[2] - &p[0])).abs() < 1e-15);
    }

    #[test]
    fn nu_family_sweeps_classes() {
        let tau = [1.0, 1.5];
        // ν = 0 coincides with the rectangular model
        let v0 = build_nu_family(0.0, &tau).unwrap();
        assert_eq!(v0, build_rectangular(&tau).unwrap());
        // ν < 0 acute, ν ∈ (0,1) obtuse
        let va = classify(&build_nu_family(-1.0, &tau).unwrap(), TOL).unwrap();
        assert_eq!(va.verdict, Verdict::Acute);
        let vo = classify(&build_nu_family(0.5, &tau).unwrap(), TOL).unwrap();
        assert!(matches!(vo.verdict, Verdict::Obtuse { .. }));
        assert!(build_nu_family(1.0, &tau).is_err());
        // c formula
        let nu = 0.5;
        let p: f64 = tau.iter().map(|t| t * t).sum();
        let want_c = nu * (2.0 - nu) / ((1.0 - nu) * (1.0 - nu) * p);
        assert!((vo.obtuseness - want_c).abs() < 1e-10);
    }

    #[test]
    fn nu_family_isometric_to_obtuse_model() {
        // ν = 1 - τ0/√(τ0² + Στ²) makes [νH, e_i/τ_i] isometric to the
        // obtuse model with parameters (τ0, τ)
        let tau0 = 0.9;
        let tau = [1.2, 0.7];
        let p: f64 = tau.iter().map(|t| t * t).sum();
        let nu = 1.0 - tau0 / (tau0 * tau0 + p).sqrt();
        let a = build_nu_family(nu, &tau).unwrap();
        let b = build_obtuse(&[tau0, tau[0], tau[1]]).unwrap();
        for i in 0..3 {
            for j in i + 1..3 {
                let da = (&a.points()[i] - &a.points()[j]).norm();
                let db = (&b.points()[i] - &b.points()[j]).norm();
                assert!((da - db).abs() < 1e-10, "edge {i}{j}: {da} vs {db}");
            }
        }
    }

    #[test]
    fn triangles_always_orthocentric_tetrahedra_not() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..100 {
            let tri = VertexSet::from_rows(&[
                vec![rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0],
                vec![rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0],
                vec![rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0],
            ])
            .unwrap();
            let cl = classify(&tri, 1e-7).unwrap();
            assert_ne!(cl.verdict, Verdict::NotOrthocentric, "residual {}", cl.residual);
        }
        for _ in 0..100 {
            let tet = VertexSet::from_rows(
                &(0..4)
                    .map(|_| (0..3).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect())
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            let cl = classify(&tet, 1e-8).unwrap();
            assert_eq!(cl.verdict, Verdict::NotOrthocentric);
        }
    }

    #[test]
    fn degenerate_and_low_dim_rejected() {
        let seg = VertexSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(classify(&seg, TOL).is_err());
        let flat =
            VertexSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert!(matches!(classify(&flat, TOL), Err(Error::DegenerateVertices(_))));
        assert!(VertexSet::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).is_err());
    }

    #[test]
    fn egervary_swap() {
        // replacing any vertex of an oblique simplex by its orthocenter
        // yields an orthocentric simplex whose orthocenter is that vertex
        let vs = build_obtuse(&[0.8, 1.1, 0.6]).unwrap();
        let cl = classify(&vs, TOL).unwrap();
        for i in 0..3 {
            let mut pts = vs.points().to_vec();
            let removed = pts[i].clone();
            pts[i] = cl.orthocenter.clone();
            let swapped = VertexSet::new(pts).unwrap();
            let cl2 = classify(&swapped, 1e-8).unwrap();
            assert_ne!(cl2.verdict, Verdict::NotOrthocentric);
            assert!((&cl2.orthocenter - &removed).norm() < 1e-7);
        }
    }

    #[test]
    fn equilateral_angles() {
        let s = CanonicalSimplex::acute(vec![1.0, 1.0, 1.0]).unwrap();
        for v in 0..3usize {
            let b = internal_angle(&s, &FaceSelector::Vertices(vec![v]), &cfg()).unwrap();
            assert!((b.value - 1.0 / 6.0).abs() < 1e-9, "vertex {v}: {}", b.value);
            let g = external_angle(&s, &FaceSelector::Vertices(vec![v]), &cfg()).unwrap();
            assert!((g.value - 1.0 / 3.0).abs() < 1e-9);
        }
        // whole simplex: both angles 1
        let all = FaceSelector::Vertices(vec![0, 1, 2]);
        assert_eq!(internal_angle(&s, &all, &cfg()).unwrap().value, 1.0);
        assert_eq!(external_angle(&s, &all, &cfg()).unwrap().value, 1.0);
    }

    #[test]
    fn right_isoceles_angles() {
        let s = CanonicalSimplex::rectangular(vec![1.0, 1.0]).unwrap();
        // face [e1] (not containing the corner): 45° vertex
        let f = FaceSelector::Vertices(vec![1]);
        let b = internal_angle(&s, &f, &cfg()).unwrap();
        assert!((b.value - 0.125).abs() < 1e-9, "{}", b.value);
        let g = external_angle(&s, &f, &cfg()).unwrap();
        assert!((g.value - 0.375).abs() < 1e-9, "{}", g.value);
        // faces containing the corner: 1/2^{d-k} on both sides
        let c = FaceSelector::Vertices(vec![0]);
        assert!((internal_angle(&s, &c, &cfg()).unwrap().value - 0.25).abs() < 1e-15);
        assert!((external_angle(&s, &c, &cfg()).unwrap().value - 0.25).abs() < 1e-15);
        let ce = FaceSelector::Canonical { contains_special: true, k: 1 };
        assert!((internal_angle(&s, &ce, &cfg()).unwrap().value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn triangle_angle_sum_all_classes() {
        let cases = [
            CanonicalSimplex::acute(vec![1.3, 0.7, 2.0]).unwrap(),
            CanonicalSimplex::obtuse(vec![0.9, 1.4, 0.5]).unwrap(),
            CanonicalSimplex::rectangular(vec![1.1, 0.6]).unwrap(),
        ];
        for s in cases {
            let mut sum = 0.0;
            for v in 0..3usize {
                sum += internal_angle(&s, &FaceSelector::Vertices(vec![v]), &cfg())
                    .unwrap()
                    .value;
            }
            assert!((sum - 0.5).abs() < 1e-9, "{s:?}: sum = {sum}");
        }
    }

    #[test]
    fn facet_angles_are_half() {
        // k = d-1: tangent cone is a half-space, normal cone a ray
        let s = CanonicalSimplex::obtuse(vec![0.9, 1.4, 0.5, 0.8]).unwrap();
        for f in [
            FaceSelector::Canonical { contains_special: true, k: 2 },
            FaceSelector::Canonical { contains_special: false, k: 2 },
        ] {
            let b = internal_angle(&s, &f, &cfg()).unwrap();
            let g = external_angle(&s, &f, &cfg()).unwrap();
            assert!((b.value - 0.5).abs() < 1e-10, "{f:?}: β = {}", b.value);
            assert!((g.value - 0.5).abs() < 1e-10, "{f:?}: γ = {}", g.value);
        }
    }

    #[test]
    fn planar_angle_oracle_acute() {
        // d = 2 vertex angles against direct arccos on the coordinates
        let tau = [1.3f64, 0.7, 2.0];
        let vs = build_acute(&tau).unwrap();
        let s = CanonicalSimplex::acute(tau.to_vec()).unwrap();
        let p = vs.points();
        for v in 0..3usize {
            let (a, b) = match v {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let u1 = &p[a] - &p[v];
            let u2 = &p[b] - &p[v];
            let ang = (u1.dot(&u2) / (u1.norm() * u2.norm())).acos()
                / (2.0 * std::f64::consts::PI);
            let beta = internal_angle(&s, &FaceSelector::Vertices(vec![v]), &cfg())
                .unwrap()
                .value;
            assert!((ang - beta).abs() < 1e-9, "vertex {v}: {ang} vs {beta}");
        }
    }

    #[test]
    fn tangent_normal_parameters() {
        // acute vertex e0/τ0: tangent (τ0²; τ1²..; +…+)
        let s = CanonicalSimplex::acute(vec![1.3, 0.7, 2.0]).unwrap();
        let (t, n) = tangent_normal_cones(&s, &FaceSelector::Vertices(vec![0])).unwrap();
        let FaceCone::Cone(t) = t else { panic!() };
        let FaceCone::Cone(n) = n else { panic!() };
        assert!((t.params().lambda0() - 1.69).abs() < 1e-12);
        assert!((t.params().lambdas()[0] - 0.49).abs() < 1e-12);
        assert!((t.params().lambdas()[1] - 4.0).abs() < 1e-12);
        let total = 1.69 + 0.49 + 4.0;
        assert!((n.params().lambda0() + total).abs() < 1e-12);

        // obtuse face [e1/τ1]: normal is C_d(τ0²; -Στ², τ2²..; -1, +…+)
        let s = CanonicalSimplex::obtuse(vec![0.9, 1.4, 0.5]).unwrap();
        let (_, n) = tangent_normal_cones(&s, &FaceSelector::Vertices(vec![1])).unwrap();
        let FaceCone::Cone(n) = n else { panic!() };
        let total: f64 = [0.9f64, 1.4, 0.5].iter().map(|t| t * t).sum();
        assert!((n.params().lambda0() - 0.81).abs() < 1e-12);
        assert!((n.params().lambdas()[0] + total).abs() < 1e-12);
        assert_eq!(n.params().eps()[0], -1);
    }

    #[test]
    fn rectangular_tangent_normal_grams() {
        let s = CanonicalSimplex::rectangular(vec![1.0, 1.0]).unwrap();
        let (t, n) = tangent_normal_cones(&s, &FaceSelector::Vertices(vec![1])).unwrap();
        let FaceCone::ExplicitGram(tg) = t else { panic!() };
        let FaceCone::ExplicitGram(ng) = n else { panic!() };
        // normal Gram [[2, -1], [-1, 1]]
        assert_eq!(ng, DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 1.0]));
        // product relation N · M / q = Id with q = τ1² = 1
        let q = 1.0;
        let prod = &ng * &tg / q;
        assert!((prod - DMatrix::identity(2, 2)).abs().max() < 1e-10);
        // orthant faces
        let (t, n) = tangent_normal_cones(&s, &FaceSelector::Vertices(vec![0])).unwrap();
        assert!(matches!(t, FaceCone::Orthant { dim: 2 }));
        assert!(matches!(n, FaceCone::Orthant { dim: 2 }));
    }

    #[test]
    fn classify_round_trip_all_classes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for d in [2usize, 3, 4] {
            for _ in 0..20 {
                let tau: Vec<f64> =
                    (0..=d).map(|_| 0.3 + 2.0 * rng.random::<f64>()).collect();
                // acute round trip (canonical τ up to permutation)
                let cl = classify(&build_acute(&tau).unwrap(), TOL).unwrap();
                assert_eq!(cl.verdict, Verdict::Acute);
                let mut a = cl.canonical_tau.clone();
                let mut b = tau.clone();
                a.sort_by(|x, y| x.partial_cmp(y).unwrap());
                b.sort_by(|x, y| x.partial_cmp(y).unwrap());
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).abs() < 1e-8 * y, "acute τ {x} vs {y}");
                }
                // obtuse round trip (τ0 fixed to slot 0)
                let cl = classify(&build_obtuse(&tau).unwrap(), TOL).unwrap();
                assert!(matches!(cl.verdict, Verdict::Obtuse { .. }));
                for (x, y) in cl.canonical_tau.iter().zip(&tau) {
                    assert!((x - y).abs() < 1e-8 * y, "obtuse τ {x} vs {y}");
                }
                // rectangular round trip
                let r = &tau[..d];
                let cl = classify(&build_rectangular(r).unwrap(), TOL).unwrap();
                assert!(matches!(cl.verdict, Verdict::Rectangular { .. }));
                let mut a = cl.canonical_tau.clone();
                let mut b = r.to_vec();
                a.sort_by(|x, y| x.partial_cmp(y).unwrap());
                b.sort_by(|x, y| x.partial_cmp(y).unwrap());
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).abs() < 1e-8 * y, "rect τ {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn face_selector_validation() {
        let s = CanonicalSimplex::acute(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(internal_angle(&s, &FaceSelector::Vertices(vec![]), &cfg()).is_err());
        assert!(internal_angle(&s, &FaceSelector::Vertices(vec![5]), &cfg()).is_err());
        assert!(internal_angle(
            &s,
            &FaceSelector::Canonical { contains_special: false, k: 2 },
            &cfg()
        )
        .is_err());
        assert!(internal_angle(etc(), &FaceSelector::Vertices(vec![0, 0]), &cfg()).is_err());
        fn etc() -> &'static CanonicalSimplex {
            use std::sync::OnceLock;
            static S: OnceLock<CanonicalSimplex> = OnceLock::new();
            S.get_or_init(|| CanonicalSimplex::acute(vec![1.0, 1.0, 1.0]).unwrap())
        }
    }
}
