//! Independent Monte-Carlo oracles: orthant probabilities by Cholesky
//! sampling, solid angles by membership counting, conic intrinsic volumes
//! by metric projection (nonnegative least squares), and empirical
//! statistics of planar Gaussian polytopes.
//!
//! Everything is driven by counter-based ChaCha8 streams: a `(seed,
//! stream_index)` pair fully determines the sample sequence, so estimates
//! are reproducible bit-for-bit and distinct stream indices give
//! statistically independent runs (the stream index is the cipher nonce).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::gram::{self, ConeParams};
use crate::{Error, Result};

/// A reproducible, splittable random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    /// The generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// A Monte-Carlo estimate with its provenance.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub stream_index: u64,
}

impl McEstimate {
    fn from_sums(sum: f64, sum_sq: f64, n: u64, stream: RngStream) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = ((sum_sq - sum * sum / nf) / (nf - 1.0)).max(0.0);
        Self {
            mean,
            stderr: (var / nf).sqrt(),
            n_samples: n,
            seed: stream.seed,
            stream_index: stream.stream_index,
        }
    }

    /// z-score of a closed-form value against this estimate.
    pub fn z_score(&self, value: f64) -> f64 {
        (value - self.mean) / self.stderr
    }
}

/// Estimate `P[ε_j η_j ≤ 0 ∀j]` for the cone's structured covariance by
/// sampling through its Cholesky factor.
pub fn orthant_probability(
    params: &ConeParams,
    n_samples: u64,
    stream: RngStream,
) -> Result<McEstimate> {
    let d = params.dim();
    let sigma = gram::gram_matrix(params);
    let chol = sigma.cholesky().ok_or(Error::CholeskyFailure)?;
    let l = chol.l();
    let eps: Vec<f64> = params.eps().iter().map(|&e| f64::from(e)).collect();
    let mut rng = stream.rng();
    let mut z = vec![0.0f64; d];
    let mut hits = 0u64;
    for _ in 0..n_samples {
        for zj in z.iter_mut() {
            *zj = rng.sample(StandardNormal);
        }
        let mut inside = true;
        for i in 0..d {
            let mut eta = 0.0;
            for j in 0..=i {
                eta += l[(i, j)] * z[j];
            }
            if eps[i] * eta > 0.0 {
                inside = false;
                break;
            }
        }
        if inside {
            hits += 1;
        }
    }
    Ok(bernoulli_estimate(hits, n_samples, stream))
}

fn bernoulli_estimate(hits: u64, n: u64, stream: RngStream) -> McEstimate {
    let h = hits as f64;
    McEstimate::from_sums(h, h, n, stream)
}

/// Upper-triangular factor of the generator matrix in an orthonormal basis
/// of its span: V = QR with R square. Membership and projection are then
/// d-dimensional problems on R.
fn span_factor(generators: &[DVector<f64>]) -> Result<DMatrix<f64>> {
    if generators.is_empty() {
        return Err(Error::SingularGenerators);
    }
    let cols: Vec<_> = generators.to_vec();
    let m = DMatrix::from_columns(&cols);
    let qr = m.qr();
    let r = qr.r();
    let scale = r.abs().max();
    for i in 0..r.nrows().min(r.ncols()) {
        if r[(i, i)].abs() <= 1e-12 * scale {
            return Err(Error::SingularGenerators);
        }
    }
    Ok(r)
}

/// Estimate the solid angle `α(pos(generators)) = P[ξ ∈ C]` for a
/// rotation-invariant ξ on the span: sample a standard Gaussian in span
/// coordinates and test membership by back-substitution.
pub fn solid_angle(
    generators: &[DVector<f64>],
    n_samples: u64,
    stream: RngStream,
) -> Result<McEstimate> {
    let r = span_factor(generators)?;
    let d = r.ncols();
    let mut rng = stream.rng();
    let mut z = DVector::zeros(d);
    let mut hits = 0u64;
    for _ in 0..n_samples {
        for j in 0..d {
            z[j] = rng.sample(StandardNormal);
        }
        if membership(&r, &z) {
            hits += 1;
        }
    }
    Ok(bernoulli_estimate(hits, n_samples, stream))
}

/// Solid angle of the cone whose generators have the given Gram matrix.
pub fn solid_angle_from_gram(
    gram: &DMatrix<f64>,
    n_samples: u64,
    stream: RngStream,
) -> Result<McEstimate> {
    let chol = gram.clone().cholesky().ok_or(Error::CholeskyFailure)?;
    let l = chol.l();
    let gens: Vec<DVector<f64>> = (0..gram.nrows()).map(|i| l.row(i).transpose()).collect();
    solid_angle(&gens, n_samples, stream)
}

/// Solve c from R c = z (R upper triangular) and test c ≥ 0.
fn membership(r: &DMatrix<f64>, z: &DVector<f64>) -> bool {
    let d = r.ncols();
    let mut c = vec![0.0f64; d];
    for i in (0..d).rev() {
        let mut s = z[i];
        for j in i + 1..d {
            s -= r[(i, j)] * c[j];
        }
        c[i] = s / r[(i, i)];
        if c[i] < 0.0 {
            return false;
        }
    }
    true
}

/// Iteration cap factor for the active-set projector: 3·d².
fn nnls_iteration_cap(d: usize) -> usize {
    3 * d * d + 10
}

/// Lawson-Hanson nonnegative least squares for small dense systems:
/// minimizes ‖A x − b‖ subject to x ≥ 0. Returns the coefficient vector.
pub fn nonnegative_least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let n = a.ncols();
    let m = a.nrows();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * a.abs().max() * b.abs().max().max(1.0);
    let cap = nnls_iteration_cap(n);
    let mut outer = 0;
    loop {
        // dual w = Aᵀ(b − Ax)
        let resid = b - a * &x;
        let w = a.transpose() * &resid;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if !passive[j] && w[j] > tol {
                if best.map_or(true, |(_, bw)| w[j] > bw) {
                    best = Some((j, w[j]));
                }
            }
        }
        let Some((enter, _)) = best else {
            return Ok(x);
        };
        outer += 1;
        if outer > cap {
            return Err(Error::ProjectionNonConvergence);
        }
        passive[enter] = true;
        loop {
            // least squares on the passive set
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub = a.select_columns(idx.iter());
            let s_sub = solve_least_squares(&sub, b, m)?;
            if s_sub.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (pos, &j) in idx.iter().enumerate() {
                    x[j] = s_sub[pos];
                }
                break;
            }
            // step toward s until the first coefficient hits zero
            let mut alpha = f64::INFINITY;
            for (pos, &j) in idx.iter().enumerate() {
                if s_sub[pos] <= 0.0 {
                    let step = x[j] / (x[j] - s_sub[pos]);
                    alpha = alpha.min(step);
                }
            }
            for (pos, &j) in idx.iter().enumerate() {
                x[j] += alpha * (s_sub[pos] - x[j]);
            }
            for &j in &idx {
                if x[j] <= tol.max(1e-300) {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            outer += 1;
            if outer > cap {
                return Err(Error::ProjectionNonConvergence);
            }
        }
    }
}

fn solve_least_squares(a: &DMatrix<f64>, b: &DVector<f64>, m: usize) -> Result<DVector<f64>> {
    // normal equations are fine at these sizes (d ≤ ~8, well-conditioned
    // simplicial cones)
    let at = a.transpose();
    let ata = &at * a;
    let atb = &at * b;
    debug_assert_eq!(a.nrows(), m);
    ata.clone()
        .cholesky()
        .map(|ch| ch.solve(&atb))
        .or_else(|| ata.lu().solve(&atb))
        .ok_or(Error::SingularGenerators)
}

/// Metric projection of `x` onto `pos(columns of r)`: returns the
/// nonnegative coefficient vector and the projected point.
pub fn project_onto_cone(r: &DMatrix<f64>, x: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    let c = nonnegative_least_squares(r, x)?;
    let p = r * &c;
    Ok((c, p))
}

/// Estimate the conic intrinsic volumes of the simplicial cone spanned by
/// `generators`: project standard Gaussian samples onto the cone and tally
/// the number of strictly positive coefficients (the dimension of the face
/// hit by the projection).
pub fn conic_intrinsic_volumes(
    generators: &[DVector<f64>],
    n_samples: u64,
    stream: RngStream,
) -> Result<Vec<McEstimate>> {
    let r = span_factor(generators)?;
    let d = r.ncols();
    let mut rng = stream.rng();
    let mut counts = vec![0u64; d + 1];
    let mut z = DVector::zeros(d);
    for _ in 0..n_samples {
        for j in 0..d {
            z[j] = rng.sample(StandardNormal);
        }
        let (c, _) = project_onto_cone(&r, &z)?;
        let k = c.iter().filter(|&&v| v > 0.0).count();
        counts[k] += 1;
    }
    Ok(counts
        .into_iter()
        .map(|hits| bernoulli_estimate(hits, n_samples, stream))
        .collect())
}

/// Per-replicate statistics of the planar polytope `[g_1/τ_1 … g_n/τ_n]`.
fn hull_replicate(
    n: usize,
    tau: &[f64],
    rng: &mut ChaCha8Rng,
    pts: &mut Vec<(f64, f64)>,
) -> (usize, f64) {
    pts.clear();
    for tj in tau.iter().take(n) {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        pts.push((x / tj, y / tj));
    }
    let hull = convex_hull(pts);
    let area = shoelace(&hull);
    (hull.len(), area)
}

/// Expected vertex and edge counts of the planar scaled Gaussian polytope,
/// estimated over `n_polytopes` independent hulls. In the plane f1 = f0.
pub fn empirical_f_vector_2d(
    n: usize,
    tau: &[f64],
    n_polytopes: u64,
    stream: RngStream,
) -> Result<(McEstimate, McEstimate)> {
    check_planar_args(n, tau)?;
    let mut rng = stream.rng();
    let mut pts = Vec::with_capacity(n);
    let (mut s, mut ss) = (0.0, 0.0);
    for _ in 0..n_polytopes {
        let (f0, _) = hull_replicate(n, tau, &mut rng, &mut pts);
        let f = f0 as f64;
        s += f;
        ss += f * f;
    }
    let est = McEstimate::from_sums(s, ss, n_polytopes, stream);
    Ok((est, est))
}

/// Expected area of the planar scaled Gaussian polytope.
pub fn empirical_volume_2d(
    n: usize,
    tau: &[f64],
    n_polytopes: u64,
    stream: RngStream,
) -> Result<McEstimate> {
    check_planar_args(n, tau)?;
    let mut rng = stream.rng();
    let mut pts = Vec::with_capacity(n);
    let (mut s, mut ss) = (0.0, 0.0);
    for _ in 0..n_polytopes {
        let (_, area) = hull_replicate(n, tau, &mut rng, &mut pts);
        s += area;
        ss += area * area;
    }
    Ok(McEstimate::from_sums(s, ss, n_polytopes, stream))
}

fn check_planar_args(n: usize, tau: &[f64]) -> Result<()> {
    if n < 3 || tau.len() < n {
        return Err(Error::InvalidParams(format!(
            "planar oracle needs n ≥ 3 points and one τ per point, got n = {n}, {} τ",
            tau.len()
        )));
    }
    if let Some(&bad) = tau.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::NonPositiveTau(bad));
    }
    Ok(())
}

/// Monotone-chain convex hull with an epsilon collinearity guard: points on
/// a hull edge are not counted as vertices.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let scale = p
        .iter()
        .map(|&(x, y)| x.abs().max(y.abs()))
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let eps = 1e-12 * scale * scale;
    let cross =
        |o: (f64, f64), a: (f64, f64), b: (f64, f64)| -> f64 {
            (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
        };
    let mut lower: Vec<(f64, f64)> = Vec::with_capacity(p.len());
    for &pt in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], pt) <= eps
        {
            lower.pop();
        }
        lower.push(pt);
    }
    let mut upper: Vec<(f64, f64)> = Vec::with_capacity(p.len());
    for &pt in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], pt) <= eps
        {
            upper.pop();
        }
        upper.push(pt);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn shoelace(hull: &[(f64, f64)]) -> f64 {
    if hull.len() < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..hull.len() {
        let (x1, y1) = hull[i];
        let (x2, y2) = hull[(i + 1) % hull.len()];
        s += x1 * y2 - x2 * y1;
    }
    0.5 * s.abs()
}
