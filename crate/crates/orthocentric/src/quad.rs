//! Adaptive Gauss-Kronrod quadrature over a chain of breakpoints.
//!
//! All integrals in this crate are one-dimensional with smooth integrands
//! that decay like `e^{-ρ x²/2}`. The decay rate ρ and the finest feature
//! scale of the integrand can differ by many orders of magnitude, so callers
//! pass explicit breakpoints (typically a geometric ladder from the feature
//! scale up to the truncation point) and each cell is then refined by
//! bisection until its local error fits the length-proportional share of
//! the tolerance budget.

use crate::{Error, Result};

/// Tolerances, truncation and subdivision policy for the semi-infinite
/// integrals.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
    /// Extra margin, in units of ln(1/tol), added when choosing truncation
    /// points for integrands that decay like `e^{-ρ x²/2}`.
    pub truncation_safety: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_depth: 30, truncation_safety: 40.0 }
    }
}

impl QuadratureConfig {
    /// Truncation point `Y` such that `∫_Y^∞ e^{-rate·x²/2} dx` is far below
    /// `abs_tol`: `Y = sqrt(2 (ln(1/abs_tol) + truncation_safety) / rate)`.
    pub fn truncation_point(&self, rate: f64) -> f64 {
        debug_assert!(rate > 0.0);
        (2.0 * ((1.0 / self.abs_tol).ln() + self.truncation_safety) / rate).sqrt()
    }

    /// Upper bound on the neglected tail `∫_y^∞ M e^{-rate·x²/2} dx` via the
    /// Mills inequality.
    pub fn tail_bound(&self, rate: f64, y: f64, mantissa_bound: f64) -> f64 {
        if y <= 0.0 || rate <= 0.0 {
            return f64::INFINITY;
        }
        mantissa_bound * (-0.5 * rate * y * y).exp() / (rate * y)
    }
}

/// Value and error estimate of a finished integral.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub err: f64,
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK constants).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss-Kronrod 15(7) evaluation on [a, b]. Returns the Kronrod value
/// and a QUADPACK-style rescaled error estimate.
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut result_gauss = WG[3] * fc;
    let mut result_kronrod = WGK[7] * fc;
    let mut result_abs = result_kronrod.abs();
    let mut fv = [0.0f64; 15];
    fv[7] = fc;
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = f1;
        fv[14 - j] = f2;
        result_kronrod += WGK[j] * (f1 + f2);
        result_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            result_gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * result_kronrod;
    let mut result_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        result_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    let result_kronrod = result_kronrod * half;
    let result_abs = result_abs * half.abs();
    let result_asc = result_asc * half.abs();
    let mut err = ((result_kronrod - result_gauss * half) as f64).abs();
    if result_asc != 0.0 && err != 0.0 {
        err = result_asc * (200.0 * err / result_asc).powf(1.5).min(1.0);
    }
    if result_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * result_abs);
    }
    (result_kronrod, err)
}

struct Cell {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    depth: u32,
}

/// Integrate `f` over the chain of intervals given by `breakpoints`
/// (strictly increasing, at least two entries), greedily bisecting the cell
/// with the largest error estimate until the summed error fits the
/// tolerance. Fully deterministic: ties and summation follow storage order,
/// and the final sum runs left to right.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Quadrature> {
    if breakpoints.len() < 2 {
        return Err(Error::QuadratureFailure("need at least two breakpoints".into()));
    }
    if !(breakpoints.last().unwrap() > &breakpoints[0])
        || !breakpoints.iter().all(|x| x.is_finite())
    {
        return Err(Error::QuadratureFailure("breakpoints must be finite and increasing".into()));
    }
    let mut cells: Vec<Cell> = breakpoints
        .windows(2)
        .map(|w| {
            let (value, err) = gk15(&mut f, w[0], w[1]);
            Cell { a: w[0], b: w[1], value, err, depth: 0 }
        })
        .collect();
    loop {
        let total: f64 = cells.iter().map(|c| c.value).sum();
        let err: f64 = cells.iter().map(|c| c.err).sum();
        if err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
            break;
        }
        let worst = cells
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let c = &cells[worst];
        if c.depth >= cfg.max_depth {
            return Err(Error::QuadratureFailure(format!(
                "error {err:.3e} above tolerance with cell [{:.6e}, {:.6e}] at max depth {}",
                c.a, c.b, cfg.max_depth
            )));
        }
        let m = 0.5 * (c.a + c.b);
        if !(c.a < m && m < c.b) {
            // the cell reached floating point resolution; accept its estimate
            break;
        }
        let (a, b, depth) = (c.a, c.b, c.depth + 1);
        let (v1, e1) = gk15(&mut f, a, m);
        let (v2, e2) = gk15(&mut f, m, b);
        cells[worst] = Cell { a, b: m, value: v1, err: e1, depth };
        cells.push(Cell { a: m, b, value: v2, err: e2, depth });
    }
    cells.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
    let value = cells.iter().map(|c| c.value).sum();
    let err = cells.iter().map(|c| c.err).sum();
    Ok(Quadrature { value, err })
}

/// Breakpoints 0, h0, 2·h0, 4·h0, … doubling up to `upper`. Resolves
/// integrands whose finest feature scale is ≈ h0 while the domain extends
/// orders of magnitude further.
pub fn geometric_breakpoints(upper: f64, h0: f64) -> Vec<f64> {
    debug_assert!(upper > 0.0 && h0 > 0.0);
    let mut pts = vec![0.0];
    let mut h = h0.min(upper);
    loop {
        let next = pts.last().unwrap() + h;
        if next >= upper * (1.0 - 1e-12) {
            pts.push(upper);
            return pts;
        }
        pts.push(next);
        h *= 2.0;
    }
}

/// Symmetric breakpoints for an integral over [-upper, upper] with optional
/// interior knee locations (sorted, deduplicated, clipped to the interior).
pub fn symmetric_breakpoints(upper: f64, knees: &[f64]) -> Vec<f64> {
    let mut pts = vec![-upper, 0.0, upper];
    for &k in knees {
        if k.abs() < upper * (1.0 - 1e-12) && k.is_finite() {
            pts.push(k);
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-300 || (*a - *b).abs() < 1e-12 * upper);
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::SQRT_2PI;

    #[test]
    fn gaussian_mass() {
        let cfg = QuadratureConfig::default();
        let y = cfg.truncation_point(1.0);
        let pts = geometric_breakpoints(y, 0.25);
        let q = integrate(|x| (-0.5 * x * x).exp() / SQRT_2PI, &pts, &cfg).unwrap();
        assert!((q.value - 0.5).abs() < 1e-13, "got {}", q.value);
        assert!(q.err < 1e-10);
    }

    #[test]
    fn narrow_feature_in_huge_domain() {
        // spike of width ~1 inside a domain of width 1e5: the geometric
        // ladder must not lose it
        let cfg = QuadratureConfig::default();
        let pts = geometric_breakpoints(1e5, 0.125);
        let q = integrate(|x| (-0.5 * x * x).exp(), &pts, &cfg).unwrap();
        let want = (std::f64::consts::PI / 2.0).sqrt();
        assert!((q.value - want).abs() < 1e-10);
    }

    #[test]
    fn polynomial_exact() {
        let cfg = QuadratureConfig::default();
        let q = integrate(|x| x * x * x - 2.0 * x + 1.0, &[0.0, 1.0], &cfg).unwrap();
        assert!((q.value - 0.25).abs() < 1e-14);
    }

    #[test]
    fn unreachable_tolerance_reports_failure() {
        let cfg = QuadratureConfig { abs_tol: 1e-300, rel_tol: 1e-300, max_depth: 2, ..Default::default() };
        let r = integrate(|x| 1.0 / (1e-30 + (x - 0.3171).abs()).sqrt(), &[0.0, 1.0], &cfg);
        assert!(matches!(r, Err(Error::QuadratureFailure(_))));
    }
}
