//! Path functionals and their Monte Carlo aggregation.
//!
//! Time integrals are discretised with the left-endpoint rule, matching
//! the scheme's own piecewise structure (the coefficient is evaluated at
//! the left grid point of each step).

use serde::Serialize;
use thiserror::Error;

use crate::coefficients::CoefficientSpec;
use crate::em::GridPath;

#[derive(Debug, Error, PartialEq)]
pub enum EstimatorError {
    #[error("paths have different horizons")]
    HorizonMismatch,
    #[error("grids do not nest: {a} and {b} steps")]
    NonNestingGrids { a: usize, b: usize },
    #[error("band half-width must be positive, got {0}")]
    BadBand(f64),
    #[error("p-norm order must be >= 1, got {0}")]
    BadOrder(f64),
    #[error("p-norm samples must be nonnegative")]
    NegativeSample,
}

/// Weight placed on states near the target level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EstimatorKind {
    /// Hard window `1_{|x - z| < eps}`.
    Indicator,
    /// Piecewise-linear tent: 1 at `z`, 0 outside `[z - eps, z + eps]`,
    /// Lipschitz with constant `2/eps`. The occupation bound is stated
    /// for Lipschitz windows, so scaling studies default to this kind.
    Tent,
}

#[inline(always)]
fn band_weight(kind: EstimatorKind, distance: f64, eps: f64) -> f64 {
    match kind {
        EstimatorKind::Indicator => {
            if distance < eps {
                1.0
            } else {
                0.0
            }
        }
        EstimatorKind::Tent => (1.0 - distance / eps).max(0.0),
    }
}

/// Occupation estimate over raw grid values: `dt * sum_k w(|x_k - z|)`,
/// left-endpoint (the final grid point is excluded).
pub(crate) fn occupation_near_values(
    values: &[f64],
    dt: f64,
    z: f64,
    eps: f64,
    kind: EstimatorKind,
) -> f64 {
    let steps = values.len() - 1;
    let mut acc = 0.0;
    for &x in &values[..steps] {
        acc += band_weight(kind, (x - z).abs(), eps);
    }
    acc * dt
}

/// Time the path spends within `eps` of level `z`, estimated by the
/// left-endpoint rule with the chosen window kind.
pub fn occupation_near(
    path: &GridPath,
    z: f64,
    eps: f64,
    kind: EstimatorKind,
) -> Result<f64, EstimatorError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(EstimatorError::BadBand(eps));
    }
    Ok(occupation_near_values(
        path.values(),
        path.dt(),
        z,
        eps,
        kind,
    ))
}

/// Discretised local time at level `y` via the quadratic-variation
/// density: `(1/(2 eps)) * dt * sum_k 1_{|x_k - y| < eps} sigma(x_k)^2`.
///
/// Uses `sigma(x)^2 dt` rather than squared path increments as the
/// variation density; that is the scheme's exact conditional variance
/// per step and has lower variance as an estimator.
pub fn local_time_estimate(
    path: &GridPath,
    coefficient: &CoefficientSpec,
    y: f64,
    eps: f64,
) -> Result<f64, EstimatorError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(EstimatorError::BadBand(eps));
    }
    let dt = path.dt();
    let steps = path.steps();
    let mut acc = 0.0;
    for &x in &path.values()[..steps] {
        if (x - y).abs() < eps {
            let s = coefficient.sigma(x);
            acc += s * s;
        }
    }
    Ok(acc * dt / (2.0 * eps))
}

fn check_nesting(a: &GridPath, b: &GridPath) -> Result<(usize, usize), EstimatorError> {
    if a.horizon() != b.horizon() {
        return Err(EstimatorError::HorizonMismatch);
    }
    let (na, nb) = (a.steps(), b.steps());
    if na % nb != 0 && nb % na != 0 {
        return Err(EstimatorError::NonNestingGrids { a: na, b: nb });
    }
    Ok((na, nb))
}

/// Maximum of `|X_a - X_b|` over the coarser grid's points. Grids must
/// nest (one resolution divides the other).
pub fn sup_difference(a: &GridPath, b: &GridPath) -> Result<f64, EstimatorError> {
    sup_difference_by(a, b, |x| x)
}

/// As [`sup_difference`] with `|.|` applied to the values first:
/// `max_k ||X_a| - |X_b||`.
pub fn abs_sup_difference(a: &GridPath, b: &GridPath) -> Result<f64, EstimatorError> {
    sup_difference_by(a, b, f64::abs)
}

fn sup_difference_by(
    a: &GridPath,
    b: &GridPath,
    transform: impl Fn(f64) -> f64,
) -> Result<f64, EstimatorError> {
    let (na, nb) = check_nesting(a, b)?;
    let (coarse, fine) = if na <= nb { (a, b) } else { (b, a) };
    let stride = fine.steps() / coarse.steps();
    let mut sup: f64 = 0.0;
    for (i, &xc) in coarse.values().iter().enumerate() {
        let xf = fine.values()[i * stride];
        sup = sup.max((transform(xc) - transform(xf)).abs());
    }
    Ok(sup)
}

/// Monte Carlo estimate of `E[x^p]^(1/p)` with a 95% confidence
/// half-width on `E[x^p]` (before the root).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PNormEstimate {
    pub p: f64,
    /// `(mean of x^p)^(1/p)`.
    pub value: f64,
    /// 95% half-width on `E[x^p]`, normal approximation.
    pub half_width: f64,
    /// Mean of `x^p` (the pre-root scale the half-width applies to).
    pub mean_pth: f64,
    pub n_paths: usize,
    /// False when fewer than 30 samples back the normal approximation.
    pub ci_reliable: bool,
}

const Z_95: f64 = 1.959963984540054;

/// Aggregate nonnegative samples into an L^p estimate.
pub fn p_norm_aggregate(samples: &[f64], p: f64) -> Result<PNormEstimate, EstimatorError> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(EstimatorError::BadOrder(p));
    }
    if samples.iter().any(|&x| x < 0.0) {
        return Err(EstimatorError::NegativeSample);
    }
    let n = samples.len();
    let mut acc = MeanVarAccumulator::default();
    for &x in samples {
        acc.push(if p == 1.0 { x } else { x.powf(p) });
    }
    let mean = acc.mean();
    let half_width = if n >= 2 {
        Z_95 * (acc.sample_variance() / n as f64).sqrt()
    } else {
        0.0
    };
    Ok(PNormEstimate {
        p,
        value: if p == 1.0 { mean } else { mean.powf(1.0 / p) },
        half_width,
        mean_pth: mean,
        n_paths: n,
        ci_reliable: n >= 30,
    })
}

/// Occupation estimates near one level across a ladder of widths.
#[derive(Debug, Clone, Serialize)]
pub struct OccupationProfile {
    pub z: f64,
    /// `(eps, mean estimate, MC standard error)` per width.
    pub entries: Vec<(f64, f64, f64)>,
    pub n_steps: usize,
    pub n_paths: usize,
    pub estimator_kind: EstimatorKind,
}

/// Aggregate per-path occupation estimates near `z` into a profile,
/// one entry per ladder width.
pub fn occupation_profile(
    paths: &[GridPath],
    z: f64,
    eps_ladder: &[f64],
    kind: EstimatorKind,
) -> Result<OccupationProfile, EstimatorError> {
    let n_steps = paths.first().map(GridPath::steps).unwrap_or(0);
    let mut entries = Vec::with_capacity(eps_ladder.len());
    for &eps in eps_ladder {
        let mut acc = MeanVarAccumulator::default();
        for path in paths {
            acc.push(occupation_near(path, z, eps, kind)?);
        }
        entries.push((eps, acc.mean(), acc.standard_error()));
    }
    Ok(OccupationProfile {
        z,
        entries,
        n_steps,
        n_paths: paths.len(),
        estimator_kind: kind,
    })
}

/// Streaming mean/variance accumulator with an associative,
/// commutative merge; parallel reductions fold these in a fixed order so
/// results do not depend on the worker count.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanVarAccumulator {
    count: u64,
    sum: f64,
    sum_sq: f64,
}

impl MeanVarAccumulator {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &MeanVarAccumulator) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn sample_variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn standard_error(&self) -> f64 {
        (self.sample_variance() / self.count as f64).sqrt()
    }
}
