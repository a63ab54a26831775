//! Diffusion coefficients, their zero sets, and the integrability
//! classification of levels in the zero set.
//!
//! A level `z` with `sigma(z) = 0` only admits the non-sticky boundary
//! behaviour when `1/sigma^2` is integrable around `z` with vanishing
//! integral as the window shrinks. `classify_level` decides that from a
//! shrinking-window ladder of `inverse_square_integral` values.

use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Window ladder used by [`classify_level`]: 1e-1 down to 1e-6, factor 10.
pub const CLASSIFY_EPS_LADDER: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

#[derive(Debug, Error, PartialEq)]
pub enum CoefficientError {
    #[error("power-law exponent must lie in (0, 1), got {0}")]
    BadExponent(f64),
    #[error("growth constant must be positive and finite, got {0}")]
    BadGrowthConstant(f64),
    #[error("zero-set entries must be finite")]
    BadZeroSet,
    #[error("constant coefficient must be nonzero")]
    ZeroConstant,
    #[error("sigma evaluated to a non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum QuadError {
    #[error("window half-width must be positive, got {0}")]
    BadWindow(f64),
    #[error("quadrature did not converge; achieved tolerance {achieved:e}")]
    NoConvergence { achieved: f64 },
}

/// Functional form of a diffusion coefficient.
#[derive(Clone)]
pub enum CoefficientKind {
    /// `sigma(x) = |x|^alpha`, the CEV-type coefficient.
    PowerLaw { alpha: f64 },
    /// `sigma(x) = sgn(x) |x|^alpha`; same square as `PowerLaw`, named so
    /// the |X|-comparison harness has an odd-coefficient subject.
    OddPowerLaw { alpha: f64 },
    /// User-supplied coefficient with an explicitly declared zero set.
    Custom {
        label: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for CoefficientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientKind::PowerLaw { alpha } => write!(f, "PowerLaw {{ alpha: {alpha} }}"),
            CoefficientKind::OddPowerLaw { alpha } => {
                write!(f, "OddPowerLaw {{ alpha: {alpha} }}")
            }
            CoefficientKind::Custom { label, .. } => write!(f, "Custom {{ label: {label:?} }}"),
        }
    }
}

/// A diffusion coefficient together with its zero set and growth bound.
#[derive(Debug, Clone)]
pub struct CoefficientSpec {
    kind: CoefficientKind,
    /// Finite, sorted, duplicate-free zero set Z(sigma).
    zero_set: Vec<f64>,
    /// K with |sigma(x)| <= K (1 + |x|).
    growth_constant: f64,
    /// User attestation that sigma is a.e. continuous with positive
    /// liminf of sigma^2 at its discontinuity points. Built-in kinds are
    /// continuous, so they attest automatically; custom coefficients
    /// carry whatever the caller declared.
    attested_regular: bool,
}

impl CoefficientSpec {
    pub fn power_law(alpha: f64) -> Result<Self, CoefficientError> {
        check_exponent(alpha)?;
        Ok(CoefficientSpec {
            kind: CoefficientKind::PowerLaw { alpha },
            zero_set: vec![0.0],
            growth_constant: 1.0,
            attested_regular: true,
        })
    }

    pub fn odd_power_law(alpha: f64) -> Result<Self, CoefficientError> {
        check_exponent(alpha)?;
        Ok(CoefficientSpec {
            kind: CoefficientKind::OddPowerLaw { alpha },
            zero_set: vec![0.0],
            growth_constant: 1.0,
            attested_regular: true,
        })
    }

    /// Constant coefficient `sigma == c` with an empty zero set. The
    /// degenerate machinery reduces to the exact scheme; useful as a
    /// control subject.
    pub fn constant(c: f64) -> Result<Self, CoefficientError> {
        if c == 0.0 || !c.is_finite() {
            return Err(CoefficientError::ZeroConstant);
        }
        Self::custom(format!("const({c})"), vec![], c.abs(), true, move |_| c)
    }

    /// Custom coefficient. The zero set must be declared explicitly; no
    /// root finding is attempted, and evaluation returns exactly 0 at
    /// every declared zero.
    pub fn custom(
        label: impl Into<String>,
        mut zero_set: Vec<f64>,
        growth_constant: f64,
        attested_regular: bool,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, CoefficientError> {
        if !(growth_constant > 0.0 && growth_constant.is_finite()) {
            return Err(CoefficientError::BadGrowthConstant(growth_constant));
        }
        if zero_set.iter().any(|z| !z.is_finite()) {
            return Err(CoefficientError::BadZeroSet);
        }
        zero_set.sort_by(f64::total_cmp);
        zero_set.dedup();
        Ok(CoefficientSpec {
            kind: CoefficientKind::Custom {
                label: label.into(),
                f: Arc::new(f),
            },
            zero_set,
            growth_constant,
            attested_regular,
        })
    }

    pub fn kind(&self) -> &CoefficientKind {
        &self.kind
    }

    /// Power-law exponent when the coefficient is a (possibly odd) power law.
    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            CoefficientKind::PowerLaw { alpha } | CoefficientKind::OddPowerLaw { alpha } => {
                Some(alpha)
            }
            CoefficientKind::Custom { .. } => None,
        }
    }

    pub fn zero_set(&self) -> &[f64] {
        &self.zero_set
    }

    pub fn growth_constant(&self) -> f64 {
        self.growth_constant
    }

    pub fn attested_regular(&self) -> bool {
        self.attested_regular
    }

    /// True when `x` is exactly a member of Z(sigma).
    #[inline(always)]
    pub fn is_zero_level(&self, x: f64) -> bool {
        self.zero_set.contains(&x)
    }

    /// Evaluate `sigma(x)`. Exactly 0 at every member of the zero set.
    #[inline(always)]
    pub fn sigma(&self, x: f64) -> f64 {
        match &self.kind {
            CoefficientKind::PowerLaw { alpha } => pow_abs(x, *alpha),
            CoefficientKind::OddPowerLaw { alpha } => {
                let m = pow_abs(x, *alpha);
                if x < 0.0 {
                    -m
                } else {
                    m
                }
            }
            CoefficientKind::Custom { f, .. } => {
                if self.is_zero_level(x) {
                    0.0
                } else {
                    f(x)
                }
            }
        }
    }

    /// Short human-readable form, used in provenance records.
    pub fn describe(&self) -> String {
        let kind = match &self.kind {
            CoefficientKind::PowerLaw { alpha } => format!("power_law(alpha={alpha})"),
            CoefficientKind::OddPowerLaw { alpha } => format!("odd_power_law(alpha={alpha})"),
            CoefficientKind::Custom { label, .. } => format!("custom({label})"),
        };
        format!(
            "{kind} zero_set={:?} growth_constant={}",
            self.zero_set, self.growth_constant
        )
    }
}

// The closure inside Custom is not serialisable; provenance hashing uses
// the declared metadata instead.
impl Serialize for CoefficientSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("CoefficientSpec", 5)?;
        let (kind, alpha, label) = match &self.kind {
            CoefficientKind::PowerLaw { alpha } => ("power_law", Some(*alpha), None),
            CoefficientKind::OddPowerLaw { alpha } => ("odd_power_law", Some(*alpha), None),
            CoefficientKind::Custom { label, .. } => ("custom", None, Some(label.as_str())),
        };
        s.serialize_field("kind", kind)?;
        s.serialize_field("alpha", &alpha)?;
        s.serialize_field("label", &label)?;
        s.serialize_field("zero_set", &self.zero_set)?;
        s.serialize_field("growth_constant", &self.growth_constant)?;
        s.end()
    }
}

fn check_exponent(alpha: f64) -> Result<(), CoefficientError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CoefficientError::BadExponent(alpha))
    }
}

/// `|x|^alpha` with cheap exact paths for the dyadic exponents the
/// studies run hottest on.
#[inline(always)]
fn pow_abs(x: f64, alpha: f64) -> f64 {
    let a = x.abs();
    if alpha == 0.25 {
        a.sqrt().sqrt()
    } else if alpha == 0.5 {
        a.sqrt()
    } else {
        a.powf(alpha)
    }
}

/// Checked evaluation of `sigma(x)`.
pub fn evaluate_sigma(spec: &CoefficientSpec, x: f64) -> Result<f64, CoefficientError> {
    let v = spec.sigma(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CoefficientError::NonFinite { x })
    }
}

/// How a zero-set level behaves under window shrinkage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LevelClass {
    /// The inverse-square integral tends to 0: the level admits the
    /// non-sticky boundary behaviour.
    VanishesAsEpsToZero,
    /// Finite values that do not decay; numerically indistinguishable
    /// from a saturating integrand.
    FiniteNonVanishing,
    /// The integral diverges in every window.
    Divergent,
}

/// Ladder of inverse-square integrals at one level, plus its classification.
#[derive(Debug, Clone, Serialize)]
pub struct IntegrabilityVerdict {
    pub z: f64,
    /// `(eps, integral value)` pairs, eps decreasing. `f64::INFINITY`
    /// marks detected divergence.
    pub integral_values: Vec<(f64, f64)>,
    pub classification: LevelClass,
}

/// Compute the inverse-square integral of `sigma` over `[z-eps, z+eps]`.
///
/// Power laws at their zero use the closed form
/// `2 eps^(1-2 alpha) / (1 - 2 alpha)` for `alpha < 1/2` and are
/// divergent otherwise; everything else goes through quadrature that
/// splits the window at declared zeros and refines dyadically into each
/// singularity. Detected divergence is reported as `f64::INFINITY`.
pub fn inverse_square_integral(spec: &CoefficientSpec, z: f64, eps: f64) -> Result<f64, QuadError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(QuadError::BadWindow(eps));
    }
    if let Some(alpha) = spec.alpha() {
        if z == 0.0 {
            return Ok(power_law_window_integral(alpha, eps));
        }
    }
    integrate_window(spec, z - eps, z + eps)
}

/// Closed form of the window integral for `sigma = |x|^alpha` at z = 0.
pub fn power_law_window_integral(alpha: f64, eps: f64) -> f64 {
    if alpha >= 0.5 {
        f64::INFINITY
    } else {
        2.0 * eps.powf(1.0 - 2.0 * alpha) / (1.0 - 2.0 * alpha)
    }
}

/// Run the shrinking-window ladder at level `z` and classify it.
pub fn classify_level(spec: &CoefficientSpec, z: f64) -> Result<IntegrabilityVerdict, QuadError> {
    let mut values = Vec::with_capacity(CLASSIFY_EPS_LADDER.len());
    for &eps in &CLASSIFY_EPS_LADDER {
        values.push((eps, inverse_square_integral(spec, z, eps)?));
    }

    // Power laws at their zero are decided analytically; the numerical
    // slope test below would need ever-smaller windows as alpha
    // approaches 1/2.
    if let Some(alpha) = spec.alpha() {
        if z == 0.0 {
            let classification = if alpha < 0.5 {
                LevelClass::VanishesAsEpsToZero
            } else {
                LevelClass::Divergent
            };
            return Ok(IntegrabilityVerdict {
                z,
                integral_values: values,
                classification,
            });
        }
    }

    let finite: Vec<(f64, f64)> = values
        .iter()
        .copied()
        .filter(|&(_, v)| v.is_finite() && v > 0.0)
        .collect();
    let classification = if values.last().is_some_and(|&(_, v)| v.is_infinite()) {
        LevelClass::Divergent
    } else if log_log_slope(&finite) > 0.05 {
        LevelClass::VanishesAsEpsToZero
    } else {
        LevelClass::FiniteNonVanishing
    };
    Ok(IntegrabilityVerdict {
        z,
        integral_values: values,
        classification,
    })
}

fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(eps, v) in points {
        let (x, y) = (eps.ln(), v.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

const SHELL_REL_TOL: f64 = 1e-11;
const MAX_SHELLS: usize = 4000;
const DIVERGENCE_VALUE_CAP: f64 = 1e15;
/// Consecutive non-decaying dyadic shells before declaring divergence.
const DIVERGENT_SHELL_RUN: usize = 5;

fn integrate_window(spec: &CoefficientSpec, lo: f64, hi: f64) -> Result<f64, QuadError> {
    let f = |x: f64| {
        let s = spec.sigma(x);
        1.0 / (s * s)
    };
    // Split the window at declared zeros; each panel is then singular at
    // most at its endpoints.
    let mut cuts = vec![lo];
    for &z in spec.zero_set() {
        if z > lo && z < hi {
            cuts.push(z);
        }
    }
    cuts.push(hi);

    let mut total = 0.0;
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a == b {
            continue;
        }
        let sing_left = spec.is_zero_level(a);
        let sing_right = spec.is_zero_level(b);
        let part = match (sing_left, sing_right) {
            (false, false) => adaptive_simpson(&f, a, b)?,
            (true, false) => shells_into_singularity(&f, a, b, true)?,
            (false, true) => shells_into_singularity(&f, b, a, false)?,
            (true, true) => {
                let mid = 0.5 * (a + b);
                let left = shells_into_singularity(&f, a, mid, true)?;
                let right = shells_into_singularity(&f, b, mid, false)?;
                left + right
            }
        };
        if part.is_infinite() {
            return Ok(f64::INFINITY);
        }
        total += part;
    }
    Ok(total)
}

/// Integrate from a singular endpoint `s` towards `other` over dyadic
/// shells. Shell j covers `[s + h/2^(j+1), s + h/2^j]` (mirrored when
/// the singularity sits on the right). Shell masses of an integrable
/// power singularity decay geometrically, so the remaining tail is
/// estimated from the observed ratio; a run of non-decaying shells
/// means the integral diverges.
fn shells_into_singularity(
    f: &dyn Fn(f64) -> f64,
    s: f64,
    other: f64,
    singular_on_left: bool,
) -> Result<f64, QuadError> {
    let mut h = (other - s).abs();
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    let mut flat_run = 0usize;
    for _ in 0..MAX_SHELLS {
        let (a, b) = if singular_on_left {
            (s + h / 2.0, s + h)
        } else {
            (s - h, s - h / 2.0)
        };
        let shell = adaptive_simpson(f, a, b)?;
        total += shell;
        if total > DIVERGENCE_VALUE_CAP {
            return Ok(f64::INFINITY);
        }
        if let Some(p) = prev {
            if p > 0.0 {
                if shell >= p * (1.0 - 1e-9) {
                    flat_run += 1;
                    if flat_run >= DIVERGENT_SHELL_RUN {
                        return Ok(f64::INFINITY);
                    }
                } else {
                    flat_run = 0;
                }
                let ratio = shell / p;
                if ratio < 0.9999 {
                    let tail = shell * ratio / (1.0 - ratio);
                    if tail <= SHELL_REL_TOL * total.max(f64::MIN_POSITIVE) {
                        return Ok(total + tail);
                    }
                }
            } else if shell == 0.0 {
                return Ok(total);
            }
        }
        prev = Some(shell);
        h /= 2.0;
        if h == 0.0 {
            break;
        }
    }
    Err(QuadError::NoConvergence {
        achieved: prev.unwrap_or(f64::NAN) / total.max(f64::MIN_POSITIVE),
    })
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64, QuadError> {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, QuadError> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let err = left + right - whole;
        if err.abs() <= 15.0 * tol || depth >= 48 {
            if depth >= 48 && err.abs() > 15.0 * tol {
                return Err(QuadError::NoConvergence {
                    achieved: err.abs() / 15.0,
                });
            }
            return Ok(left + right + err / 15.0);
        }
        Ok(recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1)?
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1)?)
    }

    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    let tol = whole.abs() * 1e-12 + 1e-300;
    recurse(f, a, b, fa, fm, fb, whole, tol, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power_law_as_custom(alpha: f64) -> CoefficientSpec {
        CoefficientSpec::custom("abs-pow", vec![0.0], 1.0, true, move |x: f64| {
            x.abs().powf(alpha)
        })
        .unwrap()
    }

    #[test]
    fn power_law_evaluation_examples() {
        let c = CoefficientSpec::power_law(0.25).unwrap();
        assert_eq!(c.sigma(0.0), 0.0);
        assert_eq!(c.sigma(16.0), 2.0);
        let h = CoefficientSpec::power_law(0.5).unwrap();
        assert_eq!(h.sigma(-4.0), 2.0);
    }

    #[test]
    fn power_law_is_even_and_odd_variant_is_odd() {
        let even = CoefficientSpec::power_law(0.3).unwrap();
        let odd = CoefficientSpec::odd_power_law(0.3).unwrap();
        for i in 1..40 {
            let x = i as f64 * 0.25;
            assert_eq!(even.sigma(-x), even.sigma(x));
            assert_eq!(odd.sigma(-x), -odd.sigma(x));
            assert_eq!(odd.sigma(x).abs(), even.sigma(x));
        }
        assert_eq!(odd.sigma(0.0), 0.0);
    }

    #[test]
    fn linear_growth_bound_holds_on_sample_grid() {
        for spec in [
            CoefficientSpec::power_law(0.1).unwrap(),
            CoefficientSpec::power_law(0.49).unwrap(),
            CoefficientSpec::odd_power_law(0.9).unwrap(),
            CoefficientSpec::constant(1.0).unwrap(),
        ] {
            let k = spec.growth_constant();
            for i in -1000..=1000 {
                let x = i as f64 * 0.01;
                assert!(spec.sigma(x).abs() <= k * (1.0 + x.abs()) + 1e-15);
            }
        }
    }

    #[test]
    fn custom_zero_set_is_sorted_and_forced_to_zero() {
        let c = CoefficientSpec::custom("bumpy", vec![2.0, -1.0, 2.0], 3.0, true, |x| {
            (x + 1.0) * (x - 2.0) * 0.1 + 1e-17
        })
        .unwrap();
        assert_eq!(c.zero_set(), &[-1.0, 2.0]);
        assert_eq!(c.sigma(-1.0), 0.0);
        assert_eq!(c.sigma(2.0), 0.0);
        assert!(c.sigma(0.0) != 0.0);
    }

    #[test]
    fn evaluate_sigma_reports_non_finite_custom_values() {
        let c = CoefficientSpec::custom("bad", vec![], 1.0, false, |x| (x - 1.0).ln()).unwrap();
        assert!(evaluate_sigma(&c, 2.0).is_ok());
        assert_eq!(
            evaluate_sigma(&c, 0.5).unwrap_err(),
            CoefficientError::NonFinite { x: 0.5 }
        );
    }

    #[test]
    fn bad_constructor_arguments_are_rejected() {
        assert!(CoefficientSpec::power_law(0.0).is_err());
        assert!(CoefficientSpec::power_law(1.0).is_err());
        assert!(CoefficientSpec::constant(0.0).is_err());
        assert!(CoefficientSpec::custom("k", vec![f64::NAN], 1.0, true, |_| 1.0).is_err());
        assert!(CoefficientSpec::custom("k", vec![], 0.0, true, |_| 1.0).is_err());
    }

    #[test]
    fn window_integral_closed_form_values() {
        // 2 eps^(1-2a)/(1-2a) at the acceptance grid.
        let cases = [
            (0.1, 1e-1, 0.39622329811527834),
            (0.1, 1e-3, 0.009952679263837428),
            (0.25, 1e-1, 1.2649110640673518),
            (0.25, 1e-3, 0.12649110640673517),
            (0.4, 1e-1, 6.309573444801935),
            (0.4, 1e-3, 2.5118864315095815),
        ];
        for (alpha, eps, want) in cases {
            let spec = CoefficientSpec::power_law(alpha).unwrap();
            let got = inverse_square_integral(&spec, 0.0, eps).unwrap();
            assert!(
                ((got - want) / want).abs() < 1e-8,
                "alpha={alpha} eps={eps}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn window_integral_vanishes_along_ladder() {
        let spec = CoefficientSpec::power_law(0.25).unwrap();
        let mut prev = f64::INFINITY;
        for &eps in &CLASSIFY_EPS_LADDER {
            let v = inverse_square_integral(&spec, 0.0, eps).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 5e-3);
    }

    #[test]
    fn sqrt_coefficient_window_is_divergent() {
        let spec = CoefficientSpec::power_law(0.5).unwrap();
        assert!(inverse_square_integral(&spec, 0.0, 0.1)
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn quadrature_matches_closed_form_for_custom_power_laws() {
        for alpha in [0.1, 0.25, 0.4] {
            let spec = power_law_as_custom(alpha);
            for eps in [0.1, 1e-3] {
                let got = inverse_square_integral(&spec, 0.0, eps).unwrap();
                let want = 2.0 * eps.powf(1.0 - 2.0 * alpha) / (1.0 - 2.0 * alpha);
                assert!(
                    ((got - want) / want).abs() < 1e-8,
                    "alpha={alpha} eps={eps}: quadrature {got} vs closed form {want}"
                );
            }
        }
    }

    #[test]
    fn quadrature_detects_divergence_of_custom_singularities() {
        // alpha = 1/2 (log divergence) and alpha = 0.75 (power divergence):
        // the literal closed forms diverge, the shells must detect it.
        for alpha in [0.5, 0.75, 1.0] {
            let spec = power_law_as_custom(alpha);
            let v = inverse_square_integral(&spec, 0.0, 0.1).unwrap();
            assert!(v.is_infinite(), "alpha={alpha} gave {v}");
        }
    }

    #[test]
    fn off_zero_window_handles_interior_singularity() {
        // Window around z=0.05 of width 0.1 contains the zero at the origin.
        let spec = power_law_as_custom(0.25);
        let whole = inverse_square_integral(&spec, 0.05, 0.1).unwrap();
        // Same window integrated as [-0.05, 0] plus [0, 0.15] in closed form:
        // int |y|^{-1/2} dy = 2 sqrt(.05) + 2 sqrt(.15).
        let want = 2.0 * 0.05f64.sqrt() + 2.0 * 0.15f64.sqrt();
        assert!(((whole - want) / want).abs() < 1e-8, "{whole} vs {want}");
    }

    #[test]
    fn classify_power_law_levels() {
        let cev = CoefficientSpec::power_law(0.25).unwrap();
        assert_eq!(
            classify_level(&cev, 0.0).unwrap().classification,
            LevelClass::VanishesAsEpsToZero
        );
        // At a non-zero level sigma is bounded away from 0, so the window
        // integral shrinks linearly: still vanishing.
        assert_eq!(
            classify_level(&cev, 1.0).unwrap().classification,
            LevelClass::VanishesAsEpsToZero
        );
        let boundary = CoefficientSpec::power_law(0.5).unwrap();
        assert_eq!(
            classify_level(&boundary, 0.0).unwrap().classification,
            LevelClass::Divergent
        );
        let steep = CoefficientSpec::power_law(0.8).unwrap();
        assert_eq!(
            classify_level(&steep, 0.0).unwrap().classification,
            LevelClass::Divergent
        );
    }

    #[test]
    fn classify_ladder_is_monotone_nonincreasing() {
        for spec in [
            CoefficientSpec::power_law(0.25).unwrap(),
            power_law_as_custom(0.4),
            CoefficientSpec::constant(2.0).unwrap(),
        ] {
            let verdict = classify_level(&spec, 0.0).unwrap();
            for pair in verdict.integral_values.windows(2) {
                assert!(
                    pair[1].1 <= pair[0].1 * (1.0 + 1e-9),
                    "ladder not monotone: {:?}",
                    verdict.integral_values
                );
            }
        }
    }

    #[test]
    fn classify_custom_divergent_level() {
        let spec = power_law_as_custom(0.6);
        assert_eq!(
            classify_level(&spec, 0.0).unwrap().classification,
            LevelClass::Divergent
        );
    }
}
