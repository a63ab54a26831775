//! The Euler-Maruyama scheme for `dX = sigma(X) dW`.
//!
//! The one non-standard ingredient is the initial shift: when the
//! requested initial condition sits in the zero set, the scheme would
//! freeze there forever, so the start point is nudged off the zero set
//! by one coarse-step diffusion standard deviation. The shift shrinks
//! with the resolution, so the shifted starts converge back to the
//! requested initial condition.

use thiserror::Error;

use crate::brownian::{self, BrownianLattice, LatticeError};
use crate::coefficients::CoefficientSpec;

/// Dense paths are stored up to this resolution; finer ones must go
/// through the streaming fold.
pub const DENSE_LEVEL_CAP: u32 = 20;

#[derive(Debug, Error, PartialEq)]
pub enum EmError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("state became non-finite at step {step}")]
    NonFinite { step: usize },
    #[error("grid value landed exactly on the zero set at step {step}")]
    LandedOnZeroSet { step: usize },
    #[error(
        "level {0} exceeds the dense-storage cap of {DENSE_LEVEL_CAP}; use the streaming fold"
    )]
    DenseLevelCap(u32),
    #[error("levels must be non-empty and strictly ascending")]
    BadLevels,
    #[error("lattice horizon {lattice} does not match problem horizon {problem}")]
    HorizonMismatch { lattice: f64, problem: f64 },
    #[error("horizon must be positive and finite")]
    BadHorizon,
}

/// The SDE `dX = sigma(X) dW`, `X_0 = x0`, on `[0, horizon]`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SdeProblem {
    pub coefficient: CoefficientSpec,
    pub x0: f64,
    pub horizon: f64,
}

impl SdeProblem {
    pub fn new(coefficient: CoefficientSpec, x0: f64, horizon: f64) -> Result<Self, EmError> {
        if !(horizon > 0.0 && horizon.is_finite()) || !x0.is_finite() {
            return Err(EmError::BadHorizon);
        }
        Ok(SdeProblem {
            coefficient,
            x0,
            horizon,
        })
    }
}

/// Whether the initial-shift rule is applied. `NoShift` exists as a
/// diagnostic: starting exactly on the zero set freezes the scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ShiftPolicy {
    Shift,
    NoShift,
}

/// One simulated trajectory on the uniform grid `k T / 2^level`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    values: Vec<f64>,
    level: u32,
    x_start: f64,
    horizon: f64,
    seed: u64,
    path_index: u64,
}

impl GridPath {
    /// The `2^level + 1` grid values, starting at `x_start`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Actual initial value used (the shifted start when x0 was on the zero set).
    pub fn x_start(&self) -> f64 {
        self.x_start
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    /// Number of steps `2^level`.
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps() as f64
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// Starting point of the scheme at a given resolution.
///
/// Returns `x0` unchanged when it is off the zero set. Otherwise the
/// start is displaced by `sqrt(T) * 2^(-level/2)` — one standard
/// deviation of a single coarse Brownian step — repeatedly in the
/// measure-zero event that the displaced point is itself a zero. The
/// returned sequence converges to `x0` as the level grows.
pub fn shift_initial(problem: &SdeProblem, level: u32) -> f64 {
    if !problem.coefficient.is_zero_level(problem.x0) {
        return problem.x0;
    }
    let delta = problem.horizon.sqrt() * (-(level as f64) / 2.0).exp2();
    let mut x = problem.x0 + delta;
    while problem.coefficient.is_zero_level(x) {
        x += delta;
    }
    x
}

fn start_for(problem: &SdeProblem, level: u32, policy: ShiftPolicy) -> f64 {
    match policy {
        ShiftPolicy::Shift => shift_initial(problem, level),
        ShiftPolicy::NoShift => problem.x0,
    }
}

/// The Euler recursion over one increment sequence, reporting each state
/// through `visit(step, x)`; `visit(0, x_start)` is called first and
/// `visit(n, x_n)` last. Detects non-finite states and the
/// probability-zero event of stepping from off the zero set exactly onto
/// it (which would indicate a generator or shift bug, and would freeze
/// the scheme from there on).
#[inline]
pub(crate) fn run_scheme(
    coefficient: &CoefficientSpec,
    x_start: f64,
    mut next_increment: impl FnMut() -> f64,
    n_steps: usize,
    mut visit: impl FnMut(usize, f64),
) -> Result<f64, EmError> {
    let mut x = x_start;
    visit(0, x);
    for k in 0..n_steps {
        let was_off_zero = !coefficient.is_zero_level(x);
        x += coefficient.sigma(x) * next_increment();
        if !x.is_finite() {
            return Err(EmError::NonFinite { step: k + 1 });
        }
        if was_off_zero && coefficient.is_zero_level(x) {
            return Err(EmError::LandedOnZeroSet { step: k + 1 });
        }
        visit(k + 1, x);
    }
    Ok(x)
}

/// Simulate the scheme driven by `lattice`, with the initial shift applied.
pub fn simulate_path(problem: &SdeProblem, lattice: &BrownianLattice) -> Result<GridPath, EmError> {
    simulate_path_with(problem, lattice, ShiftPolicy::Shift)
}

/// Simulate with an explicit shift policy.
pub fn simulate_path_with(
    problem: &SdeProblem,
    lattice: &BrownianLattice,
    policy: ShiftPolicy,
) -> Result<GridPath, EmError> {
    if lattice.horizon() != problem.horizon {
        return Err(EmError::HorizonMismatch {
            lattice: lattice.horizon(),
            problem: problem.horizon,
        });
    }
    if lattice.level() > DENSE_LEVEL_CAP {
        return Err(EmError::DenseLevelCap(lattice.level()));
    }
    let x_start = start_for(problem, lattice.level(), policy);
    let mut values = Vec::with_capacity(lattice.len() + 1);
    let mut increments = lattice.increments().iter().copied();
    run_scheme(
        &problem.coefficient,
        x_start,
        || increments.next().unwrap(),
        lattice.len(),
        |_, x| values.push(x),
    )?;
    Ok(GridPath {
        values,
        level: lattice.level(),
        x_start,
        horizon: problem.horizon,
        seed: lattice.seed(),
        path_index: lattice.path_index(),
    })
}

/// Stream the scheme at an arbitrary resolution without materialising
/// the lattice or the path. `visit(k, x_k)` sees every grid state in
/// order; returns the terminal value.
pub fn fold_path(
    problem: &SdeProblem,
    seed: u64,
    path_index: u64,
    level: u32,
    policy: ShiftPolicy,
    visit: impl FnMut(usize, f64),
) -> Result<f64, EmError> {
    brownian::check_level_horizon(level, problem.horizon)?;
    let n = 1usize << level;
    let mut stream = brownian::IncrementStream::new(seed, path_index, level, problem.horizon);
    run_scheme(
        &problem.coefficient,
        start_for(problem, level, policy),
        || stream.next_increment(),
        n,
        visit,
    )
}

/// Simulate one driving Brownian trajectory at several resolutions.
///
/// The finest lattice is generated once and each coarser resolution is
/// obtained by exact pairwise coarsening, so every returned path is the
/// scheme applied to the same trajectory and grid points of coarser
/// paths align with finer ones. `levels` must be strictly ascending.
pub fn simulate_coupled_family(
    problem: &SdeProblem,
    seed: u64,
    path_index: u64,
    levels: &[u32],
) -> Result<Vec<GridPath>, EmError> {
    if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EmError::BadLevels);
    }
    let finest = *levels.last().unwrap();
    if finest > DENSE_LEVEL_CAP {
        return Err(EmError::DenseLevelCap(finest));
    }
    let mut lattice = brownian::generate_lattice(seed, path_index, finest, problem.horizon)?;
    let mut out: Vec<GridPath> = Vec::with_capacity(levels.len());
    loop {
        if levels.binary_search(&lattice.level()).is_ok() {
            out.push(simulate_path(problem, &lattice)?);
        }
        if lattice.level() == 0 || lattice.level() <= levels[0] {
            break;
        }
        lattice = lattice.coarsen()?;
    }
    out.reverse();
    Ok(out)
}
