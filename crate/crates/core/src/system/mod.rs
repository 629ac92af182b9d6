//! The finite-alphabet generative system: a message `x0`, a state process
//! `s_i`, encoder outputs `x_i`, forward-channel outputs `y_i` and feedback
//! symbols `e_i`, tied together by per-step conditional kernels.
//!
//! Factorization over one trajectory of horizon `n`:
//!
//! ```text
//! p(x0) · Π_{i=1..n} p(s_i | s^{i-1}) · p(x_i | x0, x^{i-1}, e^{i-1}, s^i)
//!                   · p(y_i | y^{i-1}, x^i, s^i)
//!       · Π_{i=1..n-1} p(e_i | e^{i-1}, y^i)
//! ```
//!
//! `e_n` is never generated: nothing downstream of it exists inside the horizon.

mod file;
mod kernel;
mod layout;
mod shorthand;

pub use file::{parse_system, KernelSource, SystemFile, MAX_HORIZON, SCHEMA_VERSION};
pub use kernel::{ConditionalKernel, KernelRole};
pub use layout::{trajectory_count, TrajectoryLayout};
pub use shorthand::{expand_shorthand, StationaryShorthand};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row sums and the message prior must hit 1 within this tolerance.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Default cap on the number of enumerated trajectories.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// One of the five random processes in a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Var {
    /// Message index `x0`.
    Message,
    /// Channel state `s_i`.
    State,
    /// Channel input `x_i`.
    Input,
    /// Channel output `y_i`.
    Output,
    /// Feedback symbol `e_i`.
    Feedback,
}

impl Var {
    pub const ALL: [Var; 5] = [
        Var::Message,
        Var::State,
        Var::Input,
        Var::Output,
        Var::Feedback,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Var::Message => "x0",
            Var::State => "s",
            Var::Input => "x",
            Var::Output => "y",
            Var::Feedback => "e",
        }
    }

    /// Last time index at which this process has a coordinate.
    pub fn last_time(self, horizon: usize) -> usize {
        match self {
            Var::Message => 0,
            Var::Feedback => horizon - 1,
            _ => horizon,
        }
    }
}

/// A single coordinate of a trajectory, e.g. `y_3`. The message has time 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub var: Var,
    pub time: usize,
}

impl Coord {
    pub const MESSAGE: Coord = Coord {
        var: Var::Message,
        time: 0,
    };

    pub fn new(var: Var, time: usize) -> Self {
        if var == Var::Message {
            Coord::MESSAGE
        } else {
            Coord { var, time }
        }
    }

    pub fn state(time: usize) -> Self {
        Coord::new(Var::State, time)
    }

    pub fn input(time: usize) -> Self {
        Coord::new(Var::Input, time)
    }

    pub fn output(time: usize) -> Self {
        Coord::new(Var::Output, time)
    }

    pub fn feedback(time: usize) -> Self {
        Coord::new(Var::Feedback, time)
    }

    /// `var_1, ..., var_k` (empty when `k == 0`).
    pub fn history(var: Var, k: usize) -> impl Iterator<Item = Coord> {
        (1..=k).map(move |t| Coord::new(var, t))
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.var {
            Var::Message => f.write_str("x0"),
            v => write!(f, "{}{}", v.symbol(), self.time),
        }
    }
}

/// Alphabet sizes. Symbols are always `0..size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Alphabets {
    pub message: usize,
    pub input: usize,
    pub output: usize,
    pub state: usize,
    pub feedback: usize,
}

impl Alphabets {
    pub fn uniform(size: usize) -> Self {
        Alphabets {
            message: size,
            input: size,
            output: size,
            state: size,
            feedback: size,
        }
    }

    pub fn size(&self, var: Var) -> usize {
        match var {
            Var::Message => self.message,
            Var::State => self.state,
            Var::Input => self.input,
            Var::Output => self.output,
            Var::Feedback => self.feedback,
        }
    }

    pub fn size_mut(&mut self, var: Var) -> &mut usize {
        match var {
            Var::Message => &mut self.message,
            Var::State => &mut self.state,
            Var::Input => &mut self.input,
            Var::Output => &mut self.output,
            Var::Feedback => &mut self.feedback,
        }
    }

    pub fn check(&self) -> Result<()> {
        for var in Var::ALL {
            if self.size(var) == 0 {
                return Err(Error::Invalid(format!(
                    "alphabet `{}` must have at least one symbol",
                    var.symbol()
                )));
            }
        }
        Ok(())
    }
}

/// Full generative description of a system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub horizon: usize,
    pub alphabets: Alphabets,
    pub message_prior: Vec<f64>,
    /// `p(s_i | s^{i-1})`, one per `i in 1..=n`.
    pub state: Vec<ConditionalKernel>,
    /// `p(x_i | x0, x^{i-1}, e^{i-1}, s^i)`, one per `i in 1..=n`.
    pub encoder: Vec<ConditionalKernel>,
    /// `p(y_i | y^{i-1}, x^i, s^i)`, one per `i in 1..=n`.
    pub forward: Vec<ConditionalKernel>,
    /// `p(e_i | e^{i-1}, y^i)`, one per `i in 1..n`.
    pub feedback: Vec<ConditionalKernel>,
}

impl SystemSpec {
    pub fn kernels(&self, role: KernelRole) -> &[ConditionalKernel] {
        match role {
            KernelRole::State => &self.state,
            KernelRole::Encoder => &self.encoder,
            KernelRole::Forward => &self.forward,
            KernelRole::Feedback => &self.feedback,
        }
    }

    fn kernels_mut(&mut self, role: KernelRole) -> &mut Vec<ConditionalKernel> {
        match role {
            KernelRole::State => &mut self.state,
            KernelRole::Encoder => &mut self.encoder,
            KernelRole::Forward => &mut self.forward,
            KernelRole::Feedback => &mut self.feedback,
        }
    }

    /// The kernel generating `coord`, if any (`x0` is drawn from the prior).
    pub fn kernel_for(&self, coord: Coord) -> Option<&ConditionalKernel> {
        let role = KernelRole::for_var(coord.var)?;
        self.kernels(role).get(coord.time.checked_sub(1)?)
    }

    /// Applies the permutation `old -> perm[old]` to every symbol of `var`,
    /// consistently across the prior and every kernel.
    pub fn relabeled(&self, var: Var, perm: &[usize]) -> Result<SystemSpec> {
        let size = self.alphabets.size(var);
        let mut seen = vec![false; size];
        if perm.len() != size {
            return Err(Error::DimensionMismatch(format!(
                "permutation of length {} for alphabet `{}` of size {size}",
                perm.len(),
                var.symbol()
            )));
        }
        for &p in perm {
            if p >= size || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter(format!(
                    "{perm:?} is not a permutation of 0..{size}"
                )));
            }
        }

        let mut out = self.clone();
        if var == Var::Message {
            for (old, &p) in self.message_prior.iter().enumerate() {
                out.message_prior[perm[old]] = p;
            }
        }
        for role in KernelRole::ALL {
            for (slot, kernel) in out
                .kernels_mut(role)
                .iter_mut()
                .zip(self.kernels(role).iter())
            {
                *slot = kernel.relabeled(var, perm);
            }
        }
        Ok(out)
    }
}

/// A system that passed [`validate_system`]. Immutable.
#[derive(Debug, Clone)]
pub struct ValidatedSystem {
    spec: SystemSpec,
    layout: TrajectoryLayout,
}

impl ValidatedSystem {
    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn layout(&self) -> &TrajectoryLayout {
        &self.layout
    }

    pub fn horizon(&self) -> usize {
        self.spec.horizon
    }

    pub fn alphabets(&self) -> &Alphabets {
        &self.spec.alphabets
    }

    pub fn trajectory_count(&self) -> usize {
        self.layout.count()
    }

    pub fn into_spec(self) -> SystemSpec {
        self.spec
    }

    /// True when every encoder row is a 0/1 vector.
    pub fn encoder_is_deterministic(&self) -> bool {
        self.spec.encoder.iter().all(|k| k.is_deterministic())
    }

    /// True when no encoder kernel depends on the feedback symbols.
    pub fn encoder_is_feedback_blind(&self) -> bool {
        self.spec
            .encoder
            .iter()
            .all(|k| k.is_constant_in(Var::Feedback, NORMALIZATION_TOL))
    }

    /// True when neither the encoder nor the forward channel depends on the
    /// state.
    pub fn is_state_blind(&self) -> bool {
        self.spec
            .encoder
            .iter()
            .chain(&self.spec.forward)
            .all(|k| k.is_constant_in(Var::State, NORMALIZATION_TOL))
    }

    /// True when `|E| = |Y|` and every feedback symbol copies the current
    /// output: `e_i = y_i` with probability 1.
    pub fn has_noiseless_feedback(&self) -> bool {
        let a = &self.spec.alphabets;
        a.feedback == a.output
            && self.spec.feedback.iter().all(|k| {
                (0..k.rows()).all(|r| {
                    let y = *k.row_digits(r).last().expect("feedback has parents");
                    k.row(r)
                        .iter()
                        .enumerate()
                        .all(|(e, &p)| p == if e == y { 1.0 } else { 0.0 })
                })
            })
    }
}

/// Validates with the default enumeration budget.
pub fn validate_system(spec: SystemSpec) -> Result<ValidatedSystem> {
    validate_system_with_budget(spec, DEFAULT_BUDGET)
}

pub fn validate_system_with_budget(spec: SystemSpec, budget: u64) -> Result<ValidatedSystem> {
    if spec.horizon == 0 || spec.horizon > MAX_HORIZON {
        return Err(Error::Invalid(format!(
            "horizon must be in 1..={MAX_HORIZON}, got {}",
            spec.horizon
        )));
    }
    spec.alphabets.check()?;

    let n = spec.horizon;
    for role in KernelRole::ALL {
        let expected = role.kernel_count(n);
        let found = spec.kernels(role).len();
        if found != expected {
            return Err(Error::KernelCount {
                kernel: role.name().into(),
                horizon: n,
                expected,
                found,
            });
        }
    }

    let count = trajectory_count(n, &spec.alphabets);
    if count > budget as u128 {
        return Err(Error::BudgetExceeded { count, budget });
    }

    check_distribution(&spec.message_prior, spec.alphabets.message, || {
        ("message prior".to_string(), 0, String::new())
    })?;

    for role in KernelRole::ALL {
        for (idx, kernel) in spec.kernels(role).iter().enumerate() {
            let time = idx + 1;
            let expected = ConditionalKernel::expected_shape(role, time, &spec.alphabets);
            if kernel.role() != role || kernel.time() != time {
                return Err(Error::Invalid(format!(
                    "{} kernel slot {time} holds a {} kernel for i={}",
                    role.name(),
                    kernel.role().name(),
                    kernel.time()
                )));
            }
            if kernel.rows() != expected.0 {
                return Err(Error::MissingEntry {
                    kernel: role.name().into(),
                    time,
                    expected: expected.0,
                    found: kernel.rows(),
                });
            }
            if kernel.child_size() != expected.1 {
                return Err(Error::DimensionMismatch(format!(
                    "{} kernel at i={time}: rows have {} entries, alphabet has {}",
                    role.name(),
                    kernel.child_size(),
                    expected.1
                )));
            }
            for row in 0..kernel.rows() {
                check_distribution(kernel.row(row), kernel.child_size(), || {
                    (role.name().to_string(), time, kernel.describe_row(row))
                })?;
            }
        }
    }

    let layout = TrajectoryLayout::new(n, spec.alphabets)?;
    Ok(ValidatedSystem { spec, layout })
}

fn check_distribution(
    probs: &[f64],
    size: usize,
    locate: impl Fn() -> (String, usize, String),
) -> Result<()> {
    if probs.len() != size {
        let (kernel, time, _) = locate();
        return Err(Error::DimensionMismatch(format!(
            "{kernel} at i={time}: {} entries for an alphabet of size {size}",
            probs.len()
        )));
    }
    if let Some(&value) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        let (kernel, time, parents) = locate();
        return Err(Error::NegativeProbability {
            kernel,
            time,
            parents,
            value,
        });
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        let (kernel, time, parents) = locate();
        return Err(Error::RowSum {
            kernel,
            time,
            parents,
            sum,
        });
    }
    Ok(())
}
