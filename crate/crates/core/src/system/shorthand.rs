//! Time-invariant kernel encodings that depend only on the most recent parents.

use super::{Alphabets, ConditionalKernel, Coord, KernelRole, Var};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum StationaryShorthand {
    /// `p(y_i | x_i, s_i)`; rows indexed by `x_i · |S| + s_i`.
    MemorylessForward { rows: Vec<Vec<f64>> },
    /// `p(e_i | y_i)`; rows indexed by `y_i`.
    MemorylessFeedback { rows: Vec<Vec<f64>> },
    /// `p(s_1) = initial`, `p(s_i | s_{i-1}) = transition[s_{i-1}]`.
    MarkovState {
        initial: Vec<f64>,
        transition: Vec<Vec<f64>>,
    },
    /// `p(x_i | x0, s_i)`; rows indexed by `x0 · |S| + s_i`. Feedback-blind.
    StationaryEncoder { rows: Vec<Vec<f64>> },
}

impl StationaryShorthand {
    pub fn role(&self) -> KernelRole {
        match self {
            StationaryShorthand::MemorylessForward { .. } => KernelRole::Forward,
            StationaryShorthand::MemorylessFeedback { .. } => KernelRole::Feedback,
            StationaryShorthand::MarkovState { .. } => KernelRole::State,
            StationaryShorthand::StationaryEncoder { .. } => KernelRole::Encoder,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            StationaryShorthand::MemorylessForward { .. } => "memoryless-forward",
            StationaryShorthand::MemorylessFeedback { .. } => "memoryless-feedback",
            StationaryShorthand::MarkovState { .. } => "markov-state",
            StationaryShorthand::StationaryEncoder { .. } => "stationary-encoder",
        }
    }
}

fn check_table(kind: &str, rows: &[Vec<f64>], n_rows: usize, width: usize) -> Result<()> {
    if rows.len() != n_rows {
        return Err(Error::DimensionMismatch(format!(
            "{kind}: expected {n_rows} rows, found {}",
            rows.len()
        )));
    }
    if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != width) {
        return Err(Error::DimensionMismatch(format!(
            "{kind}: row {r} has {} entries, expected {width}",
            row.len()
        )));
    }
    Ok(())
}

fn position(parents: &[Coord], coord: Coord) -> usize {
    parents
        .iter()
        .position(|c| *c == coord)
        .expect("canonical parent list contains the recent parent")
}

/// Expands a shorthand into one full-history kernel per time step.
pub fn expand_shorthand(
    sh: &StationaryShorthand,
    horizon: usize,
    alphabets: &Alphabets,
) -> Result<Vec<ConditionalKernel>> {
    let role = sh.role();
    let kind = sh.kind();
    let child = alphabets.size(role.child_var());
    let states = alphabets.state;
    match sh {
        StationaryShorthand::MemorylessForward { rows } => {
            check_table(kind, rows, alphabets.input * states, child)?;
        }
        StationaryShorthand::MemorylessFeedback { rows } => {
            check_table(kind, rows, alphabets.output, child)?;
        }
        StationaryShorthand::MarkovState {
            initial,
            transition,
        } => {
            check_table(kind, std::slice::from_ref(initial), 1, states)?;
            check_table(kind, transition, states, states)?;
        }
        StationaryShorthand::StationaryEncoder { rows } => {
            check_table(kind, rows, alphabets.message * states, child)?;
        }
    }

    (1..=role.kernel_count(horizon))
        .map(|i| {
            ConditionalKernel::from_fn(role, i, alphabets, |parents, digits| match sh {
                StationaryShorthand::MemorylessForward { rows } => {
                    let x = digits[position(parents, Coord::input(i))];
                    let s = digits[position(parents, Coord::state(i))];
                    rows[x * states + s].clone()
                }
                StationaryShorthand::MemorylessFeedback { rows } => {
                    rows[digits[position(parents, Coord::output(i))]].clone()
                }
                StationaryShorthand::MarkovState {
                    initial,
                    transition,
                } => {
                    if i == 1 {
                        initial.clone()
                    } else {
                        transition[digits[position(parents, Coord::state(i - 1))]].clone()
                    }
                }
                StationaryShorthand::StationaryEncoder { rows } => {
                    let m = digits[position(parents, Coord::new(Var::Message, 0))];
                    let s = digits[position(parents, Coord::state(i))];
                    rows[m * states + s].clone()
                }
            })
        })
        .collect()
}
