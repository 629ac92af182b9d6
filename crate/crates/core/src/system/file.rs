//! JSON system file format.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "horizon": 2,
//!   "alphabets": {"message": 2, "input": 2, "output": 2, "state": 1, "feedback": 2},
//!   "message_prior": [0.5, 0.5],
//!   "state":    {"kind": "markov", "initial": [1.0], "transition": [[1.0]]},
//!   "encoder":  {"kind": "table", "tables": [[[1, 0], [0, 1]], [[1, 0], ...]]},
//!   "forward":  {"kind": "memoryless", "rows": [[0.9, 0.1], [0.1, 0.9]]},
//!   "feedback": {"kind": "memoryless", "rows": [[0.8, 0.2], [0.2, 0.8]]}
//! }
//! ```
//!
//! `table` kernels list one table per time step; each table holds one row
//! per parent history in mixed-radix order over the canonical parent list
//! (see [`KernelRole::parents`]), last parent fastest. Accepted kinds:
//! `state`: table | markov, `encoder`: table | stationary,
//! `forward`: table | memoryless, `feedback`: table | memoryless.

use serde::{Deserialize, Serialize};

use super::{
    expand_shorthand, trajectory_count, Alphabets, ConditionalKernel, KernelRole,
    StationaryShorthand, SystemSpec, DEFAULT_BUDGET,
};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Longest horizon accepted from a file, independent of the trajectory budget.
pub const MAX_HORIZON: usize = 4096;

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub horizon: usize,
    pub alphabets: Alphabets,
    pub message_prior: Vec<f64>,
    pub state: KernelSource,
    pub encoder: KernelSource,
    pub forward: KernelSource,
    pub feedback: KernelSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSource {
    Table {
        tables: Vec<Vec<Vec<f64>>>,
    },
    Memoryless {
        rows: Vec<Vec<f64>>,
    },
    Markov {
        initial: Vec<f64>,
        transition: Vec<Vec<f64>>,
    },
    Stationary {
        rows: Vec<Vec<f64>>,
    },
}

impl KernelSource {
    fn kind(&self) -> &'static str {
        match self {
            KernelSource::Table { .. } => "table",
            KernelSource::Memoryless { .. } => "memoryless",
            KernelSource::Markov { .. } => "markov",
            KernelSource::Stationary { .. } => "stationary",
        }
    }

    fn into_kernels(
        self,
        role: KernelRole,
        horizon: usize,
        alphabets: &Alphabets,
    ) -> Result<Vec<ConditionalKernel>> {
        let shorthand = match (role, self) {
            (_, KernelSource::Table { tables }) => {
                let expected = role.kernel_count(horizon);
                if tables.len() != expected {
                    return Err(Error::KernelCount {
                        kernel: role.name().into(),
                        horizon,
                        expected,
                        found: tables.len(),
                    });
                }
                return tables
                    .into_iter()
                    .enumerate()
                    .map(|(t, rows)| ConditionalKernel::from_rows(role, t + 1, alphabets, rows))
                    .collect();
            }
            (KernelRole::Forward, KernelSource::Memoryless { rows }) => {
                StationaryShorthand::MemorylessForward { rows }
            }
            (KernelRole::Feedback, KernelSource::Memoryless { rows }) => {
                StationaryShorthand::MemorylessFeedback { rows }
            }
            (
                KernelRole::State,
                KernelSource::Markov {
                    initial,
                    transition,
                },
            ) => StationaryShorthand::MarkovState {
                initial,
                transition,
            },
            (KernelRole::Encoder, KernelSource::Stationary { rows }) => {
                StationaryShorthand::StationaryEncoder { rows }
            }
            (role, other) => {
                return Err(Error::Invalid(format!(
                    "kernel kind `{}` is not accepted for `{}`",
                    other.kind(),
                    role.name()
                )))
            }
        };
        expand_shorthand(&shorthand, horizon, alphabets)
    }
}

impl SystemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes every kernel as an explicit `table`.
    pub fn from_spec(spec: &SystemSpec) -> Self {
        let table = |role| KernelSource::Table {
            tables: spec
                .kernels(role)
                .iter()
                .map(ConditionalKernel::row_vectors)
                .collect(),
        };
        SystemFile {
            schema: SCHEMA_VERSION,
            horizon: spec.horizon,
            alphabets: spec.alphabets,
            message_prior: spec.message_prior.clone(),
            state: table(KernelRole::State),
            encoder: table(KernelRole::Encoder),
            forward: table(KernelRole::Forward),
            feedback: table(KernelRole::Feedback),
        }
    }

    pub fn into_spec(self) -> Result<SystemSpec> {
        self.into_spec_with_budget(DEFAULT_BUDGET)
    }

    /// Expands the file into a [`SystemSpec`]. Sizes are checked against the
    /// budget before any table is materialized.
    pub fn into_spec_with_budget(self, budget: u64) -> Result<SystemSpec> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Invalid(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        if self.horizon == 0 || self.horizon > MAX_HORIZON {
            return Err(Error::Invalid(format!(
                "horizon must be in 1..={MAX_HORIZON}, got {}",
                self.horizon
            )));
        }
        self.alphabets.check()?;
        let count = trajectory_count(self.horizon, &self.alphabets);
        if count > budget as u128 {
            return Err(Error::BudgetExceeded { count, budget });
        }
        let n = self.horizon;
        let a = self.alphabets;
        Ok(SystemSpec {
            horizon: n,
            alphabets: a,
            message_prior: self.message_prior,
            state: self.state.into_kernels(KernelRole::State, n, &a)?,
            encoder: self.encoder.into_kernels(KernelRole::Encoder, n, &a)?,
            forward: self.forward.into_kernels(KernelRole::Forward, n, &a)?,
            feedback: self.feedback.into_kernels(KernelRole::Feedback, n, &a)?,
        })
    }
}

/// Parses a system file and expands it, without validating probabilities.
pub fn parse_system(text: &str, budget: u64) -> Result<SystemSpec> {
    SystemFile::from_json(text)?.into_spec_with_budget(budget)
}
