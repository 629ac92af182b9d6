//! Seeded random systems and closed-form canonical systems.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{
    expand_shorthand, trajectory_count, Alphabets, ConditionalKernel, Coord, KernelRole,
    StationaryShorthand, SystemSpec, Var, DEFAULT_BUDGET, MAX_HORIZON,
};

/// Shape and structural flags of a random system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub horizon: usize,
    pub alphabets: Alphabets,
    /// Encoder rows constant in `e^{i-1}`.
    pub feedback_blind_encoder: bool,
    /// Forward rows constant in `s^i`.
    pub state_blind_forward: bool,
    /// Encoder rows constant in `s^i`.
    pub state_blind_encoder: bool,
    /// `e_i = y_i`; needs `|E| = |Y|`.
    pub noiseless_feedback: bool,
    /// Encoder rows drawn from the simplex instead of as 0/1 vectors.
    pub stochastic_encoder: bool,
}

impl Dims {
    pub fn new(horizon: usize, alphabets: Alphabets) -> Self {
        Dims {
            horizon,
            alphabets,
            feedback_blind_encoder: false,
            state_blind_forward: false,
            state_blind_encoder: false,
            noiseless_feedback: false,
            stochastic_encoder: false,
        }
    }

    pub fn binary(horizon: usize) -> Self {
        Self::new(horizon, Alphabets::uniform(2))
    }

    pub fn check(&self) -> Result<()> {
        if self.horizon == 0 || self.horizon > MAX_HORIZON {
            return Err(Error::InvalidParameter(format!(
                "horizon must be in 1..={MAX_HORIZON}, got {}",
                self.horizon
            )));
        }
        self.alphabets.check()?;
        if self.noiseless_feedback && self.alphabets.feedback != self.alphabets.output {
            return Err(Error::IncompatibleFlags(format!(
                "noiseless feedback needs |E| = |Y|, got {} and {}",
                self.alphabets.feedback, self.alphabets.output
            )));
        }
        Ok(())
    }
}

/// Parses `n=3,message=2,input=2,output=2,state=1,feedback=2` plus bare flag
/// names (`feedback_blind_encoder`, `state_blind_forward`,
/// `state_blind_encoder`, `noiseless_feedback`, `stochastic_encoder`).
/// Unlisted sizes default to 2.
impl FromStr for Dims {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut d = Dims::binary(1);
        let mut horizon = None;
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match item.split_once('=') {
                None => match item {
                    "feedback_blind_encoder" => d.feedback_blind_encoder = true,
                    "state_blind_forward" => d.state_blind_forward = true,
                    "state_blind_encoder" => d.state_blind_encoder = true,
                    "noiseless_feedback" => d.noiseless_feedback = true,
                    "stochastic_encoder" => d.stochastic_encoder = true,
                    other => return Err(Error::UnknownTag(other.to_string())),
                },
                Some((key, value)) => {
                    let v: usize = value.trim().parse().map_err(|_| {
                        Error::InvalidParameter(format!("`{key}` needs a positive integer"))
                    })?;
                    let var = match key.trim() {
                        "n" | "horizon" => {
                            horizon = Some(v);
                            continue;
                        }
                        "message" => Var::Message,
                        "input" => Var::Input,
                        "output" => Var::Output,
                        "state" => Var::State,
                        "feedback" => Var::Feedback,
                        other => return Err(Error::UnknownTag(other.to_string())),
                    };
                    *d.alphabets.size_mut(var) = v;
                }
            }
        }
        d.horizon = horizon.ok_or_else(|| Error::InvalidParameter("missing `n`".into()))?;
        d.check()?;
        Ok(d)
    }
}

/// A row drawn uniformly from the probability simplex: normalized
/// independent Exp(1) draws.
pub fn simplex_row(rng: &mut impl Rng, size: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..size).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 {
        draws.into_iter().map(|x| x / total).collect()
    } else {
        unit_row(size, 0)
    }
}

fn unit_row(size: usize, at: usize) -> Vec<f64> {
    let mut row = vec![0.0; size];
    row[at] = 1.0;
    row
}

/// Builds a kernel whose rows depend only on the parents not in `ignore`;
/// one fresh row is drawn per distinct reduced history, in row order.
fn random_kernel(
    role: KernelRole,
    i: usize,
    alphabets: &Alphabets,
    ignore: &[Var],
    mut draw: impl FnMut(&[Coord], &[usize]) -> Vec<f64>,
) -> Result<ConditionalKernel> {
    let mut memo: HashMap<Vec<usize>, Vec<f64>> = HashMap::new();
    ConditionalKernel::from_fn(role, i, alphabets, |parents, digits| {
        let key: Vec<usize> = parents
            .iter()
            .zip(digits)
            .map(|(c, &d)| if ignore.contains(&c.var) { 0 } else { d })
            .collect();
        memo.entry(key)
            .or_insert_with(|| draw(parents, digits))
            .clone()
    })
}

/// Seeded random system: every free row is uniform on the simplex, except
/// encoder rows, which are uniformly random 0/1 vectors unless
/// `stochastic_encoder` is set. Identical `(dims, seed)` give identical specs.
pub fn random_system(d: &Dims, seed: u64) -> Result<SystemSpec> {
    random_system_with_budget(d, seed, DEFAULT_BUDGET)
}

pub fn random_system_with_budget(d: &Dims, seed: u64, budget: u64) -> Result<SystemSpec> {
    d.check()?;
    let count = trajectory_count(d.horizon, &d.alphabets);
    if count > budget as u128 {
        return Err(Error::BudgetExceeded { count, budget });
    }
    let a = d.alphabets;
    let n = d.horizon;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let message_prior = simplex_row(&mut rng, a.message);

    let mut state = Vec::with_capacity(n);
    for i in 1..=n {
        state.push(random_kernel(KernelRole::State, i, &a, &[], |_, _| {
            simplex_row(&mut rng, a.state)
        })?);
    }

    let mut encoder_ignore = Vec::new();
    if d.feedback_blind_encoder {
        encoder_ignore.push(Var::Feedback);
    }
    if d.state_blind_encoder {
        encoder_ignore.push(Var::State);
    }
    let mut encoder = Vec::with_capacity(n);
    for i in 1..=n {
        encoder.push(random_kernel(
            KernelRole::Encoder,
            i,
            &a,
            &encoder_ignore,
            |_, _| {
                if d.stochastic_encoder {
                    simplex_row(&mut rng, a.input)
                } else {
                    unit_row(a.input, rng.random_range(0..a.input))
                }
            },
        )?);
    }

    let forward_ignore: &[Var] = if d.state_blind_forward {
        &[Var::State]
    } else {
        &[]
    };
    let mut forward = Vec::with_capacity(n);
    for i in 1..=n {
        forward.push(random_kernel(
            KernelRole::Forward,
            i,
            &a,
            forward_ignore,
            |_, _| simplex_row(&mut rng, a.output),
        )?);
    }

    let mut feedback = Vec::with_capacity(n.saturating_sub(1));
    for i in 1..n {
        feedback.push(if d.noiseless_feedback {
            ConditionalKernel::from_fn(KernelRole::Feedback, i, &a, |parents, digits| {
                let y = digits[parents.len() - 1];
                unit_row(a.feedback, y)
            })?
        } else {
            random_kernel(KernelRole::Feedback, i, &a, &[], |_, _| {
                simplex_row(&mut rng, a.feedback)
            })?
        });
    }

    Ok(SystemSpec {
        horizon: n,
        alphabets: a,
        message_prior,
        state,
        encoder,
        forward,
        feedback,
    })
}

/// Closed-form systems with hand-checkable behavior. All encoders are
/// deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Canonical {
    /// Binary, stateless. Forward BSC(eps_f), feedback BSC(eps_b), uniform
    /// message; `x_1 = x0`, `x_i = x0 XOR e_{i-1}`.
    BscBsc {
        eps_f: f64,
        eps_b: f64,
        horizon: usize,
    },
    /// Binary, stateless, identity forward channel, `e_i = y_i`, `x_i = x0`.
    IdentityNoiselessFb { horizon: usize },
    /// Binary, stateless; outputs are uniform whatever the input. Feedback
    /// BSC(0.25), encoder as in `bsc-bsc`.
    InputIndependent { horizon: usize },
    /// Binary with a uniform Markov state; `y_i = x_i XOR s_i` through a
    /// BSC(eps), `e_i = y_i`, encoder as in `bsc-bsc`.
    StateFlip { eps: f64, horizon: usize },
    /// As `bsc-bsc` but the encoder ignores feedback: `x_i = x0`.
    FeedbackBlind {
        eps_f: f64,
        eps_b: f64,
        horizon: usize,
    },
}

pub const CANONICAL_TAGS: [&str; 5] = [
    "bsc-bsc",
    "identity-noiseless-fb",
    "input-independent",
    "state-flip",
    "feedback-blind",
];

/// `key=value` list, e.g. `eps_f=0.1,eps_b=0.2,n=3`.
pub fn parse_params(s: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("`{item}` is not key=value")))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("`{k}` needs a number")))?;
        out.insert(k.trim().to_string(), value);
    }
    Ok(out)
}

impl Canonical {
    /// Builds a canonical system from its tag. Missing parameters default to
    /// `eps_f = 0.1`, `eps_b = 0.2`, `eps = 0.1`, `n = 3`.
    pub fn from_tag(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let mut c = match name {
            "bsc-bsc" => Canonical::BscBsc {
                eps_f: 0.1,
                eps_b: 0.2,
                horizon: 3,
            },
            "identity-noiseless-fb" => Canonical::IdentityNoiselessFb { horizon: 3 },
            "input-independent" => Canonical::InputIndependent { horizon: 3 },
            "state-flip" => Canonical::StateFlip {
                eps: 0.1,
                horizon: 3,
            },
            "feedback-blind" => Canonical::FeedbackBlind {
                eps_f: 0.1,
                eps_b: 0.2,
                horizon: 3,
            },
            other => return Err(Error::UnknownTag(other.to_string())),
        };
        for (k, v) in params {
            c.set_param(k, *v)?;
        }
        Ok(c)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Canonical::BscBsc { .. } => "bsc-bsc",
            Canonical::IdentityNoiselessFb { .. } => "identity-noiseless-fb",
            Canonical::InputIndependent { .. } => "input-independent",
            Canonical::StateFlip { .. } => "state-flip",
            Canonical::FeedbackBlind { .. } => "feedback-blind",
        }
    }

    /// Sets one scalar parameter (`eps_f`, `eps_b`, `eps` or `n`).
    pub fn set_param(&mut self, key: &str, value: f64) -> Result<()> {
        let tag = self.tag();
        if key == "n" || key == "horizon" {
            if !(value >= 1.0 && value.fract() == 0.0 && value <= MAX_HORIZON as f64) {
                return Err(Error::InvalidParameter(format!(
                    "horizon must be a positive integer, got {value}"
                )));
            }
            let h = value as usize;
            match self {
                Canonical::BscBsc { horizon, .. }
                | Canonical::IdentityNoiselessFb { horizon }
                | Canonical::InputIndependent { horizon }
                | Canonical::StateFlip { horizon, .. }
                | Canonical::FeedbackBlind { horizon, .. } => *horizon = h,
            }
            return Ok(());
        }
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidParameter(format!(
                "`{key}` must lie in [0, 1], got {value}"
            )));
        }
        let slot = match (self, key) {
            (Canonical::BscBsc { eps_f, .. }, "eps_f")
            | (Canonical::FeedbackBlind { eps_f, .. }, "eps_f") => eps_f,
            (Canonical::BscBsc { eps_b, .. }, "eps_b")
            | (Canonical::FeedbackBlind { eps_b, .. }, "eps_b") => eps_b,
            (Canonical::StateFlip { eps, .. }, "eps") => eps,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "`{tag}` has no parameter `{key}`"
                )))
            }
        };
        *slot = value;
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        match *self {
            Canonical::BscBsc { horizon, .. }
            | Canonical::IdentityNoiselessFb { horizon }
            | Canonical::InputIndependent { horizon }
            | Canonical::StateFlip { horizon, .. }
            | Canonical::FeedbackBlind { horizon, .. } => horizon,
        }
    }

    pub fn alphabets(&self) -> Alphabets {
        let state = match self {
            Canonical::StateFlip { .. } => 2,
            _ => 1,
        };
        Alphabets {
            state,
            ..Alphabets::uniform(2)
        }
    }

    /// As [`Canonical::build`], refusing before construction when the
    /// trajectory count exceeds `budget`.
    pub fn build_with_budget(&self, budget: u64) -> Result<SystemSpec> {
        let count = trajectory_count(self.horizon(), &self.alphabets());
        if count > budget as u128 {
            return Err(Error::BudgetExceeded { count, budget });
        }
        self.build()
    }

    pub fn build(&self) -> Result<SystemSpec> {
        let check = |e: f64| {
            if (0.0..=1.0).contains(&e) {
                Ok(e)
            } else {
                Err(Error::InvalidParameter(format!("{e} is not in [0, 1]")))
            }
        };
        let stateless = Alphabets {
            message: 2,
            input: 2,
            output: 2,
            state: 1,
            feedback: 2,
        };
        let xor_feedback = |i: usize, get: &dyn Fn(Coord) -> usize| {
            let x0 = get(Coord::MESSAGE);
            if i == 1 {
                x0
            } else {
                x0 ^ get(Coord::feedback(i - 1))
            }
        };
        match *self {
            Canonical::BscBsc {
                eps_f,
                eps_b,
                horizon,
            } => binary_system(
                stateless,
                horizon,
                bsc(check(eps_f)?),
                Some(bsc(check(eps_b)?)),
                &xor_feedback,
            ),
            Canonical::IdentityNoiselessFb { horizon } => {
                binary_system(stateless, horizon, bsc(0.0), None, &|_, get| {
                    get(Coord::MESSAGE)
                })
            }
            Canonical::InputIndependent { horizon } => binary_system(
                stateless,
                horizon,
                vec![vec![0.5, 0.5]; 2],
                Some(bsc(0.25)),
                &xor_feedback,
            ),
            Canonical::StateFlip { eps, horizon } => {
                let eps = check(eps)?;
                let a = Alphabets {
                    state: 2,
                    ..stateless
                };
                // rows indexed by x * |S| + s
                let rows = (0..2)
                    .flat_map(|x| (0..2).map(move |s| x ^ s))
                    .map(|flip| bsc(eps)[flip].clone())
                    .collect();
                let mut spec = binary_system(a, horizon, rows, None, &xor_feedback)?;
                spec.state = expand_shorthand(
                    &StationaryShorthand::MarkovState {
                        initial: vec![0.5, 0.5],
                        transition: vec![vec![0.5, 0.5]; 2],
                    },
                    horizon,
                    &a,
                )?;
                Ok(spec)
            }
            Canonical::FeedbackBlind {
                eps_f,
                eps_b,
                horizon,
            } => binary_system(
                stateless,
                horizon,
                bsc(check(eps_f)?),
                Some(bsc(check(eps_b)?)),
                &|_, get| get(Coord::MESSAGE),
            ),
        }
    }
}

/// `x_i` from the time `i` and a lookup of already drawn coordinates.
type EncoderRule = dyn Fn(usize, &dyn Fn(Coord) -> usize) -> usize;

fn bsc(eps: f64) -> Vec<Vec<f64>> {
    vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]]
}

/// Uniform binary message, memoryless forward rows (indexed `x * |S| + s`),
/// memoryless feedback rows (or `e_i = y_i` when `None`), trivial state
/// process, and a deterministic encoder `x_i = encode(i, lookup)`.
fn binary_system(
    a: Alphabets,
    n: usize,
    forward_rows: Vec<Vec<f64>>,
    feedback_rows: Option<Vec<Vec<f64>>>,
    encode: &EncoderRule,
) -> Result<SystemSpec> {
    let state = expand_shorthand(
        &StationaryShorthand::MarkovState {
            initial: unit_row(a.state, 0),
            transition: (0..a.state).map(|_| unit_row(a.state, 0)).collect(),
        },
        n,
        &a,
    )?;
    let forward = expand_shorthand(
        &StationaryShorthand::MemorylessForward { rows: forward_rows },
        n,
        &a,
    )?;
    let feedback_rows = feedback_rows.unwrap_or_else(|| bsc(0.0));
    let feedback = expand_shorthand(
        &StationaryShorthand::MemorylessFeedback {
            rows: feedback_rows,
        },
        n,
        &a,
    )?;
    let encoder = (1..=n)
        .map(|i| {
            ConditionalKernel::from_fn(KernelRole::Encoder, i, &a, |parents, digits| {
                let get = |c: Coord| {
                    let k = parents
                        .iter()
                        .position(|p| *p == c)
                        .expect("encoder parent");
                    digits[k]
                };
                unit_row(a.input, encode(i, &get))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SystemSpec {
        horizon: n,
        alphabets: a,
        message_prior: vec![0.5, 0.5],
        state,
        encoder,
        forward,
        feedback,
    })
}
