//! Monte Carlo cross-check: ancestral sampling from the generative model and
//! plug-in estimation on the empirical joint distribution.
//!
//! Random numbers come from ChaCha20 (`rand_chacha`). Sample `k` belongs to
//! chunk `k / SAMPLE_CHUNK`, and chunk `c` draws from stream `c` of the
//! generator seeded with the user seed, so the sample multiset does not
//! depend on how many threads run. Bootstrap replicate `r` uses stream
//! `BOOTSTRAP_STREAM + r`.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{build_joint, conservation_terms, JointTable, VariableSelector};
use crate::error::{Error, Result};
use crate::system::{TrajectoryLayout, ValidatedSystem};

pub const SAMPLE_CHUNK: u64 = 1 << 16;
/// Largest sample count accepted by a single call.
pub const SAMPLE_BUDGET: u64 = 1_000_000_000;
pub const BOOTSTRAP_RESAMPLES: usize = 200;
pub const BOOTSTRAP_STREAM: u64 = 1 << 63;

/// Occurrence counts of sampled trajectories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    layout: TrajectoryLayout,
    count: u64,
    counts: BTreeMap<usize, u64>,
    seed: u64,
}

impl SampleSet {
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Trajectory index to number of occurrences.
    pub fn counts(&self) -> &BTreeMap<usize, u64> {
        &self.counts
    }

    pub fn layout(&self) -> &TrajectoryLayout {
        &self.layout
    }

    /// The empirical distribution as a joint table.
    pub fn empirical_joint(&self) -> Result<JointTable> {
        if self.count == 0 {
            return Err(Error::EmptySampleSet);
        }
        Ok(self.joint_from(self.counts.iter().map(|(&i, &c)| (i, c))))
    }

    fn joint_from(&self, counts: impl Iterator<Item = (usize, u64)>) -> JointTable {
        let mut probs = vec![0.0; self.layout.count()];
        let total = self.count as f64;
        for (i, c) in counts {
            probs[i] = c as f64 / total;
        }
        JointTable::from_probabilities(self.layout.clone(), probs)
            .expect("probabilities sized from the layout")
    }
}

fn draw_symbol(rng: &mut impl Rng, row: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (k, &p) in row.iter().enumerate() {
        cum += p;
        if u < cum {
            return k;
        }
    }
    // rounding left u above the last partial sum
    row.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

fn sample_one(sys: &ValidatedSystem, rng: &mut impl Rng, digits: &mut [usize]) -> usize {
    let layout = sys.layout();
    let spec = sys.spec();
    let mut index = 0usize;
    for (pos, coord) in layout.coords().iter().enumerate() {
        let row = match spec.kernel_for(*coord) {
            None => spec.message_prior.as_slice(),
            Some(kernel) => {
                let r = kernel.parents().iter().zip(kernel.parent_radices()).fold(
                    0,
                    |acc, (p, &radix)| {
                        let at = layout.position(*p).expect("parent exists in layout");
                        acc * radix + digits[at]
                    },
                );
                kernel.row(r)
            }
        };
        let symbol = draw_symbol(rng, row);
        digits[pos] = symbol;
        index = index * layout.radices()[pos] + symbol;
    }
    index
}

/// Draws `count` i.i.d. trajectories by ancestral sampling in the order
/// `x0`, then `s_i, x_i, y_i, e_i` per step.
pub fn sample_trajectories(sys: &ValidatedSystem, count: u64, seed: u64) -> Result<SampleSet> {
    if count == 0 {
        return Err(Error::InvalidParameter(
            "sample count must be at least 1".into(),
        ));
    }
    if count > SAMPLE_BUDGET {
        return Err(Error::BudgetExceeded {
            count: count as u128,
            budget: SAMPLE_BUDGET,
        });
    }
    let chunks = count.div_ceil(SAMPLE_CHUNK);
    let partials: Vec<HashMap<usize, u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let len = SAMPLE_CHUNK.min(count - c * SAMPLE_CHUNK);
            let mut digits = vec![0; sys.layout().len()];
            let mut local = HashMap::new();
            for _ in 0..len {
                *local
                    .entry(sample_one(sys, &mut rng, &mut digits))
                    .or_insert(0) += 1;
            }
            local
        })
        .collect();
    let mut counts = BTreeMap::new();
    for part in partials {
        for (i, c) in part {
            *counts.entry(i).or_insert(0) += c;
        }
    }
    Ok(SampleSet {
        layout: sys.layout().clone(),
        count,
        counts,
        seed,
    })
}

/// Quantities the plug-in estimator understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `I(x^n -> y^n)`.
    DirectedInfo,
    /// `I(x^n -> y^n || s^n)`.
    DirectedInfoCausal,
    /// `I(x0; y^n || s^n)`.
    MessageInfo,
    /// `I(e^{n-1}; x0 | y^n || s^n)`.
    CrossTerm,
    /// `I(e^{n-1} -> y^n || s^n)`.
    FeedbackDirectedInfo,
    /// Left side minus right side of the conservation identity.
    ConservationResidual,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::DirectedInfo,
        Quantity::DirectedInfoCausal,
        Quantity::MessageInfo,
        Quantity::CrossTerm,
        Quantity::FeedbackDirectedInfo,
        Quantity::ConservationResidual,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Quantity::DirectedInfo => "directed_info",
            Quantity::DirectedInfoCausal => "directed_info_causal",
            Quantity::MessageInfo => "message_info",
            Quantity::CrossTerm => "cross_term",
            Quantity::FeedbackDirectedInfo => "feedback_directed_info",
            Quantity::ConservationResidual => "conservation_residual",
        }
    }

    pub fn evaluate(self, joint: &JointTable) -> f64 {
        match self {
            Quantity::DirectedInfo => joint.directed_info(),
            Quantity::DirectedInfoCausal => joint
                .directed_info_causal(&VariableSelector::empty())
                .expect("empty extra conditioning is valid"),
            Quantity::MessageInfo => joint.message_info(),
            Quantity::CrossTerm => joint.cross_term(),
            Quantity::FeedbackDirectedInfo => joint.feedback_directed_info(),
            Quantity::ConservationResidual => conservation_terms(joint, true).residual(),
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.tag() == s)
            .ok_or_else(|| Error::UnknownTag(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Bootstrap standard error.
    pub std_error: f64,
    pub samples: u64,
}

/// Plug-in estimate with a bootstrap standard error.
pub fn plugin_estimate(samples: &SampleSet, quantity: Quantity) -> Result<Estimate> {
    Ok(plugin_estimates(samples, &[quantity])?[0])
}

/// Plug-in estimates of several quantities sharing one set of bootstrap
/// replicates. Each replicate resamples `count` trajectories with
/// replacement (a multinomial draw over the observed counts).
pub fn plugin_estimates(samples: &SampleSet, quantities: &[Quantity]) -> Result<Vec<Estimate>> {
    let joint = samples.empirical_joint()?;
    let point: Vec<f64> = quantities.iter().map(|q| q.evaluate(&joint)).collect();

    let observed: Vec<(usize, u64)> = samples.counts.iter().map(|(&i, &c)| (i, c)).collect();
    let replicates: Vec<Vec<f64>> = (0..BOOTSTRAP_RESAMPLES as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha20Rng::seed_from_u64(samples.seed);
            rng.set_stream(BOOTSTRAP_STREAM + r);
            let resampled = multinomial_resample(&mut rng, &observed, samples.count);
            let joint = samples.joint_from(resampled.into_iter());
            quantities.iter().map(|q| q.evaluate(&joint)).collect()
        })
        .collect();

    Ok(point
        .iter()
        .enumerate()
        .map(|(k, &value)| {
            let values: Vec<f64> = replicates.iter().map(|r| r[k]).collect();
            Estimate {
                value,
                std_error: sample_std(&values),
                samples: samples.count,
            }
        })
        .collect())
}

/// Multinomial(`total`, counts / total) by sequential conditional binomials.
fn multinomial_resample(
    rng: &mut impl Rng,
    observed: &[(usize, u64)],
    total: u64,
) -> Vec<(usize, u64)> {
    let mut remaining_draws = total;
    let mut remaining_mass = total;
    let mut out = Vec::with_capacity(observed.len());
    for &(index, c) in observed {
        if remaining_draws == 0 {
            break;
        }
        let k = if c >= remaining_mass {
            remaining_draws
        } else {
            let p = c as f64 / remaining_mass as f64;
            Binomial::new(remaining_draws, p)
                .expect("p lies in [0, 1]")
                .sample(rng)
        };
        remaining_mass -= c;
        remaining_draws -= k;
        if k > 0 {
            out.push((index, k));
        }
    }
    out
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    var.sqrt()
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub count: u64,
    pub estimate_bits: f64,
    pub std_error_bits: f64,
    pub exact_bits: f64,
    pub abs_error_bits: f64,
}

/// Plug-in estimates at increasing sample counts against the exact value.
pub fn convergence_report(
    sys: &ValidatedSystem,
    quantity: Quantity,
    counts: &[u64],
    seed: u64,
) -> Result<Vec<ConvergenceRow>> {
    if let Some(&c) = counts.iter().find(|&&c| c > SAMPLE_BUDGET) {
        return Err(Error::BudgetExceeded {
            count: c as u128,
            budget: SAMPLE_BUDGET,
        });
    }
    let exact = quantity.evaluate(&build_joint(sys));
    counts
        .iter()
        .map(|&count| {
            let samples = sample_trajectories(sys, count, seed)?;
            let est = plugin_estimate(&samples, quantity)?;
            Ok(ConvergenceRow {
                count,
                estimate_bits: est.value,
                std_error_bits: est.std_error,
                exact_bits: exact,
                abs_error_bits: (est.value - exact).abs(),
            })
        })
        .collect()
}

/// Writes `count,estimate_bits,std_error_bits,exact_bits,abs_error_bits`.
pub fn write_convergence_csv(rows: &[ConvergenceRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Invalid(format!("csv: {other:?}")),
    }
}
