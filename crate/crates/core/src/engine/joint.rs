use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{Coord, TrajectoryLayout, ValidatedSystem};

/// Logarithm base of every reported quantity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Bits,
    Nats,
}

impl Units {
    /// Multiplier turning a natural-log value into this unit.
    pub fn from_nats(self) -> f64 {
        match self {
            Units::Bits => std::f64::consts::LOG2_E,
            Units::Nats => 1.0,
        }
    }

    /// How many of this unit make one bit.
    pub fn per_bit(self) -> f64 {
        match self {
            Units::Bits => 1.0,
            Units::Nats => std::f64::consts::LN_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Units::Bits => "bits",
            Units::Nats => "nats",
        }
    }
}

impl std::str::FromStr for Units {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bits" => Ok(Units::Bits),
            "nats" => Ok(Units::Nats),
            other => Err(Error::UnknownTag(other.to_string())),
        }
    }
}

/// Exact probability of every trajectory, indexed by the layout's
/// mixed-radix trajectory index.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    layout: TrajectoryLayout,
    probs: Vec<f64>,
    units: Units,
}

impl JointTable {
    /// Wraps an externally computed distribution (e.g. an empirical one).
    pub fn from_probabilities(layout: TrajectoryLayout, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != layout.count() {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for {} trajectories",
                probs.len(),
                layout.count()
            )));
        }
        Ok(JointTable {
            layout,
            probs,
            units: Units::Bits,
        })
    }

    pub fn with_units(mut self, units: Units) -> Self {
        self.units = units;
        self
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn layout(&self) -> &TrajectoryLayout {
        &self.layout
    }

    pub fn horizon(&self) -> usize {
        self.layout.horizon()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Marginal over `coords`, laid out row-major in the order given (first
    /// coordinate most significant). Summation runs in trajectory-index
    /// order, so the result is deterministic.
    pub fn marginal(&self, coords: &[Coord]) -> Result<Vec<f64>> {
        let layout = &self.layout;
        let k = layout.len();
        let radices = layout.radices();
        let mut stride = vec![0usize; k];
        let mut size = 1usize;
        let mut last = None::<usize>;
        for c in coords.iter().rev() {
            let pos = layout.position(*c).ok_or_else(|| {
                Error::InvalidSelector(format!(
                    "{c} is outside a horizon-{} trajectory",
                    layout.horizon()
                ))
            })?;
            if stride[pos] != 0 {
                return Err(Error::InvalidSelector(format!("duplicate coordinate {c}")));
            }
            stride[pos] = size;
            size *= radices[pos];
            last = Some(last.map_or(pos, |l: usize| l.max(pos)));
        }
        let mut out = vec![0.0; size];
        let Some(last) = last else {
            out[0] = self.total_mass();
            return Ok(out);
        };

        // Digits after `last` never move the projection: sum those blocks
        // contiguously and walk an odometer over positions 0..=last.
        let block = layout.strides()[last];
        let mut digits = vec![0usize; last + 1];
        let mut proj = 0usize;
        for chunk in self.probs.chunks_exact(block) {
            out[proj] += chunk.iter().sum::<f64>();
            let mut d = last + 1;
            while d > 0 {
                d -= 1;
                digits[d] += 1;
                proj += stride[d];
                if digits[d] < radices[d] {
                    break;
                }
                proj -= stride[d] * radices[d];
                digits[d] = 0;
            }
        }
        Ok(out)
    }
}

/// Per-position factor lookup: where the kernel row of each coordinate lives.
struct Plan<'a> {
    sys: &'a ValidatedSystem,
    /// `(parent position, row stride)` pairs per layout position.
    parents: Vec<Vec<(usize, usize)>>,
}

impl<'a> Plan<'a> {
    fn new(sys: &'a ValidatedSystem) -> Self {
        let layout = sys.layout();
        let parents = layout
            .coords()
            .iter()
            .map(|&c| match sys.spec().kernel_for(c) {
                None => Vec::new(),
                Some(kernel) => {
                    let radices = kernel.parent_radices();
                    let mut stride = 1;
                    let mut out = vec![(0, 0); radices.len()];
                    for (j, p) in kernel.parents().iter().enumerate().rev() {
                        let pos = layout.position(*p).expect("parent exists in layout");
                        out[j] = (pos, stride);
                        stride *= radices[j];
                    }
                    out
                }
            })
            .collect();
        Plan { sys, parents }
    }

    fn row(&self, pos: usize, digits: &[usize]) -> &'a [f64] {
        let coord = self.sys.layout().coords()[pos];
        match self.sys.spec().kernel_for(coord) {
            None => &self.sys.spec().message_prior,
            Some(kernel) => {
                let r = self.parents[pos].iter().map(|&(p, s)| digits[p] * s).sum();
                kernel.row(r)
            }
        }
    }

    /// Depth-first fill of the subtree below `pos`; `out` covers exactly
    /// that subtree. Each leaf is the ordered product of its factors.
    fn fill(&self, digits: &mut [usize], pos: usize, weight: f64, out: &mut [f64]) {
        if pos == digits.len() {
            out[0] = weight;
            return;
        }
        if weight == 0.0 {
            out.fill(0.0);
            return;
        }
        let row = self.row(pos, digits);
        let sub = self.sys.layout().strides()[pos];
        for (sym, (&p, slot)) in row.iter().zip(out.chunks_exact_mut(sub)).enumerate() {
            digits[pos] = sym;
            self.fill(digits, pos + 1, weight * p, slot);
        }
    }
}

/// Exact joint distribution of a validated system.
pub fn build_joint(sys: &ValidatedSystem) -> JointTable {
    build_joint_with_workers(sys, 1)
}

/// As [`build_joint`], partitioning the index space across `workers`
/// threads. Every entry is the same ordered product regardless of the
/// partition, so the table is bit-identical for any worker count.
pub fn build_joint_with_workers(sys: &ValidatedSystem, workers: usize) -> JointTable {
    let layout = sys.layout();
    let plan = Plan::new(sys);
    let mut probs = vec![0.0; layout.count()];
    let k = layout.len();

    if workers <= 1 {
        let mut digits = vec![0; k];
        plan.fill(&mut digits, 0, 1.0, &mut probs);
    } else {
        // Fix the first `split` digits per chunk, with enough chunks to share.
        let mut split = 1;
        while split < k && layout.count() / layout.strides()[split - 1] < 4 * workers {
            split += 1;
        }
        let chunk_len = layout.strides()[split - 1];
        let mut run = || {
            probs
                .par_chunks_mut(chunk_len)
                .enumerate()
                .for_each(|(c, out)| {
                    let mut digits = layout
                        .symbols(c * chunk_len)
                        .expect("chunk start is a valid index");
                    let mut weight = 1.0;
                    for pos in 0..split {
                        if weight == 0.0 {
                            break;
                        }
                        weight *= plan.row(pos, &digits)[digits[pos]];
                    }
                    plan.fill(&mut digits, split, weight, out);
                });
        };
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        }
    }

    JointTable {
        layout: layout.clone(),
        probs,
        units: Units::Bits,
    }
}
