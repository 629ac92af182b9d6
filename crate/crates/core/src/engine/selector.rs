use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::system::{Coord, TrajectoryLayout, Var};

/// An ordered set of trajectory coordinates, e.g. `{x0, y1, y2}`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VariableSelector(Vec<Coord>);

impl VariableSelector {
    pub fn new(coords: impl IntoIterator<Item = Coord>) -> Result<Self> {
        let coords: Vec<Coord> = coords.into_iter().collect();
        let mut seen = BTreeSet::new();
        for c in &coords {
            if !seen.insert(*c) {
                return Err(Error::InvalidSelector(format!("duplicate coordinate {c}")));
            }
        }
        Ok(VariableSelector(coords))
    }

    pub fn empty() -> Self {
        VariableSelector(Vec::new())
    }

    pub fn message() -> Self {
        VariableSelector(vec![Coord::MESSAGE])
    }

    /// `var_1, ..., var_k`.
    pub fn history(var: Var, k: usize) -> Self {
        if var == Var::Message {
            return Self::message();
        }
        VariableSelector(Coord::history(var, k).collect())
    }

    pub fn coords(&self) -> &[Coord] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, coord: Coord) -> bool {
        self.0.contains(&coord)
    }

    pub fn mentions(&self, var: Var) -> bool {
        self.0.iter().any(|c| c.var == var)
    }

    pub fn union(&self, other: &VariableSelector) -> Result<VariableSelector> {
        if let Some(c) = other.0.iter().find(|c| self.contains(**c)) {
            return Err(Error::OverlappingSelectors(format!(
                "{c} appears on both sides"
            )));
        }
        Ok(VariableSelector(
            self.0.iter().chain(&other.0).copied().collect(),
        ))
    }

    pub(crate) fn check_in(&self, layout: &TrajectoryLayout) -> Result<()> {
        match self.0.iter().find(|c| !layout.contains(**c)) {
            Some(c) => Err(Error::InvalidSelector(format!(
                "{c} is outside a horizon-{} trajectory",
                layout.horizon()
            ))),
            None => Ok(()),
        }
    }
}

impl FromIterator<Coord> for VariableSelector {
    /// Collects coordinates, dropping repeats.
    fn from_iter<T: IntoIterator<Item = Coord>>(iter: T) -> Self {
        let mut out = Vec::new();
        for c in iter {
            if !out.contains(&c) {
                out.push(c);
            }
        }
        VariableSelector(out)
    }
}

/// A process read with a delay: at step `i` it contributes `var_{i-lag}`
/// (as a target block) or `var_1..var_{i-lag}` (as causal conditioning).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lagged {
    pub var: Var,
    pub lag: usize,
}

impl Lagged {
    pub const STATES: Lagged = Lagged {
        var: Var::State,
        lag: 0,
    };
    pub const INPUTS: Lagged = Lagged {
        var: Var::Input,
        lag: 0,
    };
    pub const OUTPUTS: Lagged = Lagged {
        var: Var::Output,
        lag: 0,
    };
    /// `e^{i-1}` at step `i`.
    pub const FEEDBACK: Lagged = Lagged {
        var: Var::Feedback,
        lag: 1,
    };

    pub fn new(var: Var, lag: usize) -> Self {
        Lagged { var, lag }
    }

    /// Time index of the newest coordinate at step `i`, if it exists.
    fn newest(self, i: usize, horizon: usize) -> Option<usize> {
        let t = i.checked_sub(self.lag)?;
        (t >= 1).then(|| t.min(self.var.last_time(horizon)))
    }

    /// `var_{i-lag}` when it exists.
    pub(crate) fn block_at(self, i: usize, horizon: usize) -> Option<Coord> {
        let t = i.checked_sub(self.lag)?;
        (t >= 1 && t <= self.var.last_time(horizon)).then(|| Coord::new(self.var, t))
    }

    /// `var_1..var_{i-lag}`.
    pub(crate) fn history_at(self, i: usize, horizon: usize) -> impl Iterator<Item = Coord> {
        let k = self.newest(i, horizon).unwrap_or(0);
        Coord::history(self.var, k)
    }

    /// `var_1..var_{i-lag-1}`: the part of a target process already seen.
    pub(crate) fn past_at(self, i: usize, horizon: usize) -> impl Iterator<Item = Coord> {
        let k = match self.block_at(i, horizon) {
            Some(c) => c.time - 1,
            None => self.newest(i, horizon).unwrap_or(0),
        };
        Coord::history(self.var, k)
    }
}

fn check_lagged(list: &[Lagged], what: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for l in list {
        if l.var == Var::Message {
            return Err(Error::InvalidSelector(format!(
                "{what}: the message has no time axis; use a fixed selector"
            )));
        }
        if l.var == Var::Feedback && l.lag == 0 {
            return Err(Error::InvalidSelector(format!(
                "{what}: feedback needs lag >= 1 (e_n is never generated)"
            )));
        }
        if !seen.insert(l.var) {
            return Err(Error::InvalidSelector(format!(
                "{what}: process `{}` listed twice",
                l.var.symbol()
            )));
        }
    }
    Ok(())
}

/// The sequence whose causally conditioned entropy is taken: the block of
/// step `i` is `{var_{i-lag}}` over all listed processes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Process(Vec<Lagged>);

impl Process {
    pub fn new(parts: Vec<Lagged>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidSelector("empty target process".into()));
        }
        check_lagged(&parts, "target process")?;
        Ok(Process(parts))
    }

    /// `y^n`, block `y_i`.
    pub fn outputs() -> Self {
        Process(vec![Lagged::OUTPUTS])
    }

    /// `(e^{n-1}, y^n)` aligned as blocks `(e_{i-1}, y_i)`.
    pub fn feedback_and_outputs() -> Self {
        Process(vec![Lagged::FEEDBACK, Lagged::OUTPUTS])
    }

    /// `e^{n-1}`, block `e_{i-1}` (empty at `i = 1`).
    pub fn feedback() -> Self {
        Process(vec![Lagged::FEEDBACK])
    }

    pub fn parts(&self) -> &[Lagged] {
        &self.0
    }

    pub(crate) fn block_at(&self, i: usize, n: usize) -> Vec<Coord> {
        self.0.iter().filter_map(|l| l.block_at(i, n)).collect()
    }

    pub(crate) fn past_at(&self, i: usize, n: usize) -> Vec<Coord> {
        self.0.iter().flat_map(|l| l.past_at(i, n)).collect()
    }
}

/// Conditioning side of a causal quantity: coordinates conditioned on in
/// full at every step, plus causally revealed processes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Conditioning {
    pub fixed: VariableSelector,
    pub causal: Vec<Lagged>,
}

impl Conditioning {
    pub fn none() -> Self {
        Self::default()
    }

    /// `|| s^n`.
    pub fn states() -> Self {
        Conditioning {
            fixed: VariableSelector::empty(),
            causal: vec![Lagged::STATES],
        }
    }

    pub fn fixed(sel: VariableSelector) -> Self {
        Conditioning {
            fixed: sel,
            causal: Vec::new(),
        }
    }

    pub fn causal(var: Var, lag: usize) -> Self {
        Conditioning {
            fixed: VariableSelector::empty(),
            causal: vec![Lagged::new(var, lag)],
        }
    }

    pub fn with_fixed(mut self, coord: Coord) -> Self {
        if !self.fixed.contains(coord) {
            self.fixed.0.push(coord);
        }
        self
    }

    pub fn with_causal(mut self, var: Var, lag: usize) -> Self {
        self.causal.push(Lagged::new(var, lag));
        self
    }

    /// Concatenation; fails when the two sides share a coordinate or process.
    pub fn merge(&self, other: &Conditioning) -> Result<Conditioning> {
        let fixed = self.fixed.union(&other.fixed)?;
        if let Some(l) = other
            .causal
            .iter()
            .find(|l| self.causal.iter().any(|m| m.var == l.var))
        {
            return Err(Error::OverlappingSelectors(format!(
                "process `{}` is causally conditioned on twice",
                l.var.symbol()
            )));
        }
        let causal = self.causal.iter().chain(&other.causal).copied().collect();
        Ok(Conditioning { fixed, causal })
    }

    pub(crate) fn check(&self, layout: &TrajectoryLayout, target: &Process) -> Result<()> {
        self.fixed.check_in(layout)?;
        check_lagged(&self.causal, "causal conditioning")?;
        for l in &self.causal {
            if self.fixed.mentions(l.var) {
                return Err(Error::OverlappingSelectors(format!(
                    "process `{}` is both fixed and causal",
                    l.var.symbol()
                )));
            }
        }
        for t in target.parts() {
            if self.fixed.mentions(t.var) || self.causal.iter().any(|l| l.var == t.var) {
                return Err(Error::OverlappingSelectors(format!(
                    "target process `{}` also appears in the conditioning",
                    t.var.symbol()
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn given_at(&self, i: usize, n: usize) -> impl Iterator<Item = Coord> + '_ {
        self.fixed
            .coords()
            .iter()
            .copied()
            .chain(self.causal.iter().flat_map(move |l| l.history_at(i, n)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: impl IntoIterator<Item = Coord>) -> Vec<String> {
        v.into_iter().map(|c| c.to_string()).collect()
    }

    #[test]
    fn feedback_lag_aligns_with_outputs() {
        let p = Process::feedback_and_outputs();
        assert_eq!(names(p.block_at(1, 3)), ["y1"]);
        assert_eq!(names(p.past_at(1, 3)), Vec::<String>::new());
        assert_eq!(names(p.block_at(3, 3)), ["e2", "y3"]);
        assert_eq!(names(p.past_at(3, 3)), ["e1", "y1", "y2"]);
    }

    #[test]
    fn causal_histories_respect_delays() {
        let c = Conditioning::states().with_causal(Var::Feedback, 1);
        assert_eq!(names(c.given_at(1, 3)), ["s1"]);
        assert_eq!(names(c.given_at(3, 3)), ["s1", "s2", "s3", "e1", "e2"]);
    }

    #[test]
    fn overlaps_are_errors() {
        let layout = TrajectoryLayout::new(2, crate::system::Alphabets::uniform(2)).unwrap();
        let c = Conditioning::states().with_fixed(Coord::output(1));
        assert!(matches!(
            c.check(&layout, &Process::outputs()),
            Err(Error::OverlappingSelectors(_))
        ));
        assert!(Conditioning::states()
            .merge(&Conditioning::states())
            .is_err());
        assert!(VariableSelector::new([Coord::MESSAGE, Coord::MESSAGE]).is_err());
        assert!(Process::new(vec![Lagged::new(Var::Feedback, 0)]).is_err());
    }
}
