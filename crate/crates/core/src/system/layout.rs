use super::{Alphabets, Coord, Var};
use crate::error::{Error, Result};

/// `|X0| · (|S||X||Y|)^n · |E|^(n-1)`, exact.
pub fn trajectory_count(horizon: usize, alphabets: &Alphabets) -> u128 {
    let step = alphabets.state as u128 * alphabets.input as u128 * alphabets.output as u128;
    let mut count = alphabets.message as u128;
    for i in 1..=horizon {
        count = count.saturating_mul(step);
        if i < horizon {
            count = count.saturating_mul(alphabets.feedback as u128);
        }
    }
    count
}

/// Mixed-radix coordinate system over complete trajectories.
///
/// Digit order, most significant first: `x0`, then for `i = 1..n` the group
/// `s_i, x_i, y_i` followed by `e_i` when `i < n`. This is also the ancestral
/// sampling order, so a depth-first walk visits trajectories in index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryLayout {
    horizon: usize,
    alphabets: Alphabets,
    coords: Vec<Coord>,
    radices: Vec<usize>,
    strides: Vec<usize>,
    count: usize,
}

impl TrajectoryLayout {
    pub fn new(horizon: usize, alphabets: Alphabets) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Invalid("horizon must be at least 1".into()));
        }
        alphabets.check()?;
        let total = trajectory_count(horizon, &alphabets);
        let count = usize::try_from(total).map_err(|_| Error::BudgetExceeded {
            count: total,
            budget: usize::MAX as u64,
        })?;

        let mut coords = vec![Coord::MESSAGE];
        for i in 1..=horizon {
            coords.extend([Coord::state(i), Coord::input(i), Coord::output(i)]);
            if i < horizon {
                coords.push(Coord::feedback(i));
            }
        }
        let radices: Vec<usize> = coords.iter().map(|c| alphabets.size(c.var)).collect();
        let mut strides = vec![1usize; coords.len()];
        for k in (0..coords.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * radices[k + 1];
        }
        Ok(TrajectoryLayout {
            horizon,
            alphabets,
            coords,
            radices,
            strides,
            count,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn alphabets(&self) -> &Alphabets {
        &self.alphabets
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Coordinates in digit order.
    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Digit position of `coord`, or `None` when the coordinate does not
    /// exist at this horizon.
    pub fn position(&self, coord: Coord) -> Option<usize> {
        let n = self.horizon;
        if coord.var == Var::Message {
            return Some(0);
        }
        let i = coord.time;
        if i == 0 || i > coord.var.last_time(n) {
            return None;
        }
        let base = 1 + 4 * (i - 1);
        Some(match coord.var {
            Var::State => base,
            Var::Input => base + 1,
            Var::Output => base + 2,
            Var::Feedback => base + 3,
            Var::Message => unreachable!(),
        })
    }

    pub fn contains(&self, coord: Coord) -> bool {
        self.position(coord).is_some()
    }

    /// Flat index of a trajectory given as symbols in digit order.
    pub fn index(&self, symbols: &[usize]) -> Result<usize> {
        if symbols.len() != self.coords.len() {
            return Err(Error::DimensionMismatch(format!(
                "trajectory has {} symbols, layout has {} coordinates",
                symbols.len(),
                self.coords.len()
            )));
        }
        let mut index = 0usize;
        for ((&s, &r), c) in symbols.iter().zip(&self.radices).zip(&self.coords) {
            if s >= r {
                return Err(Error::SymbolOutOfRange {
                    coord: c.to_string(),
                    value: s,
                    size: r,
                });
            }
            index = index * r + s;
        }
        Ok(index)
    }

    /// Inverse of [`index`](Self::index).
    pub fn symbols(&self, mut index: usize) -> Result<Vec<usize>> {
        if index >= self.count {
            return Err(Error::InvalidParameter(format!(
                "trajectory index {index} out of range 0..{}",
                self.count
            )));
        }
        let mut out = vec![0; self.coords.len()];
        for (d, &r) in out.iter_mut().zip(&self.radices).rev() {
            *d = index % r;
            index /= r;
        }
        Ok(out)
    }
}
