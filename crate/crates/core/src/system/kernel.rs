use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Alphabets, Coord, Var};
use crate::error::{Error, Result};

/// Which factor of the generative model a kernel implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelRole {
    State,
    Encoder,
    Forward,
    Feedback,
}

impl KernelRole {
    pub const ALL: [KernelRole; 4] = [
        KernelRole::State,
        KernelRole::Encoder,
        KernelRole::Forward,
        KernelRole::Feedback,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelRole::State => "state",
            KernelRole::Encoder => "encoder",
            KernelRole::Forward => "forward",
            KernelRole::Feedback => "feedback",
        }
    }

    pub fn child_var(self) -> Var {
        match self {
            KernelRole::State => Var::State,
            KernelRole::Encoder => Var::Input,
            KernelRole::Forward => Var::Output,
            KernelRole::Feedback => Var::Feedback,
        }
    }

    pub fn for_var(var: Var) -> Option<KernelRole> {
        match var {
            Var::Message => None,
            Var::State => Some(KernelRole::State),
            Var::Input => Some(KernelRole::Encoder),
            Var::Output => Some(KernelRole::Forward),
            Var::Feedback => Some(KernelRole::Feedback),
        }
    }

    /// Number of kernels a system of horizon `n` carries for this role.
    pub fn kernel_count(self, n: usize) -> usize {
        match self {
            KernelRole::Feedback => n.saturating_sub(1),
            _ => n,
        }
    }

    /// Canonical ordered parent list at time `i`. The last parent is the
    /// least significant digit of the row index.
    ///
    /// * state: `s_1..s_{i-1}`
    /// * encoder: `x0, x_1..x_{i-1}, e_1..e_{i-1}, s_1..s_i`
    /// * forward: `y_1..y_{i-1}, x_1..x_i, s_1..s_i`
    /// * feedback: `e_1..e_{i-1}, y_1..y_i`
    pub fn parents(self, i: usize) -> Vec<Coord> {
        let mut out = Vec::new();
        match self {
            KernelRole::State => out.extend(Coord::history(Var::State, i - 1)),
            KernelRole::Encoder => {
                out.push(Coord::MESSAGE);
                out.extend(Coord::history(Var::Input, i - 1));
                out.extend(Coord::history(Var::Feedback, i - 1));
                out.extend(Coord::history(Var::State, i));
            }
            KernelRole::Forward => {
                out.extend(Coord::history(Var::Output, i - 1));
                out.extend(Coord::history(Var::Input, i));
                out.extend(Coord::history(Var::State, i));
            }
            KernelRole::Feedback => {
                out.extend(Coord::history(Var::Feedback, i - 1));
                out.extend(Coord::history(Var::Output, i));
            }
        }
        out
    }
}

/// Dense conditional probability table for one time step: one row per
/// parent history (mixed-radix over the canonical parent list), one column
/// per child symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalKernel {
    role: KernelRole,
    time: usize,
    parents: Vec<Coord>,
    parent_radices: Vec<usize>,
    child_size: usize,
    probs: Vec<f64>,
}

impl ConditionalKernel {
    /// `(rows, columns)` for the kernel of `role` at time `i`.
    pub fn expected_shape(role: KernelRole, i: usize, alphabets: &Alphabets) -> (usize, usize) {
        let rows = role
            .parents(i)
            .iter()
            .map(|c| alphabets.size(c.var))
            .product();
        (rows, alphabets.size(role.child_var()))
    }

    /// Builds a kernel from explicit rows in history-index order.
    pub fn from_rows(
        role: KernelRole,
        time: usize,
        alphabets: &Alphabets,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_time(role, time)?;
        let parents = role.parents(time);
        let parent_radices: Vec<usize> = parents.iter().map(|c| alphabets.size(c.var)).collect();
        let (expected_rows, child_size) = Self::expected_shape(role, time, alphabets);
        if rows.len() != expected_rows {
            return Err(Error::MissingEntry {
                kernel: role.name().into(),
                time,
                expected: expected_rows,
                found: rows.len(),
            });
        }
        let mut probs = Vec::with_capacity(expected_rows * child_size);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != child_size {
                return Err(Error::DimensionMismatch(format!(
                    "{} kernel at i={time}, row {r}: {} entries for an alphabet of size {child_size}",
                    role.name(),
                    row.len()
                )));
            }
            probs.extend_from_slice(row);
        }
        Ok(ConditionalKernel {
            role,
            time,
            parents,
            parent_radices,
            child_size,
            probs,
        })
    }

    /// Builds a kernel by evaluating `row_for` on every parent history. The
    /// closure receives the parent symbols in canonical parent order.
    pub fn from_fn(
        role: KernelRole,
        time: usize,
        alphabets: &Alphabets,
        mut row_for: impl FnMut(&[Coord], &[usize]) -> Vec<f64>,
    ) -> Result<Self> {
        check_time(role, time)?;
        let parents = role.parents(time);
        let radices: Vec<usize> = parents.iter().map(|c| alphabets.size(c.var)).collect();
        let rows_total: usize = radices.iter().product();
        let mut digits = vec![0usize; parents.len()];
        let mut rows = Vec::with_capacity(rows_total);
        for _ in 0..rows_total {
            rows.push(row_for(&parents, &digits));
            increment(&mut digits, &radices);
        }
        Self::from_rows(role, time, alphabets, rows)
    }

    pub fn role(&self) -> KernelRole {
        self.role
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn child(&self) -> Coord {
        Coord::new(self.role.child_var(), self.time)
    }

    pub fn parents(&self) -> &[Coord] {
        &self.parents
    }

    pub fn parent_radices(&self) -> &[usize] {
        &self.parent_radices
    }

    pub fn child_size(&self) -> usize {
        self.child_size
    }

    pub fn rows(&self) -> usize {
        self.probs.len().checked_div(self.child_size).unwrap_or(0)
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.probs[index * self.child_size..(index + 1) * self.child_size]
    }

    pub fn row_vectors(&self) -> Vec<Vec<f64>> {
        self.probs
            .chunks(self.child_size)
            .map(<[f64]>::to_vec)
            .collect()
    }

    /// Row index of a parent history given in canonical parent order.
    pub fn row_index(&self, parent_symbols: &[usize]) -> usize {
        parent_symbols
            .iter()
            .zip(&self.parent_radices)
            .fold(0, |acc, (&d, &r)| acc * r + d)
    }

    pub fn row_digits(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.parent_radices.len()];
        for (d, &r) in digits.iter_mut().zip(&self.parent_radices).rev() {
            *d = index % r;
            index /= r;
        }
        digits
    }

    /// Human-readable parent tuple of a row, e.g. `y1=0, x1=1, x2=0`.
    pub fn describe_row(&self, index: usize) -> String {
        let digits = self.row_digits(index);
        let mut out = String::new();
        for (i, (c, d)) in self.parents.iter().zip(digits).enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{c}={d}");
        }
        if out.is_empty() {
            out.push_str("empty history");
        }
        out
    }

    pub fn is_deterministic(&self) -> bool {
        self.probs.iter().all(|&p| p == 0.0 || p == 1.0)
    }

    /// True when every row equals the row obtained by setting all parents of
    /// process `var` to symbol 0, within `tol`.
    pub fn is_constant_in(&self, var: Var, tol: f64) -> bool {
        if !self.parents.iter().any(|c| c.var == var) {
            return true;
        }
        (0..self.rows()).all(|r| {
            let mut digits = self.row_digits(r);
            for (d, c) in digits.iter_mut().zip(&self.parents) {
                if c.var == var {
                    *d = 0;
                }
            }
            let base = self.row(self.row_index(&digits));
            self.row(r)
                .iter()
                .zip(base)
                .all(|(a, b)| (a - b).abs() <= tol)
        })
    }

    pub(super) fn relabeled(&self, var: Var, perm: &[usize]) -> ConditionalKernel {
        let mut out = self.clone();
        let child_is_var = self.role.child_var() == var;
        for r in 0..self.rows() {
            let mut digits = self.row_digits(r);
            for (d, c) in digits.iter_mut().zip(&self.parents) {
                if c.var == var {
                    *d = perm[*d];
                }
            }
            let target = self.row_index(&digits);
            for (symbol, &p) in self.row(r).iter().enumerate() {
                let column = if child_is_var { perm[symbol] } else { symbol };
                out.probs[target * self.child_size + column] = p;
            }
        }
        out
    }
}

fn check_time(role: KernelRole, time: usize) -> Result<()> {
    if time == 0 {
        return Err(Error::Invalid(format!(
            "{} kernel time index must start at 1",
            role.name()
        )));
    }
    Ok(())
}

/// Mixed-radix increment, last digit fastest.
pub(crate) fn increment(digits: &mut [usize], radices: &[usize]) {
    for (d, &r) in digits.iter_mut().zip(radices).rev() {
        *d += 1;
        if *d < r {
            return;
        }
        *d = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parent_lists_follow_the_factorization() {
        let names = |v: Vec<Coord>| v.iter().map(|c| c.to_string()).collect::<Vec<_>>();
        assert_eq!(names(KernelRole::State.parents(1)), Vec::<String>::new());
        assert_eq!(
            names(KernelRole::Encoder.parents(2)),
            ["x0", "x1", "e1", "s1", "s2"]
        );
        assert_eq!(
            names(KernelRole::Forward.parents(2)),
            ["y1", "x1", "x2", "s1", "s2"]
        );
        assert_eq!(names(KernelRole::Feedback.parents(2)), ["e1", "y1", "y2"]);
    }

    #[test]
    fn row_index_roundtrip() {
        let a = Alphabets {
            message: 3,
            input: 2,
            output: 2,
            state: 3,
            feedback: 2,
        };
        let k =
            ConditionalKernel::from_fn(KernelRole::Encoder, 2, &a, |_, _| vec![0.5, 0.5]).unwrap();
        assert_eq!(k.rows(), 3 * 2 * 2 * 3 * 3);
        for r in 0..k.rows() {
            assert_eq!(k.row_index(&k.row_digits(r)), r);
        }
        assert_eq!(k.describe_row(0), "x0=0, x1=0, e1=0, s1=0, s2=0");
    }

    #[test]
    fn constancy_detects_state_use() {
        let a = Alphabets::uniform(2);
        let blind = ConditionalKernel::from_fn(KernelRole::Forward, 1, &a, |_, d| {
            if d[0] == 0 {
                vec![0.9, 0.1]
            } else {
                vec![0.1, 0.9]
            }
        })
        .unwrap();
        assert!(blind.is_constant_in(Var::State, 0.0));
        let using = ConditionalKernel::from_fn(KernelRole::Forward, 1, &a, |_, d| {
            if d[0] == d[1] {
                vec![1.0, 0.0]
            } else {
                vec![0.0, 1.0]
            }
        })
        .unwrap();
        assert!(!using.is_constant_in(Var::State, 1e-12));
        assert!(using.is_deterministic());
    }

    #[test]
    fn wrong_row_count_is_missing_entry() {
        let a = Alphabets::uniform(2);
        let err = ConditionalKernel::from_rows(KernelRole::Forward, 1, &a, vec![vec![1.0, 0.0]])
            .unwrap_err();
        assert!(matches!(
            err,
            Error::MissingEntry {
                expected: 4,
                found: 1,
                ..
            }
        ));
    }
}
