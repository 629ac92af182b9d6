//! Brute-force reference implementation shared by the integration tests.
//!
//! Trajectories live in a `HashMap` keyed by the full symbol tuple, kernel
//! rows are located by recomputing the parent index from the alphabet sizes,
//! and entropies use `H(A|B) = H(A,B) - H(B)` in base 2. Nothing here goes
//! through the engine's marginalization or selector code.

#![allow(dead_code)]

use std::collections::HashMap;

use infoflow::system::{Coord, SystemSpec, Var};

pub struct Oracle {
    pub horizon: usize,
    pub coords: Vec<Coord>,
    pub joint: HashMap<Vec<usize>, f64>,
}

fn order(n: usize) -> Vec<Coord> {
    let mut out = vec![Coord::MESSAGE];
    for i in 1..=n {
        out.push(Coord::state(i));
        out.push(Coord::input(i));
        out.push(Coord::output(i));
        if i < n {
            out.push(Coord::feedback(i));
        }
    }
    out
}

impl Oracle {
    pub fn new(spec: &SystemSpec) -> Self {
        let coords = order(spec.horizon);
        let mut joint = HashMap::new();
        let mut symbols = Vec::with_capacity(coords.len());
        expand(spec, &coords, &mut symbols, 1.0, &mut joint);
        Oracle {
            horizon: spec.horizon,
            coords,
            joint,
        }
    }

    fn slot(&self, c: Coord) -> usize {
        self.coords
            .iter()
            .position(|&d| d == c)
            .expect("coordinate in trajectory")
    }

    pub fn total_mass(&self) -> f64 {
        self.joint.values().sum()
    }

    /// Marginal law of `coords`.
    pub fn marginal(&self, coords: &[Coord]) -> HashMap<Vec<usize>, f64> {
        let slots: Vec<usize> = coords.iter().map(|&c| self.slot(c)).collect();
        let mut out = HashMap::new();
        for (t, &p) in &self.joint {
            let key: Vec<usize> = slots.iter().map(|&s| t[s]).collect();
            *out.entry(key).or_insert(0.0) += p;
        }
        out
    }

    pub fn entropy(&self, coords: &[Coord]) -> f64 {
        self.marginal(coords)
            .values()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum()
    }

    /// `H(target | given)` in bits.
    pub fn cond_entropy(&self, target: &[Coord], given: &[Coord]) -> f64 {
        let both: Vec<Coord> = given.iter().chain(target).copied().collect();
        self.entropy(&both) - self.entropy(given)
    }
}

fn expand(
    spec: &SystemSpec,
    coords: &[Coord],
    symbols: &mut Vec<usize>,
    weight: f64,
    out: &mut HashMap<Vec<usize>, f64>,
) {
    let pos = symbols.len();
    if pos == coords.len() {
        out.insert(symbols.clone(), weight);
        return;
    }
    let coord = coords[pos];
    let row: &[f64] = match spec.kernel_for(coord) {
        None => &spec.message_prior,
        Some(k) => {
            let mut r = 0;
            for p in k.parents() {
                let at = coords.iter().position(|c| c == p).unwrap();
                r = r * spec.alphabets.size(p.var) + symbols[at];
            }
            k.row(r)
        }
    };
    for (sym, &p) in row.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        symbols.push(sym);
        expand(spec, coords, symbols, weight * p, out);
        symbols.pop();
    }
}

/// Composite quantities written out as sums of conditional entropies.
#[derive(Debug, Clone, Copy)]
pub struct HandTerms {
    pub lhs: f64,
    pub message: f64,
    pub joint: f64,
    pub cross: f64,
    pub feedback: f64,
    pub directed_given_message: f64,
    pub directed_info: f64,
    pub input_output: f64,
}

pub fn hist(var: Var, k: usize) -> Vec<Coord> {
    (1..=k).map(|t| Coord::new(var, t)).collect()
}

fn cat(parts: &[&[Coord]]) -> Vec<Coord> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

/// Every composite from `h(target, given)`, a conditional entropy in bits.
pub fn hand_terms(n: usize, h: &dyn Fn(&[Coord], &[Coord]) -> f64) -> HandTerms {
    let x0 = [Coord::MESSAGE];
    let mut t = HandTerms {
        lhs: 0.0,
        message: 0.0,
        joint: 0.0,
        cross: 0.0,
        feedback: 0.0,
        directed_given_message: 0.0,
        directed_info: 0.0,
        input_output: 0.0,
    };
    for i in 1..=n {
        let yi = [Coord::output(i)];
        let ypast = hist(Var::Output, i - 1);
        let s = hist(Var::State, i);
        let x = hist(Var::Input, i);
        let e = hist(Var::Feedback, i - 1);
        let base = h(&yi, &cat(&[&ypast, &s]));

        t.lhs += base - h(&yi, &cat(&[&ypast, &s, &x]));
        t.message += base - h(&yi, &cat(&[&ypast, &s, &x0]));
        t.feedback += base - h(&yi, &cat(&[&ypast, &s, &e]));
        t.directed_given_message +=
            h(&yi, &cat(&[&ypast, &s, &x0])) - h(&yi, &cat(&[&ypast, &s, &x0, &x]));
        t.directed_info += h(&yi, &ypast) - h(&yi, &cat(&[&ypast, &x]));
        t.input_output += base - h(&yi, &cat(&[&ypast, &s, &hist(Var::Input, n)]));

        let mut block = yi.to_vec();
        let mut epast = e.clone();
        if i > 1 {
            block.insert(0, Coord::feedback(i - 1));
            epast.pop();
        }
        let given = cat(&[&epast, &ypast, &s]);
        t.joint += h(&block, &given) - h(&block, &cat(&[&given, &x0]));
    }
    t.cross = t.joint - t.message;
    t
}

impl Oracle {
    pub fn terms(&self) -> HandTerms {
        hand_terms(self.horizon, &|a, b| self.cond_entropy(a, b))
    }
}

pub fn h2(p: f64) -> f64 {
    if p == 0.0 || p == 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}
