//! Entropies, causally conditioned entropies and the composite information
//! quantities, all by marginalizing one [`JointTable`].

use super::joint::JointTable;
use super::selector::{Conditioning, Lagged, Process, VariableSelector};
use crate::error::{Error, Result};
use crate::system::{Coord, Var};

impl JointTable {
    /// `H(target | given) = -Σ p(a,b) log p(a|b)` over the support of
    /// `(a, b)`. Terms with `p(b) = 0` contribute nothing.
    pub fn cond_entropy(&self, target: &VariableSelector, given: &VariableSelector) -> Result<f64> {
        target.check_in(self.layout())?;
        given.check_in(self.layout())?;
        let all = given.union(target)?;
        Ok(self.cond_entropy_unchecked(all.coords(), given.len()))
    }

    /// `coords` lists the conditioning coordinates first, then the target.
    fn cond_entropy_unchecked(&self, coords: &[Coord], n_given: usize) -> f64 {
        let block: usize = coords[n_given..]
            .iter()
            .map(|c| self.layout().alphabets().size(c.var))
            .product();
        if block == 1 {
            return 0.0;
        }
        let marginal = self
            .marginal(coords)
            .expect("selectors were checked against the layout");
        let mut h = 0.0;
        for group in marginal.chunks_exact(block) {
            let pb: f64 = group.iter().sum();
            if pb <= 0.0 {
                continue;
            }
            for &pab in group {
                if pab > 0.0 {
                    h -= pab * (pab / pb).ln();
                }
            }
        }
        h * self.units().from_nats()
    }

    /// `Σ_{i=1..n} H(B_i | B_1..B_{i-1}, cond_i)` where `B_i` is the block of
    /// `process` at step `i` and `cond_i` holds the fixed coordinates plus
    /// every causal process revealed up to its delay.
    pub fn causal_entropy(&self, process: &Process, cond: &Conditioning) -> Result<f64> {
        cond.check(self.layout(), process)?;
        let n = self.horizon();
        let mut total = 0.0;
        for i in 1..=n {
            let block = process.block_at(i, n);
            if block.is_empty() {
                continue;
            }
            let given: VariableSelector = process
                .past_at(i, n)
                .into_iter()
                .chain(cond.given_at(i, n))
                .collect();
            let coords: Vec<Coord> = given.coords().iter().chain(&block).copied().collect();
            total += self.cond_entropy_unchecked(&coords, given.len());
        }
        Ok(total)
    }

    /// `I(a; process || cond) = H(process || cond) - H(process || cond, a)`.
    pub fn causal_mutual_info(
        &self,
        process: &Process,
        a: &Conditioning,
        cond: &Conditioning,
    ) -> Result<f64> {
        if a.fixed.is_empty() && a.causal.is_empty() {
            return Err(Error::InvalidSelector(
                "mutual information needs a nonempty first argument".into(),
            ));
        }
        let both = cond.merge(a)?;
        both.check(self.layout(), process)?;
        Ok(self.causal_entropy(process, cond)? - self.causal_entropy(process, &both)?)
    }

    /// `I(x^n -> y^n) = Σ I(x^i; y_i | y^{i-1})`.
    pub fn directed_info(&self) -> f64 {
        self.known(&Process::outputs(), &inputs(), &Conditioning::none())
    }

    /// `I(x^n -> y^n || extra, s^n) = Σ I(x^i; y_i | y^{i-1}, extra, s^i)`.
    pub fn directed_info_causal(&self, extra: &VariableSelector) -> Result<f64> {
        for var in [Var::State, Var::Input, Var::Output] {
            if extra.mentions(var) {
                return Err(Error::OverlappingSelectors(format!(
                    "extra conditioning may not contain `{}` coordinates",
                    var.symbol()
                )));
            }
        }
        let cond = Conditioning::states().merge(&Conditioning::fixed(extra.clone()))?;
        self.causal_mutual_info(&Process::outputs(), &inputs(), &cond)
    }

    /// `I(x0; y^n || s^n)`.
    pub fn message_info(&self) -> f64 {
        self.message_info_given(&Conditioning::states())
    }

    /// `I(e^{n-1} -> y^n || s^n) = H(y^n || s^n) - H(y^n || e^{n-1}, s^n)`.
    pub fn feedback_directed_info(&self) -> f64 {
        self.feedback_directed_info_given(&Conditioning::states())
    }

    /// `I(e^{n-1}, y^n; x0 || s^n)` with blocks `(e_{i-1}, y_i)`.
    pub fn joint_feedback_message_info(&self) -> f64 {
        self.joint_feedback_message_info_given(&Conditioning::states())
    }

    /// `I(e^{n-1}; x0 | y^n || s^n)`, by the chain rule only.
    pub fn cross_term(&self) -> f64 {
        self.joint_feedback_message_info() - self.message_info()
    }

    /// `I(x^n; y^n || s^n) = H(y^n || s^n) - H(y^n | x^n || s^n)`.
    pub fn input_output_info(&self) -> f64 {
        let xn = Conditioning::fixed(VariableSelector::history(Var::Input, self.horizon()));
        self.known(&Process::outputs(), &xn, &Conditioning::states())
    }

    pub(crate) fn message_info_given(&self, base: &Conditioning) -> f64 {
        self.known(&Process::outputs(), &message(), base)
    }

    pub(crate) fn feedback_directed_info_given(&self, base: &Conditioning) -> f64 {
        let fb = Conditioning::causal(Var::Feedback, 1);
        self.known(&Process::outputs(), &fb, base)
    }

    pub(crate) fn joint_feedback_message_info_given(&self, base: &Conditioning) -> f64 {
        self.known(&Process::feedback_and_outputs(), &message(), base)
    }

    pub(crate) fn directed_info_given(&self, base: &Conditioning) -> f64 {
        self.known(&Process::outputs(), &inputs(), base)
    }

    /// `Σ H(e_{i-1} | e^{i-2}, y^{i-1}, s^i) - H(e_{i-1} | e^{i-2}, y^{i-1}, x0, s^i)`:
    /// zero whenever feedback depends only on its own past and the outputs.
    pub(crate) fn feedback_message_leak(&self, base: &Conditioning) -> f64 {
        let with_outputs = base
            .merge(&Conditioning::causal(Var::Output, 1))
            .expect("base conditioning never mentions outputs");
        self.known(&Process::feedback(), &message(), &with_outputs)
    }

    /// `Σ H(y_i | e^{i-1}, y^{i-1}, x0, s^i) - H(y_i | x^i, y^{i-1}, x0, s^i)`:
    /// zero whenever `x^i` is a function of `(x0, e^{i-1}, s^i)`.
    pub(crate) fn encoder_determinism_gap(&self, base: &Conditioning) -> f64 {
        let with_message = base
            .merge(&message())
            .expect("base conditioning never fixes x0");
        let via_feedback = with_message
            .merge(&Conditioning::causal(Var::Feedback, 1))
            .expect("base conditioning never mentions feedback");
        let via_inputs = with_message
            .merge(&inputs())
            .expect("base conditioning never mentions inputs");
        let outputs = Process::outputs();
        self.causal_entropy(&outputs, &via_feedback)
            .expect("fixed selectors are valid")
            - self
                .causal_entropy(&outputs, &via_inputs)
                .expect("fixed selectors are valid")
    }

    fn known(&self, process: &Process, a: &Conditioning, cond: &Conditioning) -> f64 {
        self.causal_mutual_info(process, a, cond)
            .expect("built-in selectors are valid for every layout")
    }
}

fn inputs() -> Conditioning {
    Conditioning {
        fixed: VariableSelector::empty(),
        causal: vec![Lagged::INPUTS],
    }
}

fn message() -> Conditioning {
    Conditioning::fixed(VariableSelector::message())
}
