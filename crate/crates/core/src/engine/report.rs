use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::joint::{build_joint_with_workers, JointTable, Units};
use super::selector::{Conditioning, Process, VariableSelector};
use crate::error::{Error, Result};
use crate::system::{ValidatedSystem, Var, NORMALIZATION_TOL};

/// Default residual tolerance, in bits.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// The terms of the conservation identity, either causally conditioned on
/// the state sequence or with the state dropped entirely.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationTerms {
    /// `I(x^n -> y^n || s^n)`.
    pub lhs: f64,
    /// `I(x0; y^n || s^n)`.
    pub message: f64,
    /// `I(e^{n-1}; x0 | y^n || s^n)`.
    pub cross: f64,
    /// `I(e^{n-1} -> y^n || s^n)`.
    pub feedback: f64,
}

impl ConservationTerms {
    pub fn residual(&self) -> f64 {
        self.lhs - (self.message + self.cross + self.feedback)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `lhs - (message + cross + feedback)`.
    pub conservation: f64,
    /// `message - (lhs - I(x^n -> y^n || x0, s^n))`.
    pub step1_markov: f64,
    /// `I(x^n -> y^n || x0, s^n) - (cross + feedback)`.
    pub step2_decomposition: f64,
    /// `cross - (I(e^{n-1}, y^n; x0 || s^n) - I(y^n; x0 || s^n))`.
    pub step3_chain_rule: f64,
    /// Information the feedback symbols carry about `x0` beyond `(e, y)` pasts.
    pub feedback_markov: f64,
    /// Gap between conditioning on `(x0, e^{i-1})` and on `(x0, x^i)`.
    pub encoder_determinism: f64,
}

impl Residuals {
    fn proof_steps(&self) -> [f64; 5] {
        [
            self.step1_markov,
            self.step2_decomposition,
            self.step3_chain_rule,
            self.feedback_markov,
            self.encoder_determinism,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub units: Units,
    pub tolerance_bits: f64,
    pub horizon: usize,
    pub trajectory_count: usize,
    pub total_mass: f64,
    pub encoder_deterministic: bool,
    /// `I(x^n -> y^n || s^n)`.
    pub lhs: f64,
    /// `I(x0; y^n || s^n)`.
    pub term_message: f64,
    /// `I(e^{n-1}; x0 | y^n || s^n)`.
    pub term_cross: f64,
    /// `I(e^{n-1} -> y^n || s^n)`.
    pub term_feedback: f64,
    /// `I(x^n -> y^n || x0, s^n)`.
    pub aux_directed_given_message: f64,
    /// `I(e^{n-1}, y^n; x0 || s^n)`.
    pub aux_joint_feedback_message: f64,
    /// `I(y^n; x0 || s^n)`.
    pub aux_output_message: f64,
    /// `I(x^n; y^n || s^n)`.
    pub input_output_info: f64,
    /// `I(x^n -> y^n)`, without the state.
    pub directed_info: f64,
    pub residuals: Residuals,
    pub cross_negative: bool,
    pub conservation_holds: bool,
    pub proof_steps_hold: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_secs: Option<f64>,
}

impl IdentityReport {
    /// Evaluates every quantity on `joint`. Pass/fail compares residuals in
    /// bits against `tolerance_bits`, whatever the table's units.
    pub fn from_joint(
        joint: &JointTable,
        encoder_deterministic: bool,
        tolerance_bits: f64,
    ) -> Self {
        let terms = conservation_terms(joint, true);
        let aux_directed_given_message = joint
            .directed_info_causal(&VariableSelector::message())
            .expect("x0 is valid extra conditioning");
        let aux_joint_feedback_message = joint.joint_feedback_message_info();
        let aux_output_message = joint.message_info();
        let base = Conditioning::states();

        let residuals = Residuals {
            conservation: terms.lhs - (terms.message + terms.cross + terms.feedback),
            step1_markov: terms.message - (terms.lhs - aux_directed_given_message),
            step2_decomposition: aux_directed_given_message - (terms.cross + terms.feedback),
            step3_chain_rule: terms.cross - (aux_joint_feedback_message - aux_output_message),
            feedback_markov: joint.feedback_message_leak(&base),
            encoder_determinism: joint.encoder_determinism_gap(&base),
        };
        let within = |r: f64| (r / joint.units().per_bit()).abs() <= tolerance_bits;

        IdentityReport {
            units: joint.units(),
            tolerance_bits,
            horizon: joint.horizon(),
            trajectory_count: joint.layout().count(),
            total_mass: joint.total_mass(),
            encoder_deterministic,
            lhs: terms.lhs,
            term_message: terms.message,
            term_cross: terms.cross,
            term_feedback: terms.feedback,
            aux_directed_given_message,
            aux_joint_feedback_message,
            aux_output_message,
            input_output_info: joint.input_output_info(),
            directed_info: joint.directed_info(),
            residuals,
            cross_negative: terms.cross < 0.0,
            conservation_holds: within(residuals.conservation),
            proof_steps_hold: residuals.proof_steps().into_iter().all(within),
            duration_secs: None,
        }
    }

    pub fn terms(&self) -> ConservationTerms {
        ConservationTerms {
            lhs: self.lhs,
            message: self.term_message,
            cross: self.term_cross,
            feedback: self.term_feedback,
        }
    }
}

/// Conservation terms evaluated on `joint`, causally conditioned on the
/// state sequence when `state_conditioned`.
pub fn conservation_terms(joint: &JointTable, state_conditioned: bool) -> ConservationTerms {
    let base = if state_conditioned {
        Conditioning::states()
    } else {
        Conditioning::none()
    };
    let message = joint.message_info_given(&base);
    ConservationTerms {
        lhs: joint.directed_info_given(&base),
        message,
        cross: joint.joint_feedback_message_info_given(&base) - message,
        feedback: joint.feedback_directed_info_given(&base),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub tolerance_bits: f64,
    pub units: Units,
    pub workers: usize,
    pub record_duration: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            tolerance_bits: DEFAULT_TOLERANCE,
            units: Units::Bits,
            workers: 1,
            record_duration: false,
        }
    }
}

/// Builds the joint and evaluates the full report.
pub fn analyze(sys: &ValidatedSystem, opts: &AnalysisOptions) -> Result<IdentityReport> {
    if opts.tolerance_bits.is_nan() || opts.tolerance_bits <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {}",
            opts.tolerance_bits
        )));
    }
    let start = Instant::now();
    let joint = build_joint_with_workers(sys, opts.workers).with_units(opts.units);
    let mut report =
        IdentityReport::from_joint(&joint, sys.encoder_is_deterministic(), opts.tolerance_bits);
    if opts.record_duration {
        report.duration_secs = Some(start.elapsed().as_secs_f64());
    }
    Ok(report)
}

/// Checks the conservation identity; `conservation_holds` carries the verdict.
pub fn verify_conservation(sys: &ValidatedSystem, tolerance_bits: f64) -> Result<IdentityReport> {
    analyze(
        sys,
        &AnalysisOptions {
            tolerance_bits,
            ..AnalysisOptions::default()
        },
    )
}

/// Checks each intermediate identity; `proof_steps_hold` carries the verdict.
pub fn verify_proof_steps(sys: &ValidatedSystem, tolerance_bits: f64) -> Result<IdentityReport> {
    verify_conservation(sys, tolerance_bits)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityPair {
    pub name: String,
    pub state_conditioned: f64,
    pub unconditioned: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatelessReport {
    pub units: Units,
    pub tolerance_bits: f64,
    pub pairs: Vec<QuantityPair>,
    /// The identity with the state dropped from every term.
    pub stateless: ConservationTerms,
    pub residual: f64,
    pub holds: bool,
}

/// For systems whose forward channel and encoder ignore the state: checks
/// that each state-conditioned quantity equals its unconditioned version and
/// that the stateless identity closes.
pub fn verify_stateless_reduction(
    sys: &ValidatedSystem,
    tolerance_bits: f64,
) -> Result<StatelessReport> {
    let spec = sys.spec();
    for kernel in spec.forward.iter().chain(&spec.encoder) {
        if !kernel.is_constant_in(Var::State, NORMALIZATION_TOL) {
            return Err(Error::Precondition(format!(
                "{} kernel at i={} depends on the state",
                kernel.role().name(),
                kernel.time()
            )));
        }
    }
    let joint = build_joint_with_workers(sys, 1);
    stateless_report(&joint, tolerance_bits)
}

pub(crate) fn stateless_report(joint: &JointTable, tolerance_bits: f64) -> Result<StatelessReport> {
    let with_state = conservation_terms(joint, true);
    let without = conservation_terms(joint, false);
    let none = Conditioning::none();
    let states = Conditioning::states();
    let extra = |c: &Conditioning| {
        c.merge(&Conditioning::fixed(VariableSelector::message()))
            .expect("x0 is free")
    };

    let mut pairs = vec![
        ("directed_info", with_state.lhs, without.lhs),
        ("message_info", with_state.message, without.message),
        ("cross_term", with_state.cross, without.cross),
        (
            "feedback_directed_info",
            with_state.feedback,
            without.feedback,
        ),
        (
            "directed_info_given_message",
            joint.directed_info_given(&extra(&states)),
            joint.directed_info_given(&extra(&none)),
        ),
        (
            "joint_feedback_message_info",
            joint.joint_feedback_message_info_given(&states),
            joint.joint_feedback_message_info_given(&none),
        ),
    ];
    let xn = Conditioning::fixed(VariableSelector::history(Var::Input, joint.horizon()));
    pairs.push((
        "input_output_info",
        joint.causal_mutual_info(&Process::outputs(), &xn, &states)?,
        joint.causal_mutual_info(&Process::outputs(), &xn, &none)?,
    ));

    let per_bit = joint.units().per_bit();
    let within = |r: f64| (r / per_bit).abs() <= tolerance_bits;
    let pairs: Vec<QuantityPair> = pairs
        .into_iter()
        .map(|(name, a, b)| QuantityPair {
            name: name.to_string(),
            state_conditioned: a,
            unconditioned: b,
            difference: a - b,
        })
        .collect();
    let residual = without.residual();
    let holds = within(residual) && pairs.iter().all(|p| within(p.difference));
    Ok(StatelessReport {
        units: joint.units(),
        tolerance_bits,
        pairs,
        stateless: without,
        residual,
        holds,
    })
}

/// When the feedback is noiseless or the encoder ignores it, the cross and
/// feedback terms vanish and the left side equals the message term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionCheck {
    pub name: String,
    pub cross: f64,
    pub feedback: f64,
    pub lhs_minus_message: f64,
    pub holds: bool,
}

impl ReductionCheck {
    fn from_report(name: &str, report: &IdentityReport) -> Self {
        let per_bit = report.units.per_bit();
        let lhs_minus_message = report.lhs - report.term_message;
        let holds = [report.term_cross, report.term_feedback, lhs_minus_message]
            .into_iter()
            .all(|v| (v / per_bit).abs() <= report.tolerance_bits);
        ReductionCheck {
            name: name.to_string(),
            cross: report.term_cross,
            feedback: report.term_feedback,
            lhs_minus_message,
            holds,
        }
    }
}

/// Everything `verify` checks for one system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity: IdentityReport,
    /// Reductions whose structural precondition the system meets.
    pub reductions: Vec<ReductionCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stateless: Option<StatelessReport>,
    pub passed: bool,
}

/// Conservation, every proof step, and each reduction that applies.
pub fn verify_all(
    sys: &ValidatedSystem,
    tolerance_bits: f64,
    units: Units,
) -> Result<VerificationReport> {
    let opts = AnalysisOptions {
        tolerance_bits,
        units,
        ..AnalysisOptions::default()
    };
    if tolerance_bits.is_nan() || tolerance_bits <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tolerance_bits}"
        )));
    }
    let joint = build_joint_with_workers(sys, opts.workers).with_units(units);
    let identity =
        IdentityReport::from_joint(&joint, sys.encoder_is_deterministic(), tolerance_bits);

    let mut reductions = Vec::new();
    if sys.horizon() > 1 && sys.has_noiseless_feedback() {
        reductions.push(ReductionCheck::from_report("noiseless_feedback", &identity));
    }
    if sys.encoder_is_feedback_blind() {
        reductions.push(ReductionCheck::from_report(
            "feedback_blind_encoder",
            &identity,
        ));
    }
    let stateless = if sys.is_state_blind() {
        Some(stateless_report(&joint, tolerance_bits)?)
    } else {
        None
    };

    let passed = identity.conservation_holds
        && identity.proof_steps_hold
        && reductions.iter().all(|r| r.holds)
        && stateless.as_ref().is_none_or(|s| s.holds);
    Ok(VerificationReport {
        identity,
        reductions,
        stateless,
        passed,
    })
}
