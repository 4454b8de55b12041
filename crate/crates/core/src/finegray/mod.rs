//! Two-group Fine–Gray regression.
//!
//! Maximizes the log partial likelihood
//! `Σ_k [d1_k b − d_k ln(Y0_k + Y1_k e^b)]` over the distinct times `k` with
//! events of interest, where `Y_x` are weighted sub-distribution risk sets
//! (see [`RiskSetWeighting`]) and ties share a risk set.

mod km;
mod weights;

pub use km::km_censoring;
pub use weights::{
    FitMode, IpcwKaplanMeier, OracleCensoring, RiskSetWeighting, RiskSetWeights, WeightingRegistry,
};

use serde::Serialize;

use crate::design::Group;
use crate::numerics::normal_quantile;
use crate::simgen::{Status, SubjectRecord};
use crate::{Error, Result};

const MAX_ITERATIONS: usize = 50;
const SCORE_TOL: f64 = 1e-8;
const STEP_TOL: f64 = 1e-10;
const MAX_HALVINGS: usize = 10;
const MAX_ABS_COEF: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FineGrayFit {
    /// Estimated log sub-distribution hazard ratio.
    pub b_hat: f64,
    pub se: f64,
    /// Confidence interval on the hazard ratio scale.
    pub ci: (f64, f64),
    pub iterations: usize,
    pub converged: bool,
    pub mode: FitMode,
}

/// JSON shape of a fit.
#[derive(Debug, Clone, Serialize)]
pub struct FitRecord {
    pub b_hat: f64,
    pub se: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub converged: bool,
    pub iterations: usize,
    pub mode: FitMode,
}

impl FineGrayFit {
    pub fn hazard_ratio(&self) -> f64 {
        self.b_hat.exp()
    }

    pub fn record(&self) -> FitRecord {
        FitRecord {
            b_hat: self.b_hat,
            se: self.se,
            ci_lower: self.ci.0,
            ci_upper: self.ci.1,
            converged: self.converged,
            iterations: self.iterations,
            mode: self.mode,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    NonInferior,
    NotShown,
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Decision::NonInferior => "non_inferior",
            Decision::NotShown => "not_shown",
        })
    }
}

/// Score `s(b)` and observed information `I(b)`.
pub fn score_and_information(b: f64, weights: &RiskSetWeights) -> Result<(f64, f64)> {
    if weights.total_events() == 0.0 {
        return Err(Error::Domain("no events of interest; the partial likelihood is flat".into()));
    }
    let eb = b.exp();
    let mut score = 0.0;
    let mut info = 0.0;
    for (ev, y) in weights.events.iter().zip(&weights.at_risk) {
        let d = ev[0] + ev[1];
        let denom = y[0] + y[1] * eb;
        score += ev[1] - d * y[1] * eb / denom;
        info += d * y[0] * y[1] * eb / (denom * denom);
    }
    Ok((score, info))
}

pub fn log_partial_likelihood(b: f64, weights: &RiskSetWeights) -> f64 {
    let eb = b.exp();
    weights
        .events
        .iter()
        .zip(&weights.at_risk)
        .map(|(ev, y)| ev[1] * b - (ev[0] + ev[1]) * (y[0] + y[1] * eb).ln())
        .sum()
}

/// The likelihood has no finite maximizer when, among event times where
/// both arms are at risk, every event falls in the same arm.
fn is_monotone(weights: &RiskSetWeights) -> bool {
    let mut seen = [false; 2];
    for (ev, y) in weights.events.iter().zip(&weights.at_risk) {
        if y[0] > 0.0 && y[1] > 0.0 {
            seen[0] |= ev[0] > 0.0;
            seen[1] |= ev[1] > 0.0;
        }
    }
    !(seen[0] && seen[1])
}

fn check_fit_input(data: &[SubjectRecord]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyInput("dataset has no records"));
    }
    for g in Group::BOTH {
        if !data.iter().any(|r| r.group == g) {
            return Err(Error::Domain(format!("group {} has no subjects", g.index())));
        }
    }
    if !data.iter().any(|r| r.status == Status::Interest) {
        return Err(Error::Domain("no events of interest (status 1)".into()));
    }
    Ok(())
}

/// Fit with one of the built-in weighting schemes.
pub fn fit(data: &[SubjectRecord], mode: FitMode, alpha: f64) -> Result<FineGrayFit> {
    let scheme = WeightingRegistry::default().for_mode(mode)?;
    fit_with(data, scheme.as_ref(), alpha)
}

/// Newton–Raphson from `b = 0` with step halving.
///
/// A monotone likelihood (all events in one arm, or `|b|` beyond 20) is
/// reported through `converged = false` rather than an error.
pub fn fit_with(data: &[SubjectRecord], scheme: &dyn RiskSetWeighting, alpha: f64) -> Result<FineGrayFit> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    check_fit_input(data)?;
    let weights = scheme.risk_sets(data)?;
    let z = normal_quantile(1.0 - alpha / 2.0)?;

    let mut b = 0.0;
    let (mut score, mut info) = score_and_information(b, &weights)?;
    let mut iterations = 0;
    let monotone = is_monotone(&weights);
    let mut converged = !monotone && score.abs() < SCORE_TOL;

    while !monotone && !converged && iterations < MAX_ITERATIONS {
        if !(info > 0.0) {
            break;
        }
        iterations += 1;
        let mut step = score / info;
        let mut candidate = b + step;
        let (mut s_new, mut i_new) = score_and_information(candidate, &weights)?;
        let mut halvings = 0;
        while !(s_new.abs() <= score.abs()) && halvings < MAX_HALVINGS {
            step *= 0.5;
            candidate = b + step;
            (s_new, i_new) = score_and_information(candidate, &weights)?;
            halvings += 1;
        }
        b = candidate;
        score = s_new;
        info = i_new;
        if b.abs() > MAX_ABS_COEF {
            break;
        }
        converged = score.abs() < SCORE_TOL || step.abs() < STEP_TOL;
    }
    if converged && !(info > 0.0) {
        converged = false;
    }

    let se = if info > 0.0 { 1.0 / info.sqrt() } else { f64::INFINITY };
    Ok(FineGrayFit {
        b_hat: b,
        se,
        ci: ((b - z * se).exp(), (b + z * se).exp()),
        iterations,
        converged,
        mode: scheme.mode(),
    })
}

/// Non-inferiority is shown when the upper confidence limit of the hazard
/// ratio is strictly below `delta0`.
pub fn noninferiority_decision(fit: &FineGrayFit, delta0: f64) -> Result<Decision> {
    if !fit.converged {
        return Err(Error::NotConverged);
    }
    if !(delta0 > 0.0) {
        return Err(Error::param("delta0", format!("must be positive, got {delta0}")));
    }
    Ok(if fit.ci.1 < delta0 {
        Decision::NonInferior
    } else {
        Decision::NotShown
    })
}
