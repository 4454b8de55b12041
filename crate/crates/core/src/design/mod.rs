//! Trial planning: incidence integrals, required events and sample size.
//!
//! Event times of interest are Weibull with a common shape in both groups,
//! enrollment is uniform over `[0, R]`, follow-up continues for `Tf` after
//! the last enrollment and dropout is exponential with rate `phi`.

mod method;
mod table2;

pub use method::{
    compute_w_group, IncidenceMethod, MethodRegistry, SingleEventIncidence, SizingMethod,
    SubDistributionIncidence,
};
pub use table2::{reproduce_table2, Table2Row, TABLE2_DISPLAY_DECIMALS};

use serde::{Deserialize, Serialize};

use crate::numerics::normal_quantile;
use crate::{Error, Result};

/// Treatment arm. `Control` is coded `x = 0`, `Experimental` is `x = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    Control,
    Experimental,
}

impl Group {
    pub const BOTH: [Group; 2] = [Group::Control, Group::Experimental];

    pub fn index(self) -> usize {
        match self {
            Group::Control => 0,
            Group::Experimental => 1,
        }
    }

    pub fn from_index(x: u8) -> Option<Self> {
        match x {
            0 => Some(Group::Control),
            1 => Some(Group::Experimental),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Group::Control => Group::Experimental,
            Group::Experimental => Group::Control,
        }
    }
}

/// All planning inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    /// Weibull scale of the event of interest in the control group.
    pub lambda01: f64,
    /// Weibull shape of the event of interest.
    pub k1: f64,
    /// Weibull scale of the competing event.
    pub lambda2: f64,
    /// Weibull shape of the competing event.
    pub k2: f64,
    /// Control-group probability that a first event is the event of interest.
    pub q01: f64,
    /// Exponential dropout hazard; zero disables dropout.
    pub phi: f64,
    /// Follow-up after the last enrollment.
    pub tf: f64,
    /// Accrual period; zero means everyone enters at time zero.
    pub r: f64,
    /// Non-inferiority margin on the sub-distribution hazard ratio.
    pub delta0: f64,
    /// Sub-distribution hazard ratio under the alternative.
    pub delta1: f64,
    /// Two-sided type I error.
    pub alpha: f64,
    /// Target power, `1 - beta`.
    pub power: f64,
    pub p0: f64,
    pub p1: f64,
}

impl DesignParams {
    pub fn validate(&self) -> Result<()> {
        fn positive(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(field, format!("must be a finite positive number, got {v}")))
            }
        }
        fn non_negative(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::param(field, format!("must be finite and >= 0, got {v}")))
            }
        }
        fn open_unit(field: &'static str, v: f64) -> Result<()> {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::param(field, format!("must lie in (0, 1), got {v}")))
            }
        }

        positive("lambda01", self.lambda01)?;
        positive("k1", self.k1)?;
        positive("lambda2", self.lambda2)?;
        positive("k2", self.k2)?;
        if !(0.0..=1.0).contains(&self.q01) {
            return Err(Error::param("q01", format!("must lie in [0, 1], got {}", self.q01)));
        }
        non_negative("phi", self.phi)?;
        positive("tf", self.tf)?;
        non_negative("r", self.r)?;
        positive("delta0", self.delta0)?;
        positive("delta1", self.delta1)?;
        if !(self.delta1 < self.delta0) {
            return Err(Error::param(
                "delta1",
                format!(
                    "delta1 ({}) must be smaller than delta0 ({}); equal values leave the hypotheses indistinguishable",
                    self.delta1, self.delta0
                ),
            ));
        }
        open_unit("alpha", self.alpha)?;
        open_unit("power", self.power)?;
        open_unit("p0", self.p0)?;
        open_unit("p1", self.p1)?;
        if (self.p0 + self.p1 - 1.0).abs() > 1e-12 {
            return Err(Error::param(
                "p1",
                format!("p0 + p1 must equal 1, got {} + {}", self.p0, self.p1),
            ));
        }
        Ok(())
    }

    pub fn allocation(&self, group: Group) -> f64 {
        match group {
            Group::Control => self.p0,
            Group::Experimental => self.p1,
        }
    }
}

/// Events needed, before and after rounding up per group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventsResult {
    pub events_fractional: f64,
    pub events_per_group: (u64, u64),
    pub events_total: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeResult {
    pub method: SizingMethod,
    /// Pooled probability that a subject contributes an observed event of interest.
    pub w: f64,
    pub events: EventsResult,
    pub n_per_group: (u64, u64),
    pub n_total: u64,
}

fn ceil_u64(v: f64) -> u64 {
    v.ceil() as u64
}

/// Events of interest required for a Wald test of `b >= ln delta0`.
///
/// Uses the information `p0 p1 Δ1 / (p0 + p1 Δ1)²` per observed event, which
/// is `p0 p1` when `delta1 = 1`.
pub fn required_events(params: &DesignParams) -> Result<EventsResult> {
    params.validate()?;
    let z_alpha = normal_quantile(1.0 - params.alpha / 2.0)?;
    let z_beta = normal_quantile(params.power)?;
    let log_gap = params.delta0.ln() - params.delta1.ln();
    let (p0, p1, d1) = (params.p0, params.p1, params.delta1);
    let inv_info = (p0 + p1 * d1).powi(2) / (p0 * p1 * d1);
    let events_fractional = (z_alpha + z_beta).powi(2) / log_gap.powi(2) * inv_info;
    let per_group = (ceil_u64(events_fractional * p0), ceil_u64(events_fractional * p1));
    Ok(EventsResult {
        events_fractional,
        events_per_group: per_group,
        events_total: per_group.0 + per_group.1,
    })
}

/// Total sample size `N = #E / w`, events rounded up per group first.
pub fn sample_size(params: &DesignParams, method: &dyn IncidenceMethod) -> Result<SampleSizeResult> {
    let events = required_events(params)?;
    let w = method.pooled_incidence(params)?;
    if !(w > 0.0) {
        return Err(Error::Degenerate(format!(
            "incidence of the event of interest is {w}; no finite sample size observes any event"
        )));
    }
    let n = events.events_total as f64 / w;
    let n_per_group = (ceil_u64(n * params.p0), ceil_u64(n * params.p1));
    Ok(SampleSizeResult {
        method: method.kind(),
        w,
        events,
        n_per_group,
        n_total: n_per_group.0 + n_per_group.1,
    })
}

/// Weibull scale from a median event time: `-ln(0.5) / median^k`.
pub fn scale_from_median(median: f64, k: f64) -> Result<f64> {
    scale_from_survival(median, 0.5, k)
}

/// Weibull scale such that `S(t) = s`: `-ln(s) / t^k`.
pub fn scale_from_survival(t: f64, s: f64, k: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("survival probability must lie in (0, 1), got {s}")));
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::Domain(format!("shape must be positive, got {k}")));
    }
    Ok(-s.ln() / t.powf(k))
}

/// Event-of-interest probability in group 1 under a sub-distribution hazard
/// ratio `delta1`: `1 - (1 - q01)^delta1`.
pub fn q1_for_group1(q01: f64, delta1: f64) -> f64 {
    if delta1 == 1.0 {
        return q01;
    }
    1.0 - (1.0 - q01).powf(delta1)
}
