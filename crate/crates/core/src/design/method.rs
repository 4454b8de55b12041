use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{DesignParams, Group};
use crate::numerics::{integrate, DEFAULT_ABS_TOL};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SizingMethod {
    /// Proportional sub-distribution hazards; competing events kept in the risk set.
    #[serde(alias = "sdh")]
    Sdh,
    /// Single-event comparator; the competing cause is ignored entirely.
    #[serde(alias = "single-event")]
    SingleEvent,
}

impl SizingMethod {
    /// Registry name used on the command line.
    pub fn cli_name(self) -> &'static str {
        match self {
            SizingMethod::Sdh => "sdh",
            SizingMethod::SingleEvent => "single-event",
        }
    }
}

impl fmt::Display for SizingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SizingMethod::Sdh => "SDH",
            SizingMethod::SingleEvent => "SINGLE_EVENT",
        })
    }
}

/// A way of turning design parameters into the per-group probability of an
/// observed event of interest.
pub trait IncidenceMethod: Send + Sync {
    fn name(&self) -> &'static str;

    fn kind(&self) -> SizingMethod;

    /// Probability that a subject in `group` is observed to have the event
    /// of interest before dropout or the end of the study.
    fn group_incidence(&self, params: &DesignParams, group: Group) -> Result<f64>;

    /// `p0 w0 + p1 w1`.
    fn pooled_incidence(&self, params: &DesignParams) -> Result<f64> {
        Group::BOTH.iter().try_fold(0.0, |acc, &g| {
            Ok(acc + params.allocation(g) * self.group_incidence(params, g)?)
        })
    }
}

/// Sub-density of the form `k λ u^(k-1) · tilt(λ u^k)`.
struct WeibullSubDensity<F> {
    lambda: f64,
    k: f64,
    tilt: F,
}

impl<F: Fn(f64) -> f64> WeibullSubDensity<F> {
    /// `∫ density(u) e^{-φu} weight(u) du` over `[lo, hi]`.
    ///
    /// For `k < 1` the integral is taken in `v = u^k`, where the density
    /// becomes `λ tilt(λ v)` and the `u^(k-1)` singularity at zero vanishes.
    fn integrate<W: Fn(f64) -> f64>(&self, phi: f64, lo: f64, hi: f64, weight: W, tol: f64) -> Result<f64> {
        let (lambda, k) = (self.lambda, self.k);
        let censor = |u: f64| if phi == 0.0 { 1.0 } else { (-phi * u).exp() };
        if k < 1.0 {
            let inv_k = 1.0 / k;
            integrate(
                |v: f64| {
                    let u = v.powf(inv_k);
                    lambda * (self.tilt)(lambda * v) * censor(u) * weight(u)
                },
                lo.powf(k),
                hi.powf(k),
                tol,
            )
        } else {
            integrate(
                |u: f64| {
                    let h = lambda * u.powf(k);
                    k * lambda * u.powf(k - 1.0) * (self.tilt)(h) * censor(u) * weight(u)
                },
                lo,
                hi,
                tol,
            )
        }
    }

    /// Incidence under uniform accrual on `[0, r]` with `tf` of further follow-up.
    fn accrual_weighted(&self, phi: f64, tf: f64, r: f64) -> Result<f64> {
        let tol = DEFAULT_ABS_TOL / 2.0;
        let full = self.integrate(phi, 0.0, tf, |_| 1.0, tol)?;
        if r == 0.0 {
            return Ok(full);
        }
        let tail = self.integrate(phi, tf, tf + r, |u| (tf + r - u) / r, tol)?;
        Ok(full + tail)
    }
}

/// SDH incidence. Group 1 follows the Fine–Gray CIF
/// `1 - {1 - q01 (1 - e^{-λ t^k})}^Δ1`.
#[derive(Debug, Default, Clone, Copy)]
pub struct SubDistributionIncidence;

impl IncidenceMethod for SubDistributionIncidence {
    fn name(&self) -> &'static str {
        SizingMethod::Sdh.cli_name()
    }

    fn kind(&self) -> SizingMethod {
        SizingMethod::Sdh
    }

    fn group_incidence(&self, params: &DesignParams, group: Group) -> Result<f64> {
        params.validate()?;
        let q = params.q01;
        if q == 0.0 {
            return Ok(0.0);
        }
        let eta = match group {
            Group::Control => 1.0,
            Group::Experimental => params.delta1,
        };
        let tilt = move |h: f64| {
            if eta == 1.0 {
                q * (-h).exp()
            } else if q == 1.0 {
                eta * (-eta * h).exp()
            } else {
                // η q e^{-h} {1 - q (1 - e^{-h})}^{η-1}
                let base = (-q * -(-h).exp_m1()).ln_1p();
                eta * q * (-h + (eta - 1.0) * base).exp()
            }
        };
        let density = WeibullSubDensity {
            lambda: params.lambda01,
            k: params.k1,
            tilt,
        };
        density.accrual_weighted(params.phi, params.tf, params.r)
    }
}

/// Single-event comparator: the latent Weibull event of interest observed
/// against dropout and administrative censoring only.
#[derive(Debug, Default, Clone, Copy)]
pub struct SingleEventIncidence;

impl IncidenceMethod for SingleEventIncidence {
    fn name(&self) -> &'static str {
        SizingMethod::SingleEvent.cli_name()
    }

    fn kind(&self) -> SizingMethod {
        SizingMethod::SingleEvent
    }

    fn group_incidence(&self, params: &DesignParams, group: Group) -> Result<f64> {
        params.validate()?;
        let lambda = match group {
            Group::Control => params.lambda01,
            Group::Experimental => params.lambda01 * params.delta1,
        };
        let density = WeibullSubDensity {
            lambda,
            k: params.k1,
            tilt: |h: f64| (-h).exp(),
        };
        density.accrual_weighted(params.phi, params.tf, params.r)
    }
}

/// Name-keyed collection of incidence methods.
#[derive(Clone)]
pub struct MethodRegistry {
    methods: BTreeMap<&'static str, Arc<dyn IncidenceMethod>>,
}

impl MethodRegistry {
    pub fn empty() -> Self {
        Self {
            methods: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, method: Arc<dyn IncidenceMethod>) {
        self.methods.insert(method.name(), method);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn IncidenceMethod>> {
        self.methods.get(name).cloned().ok_or_else(|| Error::UnknownStrategy {
            kind: "sizing method",
            name: name.to_string(),
            available: self.names().join(", "),
        })
    }

    pub fn for_kind(&self, kind: SizingMethod) -> Result<Arc<dyn IncidenceMethod>> {
        self.get(kind.cli_name())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.methods.keys().copied().collect()
    }
}

impl Default for MethodRegistry {
    fn default() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(SubDistributionIncidence));
        reg.register(Arc::new(SingleEventIncidence));
        reg
    }
}

/// Per-group incidence for one of the built-in methods.
pub fn compute_w_group(params: &DesignParams, group: Group, mode: SizingMethod) -> Result<f64> {
    match mode {
        SizingMethod::Sdh => SubDistributionIncidence.group_incidence(params, group),
        SizingMethod::SingleEvent => SingleEventIncidence.group_incidence(params, group),
    }
}
