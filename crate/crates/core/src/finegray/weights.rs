//! Risk-set weighting schemes for the sub-distribution hazard.
//!
//! A competing-event subject stays in the risk set after its event time
//! with weight `ω_j(t)`. Subjects with other statuses carry weight one while
//! `T_j >= t` and zero afterwards.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::km::km_censoring;
use crate::simgen::{Status, SubjectRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FitMode {
    /// `ω_j(t) = Ĝ(t-) / Ĝ(T_j-)` from the pooled Kaplan–Meier censoring estimate.
    IpcwKm,
    /// `ω_j(t) = 1{C_j >= t}` from the recorded censoring times.
    Oracle,
}

impl FitMode {
    pub fn cli_name(self) -> &'static str {
        match self {
            FitMode::IpcwKm => "ipcw-km",
            FitMode::Oracle => "oracle",
        }
    }
}

impl std::fmt::Display for FitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FitMode::IpcwKm => "IPCW_KM",
            FitMode::Oracle => "ORACLE",
        })
    }
}

/// Weighted risk-set sizes at each distinct time with an event of interest.
///
/// `at_risk[k][x] = Σ_j ω_j(times[k]) 1{x_j = x}` and `events[k][x]` counts
/// events of interest in group `x` at `times[k]` (ties share one risk set).
#[derive(Debug, Clone, PartialEq)]
pub struct RiskSetWeights {
    pub times: Vec<f64>,
    pub events: Vec<[f64; 2]>,
    pub at_risk: Vec<[f64; 2]>,
}

impl RiskSetWeights {
    pub fn total_events(&self) -> f64 {
        self.events.iter().map(|e| e[0] + e[1]).sum()
    }
}

pub trait RiskSetWeighting: Send + Sync {
    fn name(&self) -> &'static str;

    fn mode(&self) -> FitMode;

    fn risk_sets(&self, data: &[SubjectRecord]) -> Result<RiskSetWeights>;
}

/// Records sorted by time plus the distinct event-of-interest times.
struct Sweep<'a> {
    sorted: Vec<&'a SubjectRecord>,
    times: Vec<f64>,
    events: Vec<[f64; 2]>,
    group_sizes: [f64; 2],
}

impl<'a> Sweep<'a> {
    fn new(data: &'a [SubjectRecord]) -> Self {
        let mut sorted: Vec<&SubjectRecord> = data.iter().collect();
        sorted.sort_by(|a, b| a.time.total_cmp(&b.time));
        let mut times: Vec<f64> = Vec::new();
        let mut events: Vec<[f64; 2]> = Vec::new();
        let mut group_sizes = [0.0; 2];
        for r in &sorted {
            group_sizes[r.group.index()] += 1.0;
            if r.status == Status::Interest {
                if times.last() != Some(&r.time) {
                    times.push(r.time);
                    events.push([0.0; 2]);
                }
                events.last_mut().expect("pushed above")[r.group.index()] += 1.0;
            }
        }
        Self {
            sorted,
            times,
            events,
            group_sizes,
        }
    }

    /// Walks the event times in order. Every record with `time < t`
    /// is passed as [`SweepStep::Leave`] before the [`SweepStep::EventTime`] at `t`.
    fn run<F: FnMut(SweepStep<'_>)>(&self, mut step: F) {
        let mut before = [0.0; 2];
        let mut next = 0;
        for &t in &self.times {
            while next < self.sorted.len() && self.sorted[next].time < t {
                let r = self.sorted[next];
                before[r.group.index()] += 1.0;
                step(SweepStep::Leave(r));
                next += 1;
            }
            step(SweepStep::EventTime { time: t, before });
        }
    }

    fn into_weights(self, at_risk: Vec<[f64; 2]>) -> RiskSetWeights {
        RiskSetWeights {
            times: self.times,
            events: self.events,
            at_risk,
        }
    }
}

enum SweepStep<'a> {
    /// The record's own time has passed.
    Leave(&'a SubjectRecord),
    /// `before` counts records per group with time strictly before `time`.
    EventTime { time: f64, before: [f64; 2] },
}

#[derive(Debug, Default, Clone, Copy)]
pub struct IpcwKaplanMeier;

impl RiskSetWeighting for IpcwKaplanMeier {
    fn name(&self) -> &'static str {
        FitMode::IpcwKm.cli_name()
    }

    fn mode(&self) -> FitMode {
        FitMode::IpcwKm
    }

    fn risk_sets(&self, data: &[SubjectRecord]) -> Result<RiskSetWeights> {
        let g = km_censoring(data)?;
        let sweep = Sweep::new(data);
        let mut inv_g = [0.0; 2];
        let mut at_risk = Vec::with_capacity(sweep.times.len());
        let sizes = sweep.group_sizes;
        sweep.run(|step| match step {
            SweepStep::Leave(r) => {
                if r.status == Status::Competing {
                    inv_g[r.group.index()] += 1.0 / g.eval_left(r.time);
                }
            }
            SweepStep::EventTime { time, before } => {
                let g_t = g.eval_left(time);
                at_risk.push([0, 1].map(|x| sizes[x] - before[x] + g_t * inv_g[x]));
            }
        });
        Ok(sweep.into_weights(at_risk))
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct OracleCensoring;

impl RiskSetWeighting for OracleCensoring {
    fn name(&self) -> &'static str {
        FitMode::Oracle.cli_name()
    }

    fn mode(&self) -> FitMode {
        FitMode::Oracle
    }

    fn risk_sets(&self, data: &[SubjectRecord]) -> Result<RiskSetWeights> {
        if data.iter().any(|r| r.censor_time.is_none()) {
            return Err(Error::MissingColumn("censor_time"));
        }
        let sweep = Sweep::new(data);
        // competing subjects ordered by censoring time, removed once C_j < t
        let mut by_censor: Vec<(f64, usize)> = data
            .iter()
            .filter(|r| r.status == Status::Competing)
            .map(|r| (r.censor_time.unwrap_or(f64::INFINITY), r.group.index()))
            .collect();
        by_censor.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut competing_before = [0.0; 2];
        let mut expired = [0.0; 2];
        let mut next_expiry = 0;
        let mut at_risk = Vec::with_capacity(sweep.times.len());
        let sizes = sweep.group_sizes;
        sweep.run(|step| match step {
            SweepStep::Leave(r) => {
                if r.status == Status::Competing {
                    competing_before[r.group.index()] += 1.0;
                }
            }
            SweepStep::EventTime { time, before } => {
                while next_expiry < by_censor.len() && by_censor[next_expiry].0 < time {
                    expired[by_censor[next_expiry].1] += 1.0;
                    next_expiry += 1;
                }
                at_risk.push([0, 1].map(|x| sizes[x] - before[x] + competing_before[x] - expired[x]));
            }
        });
        Ok(sweep.into_weights(at_risk))
    }
}

#[derive(Clone)]
pub struct WeightingRegistry {
    schemes: BTreeMap<&'static str, Arc<dyn RiskSetWeighting>>,
}

impl WeightingRegistry {
    pub fn empty() -> Self {
        Self {
            schemes: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, scheme: Arc<dyn RiskSetWeighting>) {
        self.schemes.insert(scheme.name(), scheme);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn RiskSetWeighting>> {
        self.schemes.get(name).cloned().ok_or_else(|| Error::UnknownStrategy {
            kind: "weighting scheme",
            name: name.to_string(),
            available: self.names().join(", "),
        })
    }

    pub fn for_mode(&self, mode: FitMode) -> Result<Arc<dyn RiskSetWeighting>> {
        self.get(mode.cli_name())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.schemes.keys().copied().collect()
    }
}

impl Default for WeightingRegistry {
    fn default() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(IpcwKaplanMeier));
        reg.register(Arc::new(OracleCensoring));
        reg
    }
}
