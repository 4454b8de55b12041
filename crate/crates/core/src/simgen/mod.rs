//! Competing-risks trial data from the Fine–Gray model.
//!
//! Cumulative incidences in group `x` with `η = e^{bx}`:
//!
//! ```text
//! F1(t | x) = 1 - {1 - q01 (1 - exp(-λ01 t^k1))}^η
//! F2(t | x) = (1 - q01)^η · {1 - exp(-λ2 t^k2 η)}
//! ```
//!
//! Each subject draws a cause with probability `F1(∞ | x)` for cause 1,
//! then a time from the closed-form inverse of the conditional CIF. Entry is
//! uniform on `[0, R]`, dropout is exponential with rate `phi` and follow-up
//! ends at calendar time `Tf + R`.

mod io;
mod latent;

pub use io::{read_csv, write_csv, CSV_HEADER, CSV_HEADER_WITH_CENSOR};
pub use latent::{sample_latent_event, LatentEvent};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::Group;
use crate::rng::substream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenScenario {
    pub lambda01: f64,
    pub k1: f64,
    pub lambda2: f64,
    pub k2: f64,
    pub q01: f64,
    pub phi: f64,
    pub tf: f64,
    pub r: f64,
    /// True log sub-distribution hazard ratio.
    pub b: f64,
    pub n0: usize,
    pub n1: usize,
    pub seed: u64,
}

impl GenScenario {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda01", self.lambda01),
            ("k1", self.k1),
            ("lambda2", self.lambda2),
            ("k2", self.k2),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(field, format!("must be a finite positive number, got {v}")));
            }
        }
        if !(self.q01 > 0.0 && self.q01 <= 1.0) {
            return Err(Error::param("q01", format!("must lie in (0, 1], got {}", self.q01)));
        }
        if !(self.phi.is_finite() && self.phi >= 0.0) {
            return Err(Error::param("phi", format!("must be finite and >= 0, got {}", self.phi)));
        }
        if !(self.tf > 0.0) {
            return Err(Error::param("tf", format!("must be positive, got {}", self.tf)));
        }
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(Error::param("r", format!("must be finite and >= 0, got {}", self.r)));
        }
        if !self.b.is_finite() {
            return Err(Error::param("b", "must be finite"));
        }
        if self.n0 == 0 {
            return Err(Error::param("n0", "group sizes must be at least 1"));
        }
        if self.n1 == 0 {
            return Err(Error::param("n1", "group sizes must be at least 1"));
        }
        Ok(())
    }

    pub fn eta(&self, group: Group) -> f64 {
        match group {
            Group::Control => 1.0,
            Group::Experimental => self.b.exp(),
        }
    }

    /// Total probability of cause 1 in `group`.
    pub fn cause1_mass(&self, group: Group) -> f64 {
        -((1.0 - self.q01).ln() * self.eta(group)).exp_m1()
    }

    /// Cumulative incidence of the event of interest.
    pub fn cif1(&self, t: f64, group: Group) -> f64 {
        let w = -(-self.lambda01 * t.powf(self.k1)).exp_m1();
        -(self.eta(group) * (-self.q01 * w).ln_1p()).exp_m1()
    }

    /// Cumulative incidence of the competing event.
    pub fn cif2(&self, t: f64, group: Group) -> f64 {
        let eta = self.eta(group);
        (1.0 - self.cause1_mass(group)) * -(-self.lambda2 * t.powf(self.k2) * eta).exp_m1()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Censored,
    Interest,
    Competing,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Censored => 0,
            Status::Interest => 1,
            Status::Competing => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Status::Censored),
            1 => Some(Status::Interest),
            2 => Some(Status::Competing),
            _ => None,
        }
    }
}

/// One observed subject. Times are measured from the subject's entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub id: u64,
    pub group: Group,
    pub entry: f64,
    pub time: f64,
    pub status: Status,
    /// `min(dropout, Tf + R - entry)`; known only for simulated data.
    pub censor_time: Option<f64>,
}

fn simulate_subject(scen: &GenScenario, index: usize) -> SubjectRecord {
    let group = if index < scen.n0 {
        Group::Control
    } else {
        Group::Experimental
    };
    let mut rng = substream(scen.seed, &[index as u64]);
    let latent = sample_latent_event(&mut rng, group, scen);
    let entry = if scen.r > 0.0 {
        scen.r * rng.gen::<f64>()
    } else {
        0.0
    };
    let dropout = if scen.phi > 0.0 {
        -(-rng.gen::<f64>()).ln_1p() / scen.phi
    } else {
        f64::INFINITY
    };
    let censor = dropout.min(scen.tf + scen.r - entry);
    let (time, status) = if latent.time <= censor {
        (latent.time, latent.cause)
    } else {
        (censor, Status::Censored)
    };
    SubjectRecord {
        id: index as u64 + 1,
        group,
        entry,
        time,
        status,
        censor_time: Some(censor),
    }
}

/// Simulate `n0 + n1` subjects, control group first.
///
/// Subject `i` draws from its own substream of `seed`, so the result does not
/// depend on the thread pool.
pub fn generate_dataset(scen: &GenScenario) -> Result<Vec<SubjectRecord>> {
    scen.validate()?;
    let n = scen.n0 + scen.n1;
    const PARALLEL_THRESHOLD: usize = 20_000;
    if n >= PARALLEL_THRESHOLD {
        Ok((0..n).into_par_iter().map(|i| simulate_subject(scen, i)).collect())
    } else {
        Ok((0..n).map(|i| simulate_subject(scen, i)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Fractions {
    pub n: usize,
    pub event1: f64,
    pub event2: f64,
    pub censored: f64,
}

impl Fractions {
    fn from_counts(counts: [usize; 3]) -> Self {
        let n = counts.iter().sum::<usize>();
        if n == 0 {
            return Self::default();
        }
        let nf = n as f64;
        Self {
            n,
            censored: counts[0] as f64 / nf,
            event1: counts[1] as f64 / nf,
            event2: counts[2] as f64 / nf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatasetSummary {
    /// Indexed by group; an absent group reports `n = 0` and zero fractions.
    pub per_group: [Fractions; 2],
    pub pooled: Fractions,
}

pub fn summarize_dataset(data: &[SubjectRecord]) -> Result<DatasetSummary> {
    if data.is_empty() {
        return Err(Error::EmptyInput("dataset has no records"));
    }
    let mut counts = [[0usize; 3]; 2];
    for rec in data {
        counts[rec.group.index()][rec.status.code() as usize] += 1;
    }
    let pooled = [0, 1, 2].map(|s| counts[0][s] + counts[1][s]);
    Ok(DatasetSummary {
        per_group: [Fractions::from_counts(counts[0]), Fractions::from_counts(counts[1])],
        pooled: Fractions::from_counts(pooled),
    })
}
