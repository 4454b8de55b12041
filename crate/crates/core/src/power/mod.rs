//! Monte Carlo power and type I error of the sample size formula.
//!
//! A replication simulates a trial at the planned size, fits the Fine–Gray
//! model with IPCW weights and records whether non-inferiority is shown.
//! Replication `j` of scenario `i` is seeded by `derive_seed(seed, [i, j])`,
//! so results are the same for any thread count.

mod csv;

pub use csv::{write_power_csv, POWER_CSV_HEADER};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{sample_size, DesignParams, SubDistributionIncidence};
use crate::finegray::{fit, noninferiority_decision, Decision, FitMode};
use crate::rng::derive_seed;
use crate::simgen::{generate_dataset, GenScenario, Status};
use crate::{Error, Result};

/// Which hazard ratio generates the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Hypothesis {
    /// `b = ln delta0`; rejections estimate the type I error.
    Null,
    /// `b = ln delta1`; rejections estimate the power.
    Alt,
}

impl Hypothesis {
    pub fn as_str(self) -> &'static str {
        match self {
            Hypothesis::Null => "NULL",
            Hypothesis::Alt => "ALT",
        }
    }
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Hypothesis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NULL" => Ok(Hypothesis::Null),
            "ALT" => Ok(Hypothesis::Alt),
            _ => Err(Error::param("hypothesis", format!("expected NULL or ALT, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerScenario {
    pub lambda01: f64,
    pub k1: f64,
    pub lambda2: f64,
    pub k2: f64,
    pub q01: f64,
    pub phi: f64,
    pub tf: f64,
    pub r: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub alpha: f64,
    pub target_power: f64,
    pub p0: f64,
    pub p1: f64,
    pub replications: usize,
    pub hypothesis: Hypothesis,
    /// Group sizes to simulate instead of the planned ones.
    pub n_override: Option<(usize, usize)>,
}

impl PowerScenario {
    pub fn design_params(&self) -> DesignParams {
        DesignParams {
            lambda01: self.lambda01,
            k1: self.k1,
            lambda2: self.lambda2,
            k2: self.k2,
            q01: self.q01,
            phi: self.phi,
            tf: self.tf,
            r: self.r,
            delta0: self.delta0,
            delta1: self.delta1,
            alpha: self.alpha,
            power: self.target_power,
            p0: self.p0,
            p1: self.p1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::param("replications", "must be at least 1"));
        }
        if let Some((n0, n1)) = self.n_override {
            if n0 == 0 || n1 == 0 {
                return Err(Error::param("n_override", format!("both groups need subjects, got ({n0}, {n1})")));
            }
        }
        self.design_params().validate()
    }

    /// Log hazard ratio used to generate data.
    pub fn true_b(&self) -> f64 {
        match self.hypothesis {
            Hypothesis::Null => self.delta0.ln(),
            Hypothesis::Alt => self.delta1.ln(),
        }
    }

    /// Simulated group sizes: the override, else the SDH sample size.
    pub fn group_sizes(&self) -> Result<(usize, usize)> {
        self.validate()?;
        if let Some(n) = self.n_override {
            return Ok(n);
        }
        let size = sample_size(&self.design_params(), &SubDistributionIncidence)?;
        Ok((size.n_per_group.0 as usize, size.n_per_group.1 as usize))
    }

    pub fn gen_scenario(&self, n0: usize, n1: usize, seed: u64) -> GenScenario {
        GenScenario {
            lambda01: self.lambda01,
            k1: self.k1,
            lambda2: self.lambda2,
            k2: self.k2,
            q01: self.q01,
            phi: self.phi,
            tf: self.tf,
            r: self.r,
            b: self.true_b(),
            n0,
            n1,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerStudyResult {
    pub scenario: PowerScenario,
    pub n0: usize,
    pub n1: usize,
    pub replications: usize,
    pub rejections: usize,
    pub rejection_rate: f64,
    pub mc_stderr: f64,
    pub mean_frac_censored: f64,
    pub mean_frac_event1: f64,
    pub mean_frac_event2: f64,
    pub unconverged_count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
struct Replication {
    rejected: bool,
    converged: bool,
    /// Subjects by status code.
    counts: [usize; 3],
}

fn replicate(s: &PowerScenario, n: (usize, usize), seed: u64, scenario_index: u64, rep: u64) -> Result<Replication> {
    let gen = s.gen_scenario(n.0, n.1, derive_seed(seed, &[scenario_index, rep]));
    let data = generate_dataset(&gen)?;
    let mut counts = [0usize; 3];
    for rec in &data {
        counts[rec.status.code() as usize] += 1;
    }
    // A failed or unconverged fit does not show non-inferiority.
    let (rejected, converged) = match fit(&data, FitMode::IpcwKm, s.alpha) {
        Ok(f) if f.converged => (noninferiority_decision(&f, s.delta0)? == Decision::NonInferior, true),
        _ => (false, false),
    };
    Ok(Replication {
        rejected,
        converged,
        counts,
    })
}

fn aggregate(s: &PowerScenario, n: (usize, usize), seed: u64, reps: &[Replication]) -> PowerStudyResult {
    let count = reps.len();
    let rejections = reps.iter().filter(|r| r.rejected).count();
    let unconverged_count = reps.iter().filter(|r| !r.converged).count();
    let mut totals = [0usize; 3];
    for r in reps {
        for (t, c) in totals.iter_mut().zip(r.counts) {
            *t += c;
        }
    }
    // Every replication has the same size, so pooled counts give the mean fractions.
    let subjects = (count * (n.0 + n.1)) as f64;
    let rate = rejections as f64 / count as f64;
    PowerStudyResult {
        scenario: PowerScenario {
            replications: count,
            ..*s
        },
        n0: n.0,
        n1: n.1,
        replications: count,
        rejections,
        rejection_rate: rate,
        mc_stderr: (rate * (1.0 - rate) / count as f64).sqrt(),
        mean_frac_censored: totals[Status::Censored.code() as usize] as f64 / subjects,
        mean_frac_event1: totals[Status::Interest.code() as usize] as f64 / subjects,
        mean_frac_event2: totals[Status::Competing.code() as usize] as f64 / subjects,
        unconverged_count,
        seed,
    }
}

fn run_indexed(s: &PowerScenario, seed: u64, scenario_index: u64) -> Result<PowerStudyResult> {
    let n = s.group_sizes()?;
    let reps = (0..s.replications as u64)
        .into_par_iter()
        .map(|j| replicate(s, n, seed, scenario_index, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(s, n, seed, &reps))
}

/// Run `s.replications` replications of one scenario on the current thread pool.
pub fn run_scenario(s: &PowerScenario, seed: u64) -> Result<PowerStudyResult> {
    run_indexed(s, seed, 0)
}

/// Run every scenario at `reps_per_scenario` replications, results in grid order.
///
/// `parallelism` is the worker count; 0 uses the rayon default. Scenario `i`
/// is seeded as index `i`, so a one-scenario grid matches [`run_scenario`].
pub fn run_grid(
    grid: &[PowerScenario],
    reps_per_scenario: usize,
    seed: u64,
    parallelism: usize,
) -> Result<Vec<PowerStudyResult>> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("power grid has no scenarios"));
    }
    let scenarios: Vec<PowerScenario> = grid
        .iter()
        .map(|s| PowerScenario {
            replications: reps_per_scenario,
            ..*s
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Domain(format!("cannot start {parallelism} worker threads: {e}")))?;
    pool.install(|| {
        scenarios
            .iter()
            .enumerate()
            .map(|(i, s)| run_indexed(s, seed, i as u64))
            .collect()
    })
}

pub const TABLE1_Q01: [f64; 3] = [0.3, 0.5, 0.8];
pub const TABLE1_SHAPES: [(f64, f64); 5] = [(0.5, 0.5), (1.0, 1.0), (2.0, 2.0), (0.5, 1.5), (1.5, 0.5)];
pub const TABLE1_LAMBDA01: [f64; 2] = [1.0, 2.0];
pub const TABLE1_LAMBDA2: [f64; 2] = [0.15, 0.5];
pub const TABLE1_PHI: [f64; 2] = [0.0, 0.1];
pub const TABLE1_DEFAULT_TF: f64 = 1.0;
pub const TABLE1_DEFAULT_R: f64 = 0.5;
pub const TABLE1_REPLICATIONS: usize = 10_000;

/// The 120-scenario simulation grid under the alternative.
///
/// Ordered with `q01` slowest, then `(k1, k2)`, `lambda01`, `lambda2` and `phi`.
pub fn table1_grid(tf: f64, r: f64) -> Vec<PowerScenario> {
    let mut grid = Vec::with_capacity(120);
    for q01 in TABLE1_Q01 {
        for (k1, k2) in TABLE1_SHAPES {
            for lambda01 in TABLE1_LAMBDA01 {
                for lambda2 in TABLE1_LAMBDA2 {
                    for phi in TABLE1_PHI {
                        grid.push(PowerScenario {
                            lambda01,
                            k1,
                            lambda2,
                            k2,
                            q01,
                            phi,
                            tf,
                            r,
                            delta0: 1.3,
                            delta1: 1.0,
                            alpha: 0.05,
                            target_power: 0.8,
                            p0: 0.5,
                            p1: 0.5,
                            replications: TABLE1_REPLICATIONS,
                            hypothesis: Hypothesis::Alt,
                            n_override: None,
                        });
                    }
                }
            }
        }
    }
    grid
}
