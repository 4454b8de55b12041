use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use nicr_core::design::{
    compute_w_group, reproduce_table2 as table2_rows, sample_size, Group, MethodRegistry, SampleSizeResult,
    TABLE2_DISPLAY_DECIMALS,
};
use nicr_core::finegray::{self, noninferiority_decision, Decision, FitMode};
use nicr_core::power::{
    self, table1_grid, write_power_csv, PowerScenario, PowerStudyResult, TABLE1_DEFAULT_R, TABLE1_DEFAULT_TF,
    TABLE1_REPLICATIONS,
};
use nicr_core::simgen::{generate_dataset, read_csv, summarize_dataset, write_csv, Fractions};
use serde::Serialize;

use crate::config::RunConfig;
use crate::failure::{Failure, EXIT_NOT_CONVERGED};
use crate::{plot, FitArgs, GridArg, PowerArgs, SimulateArgs, SizeArgs, Table2Args};

fn io_failure(what: &str, path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::io(format!("cannot {what} {}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_failure("create", path, e))
}

fn emit(w: &mut dyn Write, text: std::fmt::Arguments) -> Result<(), Failure> {
    w.write_fmt(text).map_err(|e| Failure::io(format!("write failed: {e}")))
}

macro_rules! say {
    ($w:expr, $($arg:tt)*) => {
        emit($w, format_args!("{}\n", format_args!($($arg)*)))
    };
}

/// Write through `f` to `path`, or to `fallback` when no path is given.
fn write_to(
    path: Option<&Path>,
    fallback: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> nicr_core::Result<()>,
) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let mut file = create(p)?;
            f(&mut file).map_err(|e| match e {
                nicr_core::Error::Io(m) => io_failure("write", p, m),
                other => other.into(),
            })?;
            file.flush().map_err(|e| io_failure("write", p, e))
        }
        None => f(fallback).map_err(Failure::from),
    }
}

fn effective_config(path: Option<&Path>, overrides: &crate::Overrides) -> Result<RunConfig, Failure> {
    Ok(overrides.apply(RunConfig::load_optional(path)?).with_defaults())
}

fn echo_config(err: &mut dyn Write, cfg: &RunConfig) -> Result<(), Failure> {
    say!(err, "config: {}", cfg.to_json())
}

fn per_group(n: (u64, u64)) -> String {
    if n.0 == n.1 {
        format!("{} per group", n.0)
    } else {
        format!("{} control, {} experimental", n.0, n.1)
    }
}

#[derive(Serialize)]
struct SizeReport<'a> {
    config: &'a RunConfig,
    result: &'a SampleSizeResult,
    w_control: f64,
    w_experimental: f64,
}

pub fn size(a: &SizeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let cfg = effective_config(Some(&a.config), &a.overrides)?;
    let params = cfg.design_params()?;
    let mode = cfg.mode.expect("defaulted");
    let method = MethodRegistry::default().for_kind(mode)?;
    let res = sample_size(&params, method.as_ref())?;
    let w_control = compute_w_group(&params, Group::Control, mode)?;
    let w_experimental = compute_w_group(&params, Group::Experimental, mode)?;
    if a.json {
        let report = SizeReport {
            config: &cfg,
            result: &res,
            w_control,
            w_experimental,
        };
        return say!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    }
    echo_config(err, &cfg)?;
    say!(out, "method: {}", res.method)?;
    say!(
        out,
        "events: {} ({}; {:.3} before rounding)",
        res.events.events_total,
        per_group(res.events.events_per_group),
        res.events.events_fractional
    )?;
    say!(out, "w: {:.6} (control {w_control:.6}, experimental {w_experimental:.6})", res.w)?;
    say!(
        out,
        "{} total ({}), {} events",
        res.n_total,
        per_group(res.n_per_group),
        res.events.events_total
    )
}

pub const TABLE2_HEADER: &str = "k1,lambda1,lambda2,delta0,phi,events,N_CR,N_SE";

pub fn reproduce_table2(a: &Table2Args, out: &mut dyn Write) -> Result<(), Failure> {
    let rows = table2_rows()?;
    let d = TABLE2_DISPLAY_DECIMALS as usize;
    let mut text = format!("{TABLE2_HEADER}\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{:.d$},{:.d$},{},{},{},{},{}\n",
            r.k1, r.lambda1, r.lambda2, r.delta0, r.phi, r.events, r.n_cr, r.n_se
        ));
    }
    write_to(a.out.as_deref(), out, |w| Ok(w.write_all(text.as_bytes())?))
}

fn fractions_line(label: &str, f: &Fractions) -> String {
    format!(
        "{label}: n={} event1={:.4} event2={:.4} censored={:.4}",
        f.n, f.event1, f.event2, f.censored
    )
}

pub fn simulate(a: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let mut cfg = effective_config(Some(&a.config), &a.overrides)?;
    let (n0, n1) = match cfg.group_sizes()? {
        Some(n) => n,
        None => {
            let method = MethodRegistry::default().for_kind(cfg.mode.expect("defaulted"))?;
            let res = sample_size(&cfg.design_params()?, method.as_ref())?;
            (res.n_per_group.0 as usize, res.n_per_group.1 as usize)
        }
    };
    cfg.n0 = Some(n0);
    cfg.n1 = Some(n1);
    let scen = cfg.gen_scenario(n0, n1)?;
    let data = generate_dataset(&scen)?;
    let summary = summarize_dataset(&data)?;
    echo_config(err, &cfg)?;
    write_to(a.out.as_deref(), out, |w| write_csv(&data, w, a.censor_time))?;
    let report: &mut dyn Write = if a.out.is_some() { out } else { err };
    say!(report, "seed: {}", scen.seed)?;
    say!(report, "b: {}", scen.b)?;
    say!(report, "{}", fractions_line("control", &summary.per_group[0]))?;
    say!(report, "{}", fractions_line("experimental", &summary.per_group[1]))?;
    say!(report, "{}", fractions_line("pooled", &summary.pooled))
}

#[derive(Serialize)]
struct FitReport {
    #[serde(flatten)]
    fit: finegray::FitRecord,
    hazard_ratio: f64,
    alpha: f64,
    delta0: f64,
    decision: Decision,
}

pub fn fit(a: &FitArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let mut cfg = RunConfig::load_optional(a.config.as_deref())?;
    if a.alpha.is_some() {
        cfg.alpha = a.alpha;
    }
    if a.delta0.is_some() {
        cfg.delta0 = a.delta0;
    }
    let alpha = cfg.alpha.unwrap_or(0.05);
    let delta0 = cfg
        .delta0
        .ok_or_else(|| Failure::config("missing required key `delta0`".into()))?;
    let file = File::open(&a.data).map_err(|e| io_failure("read", &a.data, e))?;
    let data = read_csv(BufReader::new(file))?;
    let mode = if a.oracle { FitMode::Oracle } else { FitMode::IpcwKm };
    let f = finegray::fit(&data, mode, alpha)?;
    let decision = match noninferiority_decision(&f, delta0) {
        Ok(d) => d,
        Err(nicr_core::Error::NotConverged) => Decision::NotShown,
        Err(e) => return Err(e.into()),
    };
    if a.json {
        let report = FitReport {
            fit: f.record(),
            hazard_ratio: f.hazard_ratio(),
            alpha,
            delta0,
            decision,
        };
        say!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes"))?;
    } else {
        say!(out, "mode: {}", f.mode)?;
        say!(out, "subjects: {}", data.len())?;
        say!(out, "b_hat: {}", f.b_hat)?;
        say!(out, "se: {}", f.se)?;
        say!(out, "hazard_ratio: {}", f.hazard_ratio())?;
        say!(out, "ci_{}: ({}, {})", 1.0 - alpha, f.ci.0, f.ci.1)?;
        say!(
            out,
            "iterations: {} ({})",
            f.iterations,
            if f.converged { "converged" } else { "not converged" }
        )?;
        say!(out, "verdict: {decision} (delta0 = {delta0})")?;
    }
    if !f.converged {
        say!(err, "warning: the fit did not converge")?;
        return Err(Failure {
            code: EXIT_NOT_CONVERGED,
            message: "fit did not converge; verdict is not_shown".into(),
        });
    }
    Ok(())
}

fn power_grid(a: &PowerArgs) -> Result<(Vec<PowerScenario>, usize, u64, Option<RunConfig>), Failure> {
    let o = &a.overrides;
    match a.grid {
        Some(GridArg::Table1) => {
            let tf = o.tf.unwrap_or(TABLE1_DEFAULT_TF);
            let r = o.r.unwrap_or(TABLE1_DEFAULT_R);
            if !(tf > 0.0 && r >= 0.0) {
                return Err(Failure::config(format!("need tf > 0 and r >= 0, got tf={tf}, r={r}")));
            }
            let mut grid = table1_grid(tf, r);
            if let Some(h) = o.hypothesis {
                for s in &mut grid {
                    s.hypothesis = h.into();
                }
            }
            let reps = o.reps.unwrap_or(TABLE1_REPLICATIONS);
            let seed = o.seed.unwrap_or(crate::config::DEFAULT_SEED);
            Ok((grid, reps, seed, None))
        }
        None => {
            let cfg = effective_config(a.config.as_deref(), o)?;
            let scen = cfg.power_scenario()?;
            let seed = cfg.seed.expect("defaulted");
            Ok((vec![scen], scen.replications, seed, Some(cfg)))
        }
    }
}

pub fn power(a: &PowerArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let (grid, reps, seed, cfg) = power_grid(a)?;
    if reps == 0 {
        return Err(Failure::config("`replications` must be at least 1".into()));
    }
    if let Some(cfg) = &cfg {
        echo_config(err, cfg)?;
    }
    let results = power::run_grid(&grid, reps, seed, a.threads)?;
    write_to(a.out.as_deref(), out, |w| write_power_csv(&results, w))?;
    if let Some(p) = &a.plot {
        let svg = plot::power_svg(&results);
        std::fs::write(p, svg).map_err(|e| io_failure("write", p, e))?;
    }
    let report: &mut dyn Write = if a.out.is_some() { out } else { err };
    say!(report, "seed: {seed}")?;
    say!(report, "scenarios: {}, replications each: {reps}", results.len())?;
    summarize_power(report, &results)
}

fn summarize_power(w: &mut dyn Write, results: &[PowerStudyResult]) -> Result<(), Failure> {
    let (lo, hi) = results
        .iter()
        .map(|r| r.rejection_rate)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let unconverged: usize = results.iter().map(|r| r.unconverged_count).sum();
    say!(w, "rejection rate range: {lo:.4} to {hi:.4}")?;
    say!(w, "unconverged fits: {unconverged}")
}
