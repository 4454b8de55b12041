use std::io::Write;

use super::PowerStudyResult;
use crate::Result;

pub const POWER_CSV_HEADER: &str = "q01,k1,k2,lambda01,lambda2,phi,delta0,delta1,hypothesis,n0,n1,reps,\
rejection_rate,mc_stderr,frac_censored,frac_event1,frac_event2,unconverged,seed";

/// One row per scenario. Floats use the shortest representation that
/// round-trips, so equal results give identical bytes.
pub fn write_power_csv<W: Write>(results: &[PowerStudyResult], mut out: W) -> Result<()> {
    writeln!(out, "{POWER_CSV_HEADER}")?;
    for r in results {
        let s = &r.scenario;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.q01,
            s.k1,
            s.k2,
            s.lambda01,
            s.lambda2,
            s.phi,
            s.delta0,
            s.delta1,
            s.hypothesis,
            r.n0,
            r.n1,
            r.replications,
            r.rejection_rate,
            r.mc_stderr,
            r.mean_frac_censored,
            r.mean_frac_event1,
            r.mean_frac_event2,
            r.unconverged_count,
            r.seed
        )?;
    }
    out.flush()?;
    Ok(())
}
