use rand::Rng;

use super::{GenScenario, Status};
use crate::design::Group;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatentEvent {
    pub cause: Status,
    pub time: f64,
}

/// Time at which `F1(t | x) = v · F1(∞ | x)`.
pub(crate) fn invert_cause1(scen: &GenScenario, group: Group, v: f64) -> f64 {
    let eta = scen.eta(group);
    let target = v * scen.cause1_mass(group);
    // 1 - (1 - c)^{1/η}
    let base = -((-target).ln_1p() / eta).exp_m1();
    let w = base / scen.q01;
    (-(-w).ln_1p() / scen.lambda01).powf(1.0 / scen.k1)
}

/// Time at which the conditional cause-2 distribution `1 - exp(-λ2 t^k2 η)` equals `v`.
pub(crate) fn invert_cause2(scen: &GenScenario, group: Group, v: f64) -> f64 {
    let eta = scen.eta(group);
    (-(-v).ln_1p() / (scen.lambda2 * eta)).powf(1.0 / scen.k2)
}

/// Draw the cause, then the time from that cause's conditional distribution.
pub fn sample_latent_event<R: Rng + ?Sized>(rng: &mut R, group: Group, scen: &GenScenario) -> LatentEvent {
    let u_cause: f64 = rng.gen();
    let u_time: f64 = rng.gen();
    if u_cause < scen.cause1_mass(group) {
        LatentEvent {
            cause: Status::Interest,
            time: invert_cause1(scen, group, u_time),
        }
    } else {
        LatentEvent {
            cause: Status::Competing,
            time: invert_cause2(scen, group, u_time),
        }
    }
}
