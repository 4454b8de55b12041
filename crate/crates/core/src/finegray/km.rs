use crate::numerics::StepFunction;
use crate::simgen::{Status, SubjectRecord};
use crate::{Error, Result};

/// Kaplan–Meier estimate of the censoring survival function `G`, pooled over
/// groups. Censoring (status 0) is the event here; both event causes count
/// as censored observations of `G`.
pub fn km_censoring(data: &[SubjectRecord]) -> Result<StepFunction> {
    if data.is_empty() {
        return Err(Error::EmptyInput("dataset has no records"));
    }
    let mut order: Vec<(f64, bool)> = data
        .iter()
        .map(|r| (r.time, r.status == Status::Censored))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));

    let n = order.len();
    let mut breakpoints = Vec::new();
    let mut values = Vec::new();
    let mut surv = 1.0;
    let mut i = 0;
    while i < n {
        let t = order[i].0;
        let at_risk = (n - i) as f64;
        let mut censored = 0usize;
        let mut j = i;
        while j < n && order[j].0 == t {
            censored += usize::from(order[j].1);
            j += 1;
        }
        if censored > 0 {
            surv *= 1.0 - censored as f64 / at_risk;
            breakpoints.push(t);
            values.push(surv);
        }
        i = j;
    }
    StepFunction::new(breakpoints, values, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::Group;

    fn rec(time: f64, status: Status) -> SubjectRecord {
        SubjectRecord {
            id: 0,
            group: Group::Control,
            entry: 0.0,
            time,
            status,
            censor_time: None,
        }
    }

    #[test]
    fn no_censoring_is_flat() {
        let g = km_censoring(&[rec(1.0, Status::Interest), rec(2.0, Status::Competing)]).unwrap();
        assert_eq!(g.eval(0.0), 1.0);
        assert_eq!(g.eval(100.0), 1.0);
    }

    #[test]
    fn hand_product_limit() {
        let g = km_censoring(&[rec(1.0, Status::Censored), rec(2.0, Status::Interest)]).unwrap();
        assert_eq!(g.eval(0.5), 1.0);
        assert_eq!(g.eval(1.0), 0.5);
        assert_eq!(g.eval(5.0), 0.5);
        assert_eq!(g.eval_left(1.0), 1.0);
    }

    #[test]
    fn full_depletion() {
        let data: Vec<_> = (1..=6).map(|i| rec(i as f64, Status::Censored)).collect();
        let g = km_censoring(&data).unwrap();
        assert_eq!(g.eval(6.0), 0.0);
        assert!((g.eval(3.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(km_censoring(&[]).is_err());
    }
}
