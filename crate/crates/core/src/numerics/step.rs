use crate::{Error, Result};

/// Right-continuous step function.
///
/// Takes `initial` for `t < breakpoints[0]` and `values[i]` on
/// `[breakpoints[i], breakpoints[i + 1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    initial: f64,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, initial: f64) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::Domain(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("breakpoints must be strictly ascending".into()));
        }
        if breakpoints.iter().chain(&values).any(|v| v.is_nan()) || initial.is_nan() {
            return Err(Error::Domain("step function contains NaN".into()));
        }
        Ok(Self {
            breakpoints,
            values,
            initial,
        })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            breakpoints: Vec::new(),
            values: Vec::new(),
            initial: value,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    /// Value at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        if idx == 0 {
            self.initial
        } else {
            self.values[idx - 1]
        }
    }

    /// Left limit at `t`, i.e. the value just before `t`.
    pub fn eval_left(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b < t);
        if idx == 0 {
            self.initial
        } else {
            self.values[idx - 1]
        }
    }
}
