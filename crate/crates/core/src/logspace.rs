//! Positive quantities carried as natural logarithms.
//!
//! Proof constants routinely exceed the `f64` range, so they are stored as
//! `ln(value)` and only exponentiated for display.

use serde::Serialize;
use std::ops::{Div, Mul};

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogScalar {
    ln: f64,
}

impl LogScalar {
    pub const ONE: LogScalar = LogScalar { ln: 0.0 };
    pub const ZERO: LogScalar = LogScalar { ln: f64::NEG_INFINITY };

    /// Wraps a nonnegative value. Panics in debug builds on negative input.
    pub fn new(value: f64) -> Self {
        debug_assert!(value >= 0.0, "LogScalar::new({value})");
        LogScalar { ln: value.ln() }
    }

    pub fn from_ln(ln: f64) -> Self {
        LogScalar { ln }
    }

    pub fn ln(self) -> f64 {
        self.ln
    }

    /// The represented value; `inf` when it overflows.
    pub fn value(self) -> f64 {
        self.ln.exp()
    }

    /// `self^e`, with the convention `0^0 = 1`.
    pub fn powf(self, e: f64) -> Self {
        if e == 0.0 {
            return LogScalar::ONE;
        }
        LogScalar { ln: self.ln * e }
    }

    pub fn max(self, other: Self) -> Self {
        if other.ln > self.ln {
            other
        } else {
            self
        }
    }

    /// `self + other` via log-sum-exp.
    pub fn add(self, other: Self) -> Self {
        let (hi, lo) = if self.ln >= other.ln { (self.ln, other.ln) } else { (other.ln, self.ln) };
        if hi == f64::NEG_INFINITY {
            return LogScalar::ZERO;
        }
        LogScalar { ln: hi + (lo - hi).exp().ln_1p() }
    }

    pub fn sum<I: IntoIterator<Item = LogScalar>>(items: I) -> Self {
        items.into_iter().fold(LogScalar::ZERO, LogScalar::add)
    }

    pub fn is_finite(self) -> bool {
        self.ln.is_finite()
    }
}

impl Mul for LogScalar {
    type Output = LogScalar;
    fn mul(self, rhs: Self) -> Self {
        LogScalar { ln: self.ln + rhs.ln }
    }
}

impl Mul<f64> for LogScalar {
    type Output = LogScalar;
    fn mul(self, rhs: f64) -> Self {
        self * LogScalar::new(rhs)
    }
}

impl Div for LogScalar {
    type Output = LogScalar;
    fn div(self, rhs: Self) -> Self {
        LogScalar { ln: self.ln - rhs.ln }
    }
}

impl Serialize for LogScalar {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("LogScalar", 2)?;
        st.serialize_field("value", &self.value())?;
        st.serialize_field("ln", &self.ln)?;
        st.end()
    }
}

/// `ln(sum_i exp(x_i))`, reduced pairwise after the max shift.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m.is_nan() {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    let shifted: Vec<f64> = xs.iter().map(|x| (x - m).exp()).collect();
    m + crate::grid::pairwise_sum(&shifted).ln()
}
