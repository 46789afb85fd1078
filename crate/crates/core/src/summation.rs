//! Compensated (Kahan-Babuska-Neumaier) summation.
//!
//! Moving-average coefficients alternate in sign as soon as one of the
//! parameters is negative, so every accumulation over them goes through
//! [`NeumaierSum`].

use std::iter::Sum;
use std::ops::{Add, AddAssign};

#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
}

impl NeumaierSum {
    pub const fn new() -> Self {
        Self { s: 0.0, c: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

impl AddAssign<f64> for NeumaierSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        NeumaierSum::add(self, rhs);
    }
}

impl Add for NeumaierSum {
    type Output = NeumaierSum;

    fn add(mut self, rhs: Self) -> Self::Output {
        self += rhs.s;
        self += rhs.c;
        self
    }
}

impl Sum<f64> for NeumaierSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc += x;
        }
        acc
    }
}

/// Compensated sum of an iterator of reals.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().sum::<NeumaierSum>().value()
}
