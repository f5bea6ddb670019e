//! Truncated Taylor series ("jets") of a scalar function about a fixed point.
//!
//! A jet of order `n` stores the normalized coefficients `f^(k)(x0) / k!` for
//! `k = 0..=n`. Products use the Cauchy rule and `exp` the standard recurrence,
//! so derivatives of products and compositions stay exact to rounding.

use std::ops::{Add, Mul};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn zero(order: usize) -> Self {
        Self { coeffs: vec![0.0; order + 1] }
    }

    pub fn constant(value: f64, order: usize) -> Self {
        let mut j = Self::zero(order);
        j.coeffs[0] = value;
        j
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        self.coeffs[k] * super::special::factorial(k)
    }

    /// `exp` of the series.
    pub fn exp(&self) -> Self {
        let n = self.coeffs.len();
        let mut e = vec![0.0; n];
        e[0] = self.coeffs[0].exp();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.coeffs[j] * e[k - j];
            }
            e[k] = acc / k as f64;
        }
        Self { coeffs: e }
    }

    pub fn scale(mut self, c: f64) -> Self {
        self.coeffs.iter_mut().for_each(|x| *x *= c);
        self
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        assert_eq!(self.coeffs.len(), rhs.coeffs.len());
        Jet { coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect() }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        assert_eq!(self.coeffs.len(), rhs.coeffs.len());
        let n = self.coeffs.len();
        let mut c = vec![0.0; n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs[..n - i].iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Jet { coeffs: c }
    }
}
