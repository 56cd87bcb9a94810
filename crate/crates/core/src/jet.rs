//! Truncated univariate Taylor series ("jets").
//!
//! A `Jet` of order `n` stores the coefficients `c[0..=n]` of
//! `f(x0 + t) = sum_k c[k] t^k`. Arithmetic propagates the coefficients with
//! the usual recurrences, which gives exact derivatives of any order without
//! finite differencing. Operands must share the same order.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        Self { c }
    }

    /// The independent variable `x0 + t`.
    pub fn variable(value: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        if order > 0 {
            c[1] = 1.0;
        }
        Self { c }
    }

    pub fn from_coeffs(c: Vec<f64>) -> Self {
        assert!(!c.is_empty(), "a jet needs at least one coefficient");
        Self { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Taylor coefficient of `t^k` (zero beyond the order).
    pub fn coeff(&self, k: usize) -> f64 {
        self.c.get(k).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for j in 2..=k {
            fact *= j as f64;
        }
        self.coeff(k) * fact
    }

    fn zeros(order: usize) -> Self {
        Self { c: vec![0.0; order + 1] }
    }

    fn same_order(&self, other: &Jet) {
        assert_eq!(self.c.len(), other.c.len(), "jet orders differ");
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { c: self.c.iter().map(|v| v * s).collect() }
    }

    /// Formal derivative d/dt, padded with a zero to keep the order.
    fn shift_down(&self) -> Self {
        let n = self.order();
        let mut out = Self::zeros(n);
        for k in 1..=n {
            out.c[k - 1] = k as f64 * self.c[k];
        }
        out
    }

    /// Antiderivative with constant term `c0`, truncated to the order.
    fn integrate(&self, c0: f64) -> Self {
        let n = self.order();
        let mut out = Self::zeros(n);
        out.c[0] = c0;
        for k in 1..=n {
            out.c[k] = self.c[k - 1] / k as f64;
        }
        out
    }

    pub fn recip(&self) -> Self {
        Jet::constant(1.0, self.order()) / self
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn sqrt(&self) -> Self {
        let n = self.order();
        let mut s = Self::zeros(n);
        s.c[0] = self.c[0].sqrt();
        for k in 1..=n {
            let mut acc = self.c[k];
            for j in 1..k {
                acc -= s.c[j] * s.c[k - j];
            }
            s.c[k] = acc / (2.0 * s.c[0]);
        }
        s
    }

    pub fn exp(&self) -> Self {
        let n = self.order();
        let mut e = Self::zeros(n);
        e.c[0] = self.c[0].exp();
        for k in 1..=n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * e.c[k - j];
            }
            e.c[k] = acc / k as f64;
        }
        e
    }

    pub fn ln(&self) -> Self {
        let n = self.order();
        let a0 = self.c[0];
        let mut l = Self::zeros(n);
        l.c[0] = a0.ln();
        for k in 1..=n {
            let mut acc = self.c[k];
            for j in 1..k {
                acc -= (j as f64 / k as f64) * l.c[j] * self.c[k - j];
            }
            l.c[k] = acc / a0;
        }
        l
    }

    /// `ln(1 + self)` with the constant term taken through `ln_1p`.
    pub fn ln_1p(&self) -> Self {
        let one_plus = self + 1.0;
        let mut l = one_plus.ln();
        l.c[0] = self.c[0].ln_1p();
        l
    }

    pub fn atan(&self) -> Self {
        let d = self.shift_down() / &(self.square() + 1.0);
        d.integrate(self.c[0].atan())
    }

    pub fn atanh(&self) -> Self {
        let d = self.shift_down() / &(1.0 - self.square());
        d.integrate(self.c[0].atanh())
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let n = self.order();
        let mut s = Self::zeros(n);
        let mut c = Self::zeros(n);
        s.c[0] = self.c[0].sin();
        c.c[0] = self.c[0].cos();
        for k in 1..=n {
            let mut acc_s = 0.0;
            let mut acc_c = 0.0;
            for j in 1..=k {
                let w = j as f64 * self.c[j];
                acc_s += w * c.c[k - j];
                acc_c -= w * s.c[k - j];
            }
            s.c[k] = acc_s / k as f64;
            c.c[k] = acc_c / k as f64;
        }
        (s, c)
    }

    /// Evaluates `sum_k a[k] * self^k` by Horner's rule.
    pub fn polynomial(&self, a: &[f64]) -> Self {
        let n = self.order();
        let mut acc = Jet::constant(0.0, n);
        for &ak in a.iter().rev() {
            acc = &acc * self + ak;
        }
        acc
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.same_order(rhs);
        Jet { c: self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect() }
    }
}

impl Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.same_order(rhs);
        Jet { c: self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect() }
    }
}

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.same_order(rhs);
        let n = self.order();
        let mut out = Jet::zeros(n);
        for i in 0..=n {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..=(n - i) {
                out.c[i + j] += self.c[i] * rhs.c[j];
            }
        }
        out
    }
}

impl Div<&Jet> for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self.same_order(rhs);
        let n = self.order();
        let b0 = rhs.c[0];
        let mut q = Jet::zeros(n);
        for k in 0..=n {
            let mut acc = self.c[k];
            for j in 0..k {
                acc -= q.c[j] * rhs.c[k - j];
            }
            q.c[k] = acc / b0;
        }
        q
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut out = self.clone();
        out.c[0] += rhs;
        out
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self + (-rhs)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self + (-rhs)
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        -rhs + self
    }
}

impl Sub<&Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        -rhs + self
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(self)
    }
}

impl Mul<&Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        rhs.scale(self)
    }
}

impl Div<f64> for &Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs)
    }
}

impl Div<Jet> for f64 {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        rhs.recip().scale(self)
    }
}

impl Div<&Jet> for f64 {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        rhs.recip().scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn factorial(k: usize) -> f64 {
        (1..=k).map(|j| j as f64).product()
    }

    #[test]
    fn exp_of_variable_has_factorial_coefficients() {
        let e = Jet::variable(0.0, 8).exp();
        for k in 0..=8 {
            assert_relative_eq!(e.coeff(k), 1.0 / factorial(k), max_relative = 1e-15);
        }
    }

    #[test]
    fn ln_inverts_exp() {
        let x = Jet::from_coeffs(vec![0.3, 1.2, -0.4, 0.25, 0.1, -0.05]);
        let y = x.exp().ln();
        for k in 0..=5 {
            assert_relative_eq!(y.coeff(k), x.coeff(k), epsilon = 1e-14);
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let x = Jet::from_coeffs(vec![2.0, 0.5, -1.0, 0.3, 0.0, 0.7]);
        let s = x.sqrt();
        let back = &s * &s;
        for k in 0..=5 {
            assert_relative_eq!(back.coeff(k), x.coeff(k), epsilon = 1e-14);
        }
    }

    #[test]
    fn division_matches_geometric_series() {
        // 1/(1 - t) = sum t^k
        let d = 1.0 / (1.0 - Jet::variable(0.0, 10));
        for k in 0..=10 {
            assert_relative_eq!(d.coeff(k), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn atan_derivatives() {
        // d/dx atan x = 1/(1+x^2); at x = 1: 1/2, second derivative -2x/(1+x^2)^2 = -1/2
        let a = Jet::variable(1.0, 3).atan();
        assert_relative_eq!(a.value(), std::f64::consts::FRAC_PI_4, epsilon = 1e-15);
        assert_relative_eq!(a.derivative(1), 0.5, epsilon = 1e-15);
        assert_relative_eq!(a.derivative(2), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn atanh_series_at_zero() {
        // atanh t = t + t^3/3 + t^5/5
        let a = Jet::variable(0.0, 5).atanh();
        assert_relative_eq!(a.coeff(1), 1.0);
        assert_relative_eq!(a.coeff(3), 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(a.coeff(5), 0.2, epsilon = 1e-15);
        assert_eq!(a.coeff(2), 0.0);
    }

    #[test]
    fn sin_cos_identity() {
        let x = Jet::from_coeffs(vec![0.7, 1.0, 0.2, -0.3]);
        let (s, c) = x.sin_cos();
        let one = &s * &s + &c * &c;
        assert_relative_eq!(one.value(), 1.0, epsilon = 1e-15);
        for k in 1..=3 {
            assert!(one.coeff(k).abs() < 1e-14);
        }
    }

    #[test]
    fn polynomial_horner() {
        let x = Jet::variable(2.0, 2);
        let p = x.polynomial(&[1.0, -3.0, 2.0]); // 1 - 3x + 2x^2
        assert_relative_eq!(p.value(), 3.0);
        assert_relative_eq!(p.derivative(1), 5.0);
        assert_relative_eq!(p.derivative(2), 4.0);
    }
}
