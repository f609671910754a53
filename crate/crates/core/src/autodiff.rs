//! Forward-mode automatic differentiation with dual numbers.
//!
//! `Dual<S>` carries a value and one directional derivative. Nesting
//! (`Dual<Dual<f64>>`) yields mixed second derivatives, which is how the
//! manufactured forcing terms get `div(sigma(u))` without hand-derived
//! formulas.

use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_traits::{Num, One, Zero};

use crate::scalar::Scalar;
use crate::Point;

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct Dual<S> {
    pub re: S,
    pub eps: S,
}

impl<S: Scalar> Dual<S> {
    pub fn new(re: S, eps: S) -> Self {
        Self { re, eps }
    }

    /// An independent variable (unit seed).
    pub fn var(re: S) -> Self {
        Self { re, eps: S::one() }
    }

    pub fn cst(re: S) -> Self {
        Self { re, eps: S::zero() }
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = S::one() / o.re;
        let q = self.re * inv;
        Dual::new(q, (self.eps - q * o.eps) * inv)
    }
}

// Only needed to satisfy `Num`; the derivative of `a % b` w.r.t. `a` is 1
// away from the jumps.
impl<S: Scalar> Rem for Dual<S> {
    type Output = Self;
    fn rem(self, o: Self) -> Self {
        Dual::new(self.re % o.re, self.eps)
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<S: Scalar> Zero for Dual<S> {
    fn zero() -> Self {
        Dual::cst(S::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
}

impl<S: Scalar> One for Dual<S> {
    fn one() -> Self {
        Dual::cst(S::one())
    }
}

impl<S: Scalar> Num for Dual<S> {
    type FromStrRadixErr = S::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        S::from_str_radix(s, radix).map(Dual::cst)
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    fn from_f64(v: f64) -> Self {
        Dual::cst(S::from_f64(v))
    }

    fn re(self) -> f64 {
        self.re.re()
    }

    fn sqrt(self) -> Self {
        let r = self.re.sqrt();
        Dual::new(r, self.eps / (S::from_f64(2.0) * r))
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, self.eps * e)
    }

    fn ln(self) -> Self {
        Dual::new(self.re.ln(), self.eps / self.re)
    }

    fn powf(self, e: f64) -> Self {
        let lower = self.re.powf(e - 1.0);
        Dual::new(lower * self.re, self.eps * S::from_f64(e) * lower)
    }
}

/// Second-order dual used for Hessian entries.
pub type HyperDual = Dual<Dual<f64>>;

/// Seeds `(x, y)` so that the result of a function evaluation carries
/// `d/d(dir_a)` in `.re.eps`, `d/d(dir_b)` in `.eps.re` and the mixed
/// derivative in `.eps.eps`.
pub fn hyper_seed(p: Point, dir_a: usize, dir_b: usize) -> (HyperDual, HyperDual) {
    let seed = |k: usize| {
        let a = if dir_a == k { 1.0 } else { 0.0 };
        let b = if dir_b == k { 1.0 } else { 0.0 };
        Dual::new(Dual::new(p[k], a), Dual::new(b, 0.0))
    };
    (seed(0), seed(1))
}

/// Scalar field on the plane that can be evaluated with any [`Scalar`].
pub trait ScalarField {
    fn eval<S: Scalar>(&self, x: S, y: S) -> S;

    fn value(&self, p: Point) -> f64 {
        self.eval(p[0], p[1])
    }

    fn gradient(&self, p: Point) -> [f64; 2] {
        let dx = self.eval(Dual::var(p[0]), Dual::cst(p[1])).eps;
        let dy = self.eval(Dual::cst(p[0]), Dual::var(p[1])).eps;
        [dx, dy]
    }

    /// Hessian `[[f_xx, f_xy], [f_xy, f_yy]]`.
    fn hessian(&self, p: Point) -> [[f64; 2]; 2] {
        let mut h = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in a..2 {
                let (x, y) = hyper_seed(p, a, b);
                let v = self.eval(x, y).eps.eps;
                h[a][b] = v;
                h[b][a] = v;
            }
        }
        h
    }
}

/// Bivariate polynomial `sum c * x^i * y^j`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial2 {
    pub terms: Vec<(f64, u32, u32)>,
}

impl Polynomial2 {
    pub fn new(terms: Vec<(f64, u32, u32)>) -> Self {
        Self { terms }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![(c, 0, 0)])
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|&(_, i, j)| i + j).max().unwrap_or(0)
    }

    /// Exact integral over the unit square.
    pub fn unit_square_integral(&self) -> f64 {
        self.terms
            .iter()
            .map(|&(c, i, j)| c / ((i + 1) as f64 * (j + 1) as f64))
            .sum()
    }

    /// Same polynomial shifted to zero mean over the unit square.
    pub fn zero_mean(&self) -> Self {
        let mut out = self.clone();
        out.terms.push((-self.unit_square_integral(), 0, 0));
        out
    }
}

impl ScalarField for Polynomial2 {
    fn eval<S: Scalar>(&self, x: S, y: S) -> S {
        self.terms.iter().fold(S::zero(), |acc, &(c, i, j)| {
            acc + S::from_f64(c) * x.powi(i as i32) * y.powi(j as i32)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct Wavy;
    impl ScalarField for Wavy {
        fn eval<S: Scalar>(&self, x: S, y: S) -> S {
            (x * y).exp() + (S::one() + x * x).ln() * y.sqrt() + x.powf(1.4)
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let p = [0.3, 0.7];
        let g = Wavy.gradient(p);
        let h = 1e-6;
        let fd_x = (Wavy.value([p[0] + h, p[1]]) - Wavy.value([p[0] - h, p[1]])) / (2.0 * h);
        let fd_y = (Wavy.value([p[0], p[1] + h]) - Wavy.value([p[0], p[1] - h])) / (2.0 * h);
        assert_relative_eq!(g[0], fd_x, max_relative = 1e-8);
        assert_relative_eq!(g[1], fd_y, max_relative = 1e-8);
    }

    #[test]
    fn hessian_matches_differences_of_gradient() {
        let p = [0.4, 0.6];
        let hs = Wavy.hessian(p);
        let h = 1e-6;
        for b in 0..2 {
            let mut pp = p;
            let mut pm = p;
            pp[b] += h;
            pm[b] -= h;
            let gp = Wavy.gradient(pp);
            let gm = Wavy.gradient(pm);
            for a in 0..2 {
                assert_relative_eq!(hs[a][b], (gp[a] - gm[a]) / (2.0 * h), max_relative = 1e-7);
            }
        }
    }

    #[test]
    fn quotient_rule() {
        let x = Dual::var(2.0);
        let v = Dual::cst(1.0) / (x * x);
        assert_eq!(v.re, 0.25);
        assert_eq!(v.eps, -0.25);
    }

    #[test]
    fn polynomial_mean_and_degree() {
        let q = Polynomial2::new(vec![(1.0, 3, 1)]);
        assert_eq!(q.degree(), 4);
        assert_relative_eq!(q.unit_square_integral(), 0.125);
        assert!(q.zero_mean().unit_square_integral().abs() < 1e-16);
        assert_eq!(q.gradient([1.0, 2.0]), [6.0, 1.0]);
    }
}
