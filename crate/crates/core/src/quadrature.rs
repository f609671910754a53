//! Quadrature rules on the reference triangle and on segments.
//!
//! Triangle rules use barycentric points and weights summing to one; the
//! caller scales by the element area.

use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct TriangleRule<T> {
    pub points: Vec<[T; 3]>,
    pub weights: Vec<T>,
    /// Highest total polynomial degree integrated exactly.
    pub degree: u32,
}

impl<T: Scalar> TriangleRule<T> {
    /// Symmetric 7-point rule (Radon), exact for degree 5.
    pub fn degree5() -> Self {
        let s15 = T::from_f64(15.0).sqrt();
        let one = T::one();
        let two = T::from_f64(2.0);
        let third = one / T::from_f64(3.0);
        let a1 = (T::from_f64(6.0) - s15) / T::from_f64(21.0);
        let a2 = (T::from_f64(6.0) + s15) / T::from_f64(21.0);
        let w1 = (T::from_f64(155.0) - s15) / T::from_f64(1200.0);
        let w2 = (T::from_f64(155.0) + s15) / T::from_f64(1200.0);
        let mut points = vec![[third, third, third]];
        let mut weights = vec![T::from_f64(9.0) / T::from_f64(40.0)];
        for (a, w) in [(a1, w1), (a2, w2)] {
            let b = one - two * a;
            points.extend([[b, a, a], [a, b, a], [a, a, b]]);
            weights.extend([w, w, w]);
        }
        Self { points, weights, degree: 5 }
    }

    /// Collapsed (Duffy) Gauss-Legendre product rule with `n * n` points,
    /// exact for total degree `2n - 2`. All weights are positive.
    pub fn collapsed_gauss(n: usize) -> Self {
        let line = SegmentRule::<T>::gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&s, &ws) in line.points.iter().zip(&line.weights) {
            for (&t, &wt) in line.points.iter().zip(&line.weights) {
                // (s, t) in the unit square -> (x, y) = (s, t (1 - s)).
                let x = s;
                let y = t * (T::one() - s);
                points.push([T::one() - x - y, x, y]);
                weights.push(T::from_f64(2.0) * ws * wt * (T::one() - s));
            }
        }
        Self {
            points,
            weights,
            degree: 2 * n as u32 - 2,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Rule on the unit interval `[0, 1]`, weights summing to one.
#[derive(Clone, Debug)]
pub struct SegmentRule<T> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
    pub degree: u32,
}

impl<T: Scalar> SegmentRule<T> {
    /// Two-point Gauss rule, exact for cubics.
    pub fn gauss2() -> Self {
        let half = T::from_f64(0.5);
        let d = half / T::from_f64(3.0).sqrt();
        Self {
            points: vec![half - d, half + d],
            weights: vec![half, half],
            degree: 3,
        }
    }

    /// `n`-point Gauss-Legendre rule computed by Newton iteration on the
    /// Legendre polynomial.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1, "need at least one point");
        let mut points = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        for i in 0..n.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            // map [-1, 1] -> [0, 1]
            points[i] = T::from_f64(0.5 * (1.0 - z));
            points[n - 1 - i] = T::from_f64(0.5 * (1.0 + z));
            weights[i] = T::from_f64(0.5 * w);
            weights[n - 1 - i] = T::from_f64(0.5 * w);
        }
        Self {
            points,
            weights,
            degree: 2 * n as u32 - 1,
        }
    }
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// Integral of x^i y^j over the reference triangle with vertices
    /// (0,0), (1,0), (0,1), divided by its area 1/2.
    fn monomial_mean(i: u32, j: u32) -> f64 {
        2.0 * factorial(i) * factorial(j) / factorial(i + j + 2)
    }

    fn check_exactness(rule: &TriangleRule<f64>) {
        for total in 0..=rule.degree {
            for i in 0..=total {
                let j = total - i;
                let q: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(b, w)| w * b[1].powi(i as i32) * b[2].powi(j as i32))
                    .sum();
                let exact = monomial_mean(i, j);
                assert!(
                    ((q - exact) / exact).abs() < 1e-13,
                    "x^{i} y^{j}: {q} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn degree5_rule_is_exact_to_degree_5() {
        let rule = TriangleRule::<f64>::degree5();
        assert_eq!(rule.len(), 7);
        assert!(rule.weights.iter().all(|&w| w > 0.0));
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        check_exactness(&rule);
    }

    #[test]
    fn degree5_rule_is_not_exact_to_degree_6() {
        let rule = TriangleRule::<f64>::degree5();
        let q: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(b, w)| w * b[1].powi(6))
            .sum();
        assert!((q - monomial_mean(6, 0)).abs() > 1e-8);
    }

    #[test]
    fn collapsed_rule_is_exact_to_declared_degree() {
        for n in [2, 4, 7] {
            check_exactness(&TriangleRule::<f64>::collapsed_gauss(n));
        }
    }

    #[test]
    fn f32_rule_has_single_precision_weights() {
        let rule = TriangleRule::<f32>::degree5();
        assert!((rule.weights.iter().sum::<f32>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn gauss_legendre_matches_two_point_rule() {
        let a = SegmentRule::<f64>::gauss2();
        let b = SegmentRule::<f64>::gauss_legendre(2);
        for k in 0..2 {
            assert!((a.points[k] - b.points[k]).abs() < 1e-15);
            assert!((a.weights[k] - b.weights[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..=8usize {
            let r = SegmentRule::<f64>::gauss_legendre(n);
            for k in 0..=(2 * n - 1) as i32 {
                let q: f64 = r.points.iter().zip(&r.weights).map(|(x, w)| w * x.powi(k)).sum();
                assert!((q - 1.0 / (k + 1) as f64).abs() < 1e-14, "n={n} k={k}");
            }
        }
    }
}
