//! Gauss-Legendre quadrature on the bi-unit reference square and on
//! reference edges.

/// Tensor-product Gauss rule on [-1,1]^2.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// (xi, eta) sample points.
    pub points: Vec<(f64, f64)>,
    /// Positive weights summing to 4.
    pub weights: Vec<f64>,
}

/// 1D Gauss-Legendre points and weights on [-1,1].
pub fn gauss_1d(n: usize) -> (Vec<f64>, Vec<f64>) {
    match n {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let a = 1.0 / 3f64.sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        3 => {
            let a = (3.0 / 5.0_f64).sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let a = (3.0 / 7.0 - 2.0 / 7.0 * (6.0 / 5.0_f64).sqrt()).sqrt();
            let b = (3.0 / 7.0 + 2.0 / 7.0 * (6.0 / 5.0_f64).sqrt()).sqrt();
            let wa = (18.0 + 30f64.sqrt()) / 36.0;
            let wb = (18.0 - 30f64.sqrt()) / 36.0;
            (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
        }
        5 => {
            let a = 1.0 / 3.0 * (5.0 - 2.0 * (10.0 / 7.0_f64).sqrt()).sqrt();
            let b = 1.0 / 3.0 * (5.0 + 2.0 * (10.0 / 7.0_f64).sqrt()).sqrt();
            let wa = (322.0 + 13.0 * 70f64.sqrt()) / 900.0;
            let wb = (322.0 - 13.0 * 70f64.sqrt()) / 900.0;
            (
                vec![-b, -a, 0.0, a, b],
                vec![wb, wa, 128.0 / 225.0, wa, wb],
            )
        }
        _ => panic!("unsupported 1D Gauss order {n}"),
    }
}

impl QuadratureRule {
    /// n x n tensor-product rule, exact for polynomials of degree 2n-1
    /// per direction.
    pub fn tensor(n: usize) -> Self {
        let (x, w) = gauss_1d(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                points.push((x[i], x[j]));
                weights.push(w[i] * w[j]);
            }
        }
        QuadratureRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_reference_area() {
        for n in 1..=5 {
            let q = QuadratureRule::tensor(n);
            assert_eq!(q.len(), n * n);
            let total: f64 = q.weights.iter().sum();
            assert_relative_eq!(total, 4.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn rules_integrate_monomials_exactly() {
        // exact reference integral of xi^p * eta^q over [-1,1]^2
        let exact = |p: u32, q: u32| -> f64 {
            let one = |k: u32| {
                if k % 2 == 1 {
                    0.0
                } else {
                    2.0 / (k as f64 + 1.0)
                }
            };
            one(p) * one(q)
        };
        for n in 1..=5usize {
            let rule = QuadratureRule::tensor(n);
            let degree = (2 * n - 1) as u32;
            for p in 0..=degree {
                for q in 0..=degree {
                    let num: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(&(x, y), &w)| w * x.powi(p as i32) * y.powi(q as i32))
                        .sum();
                    assert_relative_eq!(num, exact(p, q), epsilon = 1e-13);
                }
            }
        }
    }
}
