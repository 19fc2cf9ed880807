//! Gauss–Legendre rule on the unit interval.

use crate::error::{param, Result};
use crate::scalar::Real;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(param("nodes", "need at least one node"));
        }
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let half = T::lit(0.5);
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, refined by Newton on P_n
            let mut x = T::lit((std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos());
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= T::default_epsilon() * T::lit(4.0) {
                    let (_, d) = legendre(n, x);
                    dp = d;
                    break;
                }
            }
            let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
            // map [-1, 1] → [0, 1]; the pair ±x shares one weight
            nodes[i] = half * (T::one() - x);
            nodes[n - 1 - i] = half * (T::one() + x);
            weights[i] = half * w;
            weights[n - 1 - i] = half * w;
        }
        Ok(Self { nodes, weights })
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        crate::scalar::ksum(
            self.nodes
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| w * f(x)),
        )
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::lit(k as f64);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    let nf = T::lit(n as f64);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        for n in [1, 2, 5, 8, 64, 101] {
            let gl = GaussLegendre::<f64>::new(n).unwrap();
            let s: f64 = gl.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-14, "n={n}: {s}");
            assert!(gl.nodes.windows(2).all(|w| w[0] < w[1]));
        }
        assert!(GaussLegendre::<f64>::new(0).is_err());
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let gl = GaussLegendre::<f64>::new(8).unwrap();
        for deg in 0..16 {
            let got = gl.integrate(|x| x.powi(deg));
            assert!((got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "deg {deg}");
        }
    }

    #[test]
    fn exponential_converges() {
        let gl = GaussLegendre::<f64>::new(64).unwrap();
        let c = 60.0f64;
        let got = gl.integrate(|x| (-c * x).exp());
        let exact = -(-c).exp_m1() / c;
        assert!((got - exact).abs() / exact < 1e-14);
    }

    #[test]
    fn two_point_nodes() {
        let gl = GaussLegendre::<f64>::new(2).unwrap();
        let d = 0.5 / 3f64.sqrt();
        assert!((gl.nodes[0] - (0.5 - d)).abs() < 1e-15);
        assert!((gl.weights[1] - 0.5).abs() < 1e-15);
    }
}
