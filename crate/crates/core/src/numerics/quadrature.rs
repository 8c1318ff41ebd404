//! Gauss–Legendre quadrature and Chebyshev interpolation.

use std::f64::consts::PI;

/// Gauss–Legendre rule on [−1, 1], nodes ascending.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// K-point rule; nodes found by Newton iteration on P_K from Chebyshev guesses.
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "quadrature needs at least one node");
        let mut nodes = vec![0.0; k];
        let mut weights = vec![0.0; k];
        let kf = k as f64;
        for i in 0..k.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (kf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(k, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(k, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[k - 1 - i] = x;
            weights[i] = w;
            weights[k - 1 - i] = w;
        }
        if k % 2 == 1 {
            nodes[k / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// (P_k(x), P_k'(x)) by the three-term recurrence.
fn legendre(k: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=k {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    if k == 0 {
        return (1.0, 0.0);
    }
    let d = k as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Polynomial interpolant through Chebyshev points of the second kind on
/// [a, b], evaluated by the barycentric formula.
#[derive(Debug, Clone)]
pub struct ChebyshevInterpolant {
    a: f64,
    b: f64,
    points: Vec<f64>,
    values: Vec<f64>,
}

impl ChebyshevInterpolant {
    pub fn new(a: f64, b: f64, degree: usize, f: impl Fn(f64) -> f64) -> Self {
        assert!(b > a && degree >= 1);
        let points: Vec<f64> = (0..=degree)
            .map(|j| {
                let t = (PI * j as f64 / degree as f64).cos();
                0.5 * (a + b) + 0.5 * (b - a) * t
            })
            .collect();
        let values = points.iter().map(|&x| f(x)).collect();
        Self { a, b, points, values }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.points.len() - 1;
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, (&xj, &fj)) in self.points.iter().zip(&self.values).enumerate() {
            let d = x - xj;
            if d == 0.0 {
                return fj;
            }
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                w *= 0.5;
            }
            let t = w / d;
            num += t * fj;
            den += t;
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for k in [1, 2, 5, 8, 32, 64, 129] {
            let gl = GaussLegendre::new(k);
            let s: f64 = gl.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "k={k}: {s}");
            assert!(gl.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2k_minus_1() {
        let gl = GaussLegendre::new(6);
        for p in 0..12 {
            let got = gl.integrate(0.0, 2.0, |x| x.powi(p));
            let want = 2f64.powi(p + 1) / (p + 1) as f64;
            assert!((got - want).abs() < 1e-12 * want, "p={p}");
        }
    }

    #[test]
    fn smooth_integrand() {
        let gl = GaussLegendre::new(20);
        let got = gl.integrate(0.0, PI, f64::sin);
        assert!((got - 2.0).abs() < 1e-14);
    }

    #[test]
    fn chebyshev_reproduces_smooth_function() {
        let cheb = ChebyshevInterpolant::new(-1.0, 2.0, 30, |x| (x * 1.3).exp() / (1.0 + 0.2 * x * x));
        for i in 0..=100 {
            let x = -1.0 + 3.0 * i as f64 / 100.0;
            let f = (x * 1.3).exp() / (1.0 + 0.2 * x * x);
            assert!((cheb.eval(x) - f).abs() < 1e-12 * f.abs().max(1.0));
        }
    }
}
