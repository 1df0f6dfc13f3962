//! One-dimensional quadrature rules on `[-1, 1]`.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, exact for polynomials of
/// degree `2n - 1`. Nodes are returned in decreasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fejer's first rule: colatitudes `theta_j = (2j+1) pi / (2n)` and weights
/// such that `sum_j w_j f(cos theta_j)` integrates polynomials of degree
/// below `n` exactly over `[-1, 1]`.
pub fn fejer_first(n: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let thetas: Vec<f64> = (0..n)
        .map(|j| (2 * j + 1) as f64 * PI / (2.0 * nf))
        .collect();
    let weights = thetas
        .iter()
        .map(|&t| {
            let s: f64 = (1..=n / 2)
                .map(|k| {
                    let k = k as f64;
                    (2.0 * k * t).cos() / (4.0 * k * k - 1.0)
                })
                .sum();
            2.0 / nf * (1.0 - 2.0 * s)
        })
        .collect();
    (thetas, weights)
}
