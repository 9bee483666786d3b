//! Gauss–Legendre panels and polynomial extrapolation to zero.

use alloc::vec::Vec;

use num_complex::Complex64;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are the roots of `P_n`, found by Newton iteration from the
    /// Tricomi initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let step = p / d;
                z -= step;
                if step.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> Complex64) -> Complex64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * *w;
        }
        acc * half
    }

    /// `∫_a^b f` over equal panels no wider than `max_width`.
    pub fn integrate_panels(
        &self,
        a: f64,
        b: f64,
        max_width: f64,
        mut f: impl FnMut(f64) -> Complex64,
    ) -> Complex64 {
        if b <= a {
            return Complex64::new(0.0, 0.0);
        }
        let count = ((b - a) / max_width).ceil().max(1.0) as usize;
        let h = (b - a) / count as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..count {
            let lo = a + h * k as f64;
            let hi = if k + 1 == count { b } else { lo + h };
            acc += self.integrate(lo, hi, &mut f);
        }
        acc
    }

    /// `∫` over consecutive intervals `[edges[k], edges[k+1]]` (edges may descend).
    pub fn integrate_edges(&self, edges: &[f64], mut f: impl FnMut(f64) -> Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for pair in edges.windows(2) {
            acc += self.integrate(pair[0], pair[1], &mut f);
        }
        acc
    }
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Panel edges from `start` to `end` whose widths double from `first` until
/// they reach `max_width`. Used to resolve a singularity sitting just outside `start`.
pub fn graded_edges(start: f64, end: f64, first: f64, max_width: f64) -> Vec<f64> {
    let mut edges = alloc::vec![start];
    let span = (end - start).abs();
    if span == 0.0 {
        return edges;
    }
    let dir = (end - start).signum();
    let mut pos = 0.0;
    let mut width = first.min(max_width);
    while pos < span {
        let step = width.min(span - pos);
        // Avoid a sliver at the end.
        let step = if span - pos - step < 0.25 * width { span - pos } else { step };
        pos += step;
        edges.push(if pos >= span { end } else { start + dir * pos });
        width = (2.0 * width).min(max_width);
    }
    edges
}

/// Polynomial (Neville) extrapolation of `ys(xs)` to `x = 0`.
///
/// Points are taken from the end of the slices (smallest `x` last). Entry `k`
/// of the result interpolates the last `k + 1` points, so the final entry is
/// the highest-order estimate.
pub fn extrapolate_to_zero(xs: &[f64], ys: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let px: Vec<f64> = xs.iter().rev().copied().collect();
    let mut column: Vec<Complex64> = ys.iter().rev().copied().collect();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(column[0]);
    for k in 1..n {
        for i in 0..n - k {
            let (xi, xj) = (px[i], px[i + k]);
            column[i] = (column[i] * (-xj) - column[i + 1] * (-xi)) / (xi - xj);
        }
        out.push(column[0]);
    }
    out
}
