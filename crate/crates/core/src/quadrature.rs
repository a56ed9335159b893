//! Gaussian quadrature building blocks.
//!
//! Single-interval Gauss-Legendre and Gauss-Jacobi rules are produced by the
//! Golub-Welsch eigenvalue method: the nodes are the eigenvalues of the
//! symmetric tridiagonal matrix of three-term recurrence coefficients of the
//! monic orthogonal polynomials, and the weights come from the first
//! components of the normalized eigenvectors scaled by the weight-function
//! mass. Composite rules glue mapped Gauss-Legendre panels over a breakpoint
//! list; geometric grading toward a breakpoint resolves endpoint algebraic
//! singularities.

use crate::special::gamma;
use nalgebra::DMatrix;

/// Nodes and weights of a one-dimensional quadrature rule.
#[derive(Debug, Clone)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    /// Applies the rule to `f`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }

    /// Total weight mass.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Affine image of the rule on `[a, b]` (including the Jacobian factor),
    /// valid for rules whose reference interval is `[-1, 1]`.
    pub fn mapped_to(&self, a: f64, b: f64) -> Rule1d {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        Rule1d {
            nodes: self.nodes.iter().map(|&t| mid + half * t).collect(),
            weights: self.weights.iter().map(|&w| w * half).collect(),
        }
    }
}

/// Gauss-Jacobi rule on `[-1, 1]` for the weight `(1-t)^a (1+t)^b`,
/// exact for polynomials of degree ≤ 2n−1. Requires `a, b > -1`.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Rule1d {
    assert!(n >= 1, "quadrature order must be at least 1");
    assert!(a > -1.0 && b > -1.0, "Jacobi exponents must exceed -1");

    // Monic Jacobi recurrence π_{k+1} = (t − a_k) π_k − b_k π_{k-1}.
    let ab = a + b;
    let diag = |k: usize| -> f64 {
        if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            let k = k as f64;
            let d = 2.0 * k + ab;
            (b * b - a * a) / (d * (d + 2.0))
        }
    };
    let offdiag2 = |k: usize| -> f64 {
        // b_k for k ≥ 1 (the k-th squared off-diagonal entry).
        if k == 1 {
            4.0 * (a + 1.0) * (b + 1.0) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0))
        } else {
            let k = k as f64;
            let d = 2.0 * k + ab;
            4.0 * k * (k + a) * (k + b) * (k + ab) / (d * d * (d + 1.0) * (d - 1.0))
        }
    };

    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jac[(i, i)] = diag(i);
        if i + 1 < n {
            let e = offdiag2(i + 1).sqrt();
            jac[(i, i + 1)] = e;
            jac[(i + 1, i)] = e;
        }
    }

    let eig = jac.symmetric_eigen();
    // Weight mass ∫(1-t)^a (1+t)^b dt = 2^{a+b+1} B(a+1, b+1).
    let mass = 2f64.powf(ab + 1.0) * gamma(a + 1.0) * gamma(b + 1.0) / gamma(ab + 2.0);

    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let v0 = eig.eigenvectors[(0, j)];
            (eig.eigenvalues[j], mass * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));

    Rule1d {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss-Legendre rule on `[-1, 1]`, exact for polynomials of degree ≤ 2n−1.
pub fn gauss_legendre(n: usize) -> Rule1d {
    gauss_jacobi(n, 0.0, 0.0)
}

/// Composite Gauss-Legendre rule over consecutive panels
/// `[breaks[i], breaks[i+1]]` with `order` nodes per panel.
pub fn composite_gl(breaks: &[f64], order: usize) -> Rule1d {
    assert!(breaks.len() >= 2, "need at least one panel");
    let base = gauss_legendre(order);
    let mut nodes = Vec::with_capacity(order * (breaks.len() - 1));
    let mut weights = Vec::with_capacity(order * (breaks.len() - 1));
    for w in breaks.windows(2) {
        let panel = base.mapped_to(w[0], w[1]);
        nodes.extend(panel.nodes);
        weights.extend(panel.weights);
    }
    Rule1d { nodes, weights }
}

/// Breakpoints of `[a, b]` geometrically graded toward `a` (`levels` panels,
/// each half the width of the next): `a`, `a+(b−a)/2^{levels−1}`, …, `b`.
pub fn graded_toward_start(a: f64, b: f64, levels: usize) -> Vec<f64> {
    assert!(levels >= 1);
    let mut out = Vec::with_capacity(levels + 1);
    out.push(a);
    for j in (0..levels).rev() {
        out.push(a + (b - a) * 0.5f64.powi(j as i32));
    }
    out
}

/// Uniform breakpoints with panel width at most `hmax`.
pub fn uniform_breaks(a: f64, b: f64, hmax: f64) -> Vec<f64> {
    assert!(b > a && hmax > 0.0);
    let n = ((b - a) / hmax).ceil().max(1.0) as usize;
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// Splits `[a, b]` at the interior points of `cuts` (sorted, deduplicated),
/// then grades every panel toward each of its singular endpoints.
///
/// `cuts` lists locations where the integrand loses smoothness; `levels`
/// controls the geometric grading depth and `hmax` the coarsest panel width.
pub fn graded_breaks(a: f64, b: f64, cuts: &[f64], levels: usize, hmax: f64) -> Vec<f64> {
    let mut marks: Vec<f64> = vec![a, b];
    for &c in cuts {
        if c > a && c < b {
            marks.push(c);
        }
    }
    marks.sort_by(f64::total_cmp);
    marks.dedup_by(|x, y| (*x - *y).abs() < 1e-300);

    let singular: Vec<f64> = {
        let mut s = cuts.to_vec();
        s.push(a);
        s.push(b);
        s
    };
    let is_singular = |t: f64| singular.iter().any(|&s| (s - t).abs() < 1e-14 * (1.0 + t.abs()));

    let mut out = vec![marks[0]];
    for w in marks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        let mut seg = Vec::new();
        if is_singular(lo) {
            seg.extend(cap_gaps(&graded_toward_start(lo, mid, levels), hmax));
        } else {
            seg.extend(uniform_breaks(lo, mid, hmax));
        }
        if is_singular(hi) {
            let mut right = graded_toward_start(hi, mid, levels);
            right.reverse();
            seg.extend(cap_gaps(&right, hmax));
        } else {
            seg.extend(uniform_breaks(mid, hi, hmax));
        }
        for t in seg {
            if t > *out.last().unwrap() {
                out.push(t);
            }
        }
    }
    out
}

/// Subdivides every gap of a monotone break list wider than `hmax`.
fn cap_gaps(seq: &[f64], hmax: f64) -> Vec<f64> {
    let mut out = vec![seq[0]];
    for w in seq.windows(2) {
        if w[1] - w[0] > hmax {
            out.extend(uniform_breaks(w[0], w[1], hmax).into_iter().skip(1));
        } else {
            out.push(w[1]);
        }
    }
    out
}

/// Iterates a tensor-product rule over `axes`, calling `f(point, weight)` for
/// every node of the product grid. The point buffer is reused across calls.
pub fn tensor_for_each(axes: &[Rule1d], mut f: impl FnMut(&[f64], f64)) {
    let d = axes.len();
    assert!(d >= 1);
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0f64; d];
    'outer: loop {
        let mut w = 1.0;
        for i in 0..d {
            point[i] = axes[i].nodes[idx[i]];
            w *= axes[i].weights[idx[i]];
        }
        f(&point, w);
        // Odometer increment.
        for i in (0..d).rev() {
            idx[i] += 1;
            if idx[i] < axes[i].nodes.len() {
                continue 'outer;
            }
            idx[i] = 0;
        }
        break;
    }
}
