//! Quadrature realizations of the intertwining measures μ_x^k.
//!
//! For products of rank-one factors (every root of the form ±c·e_j, the Z₂^d
//! family), the measure μ_x^k representing the intertwining operator
//! `V_k p(x) = ∫ p dμ_x^k` factorizes over coordinates. Each rank-one factor
//! with multiplicity k > 0 is the push-forward of the beta-type density
//!
//! ```text
//! c_k (1 + t)(1 − t²)^{k−1} dt   on [−1, 1],   ξ = x_i t,
//! ```
//!
//! realized here by a Gauss-Jacobi rule with parameters (k−1, k), which
//! integrates the density exactly against polynomials of degree ≤ 2·order−1.
//! A factor with k = 0 degenerates to the point mass at x_i, and μ_0 = δ_0.
//!
//! For integrands singular at the endpoints (Green-type kernels) a graded
//! composite variant is provided. Its panels are constructed in offset
//! coordinates o = 1 ∓ t measured from the singular endpoint, and every node
//! carries stably computed offsets `1 + t` and `1 − t`: reconstructing those
//! from t alone underflows once panels shrink past machine resolution.
//!
//! On monomials V_k acts diagonally: V_k(x^e) = x^e Π_i m_{k_i}(e_i) with the
//! exact rational moments m_k(n) = Π_{j=1}^{⌈n/2⌉} (2j−1)/((2j−1)+2k). The
//! quadrature route and the moment route are kept independent and
//! cross-checked in tests.
//!
//! The Dunkl kernel and the radial translation both reduce to μ-integrals:
//!
//! ```text
//! E_k(x, y) = ∫ e^{⟨y,ξ⟩} dμ_x^k(ξ),
//! τ_x f(y)  = ∫ F(√(|x|² + |y|² + 2⟨x,ξ⟩)) dμ_y^k(ξ)   for f = F(|·|).
//! ```

use crate::error::{Error, Result};
use crate::poly::{Coeff, Monomial, MultiPoly};
use crate::quadrature::{gauss_jacobi, gauss_legendre, graded_toward_start};
use crate::reflection::DunklModel;
use num::rational::BigRational;
use num::BigInt;
use std::collections::HashMap;
use std::sync::{Arc, LazyLock, RwLock};

/// Default Gauss-Jacobi order per rank-one factor.
pub const DEFAULT_MU_ORDER: usize = 40;

/// Hard cap on tensor node counts to keep runaway configurations visible.
const NODE_CAP: usize = 20_000_000;

/// One rank-one factor rule on [−1, 1], weights summing to 1. `off_lo` and
/// `off_hi` hold 1 + t and 1 − t computed without cancellation, so singular
/// integrands can be evaluated at nodes exponentially close to the endpoints.
#[derive(Debug, Clone)]
pub(crate) struct FactorSamples {
    pub t: Vec<f64>,
    pub w: Vec<f64>,
    pub off_lo: Vec<f64>,
    pub off_hi: Vec<f64>,
}

/// Per-axis realization of one factor of μ_x^k.
#[derive(Debug, Clone)]
pub(crate) enum AxisRule {
    /// Factor measure is the point mass at the base coordinate.
    Point,
    Samples(Arc<FactorSamples>),
}

impl AxisRule {
    pub(crate) fn len(&self) -> usize {
        match self {
            AxisRule::Point => 1,
            AxisRule::Samples(s) => s.t.len(),
        }
    }
}

/// Node budget selector for μ-rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RuleSpec {
    /// Single Gauss-Jacobi rule, exact on polynomials of degree ≤ 2·order−1.
    Plain { order: usize },
    /// Graded composite rule resolving endpoint singularities; `levels`
    /// panels per endpoint halving geometrically, `order` nodes per panel.
    Refined { levels: usize, order: usize },
}

type FactorCache = RwLock<HashMap<(u64, RuleSpecKey), Arc<FactorSamples>>>;

static FACTOR_CACHE: LazyLock<FactorCache> = LazyLock::new(|| RwLock::new(HashMap::new()));

type RuleSpecKey = (u8, usize, usize);

fn spec_key(spec: RuleSpec) -> RuleSpecKey {
    match spec {
        RuleSpec::Plain { order } => (0, order, 0),
        RuleSpec::Refined { levels, order } => (1, order, levels),
    }
}

pub(crate) fn factor_samples(k: f64, spec: RuleSpec) -> Arc<FactorSamples> {
    debug_assert!(k > 0.0);
    let key = (k.to_bits(), spec_key(spec));
    if let Some(hit) = FACTOR_CACHE.read().unwrap().get(&key) {
        return hit.clone();
    }
    let built = match spec {
        RuleSpec::Plain { order } => plain_factor_rule(k, order),
        RuleSpec::Refined { levels, order } => refined_factor_rule(k, levels, order),
    };
    let arc = Arc::new(built);
    FACTOR_CACHE.write().unwrap().insert(key, arc.clone());
    arc
}

/// Gauss-Jacobi realization of c_k (1−t)^{k−1} (1+t)^k dt.
fn plain_factor_rule(k: f64, order: usize) -> FactorSamples {
    let rule = gauss_jacobi(order, k - 1.0, k);
    let mass: f64 = rule.weights.iter().sum();
    let w = rule.weights.iter().map(|&wi| wi / mass).collect();
    let off_lo = rule.nodes.iter().map(|&t| 1.0 + t).collect();
    let off_hi = rule.nodes.iter().map(|&t| 1.0 - t).collect();
    FactorSamples {
        t: rule.nodes,
        w,
        off_lo,
        off_hi,
    }
}

/// Graded composite realization. Both halves are built in the offset
/// variable o = distance to the nearer endpoint (breakpoints are exact
/// powers of two), and the innermost sliver of each half uses a one-sided
/// Gauss-Jacobi rule carrying the local density factor o^k (left) or
/// o^{k−1} (right), so no density mass is dropped.
fn refined_factor_rule(k: f64, levels: usize, order: usize) -> FactorSamples {
    let offs = graded_toward_start(0.0, 1.0, levels);
    let interior = gauss_legendre(order);
    let left_sliver = gauss_jacobi(order, 0.0, k); // weight (1+u)^k
    let right_sliver = gauss_jacobi(order, 0.0, k - 1.0); // weight (1+u)^{k−1}

    let mut out = FactorSamples {
        t: Vec::new(),
        w: Vec::new(),
        off_lo: Vec::new(),
        off_hi: Vec::new(),
    };
    let mut push = |t: f64, w: f64, lo: f64, hi: f64| {
        out.t.push(t);
        out.w.push(w);
        out.off_lo.push(lo);
        out.off_hi.push(hi);
    };

    for (p, win) in offs.windows(2).enumerate() {
        let (oa, ob) = (win[0], win[1]);
        let half = 0.5 * (ob - oa);
        let mid = 0.5 * (oa + ob);
        if p == 0 {
            // Left half, t = −1 + o: density (1+t)^k = o^k = (half(1+u))^k.
            for (&u, &wu) in left_sliver.nodes.iter().zip(&left_sliver.weights) {
                let o = half * (1.0 + u);
                let (lo, hi) = (o, 2.0 - o);
                push(-1.0 + o, wu * half.powf(k + 1.0) * hi.powf(k - 1.0), lo, hi);
            }
            // Right half, t = 1 − o: density (1−t)^{k−1} = o^{k−1}.
            for (&u, &wu) in right_sliver.nodes.iter().zip(&right_sliver.weights) {
                let o = half * (1.0 + u);
                let (lo, hi) = (2.0 - o, o);
                push(1.0 - o, wu * half.powf(k) * lo.powf(k), lo, hi);
            }
        } else {
            for (&u, &wu) in interior.nodes.iter().zip(&interior.weights) {
                let o = mid + half * u;
                // Left half.
                let (lo, hi) = (o, 2.0 - o);
                push(
                    -1.0 + o,
                    wu * half * hi.powf(k - 1.0) * lo.powf(k),
                    lo,
                    hi,
                );
                // Right half.
                let (lo, hi) = (2.0 - o, o);
                push(1.0 - o, wu * half * hi.powf(k - 1.0) * lo.powf(k), lo, hi);
            }
        }
    }
    let mass: f64 = out.w.iter().sum();
    for w in out.w.iter_mut() {
        *w /= mass;
    }
    out
}

/// Per-axis factor rules of μ_x^k at `x`. Requires a product group.
pub(crate) fn mu_axis_rules(
    model: &DunklModel,
    x: &[f64],
    spec: RuleSpec,
) -> Result<Vec<AxisRule>> {
    if x.len() != model.dim() {
        return Err(Error::InvalidArgument(format!(
            "point has length {} in dimension {}",
            x.len(),
            model.dim()
        )));
    }
    let product = model.product_structure().ok_or_else(|| {
        Error::UnsupportedGroup(
            "intertwining measures are realized only for products of rank-one \
             factors (all roots of the form ±c·e_j)"
                .into(),
        )
    })?;
    Ok(product
        .axis_k
        .iter()
        .zip(x)
        .map(|(&k, &xi)| {
            if k == 0.0 || xi == 0.0 {
                AxisRule::Point // point mass at x_i (δ_0 when x_i = 0)
            } else {
                AxisRule::Samples(factor_samples(k, spec))
            }
        })
        .collect())
}

/// Tensor quadrature for μ_x^k: nodes inside the convex hull of the orbit
/// W·x, positive weights summing to 1.
#[derive(Debug, Clone)]
pub struct MuQuadrature {
    pub base_point: Vec<f64>,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl MuQuadrature {
    /// ∫ f dμ_x^k.
    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(xi, &w)| w * f(xi))
            .sum()
    }
}

fn tensor_mu(x: &[f64], axes: &[AxisRule]) -> Result<MuQuadrature> {
    let d = x.len();
    let mut count = 1usize;
    for a in axes {
        count = count.saturating_mul(a.len());
    }
    if count > NODE_CAP {
        return Err(Error::Config(format!(
            "μ tensor rule would need {count} nodes (cap {NODE_CAP})"
        )));
    }
    let mut nodes = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    let mut idx = vec![0usize; d];
    'outer: loop {
        let mut p = vec![0.0; d];
        let mut w = 1.0;
        for i in 0..d {
            match &axes[i] {
                AxisRule::Samples(s) => {
                    p[i] = x[i] * s.t[idx[i]];
                    w *= s.w[idx[i]];
                }
                AxisRule::Point => p[i] = x[i],
            }
        }
        nodes.push(p);
        weights.push(w);
        for i in (0..d).rev() {
            idx[i] += 1;
            if idx[i] < axes[i].len() {
                continue 'outer;
            }
            idx[i] = 0;
        }
        break;
    }
    Ok(MuQuadrature {
        base_point: x.to_vec(),
        nodes,
        weights,
    })
}

/// Gauss-Jacobi tensor rule for μ_x^k with `order` nodes per active factor.
pub fn mu_quadrature(model: &DunklModel, x: &[f64], order: usize) -> Result<MuQuadrature> {
    if order == 0 {
        return Err(Error::InvalidArgument("μ order must be positive".into()));
    }
    let axes = mu_axis_rules(model, x, RuleSpec::Plain { order })?;
    tensor_mu(x, &axes)
}

/// Graded-composite tensor rule for μ_x^k, for integrands that are singular
/// at the boundary of the orbit hull (Green-type kernels).
pub fn mu_quadrature_refined(
    model: &DunklModel,
    x: &[f64],
    levels: usize,
    order: usize,
) -> Result<MuQuadrature> {
    if order == 0 || levels == 0 {
        return Err(Error::InvalidArgument(
            "μ levels and order must be positive".into(),
        ));
    }
    let axes = mu_axis_rules(model, x, RuleSpec::Refined { levels, order })?;
    tensor_mu(x, &axes)
}

/// V_k p(x) = ∫ p dμ_x^k by quadrature (exact for deg p ≤ 2·order−1).
pub fn apply_vk(
    model: &DunklModel,
    p: &MultiPoly<f64>,
    x: &[f64],
    order: usize,
) -> Result<f64> {
    let q = mu_quadrature(model, x, order)?;
    Ok(q.integrate(|xi| p.eval(xi)))
}

/// Exact rational moments m_k(n) = ∫ t^n dμ^{(k)} of the rank-one profile
/// measure: m_k(n) = Π_{j=1}^{⌈n/2⌉} (2j−1)/((2j−1)+2k).
pub fn rank_one_moment(k: &BigRational, n: usize) -> BigRational {
    let mut m = BigRational::from_integer(BigInt::from(1));
    let two_k = k + k;
    for j in 1..=n.div_ceil(2) {
        let odd = BigRational::from_integer(BigInt::from(2 * j as i64 - 1));
        m = m * &odd / (&odd + &two_k);
    }
    m
}

/// Diagonal action of V_k on the monomial basis of degree ≤ `max_degree`
/// (product groups act diagonally: V_k(x^e) = x^e Π_i m_{k_i}(e_i)).
#[derive(Debug, Clone)]
pub struct VkMatrix {
    pub basis: Vec<Monomial>,
    pub diagonal: Vec<BigRational>,
    dim: usize,
}

impl VkMatrix {
    /// Applies V_k exactly to a rational polynomial of admissible degree.
    pub fn apply(&self, p: &MultiPoly<BigRational>) -> Result<MultiPoly<BigRational>> {
        let mut out = MultiPoly::zero(self.dim);
        for (m, c) in p.terms() {
            let idx = self
                .basis
                .iter()
                .position(|b| b == m)
                .ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "monomial of degree {} outside the basis",
                        m.total_degree()
                    ))
                })?;
            let scaled = c.mul(&self.diagonal[idx]);
            let term = MultiPoly::constant(self.dim, scaled).mul(&monomial_poly(self.dim, m));
            out = out.add(&term);
        }
        Ok(out)
    }

    /// The dense matrix (here diagonal) as floats, basis order as in `basis`.
    pub fn to_dense_f64(&self) -> Vec<Vec<f64>> {
        let n = self.basis.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = Coeff::to_f64(&self.diagonal[i]);
        }
        m
    }
}

fn monomial_poly<C: Coeff>(dim: usize, m: &Monomial) -> MultiPoly<C> {
    let mut p = MultiPoly::constant(dim, C::one());
    for (i, &e) in m.0.iter().enumerate() {
        if e > 0 {
            p = p.mul(&MultiPoly::var(dim, i).pow(e));
        }
    }
    p
}

/// Exact V_k matrix on polynomials of degree ≤ `max_degree`. Requires a
/// product group with rational multiplicities.
pub fn vk_matrix(model: &DunklModel, max_degree: usize) -> Result<VkMatrix> {
    let product = model.product_structure().ok_or_else(|| {
        Error::UnsupportedGroup("V_k matrices are realized only for product groups".into())
    })?;
    let ks = product.axis_k_exact.clone().ok_or_else(|| {
        Error::InvalidModel(
            "exact multiplicities unavailable; build the model from rational data".into(),
        )
    })?;
    let dim = model.dim();
    let mut basis = Vec::new();
    let mut diagonal = Vec::new();
    let mut exps = vec![0u16; dim];
    loop {
        let deg: usize = exps.iter().map(|&e| e as usize).sum();
        if deg <= max_degree {
            let mono = Monomial(exps.clone());
            let mut c = BigRational::from_integer(BigInt::from(1));
            for (i, &e) in mono.0.iter().enumerate() {
                c *= rank_one_moment(&ks[i], e as usize);
            }
            basis.push(mono);
            diagonal.push(c);
        }
        // Odometer over exponents bounded by max_degree per axis.
        let mut i = 0;
        loop {
            if i == dim {
                return Ok(VkMatrix {
                    basis,
                    diagonal,
                    dim,
                });
            }
            if (exps[i] as usize) < max_degree {
                exps[i] += 1;
                break;
            }
            exps[i] = 0;
            i += 1;
        }
    }
}

/// Dunkl kernel E_k(x, y) = ∫ e^{⟨y,ξ⟩} dμ_x^k(ξ).
pub fn dunkl_kernel(
    model: &DunklModel,
    x: &[f64],
    y: &[f64],
    order: usize,
) -> Result<f64> {
    let q = mu_quadrature(model, x, order)?;
    Ok(q.integrate(|xi| crate::geom::dot(y, xi).exp()))
}

/// E_k(ix, y) = ∫ e^{i⟨y,ξ⟩} dμ_x^k(ξ) as (re, im).
pub fn dunkl_kernel_imaginary(
    model: &DunklModel,
    x: &[f64],
    y: &[f64],
    order: usize,
) -> Result<(f64, f64)> {
    let q = mu_quadrature(model, x, order)?;
    let re = q.integrate(|xi| crate::geom::dot(y, xi).cos());
    let im = q.integrate(|xi| crate::geom::dot(y, xi).sin());
    Ok((re, im))
}

/// Radial translation τ_x f(y) for f = F(|·|):
/// τ_x f(y) = ∫ F(√(|x|² + |y|² + 2⟨x,ξ⟩)) dμ_y^k(ξ).
pub fn radial_translate(
    model: &DunklModel,
    radial: impl Fn(f64) -> f64,
    x: &[f64],
    y: &[f64],
    order: usize,
) -> Result<f64> {
    let q = mu_quadrature(model, y, order)?;
    let c = crate::geom::norm2(x) + crate::geom::norm2(y);
    Ok(q.integrate(|xi| {
        let arg2 = (c + 2.0 * crate::geom::dot(x, xi)).max(0.0);
        radial(arg2.sqrt())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;
    use crate::reflection::rational_of;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Brute-force rank-one μ integral: ∫ g(t) c_k (1+t)(1−t²)^{k−1} dt via
    /// the substitution t = sin θ (flattening the endpoint singularity) and a
    /// dense midpoint rule. Independent of every quadrature in the crate;
    /// converges only for integrands smooth after the substitution.
    fn mu1_brute(k: f64, g: impl Fn(f64) -> f64) -> f64 {
        let n = 400_000;
        let ck = libm::tgamma(k + 0.5)
            / (std::f64::consts::PI.sqrt() * libm::tgamma(k));
        let h = std::f64::consts::PI / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let th = -std::f64::consts::FRAC_PI_2 + (i as f64 + 0.5) * h;
            let t = th.sin();
            let dens = (1.0 + t) * th.cos().powf(2.0 * k - 1.0);
            acc += g(t) * dens;
        }
        ck * acc * h
    }

    /// Closed-form moment oracle via the binomial expansion of t^n around −1:
    /// ∫ t^n dμ^{(k)} = c_k Σ_j C(n,j)(−1)^{n−j} 2^{2k+j} B(k, k+j+1),
    /// using only the Beta function. Independent of the recurrence route.
    fn beta_moment(k: f64, n: usize) -> f64 {
        let ck = libm::tgamma(k + 0.5)
            / (std::f64::consts::PI.sqrt() * libm::tgamma(k));
        let mut acc = 0.0;
        let mut binom = 1.0f64;
        for j in 0..=n {
            let sign = if (n - j) % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom * 2.0f64.powf(2.0 * k + j as f64)
                * crate::special::beta(k, k + j as f64 + 1.0);
            binom = binom * (n - j) as f64 / (j + 1) as f64;
        }
        ck * acc
    }

    #[test]
    fn rank_one_first_moment_is_one_third_for_k_one() {
        // Independent oracle first: ∫ t dμ = 1/3 at k = 1.
        let oracle = mu1_brute(1.0, |t| t);
        assert_abs_diff_eq!(oracle, 1.0 / 3.0, epsilon = 1e-9);

        let m = DunklModel::rank_one(1.0).unwrap();
        let q = mu_quadrature(&m, &[1.0], 40).unwrap();
        assert_abs_diff_eq!(q.integrate(|xi| xi[0]), 1.0 / 3.0, epsilon = 1e-14);

        // Exact route.
        let mom = rank_one_moment(&rational_of(1.0), 1);
        assert_eq!(mom, BigRational::new(BigInt::from(1), BigInt::from(3)));
    }

    #[test]
    fn moments_match_beta_oracle_for_fractional_k() {
        // Cross-check the oracle itself against brute force where the
        // substitution is smooth enough to converge.
        for &k in &[0.8, 1.7] {
            for n in 0..4usize {
                let brute = mu1_brute(k, |t| t.powi(n as i32));
                assert_abs_diff_eq!(brute, beta_moment(k, n), epsilon = 1e-7);
            }
        }
        for &k in &[0.8, 1.7, 0.55] {
            for n in 0..6usize {
                let oracle = beta_moment(k, n);
                let m = DunklModel::rank_one(k).unwrap();
                let q = mu_quadrature(&m, &[1.0], 40).unwrap();
                let got = q.integrate(|xi| xi[0].powi(n as i32));
                assert_abs_diff_eq!(got, oracle, epsilon = 1e-12);
                let exact = Coeff::to_f64(&rank_one_moment(&rational_of(k), n));
                assert_abs_diff_eq!(got, exact, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn mu_is_a_probability_measure_confined_to_the_hull() {
        let m = DunklModel::z2_product(&[0.8, 1.3]).unwrap();
        let x = [0.7, -1.2];
        let q = mu_quadrature(&m, &x, 40).unwrap();
        let mass: f64 = q.weights.iter().sum();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-12);
        assert!(q.weights.iter().all(|&w| w > 0.0));
        for node in &q.nodes {
            assert!(node[0].abs() < x[0].abs());
            assert!(node[1].abs() < x[1].abs());
        }
    }

    #[test]
    fn mu_at_origin_is_dirac() {
        let m = DunklModel::z2_product(&[0.8, 0.8]).unwrap();
        let q = mu_quadrature(&m, &[0.0, 0.0], 40).unwrap();
        assert_eq!(q.nodes.len(), 1);
        assert_eq!(q.nodes[0], vec![0.0, 0.0]);
        assert_eq!(q.weights[0], 1.0);
    }

    #[test]
    fn zero_multiplicity_factor_is_a_point_mass() {
        let m = DunklModel::z2_product(&[0.0, 1.0]).unwrap();
        let x = [0.4, 0.9];
        let q = mu_quadrature(&m, &x, 16).unwrap();
        assert_eq!(q.nodes.len(), 16);
        assert!(q.nodes.iter().all(|n| n[0] == 0.4));
    }

    #[test]
    fn non_product_groups_are_rejected() {
        let roots = vec![vec![1.0, 1.0], vec![-1.0, -1.0]];
        let m = DunklModel::new(2, roots, vec![1.0, 1.0]).unwrap();
        match mu_quadrature(&m, &[0.5, 0.5], 10) {
            Err(Error::UnsupportedGroup(_)) => {}
            other => panic!("expected unsupported-group error, got {other:?}"),
        }
    }

    #[test]
    fn vk_matrix_applies_exactly() {
        let m = DunklModel::rank_one(1.0).unwrap();
        let vk = vk_matrix(&m, 3).unwrap();
        let p = parse_poly("x1", 1).unwrap();
        let vp = vk.apply(&p).unwrap();
        assert_eq!(vp.to_string(), "1/3*x1");
        // V_k(x³) = (1/3)(3/5) x³ = x³/5 at k = 1.
        let p3 = parse_poly("x1^3", 1).unwrap();
        assert_eq!(vk.apply(&p3).unwrap().to_string(), "1/5*x1^3");
    }

    #[test]
    fn quadrature_route_matches_exact_matrix_route() {
        let m = DunklModel::z2_product(&[0.8, 0.8]).unwrap();
        let vk = vk_matrix(&m, 4).unwrap();
        let p = parse_poly("x1^2*x2 - 2*x1*x2 + 3*x2^2 + 1/2", 2).unwrap();
        let exact = vk.apply(&p).unwrap();
        for &x in &[[0.7, -0.3], [1.5, 2.0], [0.0, 1.0]] {
            let via_quad = apply_vk(&m, &p.to_float(), &x, 40).unwrap();
            assert_abs_diff_eq!(via_quad, exact.eval(&x), epsilon = 1e-10);
        }
    }

    #[test]
    fn dunkl_kernel_special_values() {
        let m = DunklModel::rank_one(1.0).unwrap();
        // Oracle: E_k(1,1) = ∫ e^t (1+t)/2 dt = cosh(1) at k = 1.
        let oracle = mu1_brute(1.0, f64::exp);
        assert_abs_diff_eq!(oracle, 1.0f64.cosh(), epsilon = 1e-9);
        let got = dunkl_kernel(&m, &[1.0], &[1.0], 40).unwrap();
        assert_abs_diff_eq!(got, 1.5430806348152437, epsilon = 1e-13);

        assert_abs_diff_eq!(
            dunkl_kernel(&m, &[0.7], &[0.0], 40).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            dunkl_kernel(&m, &[0.0], &[2.0], 40).unwrap(),
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn imaginary_slot_matches_cos_sin_split() {
        let m = DunklModel::rank_one(1.0).unwrap();
        let (re, im) = dunkl_kernel_imaginary(&m, &[1.0], &[2.0], 60).unwrap();
        let re_oracle = mu1_brute(1.0, |t| (2.0 * t).cos());
        let im_oracle = mu1_brute(1.0, |t| (2.0 * t).sin());
        assert_abs_diff_eq!(re, re_oracle, epsilon = 1e-8);
        assert_abs_diff_eq!(im, im_oracle, epsilon = 1e-8);
        // |E_k(ix, y)| ≤ 1.
        assert!(re.hypot(im) <= 1.0 + 1e-12);
    }

    #[test]
    fn radial_translation_degenerate_slots() {
        let m = DunklModel::z2_product(&[0.8, 0.8]).unwrap();
        let f = |s: f64| (-s * s).exp();
        // τ_0 f = f.
        let y = [0.6, -0.2];
        let got = radial_translate(&m, f, &[0.0, 0.0], &y, 40).unwrap();
        assert_abs_diff_eq!(got, f(crate::geom::norm(&y)), epsilon = 1e-14);
        // At y = 0 the measure is δ_0, so τ_x f(0) = F(|x|).
        let x = [0.3, 0.8];
        let got = radial_translate(&m, f, &x, &[0.0, 0.0], 40).unwrap();
        assert_abs_diff_eq!(got, f(crate::geom::norm(&x)), epsilon = 1e-14);
    }

    #[test]
    fn refined_rule_agrees_with_plain_rule_on_smooth_integrands() {
        let m = DunklModel::rank_one(0.8).unwrap();
        let plain = mu_quadrature(&m, &[1.3], 40).unwrap();
        let refined = mu_quadrature_refined(&m, &[1.3], 40, 12).unwrap();
        let f = |xi: &[f64]| (xi[0] * 1.7).cos() + xi[0].powi(3);
        assert_abs_diff_eq!(
            plain.integrate(f),
            refined.integrate(f),
            epsilon = 1e-11
        );
        let mass: f64 = refined.weights.iter().sum();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn refined_rule_offsets_stay_consistent_and_positive() {
        let s = super::refined_factor_rule(0.8, 60, 12);
        let mass: f64 = s.w.iter().sum();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-13);
        for i in 0..s.t.len() {
            assert!(s.w[i] > 0.0);
            assert!(s.off_lo[i] > 0.0 && s.off_hi[i] > 0.0);
            assert_abs_diff_eq!(s.off_lo[i] + s.off_hi[i], 2.0, epsilon = 1e-14);
            // The stored offsets refine 1 ± t wherever t can resolve it.
            if s.off_lo[i] > 1e-12 {
                assert_abs_diff_eq!(s.off_lo[i], 1.0 + s.t[i], epsilon = 1e-13);
            }
            if s.off_hi[i] > 1e-12 {
                assert_abs_diff_eq!(s.off_hi[i], 1.0 - s.t[i], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn refined_rule_handles_endpoint_singular_integrands() {
        // Power integrands have closed-form μ-integrals through the Beta
        // function: ∫ (1±t)^p dμ^{(k)} folds into ∫ (1−t)^a (1+t)^b dt
        // = 2^{a+b+1} B(a+1, b+1).
        let k = 0.8;
        let ck = libm::tgamma(k + 0.5)
            / (std::f64::consts::PI.sqrt() * libm::tgamma(k));

        // Left-endpoint singularity: ∫ (1+t)^{−0.4} dμ.
        let oracle_l =
            ck * 2.0f64.powf(k - 1.0 + k - 0.4 + 1.0) * crate::special::beta(k, k + 0.6);
        let s = super::refined_factor_rule(k, 50, 12);
        let got_l: f64 = (0..s.t.len())
            .map(|i| s.w[i] * s.off_lo[i].powf(-0.4))
            .sum();
        assert_abs_diff_eq!(got_l, oracle_l, epsilon = 1e-9 * oracle_l);

        // Right-endpoint singularity: ∫ (1−t)^{−0.4} dμ. The innermost
        // graded sliver carries the residual error (≈ width^{k−0.4}).
        let oracle_r =
            ck * 2.0f64.powf(k - 1.0 - 0.4 + k + 1.0) * crate::special::beta(k - 0.4, k + 1.0);
        let s = super::refined_factor_rule(k, 60, 12);
        let got_r: f64 = (0..s.t.len())
            .map(|i| s.w[i] * s.off_hi[i].powf(-0.4))
            .sum();
        assert_abs_diff_eq!(got_r, oracle_r, epsilon = 1e-6 * oracle_r);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn kernel_is_symmetric_and_positive(
            x in -1.5f64..1.5, y in -1.5f64..1.5,
        ) {
            let m = DunklModel::rank_one(0.8).unwrap();
            let exy = dunkl_kernel(&m, &[x], &[y], 48).unwrap();
            let eyx = dunkl_kernel(&m, &[y], &[x], 48).unwrap();
            prop_assert!(exy > 0.0);
            prop_assert!((exy - eyx).abs() <= 1e-10 * (1.0 + exy.abs()));
        }

        #[test]
        fn vk_diagonal_lies_in_unit_interval(e0 in 0usize..6, e1 in 0usize..6) {
            let m = DunklModel::z2_product(&[0.8, 1.4]).unwrap();
            let vk = vk_matrix(&m, 10).unwrap();
            let mono = Monomial(vec![e0 as u16, e1 as u16]);
            let idx = vk.basis.iter().position(|b| b == &mono).unwrap();
            let c = Coeff::to_f64(&vk.diagonal[idx]);
            prop_assert!(c > 0.0 && c <= 1.0);
        }
    }
}
