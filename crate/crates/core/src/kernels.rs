//! Heat and Green kernels of the Dunkl Laplacian.
//!
//! Both kernels are μ-integrals of radial profiles of the squared
//! displacement v² = |x|² + |y|² − 2⟨x,ξ⟩, ξ ∼ μ_y^k:
//!
//! ```text
//! p_t(x, y) = ∫ Q_t(v) dμ_y(ξ),   Q_t(s) = 2 e^{−s²/4t} / (d_k (4t)^{λ+1} Γ(λ+1)),
//! G(x, y)   = (1 / (2 d_k λ)) ∫ v^{−2λ} dμ_y(ξ),
//! ```
//!
//! with d_k = ∫_{S^{d−1}} w_k dσ and λ = γ/2 + d/2 − 1. For product groups
//! v² decomposes per axis against the corner of the node box nearest to the
//! singularity:
//!
//! ```text
//! v² = v²_min + Σ_i |B_i| · o_i,   B_i = 2 x_i y_i,
//! v²_min = Σ_i (|x_i| − |y_i|)²  (active axes; (x_i − y_i)² on point axes),
//! ```
//!
//! where o_i is the stably stored per-node distance to that corner. This
//! form has no cancellation, so near-singular Green values and small-time
//! heat values stay accurate. It also makes the heat integrand separable:
//! e^{−v²/4t} factors into per-axis one-dimensional sums, which is what
//! makes the volume integrals (normalization, semigroup composition,
//! potential operators) affordable.
//!
//! The Green integral diverges exactly when v²_min = 0 and λ ≥ Σ(k_i + [the
//! corner sits at t_i = −1]) over active axes; those evaluations report +∞.

use crate::error::{Error, Result};
use crate::intertwine::{factor_samples, mu_quadrature, FactorSamples, RuleSpec};
use crate::quadrature::{composite_gl, graded_breaks, graded_toward_start, Rule1d};
use crate::reflection::DunklModel;
use crate::special::{gamma, lower_gamma_reg};
use std::f64::consts::PI;

/// Relative separation below which Green evaluation switches from a single
/// Gauss-Jacobi rule to graded composite rules.
const GREEN_FAST_SEP: f64 = 0.05;

/// Precomputed surface constant and quadrature policy around one model.
#[derive(Debug, Clone)]
pub struct KernelContext {
    model: DunklModel,
    dk: f64,
}

/// Per-axis displacement geometry of one (x, y) pair.
#[derive(Debug, Clone, Copy)]
enum AxisTerm {
    /// Factor measure is a point mass; contribution absorbed into v²_min.
    Inactive,
    /// b = |2 x_i y_i|; `use_hi` selects the offset array pointing at the
    /// corner t_i = +1 (else −1); k is the axis multiplicity.
    Active { b: f64, use_hi: bool, k: f64 },
}

#[derive(Debug, Clone)]
struct PairGeometry {
    v2min: f64,
    axes: Vec<AxisTerm>,
}

impl KernelContext {
    pub fn new(model: &DunklModel) -> Result<Self> {
        let dk = surface_constant(model)?;
        Ok(KernelContext {
            model: model.clone(),
            dk,
        })
    }

    pub fn model(&self) -> &DunklModel {
        &self.model
    }

    /// d_k = ∫_{S^{d−1}} w_k dσ.
    pub fn dk(&self) -> f64 {
        self.dk
    }

    pub fn lambda(&self) -> f64 {
        self.model.lambda()
    }

    /// Radial heat profile at squared argument: Q_t(√s²).
    fn q_profile(&self, t: f64, s2: f64) -> f64 {
        let lam = self.model.lambda();
        2.0 * (-s2 / (4.0 * t)).exp() / (self.dk * (4.0 * t).powf(lam + 1.0) * gamma(lam + 1.0))
    }

    /// Pointwise Gaussian envelope: p_t(x,y) ≤ Q_t(| |x| − |y| |).
    pub fn heat_gaussian_bound(&self, t: f64, x: &[f64], y: &[f64]) -> f64 {
        let s = crate::geom::norm(x) - crate::geom::norm(y);
        self.q_profile(t, s * s)
    }

    fn pair_geometry(&self, x: &[f64], y: &[f64]) -> Result<PairGeometry> {
        let product = self.model.product_structure().ok_or_else(|| {
            Error::UnsupportedGroup(
                "kernel evaluation is realized only for products of rank-one factors".into(),
            )
        })?;
        if x.len() != self.model.dim() || y.len() != self.model.dim() {
            return Err(Error::InvalidArgument(format!(
                "points must have length {}",
                self.model.dim()
            )));
        }
        let mut v2min = 0.0;
        let mut axes = Vec::with_capacity(x.len());
        for i in 0..x.len() {
            let k = product.axis_k[i];
            if k == 0.0 || y[i] == 0.0 {
                let d = x[i] - y[i];
                v2min += d * d;
                axes.push(AxisTerm::Inactive);
            } else {
                let d = x[i].abs() - y[i].abs();
                v2min += d * d;
                let b = 2.0 * x[i] * y[i];
                axes.push(AxisTerm::Active {
                    b: b.abs(),
                    use_hi: b >= 0.0,
                    k,
                });
            }
        }
        Ok(PairGeometry { v2min, axes })
    }

    /// One axis factor S = Σ_j w_j e^{−z·o_j} of the separable heat
    /// integrand, with the order raised until two successive Gauss-Jacobi
    /// evaluations agree; falls back to a graded rule for stiff z.
    fn axis_exp_factor(&self, term: AxisTerm, z4t: f64) -> Result<f64> {
        let AxisTerm::Active { b, use_hi, k } = term else {
            return Ok(1.0);
        };
        let z = b * z4t;
        if z == 0.0 {
            return Ok(1.0);
        }
        let sum_for = |s: &FactorSamples| -> f64 {
            let off = if use_hi { &s.off_hi } else { &s.off_lo };
            s.w.iter()
                .zip(off)
                .map(|(&w, &o)| w * (-z * o).exp())
                .sum()
        };
        let mut prev = f64::NAN;
        for order in [40usize, 80, 160, 320, 640] {
            let cur = sum_for(&factor_samples(k, RuleSpec::Plain { order }));
            if (cur - prev).abs() <= 1e-12 * cur.abs().max(1e-300) {
                return Ok(cur);
            }
            prev = cur;
        }
        // Boundary-layer regime: resolve e^{−z·o} down to o ≈ 1/z.
        let levels = ((z.max(2.0)).log2().ceil() as usize + 12).clamp(24, 90);
        let a = sum_for(&factor_samples(k, RuleSpec::Refined { levels, order: 12 }));
        let b2 = sum_for(&factor_samples(
            k,
            RuleSpec::Refined {
                levels: levels + 10,
                order: 12,
            },
        ));
        if (a - b2).abs() <= 1e-10 * b2.abs().max(1e-300) {
            Ok(b2)
        } else {
            Err(Error::NoConvergence(format!(
                "heat axis factor stalled at z = {z:.3e}"
            )))
        }
    }

    /// Heat kernel p_t(x, y).
    pub fn heat(&self, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument("time must be positive".into()));
        }
        let geo = self.pair_geometry(x, y)?;
        let envelope = self.q_profile(t, geo.v2min);
        if envelope < 1e-305 {
            return Ok(0.0);
        }
        let z4t = 1.0 / (4.0 * t);
        let mut p = envelope;
        for &term in &geo.axes {
            p *= self.axis_exp_factor(term, z4t)?;
        }
        Ok(p)
    }

    /// Heat kernel at one fixed per-axis order (no adaptivity); callers must
    /// have validated the order for the stiffest pair they will evaluate.
    pub(crate) fn heat_fixed_order(&self, t: f64, x: &[f64], y: &[f64], order: usize) -> f64 {
        let geo = match self.pair_geometry(x, y) {
            Ok(g) => g,
            Err(_) => return f64::NAN,
        };
        let envelope = self.q_profile(t, geo.v2min);
        if envelope < 1e-305 {
            return 0.0;
        }
        let z4t = 1.0 / (4.0 * t);
        let mut p = envelope;
        for &term in &geo.axes {
            if let AxisTerm::Active { b, use_hi, k } = term {
                let z = b * z4t;
                if z == 0.0 {
                    continue;
                }
                let s = factor_samples(k, RuleSpec::Plain { order });
                let off = if use_hi { &s.off_hi } else { &s.off_lo };
                p *= s
                    .w
                    .iter()
                    .zip(off)
                    .map(|(&w, &o)| w * (-z * o).exp())
                    .sum::<f64>();
            }
        }
        p
    }

    /// Smallest plain order whose axis factors are converged for every pair
    /// (x, y) with |y_i| ≤ ymax_i, at time t.
    fn plain_order_for_box(&self, t: f64, x: &[f64], ymax: &[f64]) -> Result<usize> {
        let product = self.model.product_structure().ok_or_else(|| {
            Error::UnsupportedGroup("kernel evaluation requires a product group".into())
        })?;
        let mut worst = 40usize;
        for i in 0..x.len() {
            let k = product.axis_k[i];
            if k == 0.0 {
                continue;
            }
            let z = (2.0 * x[i].abs() * ymax[i].abs()) / (4.0 * t);
            let mut prev = f64::NAN;
            let mut found = None;
            for order in [40usize, 80, 160, 320, 640] {
                let s = factor_samples(k, RuleSpec::Plain { order });
                let cur: f64 = s
                    .w
                    .iter()
                    .zip(&s.off_hi)
                    .map(|(&w, &o)| w * (-z * o).exp())
                    .sum();
                if (cur - prev).abs() <= 1e-12 * cur.abs().max(1e-300) {
                    found = Some(order);
                    break;
                }
                prev = cur;
            }
            worst = worst.max(found.ok_or_else(|| {
                Error::NoConvergence(format!(
                    "no plain rule converges for the volume integral (z = {z:.3e}); \
                     the time is too small for the requested box"
                ))
            })?);
        }
        Ok(worst)
    }

    /// P_t f(x) = ∫ p_t(x, y) f(y) w_k(y) dy, truncated where the Gaussian
    /// envelope falls below 1e−14 of its peak.
    pub fn semigroup_apply(
        &self,
        t: f64,
        f: &dyn Fn(&[f64]) -> f64,
        x: &[f64],
    ) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument("time must be positive".into()));
        }
        let d = self.model.dim();
        if x.len() != d {
            return Err(Error::InvalidArgument(format!(
                "point must have length {d}"
            )));
        }
        let reach = (4.0 * t).sqrt() * (6.0 + (self.model.gamma() + d as f64).sqrt());
        let r = crate::geom::norm(x) + reach;
        let ymax = vec![r; d];
        let order = self.plain_order_for_box(t, x, &ymax)?;

        let axes: Vec<Rule1d> = (0..d)
            .map(|_| {
                let hmax = ((4.0 * t).sqrt() * 0.5).min(r / 6.0);
                let breaks = graded_breaks(-r, r, &[0.0], 25, hmax);
                composite_gl(&breaks, 10)
            })
            .collect();
        let mut acc = 0.0;
        crate::quadrature::tensor_for_each(&axes, |y, w| {
            let wk = self.model.weight(y);
            if wk > 0.0 {
                acc += w * wk * self.heat_fixed_order(t, x, y, order) * f(y);
            }
        });
        Ok(acc)
    }

    fn green_tensor(&self, geo: &PairGeometry, spec: RuleSpec) -> Result<f64> {
        let lam = self.model.lambda();
        // Gather per-axis weight and offset arrays; inactive axes drop out.
        let mut ws: Vec<&[f64]> = Vec::new();
        let mut offs: Vec<&[f64]> = Vec::new();
        let mut bs: Vec<f64> = Vec::new();
        let mut rules = Vec::new();
        for &term in &geo.axes {
            if let AxisTerm::Active { k, .. } = term {
                rules.push(factor_samples(k, spec));
            }
        }
        let mut ri = 0;
        for &term in &geo.axes {
            if let AxisTerm::Active { b, use_hi, .. } = term {
                let s = &rules[ri];
                ri += 1;
                ws.push(&s.w);
                offs.push(if use_hi { &s.off_hi } else { &s.off_lo });
                bs.push(b);
            }
        }
        let n = ws.len();
        if n == 0 {
            return Ok(geo.v2min.powf(-lam));
        }
        let mut idx = vec![0usize; n];
        let mut acc = 0.0;
        'outer: loop {
            let mut w = 1.0;
            let mut v2 = geo.v2min;
            for i in 0..n {
                w *= ws[i][idx[i]];
                v2 += bs[i] * offs[i][idx[i]];
            }
            acc += w * v2.powf(-lam);
            for i in (0..n).rev() {
                idx[i] += 1;
                if idx[i] < ws[i].len() {
                    continue 'outer;
                }
                idx[i] = 0;
            }
            break;
        }
        Ok(acc)
    }

    /// Green function G(x, y); +∞ when the defining integral diverges
    /// (y in the orbit of x with enough local weight).
    pub fn green(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let lam = self.model.lambda();
        if lam <= 0.0 {
            return Err(Error::StandingAssumption(
                "the Green kernel needs λ = γ/2 + d/2 − 1 > 0".into(),
            ));
        }
        let geo = self.pair_geometry(x, y)?;
        let pre = 1.0 / (2.0 * self.dk * lam);

        if geo.v2min == 0.0 {
            // Local convergence exponent at the touching corner.
            let threshold: f64 = geo
                .axes
                .iter()
                .map(|&a| match a {
                    AxisTerm::Active { use_hi, k, .. } => k + if use_hi { 0.0 } else { 1.0 },
                    AxisTerm::Inactive => 0.0,
                })
                .sum();
            if lam >= threshold - 1e-12 {
                return Ok(f64::INFINITY);
            }
            let a = self.green_tensor(&geo, RuleSpec::Refined { levels: 52, order: 12 })?;
            let b = self.green_tensor(&geo, RuleSpec::Refined { levels: 60, order: 12 })?;
            if (a - b).abs() > 1e-6 * b.abs().max(1e-300) {
                return Err(Error::NoConvergence(
                    "graded Green rule did not settle at a touching pair".into(),
                ));
            }
            return Ok(pre * b);
        }

        let scale2 = crate::geom::norm2(x).max(crate::geom::norm2(y)).max(1e-300);
        if geo.v2min >= GREEN_FAST_SEP * GREEN_FAST_SEP * scale2 {
            let mut prev = f64::NAN;
            for order in [40usize, 80, 160, 320, 640] {
                let cur = self.green_tensor(&geo, RuleSpec::Plain { order })?;
                if (cur - prev).abs() <= 1e-9 * cur.abs().max(1e-300) {
                    return Ok(pre * cur);
                }
                prev = cur;
            }
            // Fall through to the graded route on stall.
        }
        let sum_b: f64 = geo
            .axes
            .iter()
            .map(|&a| match a {
                AxisTerm::Active { b, .. } => b,
                AxisTerm::Inactive => 0.0,
            })
            .sum();
        let levels = if sum_b > 0.0 {
            (((sum_b / geo.v2min).max(2.0)).log2().ceil() as usize + 16).clamp(24, 60)
        } else {
            24
        };
        let a = self.green_tensor(&geo, RuleSpec::Refined { levels: levels.saturating_sub(8).max(16), order: 12 })?;
        let b = self.green_tensor(&geo, RuleSpec::Refined { levels, order: 12 })?;
        if (a - b).abs() > 1e-7 * b.abs().max(1e-300) {
            return Err(Error::NoConvergence(
                "graded Green rule did not settle".into(),
            ));
        }
        Ok(pre * b)
    }

    /// Potential operator G f(x) = ∫_{[−h,h]^d} G(x, y) f(y) w_k(y) dy with
    /// panels graded toward the weight kinks and the orbit of x.
    pub fn green_apply(
        &self,
        f: &dyn Fn(&[f64]) -> f64,
        x: &[f64],
        half: &[f64],
        levels: usize,
        order: usize,
    ) -> Result<f64> {
        let d = self.model.dim();
        if x.len() != d || half.len() != d {
            return Err(Error::InvalidArgument(format!(
                "point and box must have length {d}"
            )));
        }
        let axes: Vec<Rule1d> = (0..d)
            .map(|i| {
                let cuts = [0.0, x[i].abs(), -x[i].abs()];
                let breaks = graded_breaks(-half[i], half[i], &cuts, levels, half[i] / 4.0);
                composite_gl(&breaks, order)
            })
            .collect();
        let mut acc = 0.0;
        let mut err = None;
        crate::quadrature::tensor_for_each(&axes, |y, w| {
            if err.is_some() {
                return;
            }
            let wk = self.model.weight(y);
            if wk > 0.0 {
                match self.green(x, y) {
                    Ok(g) if g.is_finite() => acc += w * wk * g * f(y),
                    Ok(_) => {}
                    Err(e) => err = Some(e),
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(acc),
        }
    }

    /// Green value recomputed through the heat semigroup:
    /// ∫_0^T p_t(x,y) dt numerically, plus the analytic tail
    /// (1/(2 d_k λ)) ∫ v^{−2λ} P(λ, v²/4T) dμ_y (regular as v → 0).
    pub fn green_from_heat(&self, x: &[f64], y: &[f64], t_split: f64) -> Result<f64> {
        let lam = self.model.lambda();
        if lam <= 0.0 {
            return Err(Error::StandingAssumption(
                "the Green kernel needs λ = γ/2 + d/2 − 1 > 0".into(),
            ));
        }
        if !(t_split > 0.0) {
            return Err(Error::InvalidArgument("split time must be positive".into()));
        }
        let breaks = graded_toward_start(0.0, t_split, 40);
        let rule = composite_gl(&breaks, 10);
        let mut head = 0.0;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            head += w * self.heat(t, x, y)?;
        }
        let q = mu_quadrature(&self.model, y, 80)?;
        let c = crate::geom::norm2(x) + crate::geom::norm2(y);
        let tail = q.integrate(|xi| {
            let v2 = (c - 2.0 * crate::geom::dot(x, xi)).max(0.0);
            if v2 == 0.0 {
                // limit v^{−2λ} P(λ, v²/4T) → (4T)^{−λ}/Γ(λ+1)
                (4.0 * t_split).powf(-lam) / gamma(lam + 1.0)
            } else {
                v2.powf(-lam) * lower_gamma_reg(lam, v2 / (4.0 * t_split))
            }
        }) / (2.0 * self.dk * lam);
        Ok(head + tail)
    }
}

/// d_k = ∫_{S^{d−1}} w_k dσ for d ≤ 3 (non-normalized surface measure).
pub fn surface_constant(model: &DunklModel) -> Result<f64> {
    match model.dim() {
        1 => Ok(model.weight(&[1.0]) + model.weight(&[-1.0])),
        2 => {
            // Split the circle at the root-normal angles, where w_k loses
            // smoothness, and grade toward them.
            let mut cuts: Vec<f64> = Vec::new();
            for alpha in model.roots() {
                let phi = alpha[1].atan2(alpha[0]);
                for s in [0.5 * PI, 1.5 * PI] {
                    cuts.push((phi + s).rem_euclid(2.0 * PI));
                }
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            let start = cuts.first().copied().unwrap_or(0.0);
            let interior: Vec<f64> = cuts.iter().skip(1).copied().collect();
            let f = |th: f64| model.weight(&[th.cos(), th.sin()]);
            let mut prev = f64::NAN;
            for (levels, order) in [(20usize, 8usize), (30, 12), (45, 16), (60, 20)] {
                let breaks =
                    graded_breaks(start, start + 2.0 * PI, &interior, levels, 0.35);
                let rule = composite_gl(&breaks, order);
                let cur: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&th, &w)| w * f(th))
                    .sum();
                if (cur - prev).abs() <= 1e-9 * cur.abs() {
                    return Ok(cur);
                }
                prev = cur;
            }
            Err(Error::NoConvergence(
                "circle integral of the weight did not settle".into(),
            ))
        }
        3 => {
            // Spherical coordinates; for product models the weight kinks lie
            // on coordinate lines of (θ, φ).
            let (tcuts, pcuts): (Vec<f64>, Vec<f64>) = if model.product_structure().is_some()
            {
                (
                    vec![0.5 * PI, PI, 1.5 * PI],
                    vec![0.5 * PI],
                )
            } else {
                (Vec::new(), Vec::new())
            };
            let f = |th: f64, ph: f64| {
                let u = [ph.sin() * th.cos(), ph.sin() * th.sin(), ph.cos()];
                model.weight(&u) * ph.sin()
            };
            let mut prev = f64::NAN;
            for (levels, order) in [(14usize, 6usize), (20, 8), (28, 10), (36, 12)] {
                let tb = graded_breaks(0.0, 2.0 * PI, &tcuts, levels, 0.35);
                let pb = graded_breaks(0.0, PI, &pcuts, levels, 0.35);
                let tr = composite_gl(&tb, order);
                let pr = composite_gl(&pb, order);
                let mut cur = 0.0;
                for (&th, &wt) in tr.nodes.iter().zip(&tr.weights) {
                    for (&ph, &wp) in pr.nodes.iter().zip(&pr.weights) {
                        cur += wt * wp * f(th, ph);
                    }
                }
                if (cur - prev).abs() <= 1e-8 * cur.abs() {
                    return Ok(cur);
                }
                prev = cur;
            }
            Err(Error::NoConvergence(
                "sphere integral of the weight did not settle".into(),
            ))
        }
        d => Err(Error::UnsupportedDomain(format!(
            "surface integration is implemented for dimensions 1..=3, got {d}"
        ))),
    }
}
