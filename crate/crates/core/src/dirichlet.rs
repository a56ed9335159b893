//! Two independent Dirichlet solvers on group-invariant domains.
//!
//! The deterministic route discretizes Δ_k on a sign-symmetric lattice: the
//! plain Laplacian and the gradient drift become central differences, while
//! the reflection difference couples a node to the *exact* grid node σ_α x,
//! so no part of the stencil ever interpolates. The stochastic route runs the
//! jump diffusion the operator describes — Brownian motion with generator Δ
//! (increment variance 2δ per coordinate), the singular drift
//! Σ k(α) α / ⟨α,x⟩, and jumps x → σ_α x at rate k(α)|α|²/(2⟨α,x⟩²) — and
//! reads boundary behavior off the exit cloud. Harmonic-measure estimates,
//! support audits, and the Green symmetry check are all built on that cloud.
//!
//! Near a reflection hyperplane the drift and rates diverge; both are tamed
//! by flooring |⟨α,x⟩| at `eps`, and the step shrinks so no substep carries
//! more than `rho_max` expected jump intensity. Diffusion exits are projected
//! onto ∂V; jump landings are kept as they are, since mass reflected into the
//! complement is genuine harmonic-measure support, not discretization error.
//! Paths draw from per-path ChaCha streams, so results for a fixed
//! (seed, paths, step, eps) do not depend on scheduling.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::geom::dot;
use crate::kernels::KernelContext;
use crate::reflection::{reflect, DunklModel};

/// Sign-symmetric finite-difference discretization of Δ_k.
///
/// Nodes are the integer lattice scaled by `h`, so every coordinate sign
/// flip maps nodes to nodes exactly and the reflection coupling lands on a
/// grid node. One operator row is assembled per interior node; stencil
/// neighbors outside the domain are clamped to the boundary value at their
/// projection (first order, which the boundary-data modulus dominates).
pub struct GridSystem {
    h: f64,
    dim: usize,
    /// Interior lattice indices in lexicographic scan order.
    nodes: Vec<Vec<i64>>,
    matrix: DMatrix<f64>,
    /// (row, coefficient, exterior lattice index, clamp point on ∂V).
    clamps: Vec<(usize, f64, Vec<i64>, Vec<f64>)>,
}

impl GridSystem {
    /// Assembles the interior stencil rows for `model` on `v`.
    ///
    /// On-axis nodes (⟨α,x⟩ = 0) use the hyperplane limit of the root term,
    /// k(α)·αᵀ(∇²u)α/|α|², a second difference along the root direction.
    pub fn assemble(model: &DunklModel, v: &Domain, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument("grid spacing must be positive".into()));
        }
        let d = model.dim();
        if v.dim != d {
            return Err(Error::InvalidArgument(format!(
                "domain dimension {} does not match model dimension {d}",
                v.dim
            )));
        }
        if !v.is_w_invariant(model) {
            return Err(Error::InvalidArgument(
                "the finite-difference solver needs a group-invariant domain".into(),
            ));
        }
        let axis_k = model
            .product_structure()
            .ok_or_else(|| {
                Error::UnsupportedGroup(
                    "the grid is reflection-exact only for products of rank-one \
                     factors (all roots on coordinate axes)"
                        .into(),
                )
            })?
            .axis_k
            .clone();

        // Enumerate interior lattice nodes. Positions are i·h with integer i,
        // so negation of any coordinate is exact and membership classification
        // agrees across each group orbit.
        let m = (v.bounding_radius() / h).ceil() as i64 + 1;
        let mut nodes = Vec::new();
        let mut lookup = HashMap::new();
        let mut idx = vec![-m; d];
        'scan: loop {
            let pos: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
            if v.contains(&pos) {
                lookup.insert(idx.clone(), nodes.len());
                nodes.push(idx.clone());
            }
            for j in (0..d).rev() {
                idx[j] += 1;
                if idx[j] <= m {
                    continue 'scan;
                }
                idx[j] = -m;
            }
            break;
        }
        if nodes.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "spacing {h} leaves no interior nodes"
            )));
        }

        let n = nodes.len();
        let h2 = h * h;
        let mut matrix = DMatrix::<f64>::zeros(n, n);
        let mut clamps = Vec::new();
        for (row, node) in nodes.iter().enumerate() {
            let pos: Vec<f64> = node.iter().map(|&i| i as f64 * h).collect();
            let mut diag = 0.0;
            let mut add = |target: Vec<i64>, coeff: f64, clamps: &mut Vec<_>| {
                if let Some(&col) = lookup.get(&target) {
                    matrix[(row, col)] += coeff;
                } else {
                    let outside: Vec<f64> =
                        target.iter().map(|&i| i as f64 * h).collect();
                    let clamp = v.project_to_boundary(&outside);
                    clamps.push((row, coeff, target, clamp));
                }
            };
            for a in 0..d {
                let mut up = node.clone();
                up[a] += 1;
                let mut dn = node.clone();
                dn[a] -= 1;
                let k = axis_k[a];
                // Plain second difference, plus the limit stencil 2k·∂²_a on
                // the hyperplane x_a = 0 (the pair ±α counts twice).
                let second = if node[a] == 0 && k > 0.0 {
                    (1.0 + 2.0 * k) / h2
                } else {
                    1.0 / h2
                };
                add(up.clone(), second, &mut clamps);
                add(dn.clone(), second, &mut clamps);
                diag -= 2.0 * second;
                if node[a] != 0 && k > 0.0 {
                    let xa = pos[a];
                    // Drift k⟨∇u,α⟩/⟨α,x⟩ summed over ±α: 2k·∂_a u / x_a.
                    let c = k / (h * xa);
                    add(up, c, &mut clamps);
                    add(dn, -c, &mut clamps);
                    // Difference part −k(u − u∘σ_a)/x_a², exact on the grid.
                    let mut mirror = node.clone();
                    mirror[a] = -mirror[a];
                    let r = k / (xa * xa);
                    add(mirror, r, &mut clamps);
                    diag -= r;
                }
            }
            matrix[(row, row)] = diag;
        }

        Ok(GridSystem {
            h,
            dim: d,
            nodes,
            matrix,
            clamps,
        })
    }

    /// Number of interior nodes (= number of operator rows).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Solves Δ_k u = 0 with `data` clamped on the boundary. Fails when the
    /// linear system is singular or the solve leaves a residual ≥ 1e−10.
    pub fn solve(&self, data: &dyn Fn(&[f64]) -> f64) -> Result<GridSolution> {
        let n = self.nodes.len();
        let mut rhs = DVector::<f64>::zeros(n);
        let mut boundary_min = f64::INFINITY;
        let mut boundary_max = f64::NEG_INFINITY;
        let mut clamp_values: HashMap<Vec<i64>, f64> = HashMap::new();
        for (row, coeff, target, clamp) in &self.clamps {
            let g = *clamp_values
                .entry(target.clone())
                .or_insert_with(|| data(clamp));
            rhs[*row] -= coeff * g;
            boundary_min = boundary_min.min(g);
            boundary_max = boundary_max.max(g);
        }

        let lu = self.matrix.clone().lu();
        let u = lu.solve(&rhs).ok_or_else(|| self.singular_report())?;

        let residual_vec = &self.matrix * &u - &rhs;
        let scale = self
            .matrix
            .row_iter()
            .map(|r| r.iter().map(|c| c.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max)
            * u.amax()
            + rhs.amax();
        let residual = residual_vec.amax() / scale.max(f64::MIN_POSITIVE);
        if !(residual < 1e-10) {
            return Err(Error::NoConvergence(format!(
                "finite-difference solve left relative residual {residual:.2e}"
            )));
        }

        let mut slack = 0.0_f64;
        for &ui in u.iter() {
            slack = slack.max(boundary_min - ui).max(ui - boundary_max);
        }

        let mut values = clamp_values;
        for (node, &ui) in self.nodes.iter().zip(u.iter()) {
            values.insert(node.clone(), ui);
        }
        Ok(GridSolution {
            h: self.h,
            dim: self.dim,
            nodes: self.nodes.clone(),
            values,
            residual,
            boundary_range: (boundary_min, boundary_max),
            max_principle_slack: slack,
        })
    }

    /// Builds the singular-system error, naming the least diagonally
    /// dominant rows as the likely offenders.
    fn singular_report(&self) -> Error {
        let mut ranked: Vec<(f64, usize)> = self
            .matrix
            .row_iter()
            .enumerate()
            .map(|(i, row)| {
                let off: f64 = row
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, c)| c.abs())
                    .sum();
                (self.matrix[(i, i)].abs() / off.max(f64::MIN_POSITIVE), i)
            })
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
        let offenders: Vec<String> = ranked
            .iter()
            .take(8)
            .map(|&(_, i)| {
                let pos: Vec<f64> =
                    self.nodes[i].iter().map(|&v| v as f64 * self.h).collect();
                format!("{pos:?}")
            })
            .collect();
        Error::Config(format!(
            "singular finite-difference system; least dominant rows at {}",
            offenders.join(", ")
        ))
    }
}

/// Solved grid values plus enough structure to evaluate anywhere.
#[derive(Debug, Clone)]
pub struct GridSolution {
    h: f64,
    dim: usize,
    nodes: Vec<Vec<i64>>,
    /// Interior values and the boundary clamp values keyed by lattice index.
    values: HashMap<Vec<i64>, f64>,
    residual: f64,
    boundary_range: (f64, f64),
    max_principle_slack: f64,
}

impl GridSolution {
    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Relative residual of the solved linear system.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// (min, max) of the boundary values the solve actually clamped to.
    pub fn boundary_range(&self) -> (f64, f64) {
        self.boundary_range
    }

    /// How far any interior value strays outside the boundary range; 0 when
    /// the discrete maximum principle holds.
    pub fn max_principle_slack(&self) -> f64 {
        self.max_principle_slack
    }

    /// Interior nodes in assembly order as (position, value) pairs.
    pub fn nodes(&self) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        self.nodes.iter().map(move |i| {
            let pos: Vec<f64> = i.iter().map(|&v| v as f64 * self.h).collect();
            let val = self.values[i];
            (pos, val)
        })
    }

    /// Multilinear interpolation over the cell containing `y`, renormalized
    /// over the corners that carry values (all of them, in the interior).
    /// NaN on cells with no known corner.
    pub fn eval(&self, y: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), self.dim);
        let mut base = vec![0i64; self.dim];
        let mut frac = vec![0.0; self.dim];
        for j in 0..self.dim {
            let t = y[j] / self.h;
            let f = t.floor();
            base[j] = f as i64;
            frac[j] = t - f;
        }
        let mut acc = 0.0;
        let mut wsum = 0.0;
        let mut corner = vec![0i64; self.dim];
        for bits in 0..(1usize << self.dim) {
            let mut w = 1.0;
            for j in 0..self.dim {
                if bits >> j & 1 == 1 {
                    corner[j] = base[j] + 1;
                    w *= frac[j];
                } else {
                    corner[j] = base[j];
                    w *= 1.0 - frac[j];
                }
            }
            if w == 0.0 {
                continue;
            }
            if let Some(&v) = self.values.get(&corner) {
                acc += w * v;
                wsum += w;
            }
        }
        if wsum > 0.0 {
            acc / wsum
        } else {
            f64::NAN
        }
    }
}

/// Assembles and solves the Dirichlet problem for `data` on ∂V.
pub fn solve_fd(
    model: &DunklModel,
    v: &Domain,
    data: &dyn Fn(&[f64]) -> f64,
    h: f64,
) -> Result<GridSolution> {
    GridSystem::assemble(model, v, h)?.solve(data)
}

/// Monte Carlo run configuration. `new` fills the documented defaults:
/// taming floor 1e−4, per-substep jump intensity cap 0.1, step budget 10⁷,
/// boundary snap tolerance 1e−6.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub paths: u64,
    pub step: f64,
    pub eps: f64,
    pub seed: u64,
    pub rho_max: f64,
    pub step_budget: u64,
    pub snap_tol: f64,
}

impl McConfig {
    pub fn new(paths: u64, step: f64, seed: u64) -> Self {
        McConfig {
            paths,
            step,
            eps: 1e-4,
            seed,
            rho_max: 0.1,
            step_budget: 10_000_000,
            snap_tol: 1e-6,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::InvalidArgument("need at least one path".into()));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidArgument("step must be positive".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidArgument("taming floor must be positive".into()));
        }
        if !(self.rho_max > 0.0 && self.rho_max < 1.0) {
            return Err(Error::InvalidArgument(
                "jump intensity cap must lie in (0, 1)".into(),
            ));
        }
        if !(self.snap_tol > 0.0) {
            return Err(Error::InvalidArgument("snap tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// One simulated path's exit data. The exit point never lies in the open
/// domain: diffusion exits sit on ∂V, jump exits in the reflected complement.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitRecord {
    pub path_id: u64,
    pub exit_point: Vec<f64>,
    pub exit_time: f64,
    pub jumps: u64,
}

/// Sample mean with a normal-approximation standard error.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub paths: u64,
}

impl McEstimate {
    /// Welford accumulation in iteration order, so fixed inputs give
    /// bit-fixed output.
    pub fn from_samples<I: IntoIterator<Item = f64>>(samples: I) -> Self {
        let mut n = 0u64;
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for v in samples {
            n += 1;
            let d = v - mean;
            mean += d / n as f64;
            m2 += d * (v - mean);
        }
        let std_error = if n > 1 {
            (m2 / ((n - 1) as f64 * n as f64)).sqrt()
        } else {
            0.0
        };
        McEstimate {
            mean,
            std_error,
            paths: n,
        }
    }

    /// Symmetric interval mean ± `z`·standard error.
    pub fn ci(&self, z: f64) -> (f64, f64) {
        (
            self.mean - z * self.std_error,
            self.mean + z * self.std_error,
        )
    }
}

/// One representative per root pair {α, −α} with k(α) > 0; the pair's drift
/// and jump rate are both even in α, so each contributes twice its root.
struct PairTerm {
    alpha: Vec<f64>,
    k: f64,
    /// k·|α|², the pair's jump-rate numerator over ⟨α,x⟩².
    rate_num: f64,
}

fn root_pairs(model: &DunklModel) -> Vec<PairTerm> {
    let mut pairs: Vec<PairTerm> = Vec::new();
    for (alpha, &k) in model.roots().iter().zip(model.multiplicities()) {
        if k <= 0.0 {
            continue;
        }
        let lead = alpha.iter().find(|c| c.abs() > 1e-12);
        if lead.is_none_or(|&c| c < 0.0) {
            continue;
        }
        pairs.push(PairTerm {
            alpha: alpha.clone(),
            k,
            rate_num: k * crate::geom::norm2(alpha),
        });
    }
    pairs
}

/// Stream for path `path_id`: one ChaCha8 keyed by the run seed, split into
/// its 2⁶⁴ independent streams by path index.
fn path_rng(seed: u64, path_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_id);
    rng
}

/// Shared tamed Euler stepper. Scratch buffers live here so the hot loop
/// never allocates.
struct Stepper<'a> {
    pairs: &'a [PairTerm],
    eps: f64,
    rho_max: f64,
    step: f64,
    drift: Vec<f64>,
    rates: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(pairs: &'a [PairTerm], cfg: &McConfig, dim: usize) -> Self {
        Stepper {
            pairs,
            eps: cfg.eps,
            rho_max: cfg.rho_max,
            step: cfg.step,
            drift: vec![0.0; dim],
            rates: vec![0.0; pairs.len()],
        }
    }

    /// Advances `x` by one substep of length ≤ min(step, remaining), chosen
    /// so the expected jump intensity stays below `rho_max`. Returns the
    /// length taken and the index of the pair to jump by, if the jump clock
    /// fired. The jump itself is applied by the caller after exit checks.
    fn advance(&mut self, x: &mut [f64], remaining: f64, rng: &mut ChaCha8Rng) -> (f64, Option<usize>) {
        let d = x.len();
        self.drift.iter_mut().for_each(|v| *v = 0.0);
        let mut total = 0.0;
        for (i, p) in self.pairs.iter().enumerate() {
            let l = dot(&p.alpha, x);
            // Tamed ⟨α,x⟩: the sign survives, the magnitude is floored.
            let s = if l < 0.0 {
                -l.abs().max(self.eps)
            } else {
                l.abs().max(self.eps)
            };
            self.rates[i] = p.rate_num / (s * s);
            total += self.rates[i];
            let c = 2.0 * p.k / s;
            for j in 0..d {
                self.drift[j] += c * p.alpha[j];
            }
        }
        let mut dt = self.step.min(remaining);
        if dt * total > self.rho_max {
            dt = self.rho_max / total;
        }
        let sd = (2.0 * dt).sqrt();
        for j in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            x[j] += self.drift[j] * dt + sd * z;
        }
        let jump = if total > 0.0 {
            let p_jump = -(-dt * total).exp_m1();
            if rng.random::<f64>() < p_jump {
                let mut v = rng.random::<f64>() * total;
                let mut pick = self.pairs.len() - 1;
                for (i, &r) in self.rates.iter().enumerate() {
                    v -= r;
                    if v <= 0.0 {
                        pick = i;
                        break;
                    }
                }
                Some(pick)
            } else {
                None
            }
        } else {
            None
        };
        (dt, jump)
    }
}

/// Start points on a reflection hyperplane have no drift sign; nudge them a
/// distance `eps` off every hyperplane they sit on.
fn nudge_off_hyperplanes(pairs: &[PairTerm], x: &mut [f64], eps: f64) {
    for p in pairs {
        if dot(&p.alpha, x) == 0.0 {
            let an = crate::geom::norm(&p.alpha);
            for j in 0..x.len() {
                x[j] += eps * p.alpha[j] / an;
            }
        }
    }
}

/// Bisects the step segment from `a` (inside) to `b` (outside) down to the
/// snap tolerance and returns the first-outside end.
fn crossing_point(v: &Domain, a: &[f64], b: &[f64], tol: f64) -> Vec<f64> {
    let seg = crate::geom::dist(a, b);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let at = |s: f64| -> Vec<f64> {
        a.iter()
            .zip(b)
            .map(|(&ai, &bi)| ai + s * (bi - ai))
            .collect()
    };
    for _ in 0..80 {
        if (hi - lo) * seg <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if v.contains(&at(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(hi)
}

fn run_exit(
    pairs: &[PairTerm],
    v: &Domain,
    x0: &[f64],
    cfg: &McConfig,
    path_id: u64,
) -> Result<ExitRecord> {
    if !v.contains(x0) {
        // Started outside: the exit law is the point mass at the start.
        return Ok(ExitRecord {
            path_id,
            exit_point: x0.to_vec(),
            exit_time: 0.0,
            jumps: 0,
        });
    }
    let mut x = x0.to_vec();
    nudge_off_hyperplanes(pairs, &mut x, cfg.eps);
    let mut rng = path_rng(cfg.seed, path_id);
    let mut stepper = Stepper::new(pairs, cfg, x.len());
    let mut prev = x.clone();
    let mut t = 0.0;
    let mut jumps = 0u64;
    let mut steps = 0u64;
    loop {
        if steps >= cfg.step_budget {
            return Err(Error::StepBudget {
                path_id,
                budget: cfg.step_budget,
            });
        }
        steps += 1;
        prev.copy_from_slice(&x);
        let (dt, jump) = stepper.advance(&mut x, f64::INFINITY, &mut rng);
        if !v.contains(&x) {
            let cross = crossing_point(v, &prev, &x, cfg.snap_tol);
            return Ok(ExitRecord {
                path_id,
                exit_point: v.project_to_boundary(&cross),
                exit_time: t + dt,
                jumps,
            });
        }
        if let Some(pi) = jump {
            let y = reflect(&x, &pairs[pi].alpha);
            jumps += 1;
            if !v.contains(&y) {
                // Reflected into the complement: genuine exit mass there.
                return Ok(ExitRecord {
                    path_id,
                    exit_point: y,
                    exit_time: t + dt,
                    jumps,
                });
            }
            x.copy_from_slice(&y);
        }
        t += dt;
    }
}

/// Simulates one exit path. A start outside the open domain exits
/// immediately at time zero (point-mass convention).
pub fn simulate_exit(
    model: &DunklModel,
    v: &Domain,
    x0: &[f64],
    cfg: &McConfig,
    path_id: u64,
) -> Result<ExitRecord> {
    cfg.validate()?;
    check_dims(model, v, x0)?;
    run_exit(&root_pairs(model), v, x0, cfg, path_id)
}

/// Simulates `cfg.paths` exits in path order. Paths are independent streams,
/// so the records are identical however the work is scheduled.
pub fn simulate_exits(
    model: &DunklModel,
    v: &Domain,
    x0: &[f64],
    cfg: &McConfig,
) -> Result<Vec<ExitRecord>> {
    cfg.validate()?;
    check_dims(model, v, x0)?;
    let pairs = root_pairs(model);
    (0..cfg.paths)
        .into_par_iter()
        .map(|pid| run_exit(&pairs, v, x0, cfg, pid))
        .collect()
}

fn check_dims(model: &DunklModel, v: &Domain, x0: &[f64]) -> Result<()> {
    let d = model.dim();
    if v.dim != d || x0.len() != d {
        return Err(Error::InvalidArgument(format!(
            "model, domain and start point must share dimension {d}"
        )));
    }
    Ok(())
}

/// Runs one path with no absorption until elapsed time `t` and returns the
/// final position.
pub fn simulate_to_time(
    model: &DunklModel,
    x0: &[f64],
    t: f64,
    cfg: &McConfig,
    path_id: u64,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if x0.len() != model.dim() {
        return Err(Error::InvalidArgument(format!(
            "start point must have length {}",
            model.dim()
        )));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("time must be positive".into()));
    }
    let pairs = root_pairs(model);
    let mut x = x0.to_vec();
    nudge_off_hyperplanes(&pairs, &mut x, cfg.eps);
    let mut rng = path_rng(cfg.seed, path_id);
    let mut stepper = Stepper::new(&pairs, cfg, x.len());
    let mut remaining = t;
    let mut steps = 0u64;
    while remaining > 0.0 {
        if steps >= cfg.step_budget {
            return Err(Error::StepBudget {
                path_id,
                budget: cfg.step_budget,
            });
        }
        steps += 1;
        let (dt, jump) = stepper.advance(&mut x, remaining, &mut rng);
        if let Some(pi) = jump {
            let y = reflect(&x, &pairs[pi].alpha);
            x.copy_from_slice(&y);
        }
        remaining -= dt;
    }
    Ok(x)
}

/// Empirical mean of f(X_t) over `cfg.paths` free paths — the sampler's
/// side of the semigroup: it should match P_t f(x0) within Monte Carlo and
/// Euler error.
pub fn semigroup_sample(
    model: &DunklModel,
    x0: &[f64],
    t: f64,
    f: &dyn Fn(&[f64]) -> f64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    let positions: Vec<Vec<f64>> = (0..cfg.paths)
        .map(|pid| simulate_to_time(model, x0, t, cfg, pid))
        .collect::<Result<_>>()?;
    Ok(McEstimate::from_samples(positions.iter().map(|p| f(p))))
}

/// Harmonic-measure functional estimate: mean of `f` over the exit cloud,
/// which is returned alongside. A start outside `u` gives the point mass at
/// the start, hence exactly f(x0) with zero spread.
pub struct HarmonicMeasure {
    pub estimate: McEstimate,
    pub exits: Vec<ExitRecord>,
}

pub fn harmonic_measure_estimate(
    model: &DunklModel,
    u: &Domain,
    x0: &[f64],
    f: &dyn Fn(&[f64]) -> f64,
    cfg: &McConfig,
) -> Result<HarmonicMeasure> {
    let exits = simulate_exits(model, u, x0, cfg)?;
    let estimate = McEstimate::from_samples(exits.iter().map(|r| f(&r.exit_point)));
    Ok(HarmonicMeasure { estimate, exits })
}

/// Fraction of exit points that violate the support structure: inside the
/// open domain, or farther than `snap_tol` from the closure of its group
/// saturation. Should be discretization dust at most.
pub fn support_audit(
    model: &DunklModel,
    u: &Domain,
    exits: &[ExitRecord],
    snap_tol: f64,
) -> Result<f64> {
    if exits.is_empty() {
        return Err(Error::InvalidArgument("empty exit cloud".into()));
    }
    let sat = u.w_saturate(model)?;
    let mut bad = 0usize;
    for rec in exits {
        let p = &rec.exit_point;
        let in_closure = sat.contains(p) || sat.boundary_dist(p) <= snap_tol;
        if u.contains(p) || !in_closure {
            bad += 1;
        }
    }
    Ok(bad as f64 / exits.len() as f64)
}

/// Both sides of the harmonic-measure Green symmetry, estimated with the
/// same seed so the x = y case cancels identically.
pub struct GreenSymmetryReport {
    /// Estimate of the swept Green function G_y averaged over exits from x.
    pub forward: McEstimate,
    /// Same with x and y exchanged.
    pub reverse: McEstimate,
    pub residual: f64,
    pub combined_std_error: f64,
}

/// Estimates |H_V G_y(x) − H_V G_x(y)|. With y outside the closure this
/// degenerates to the exterior identity: the reverse run is the point mass
/// at y, so the residual compares H_V G_y(x) against G(x, y) itself.
pub fn green_symmetry_check(
    ctx: &KernelContext,
    v: &Domain,
    x: &[f64],
    y: &[f64],
    cfg: &McConfig,
) -> Result<GreenSymmetryReport> {
    let model = ctx.model();
    if !v.is_w_invariant(model) {
        return Err(Error::InvalidArgument(
            "the Green symmetry check needs a group-invariant domain".into(),
        ));
    }
    let half = |from: &[f64], pole: &[f64]| -> Result<McEstimate> {
        let exits = simulate_exits(model, v, from, cfg)?;
        let mut vals = Vec::with_capacity(exits.len());
        for rec in &exits {
            vals.push(ctx.green(&rec.exit_point, pole)?);
        }
        Ok(McEstimate::from_samples(vals))
    };
    let forward = half(x, y)?;
    let reverse = half(y, x)?;
    let residual = (forward.mean - reverse.mean).abs();
    let combined_std_error = forward
        .std_error
        .hypot(reverse.std_error);
    Ok(GreenSymmetryReport {
        forward,
        reverse,
        residual,
        combined_std_error,
    })
}

/// Monte Carlo Dirichlet solve: harmonic-measure averages of the boundary
/// data at each query point. The deterministic grid solver is the
/// cross-check this must agree with.
pub fn solve_dirichlet_mc(
    model: &DunklModel,
    v: &Domain,
    data: &dyn Fn(&[f64]) -> f64,
    queries: &[Vec<f64>],
    cfg: &McConfig,
) -> Result<Vec<McEstimate>> {
    if !v.is_w_invariant(model) {
        return Err(Error::InvalidArgument(
            "the Dirichlet problem is posed on group-invariant domains".into(),
        ));
    }
    let mut out = Vec::with_capacity(queries.len());
    for q in queries {
        let hm = harmonic_measure_estimate(model, v, q, data, cfg)?;
        out.push(hm.estimate);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::dunkl_laplacian_poly;
    use crate::poly::MultiPoly;
    use num::rational::BigRational;
    use num::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn interval(a: f64, b: f64) -> Domain {
        Domain::intervals(vec![(a, b)]).unwrap()
    }

    #[test]
    fn fd_constant_data_is_reproduced_exactly() {
        let m1 = DunklModel::rank_one(1.0).unwrap();
        let u1 = solve_fd(&m1, &interval(-2.0, 2.0), &|_| 3.5, 0.1).unwrap();
        for (_, v) in u1.nodes() {
            assert!((v - 3.5).abs() < 1e-11, "constant data broke: {v}");
        }
        assert!(u1.residual() < 1e-10);

        let m2 = DunklModel::z2_product(&[0.8, 0.8]).unwrap();
        let disc = Domain::ball(2, 1.0).unwrap();
        let u2 = solve_fd(&m2, &disc, &|_| -0.75, 0.1).unwrap();
        for (_, v) in u2.nodes() {
            assert!((v + 0.75).abs() < 1e-11, "constant data broke: {v}");
        }
    }

    #[test]
    fn fd_linear_solution_on_the_line() {
        // x is harmonic in rank one: the drift and difference parts cancel,
        // and they cancel for the discrete stencil too, so the solve is
        // exact up to factorization noise.
        let model = DunklModel::rank_one(1.0).unwrap();
        let h = 0.02;
        let u = solve_fd(&model, &interval(-2.0, 2.0), &|p| p[0], h).unwrap();
        let mut worst = 0.0_f64;
        for (pos, v) in u.nodes() {
            worst = worst.max((v - pos[0]).abs());
        }
        assert!(worst < 1e-9, "linear solution error {worst}");
        assert!(worst < 2.0 * h * h);
        let q = u.eval(&[0.537]);
        assert!((q - 0.537).abs() < 1e-9, "interpolation off: {q}");
    }

    #[test]
    fn fd_refinement_is_consistent_at_the_center() {
        // Even data 4 on ±2: the only bounded even harmonic on the interval
        // is the constant, so both grids must sit at 4.
        let model = DunklModel::rank_one(1.0).unwrap();
        let v = interval(-2.0, 2.0);
        let coarse = solve_fd(&model, &v, &|_| 4.0, 0.02).unwrap();
        let fine = solve_fd(&model, &v, &|_| 4.0, 0.01).unwrap();
        let a = coarse.eval(&[0.0]);
        let b = fine.eval(&[0.0]);
        assert!((a - 4.0).abs() < 1e-8, "coarse center {a}");
        assert!((b - 4.0).abs() < 1e-8, "fine center {b}");
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn fd_refines_at_second_order_on_curved_data() {
        // Box boundaries align with the grid, so clamping is exact and the
        // interior stencil's O(h²) should show as a factor ≈ 4 per halving.
        let model = DunklModel::z2_product(&[0.8, 0.8]).unwrap();
        let v = Domain::cuboid(vec![1.0, 1.0]).unwrap();
        let data = |p: &[f64]| (0.7 * p[0] - 0.4 * p[1]).exp();
        let q = [0.0, 0.0];
        let sols: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&h| solve_fd(&model, &v, &data, h).unwrap().eval(&q))
            .collect();
        let e1 = (sols[0] - sols[1]).abs();
        let e2 = (sols[1] - sols[2]).abs();
        let factor = e1 / e2;
        assert!(
            (2.5..6.0).contains(&factor),
            "refinement factor {factor} (steps {e1:.3e}, {e2:.3e})"
        );
    }

    #[test]
    fn fd_obeys_the_discrete_maximum_principle() {
        let model = DunklModel::z2_product(&[0.8, 0.8]).unwrap();
        let disc = Domain::ball(2, 1.0).unwrap();
        let data = |p: &[f64]| p[0] * p[1] + 0.3 * (2.0 * p[0]).sin();
        let u = solve_fd(&model, &disc, &data, 0.08).unwrap();
        assert!(
            u.max_principle_slack() <= 1e-12,
            "interior value escaped the boundary range by {}",
            u.max_principle_slack()
        );
        let (lo, hi) = u.boundary_range();
        assert!(lo < hi);
    }

    #[test]
    fn fd_rejects_unusable_inputs() {
        let model = DunklModel::rank_one(1.0).unwrap();
        let shifted = interval(0.5, 1.5);
        match solve_fd(&model, &shifted, &|_| 1.0, 0.05) {
            Err(Error::InvalidArgument(_)) => {}
            other => panic!("non-invariant domain not rejected: {other:?}"),
        }

        let diag = DunklModel::new(
            2,
            vec![vec![1.0, 1.0], vec![-1.0, -1.0]],
            vec![0.5, 0.5],
        )
        .unwrap();
        let disc = Domain::ball(2, 1.0).unwrap();
        match solve_fd(&diag, &disc, &|_| 1.0, 0.1) {
            Err(Error::UnsupportedGroup(_)) => {}
            other => panic!("diagonal root system not rejected: {other:?}"),
        }
    }

    #[test]
    fn mc_paths_are_reproducible() {
        let model = DunklModel::rank_one(1.0).unwrap();
        let v = interval(-2.0, 2.0);
        let cfg = McConfig::new(64, 1e-3, 7);
        let a = simulate_exits(&model, &v, &[0.5], &cfg).unwrap();
        let b = simulate_exits(&model, &v, &[0.5], &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| !v.contains(&r.exit_point)));
    }

    #[test]
    fn mc_classical_disc_exits_are_isotropic() {
        // k ≡ 0 reduces the walk to Brownian motion; exit angles from the
        // center of a disc are uniform, and no jump can ever fire.
        let model = DunklModel::z2_product(&[0.0, 0.0]).unwrap();
        let disc = Domain::ball(2, 1.0).unwrap();
        let cfg = McConfig::new(3000, 5e-4, 11);
        let exits = simulate_exits(&model, &disc, &[0.0, 0.0], &cfg).unwrap();
        assert!(exits.iter().all(|r| r.jumps == 0));
        let mut angles: Vec<f64> = exits
            .iter()
            .map(|r| r.exit_point[1].atan2(r.exit_point[0]))
            .collect();
        angles.sort_by(f64::total_cmp);
        let n = angles.len() as f64;
        let mut ks = 0.0_f64;
        for (i, &th) in angles.iter().enumerate() {
            let f = (th + std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
            ks = ks
                .max(f - i as f64 / n)
                .max((i + 1) as f64 / n - f);
        }
        let threshold = 1.628 / n.sqrt();
        assert!(ks < threshold, "KS statistic {ks} over the 1% bar {threshold}");
    }

    #[test]
    fn mc_rank_one_exits_recover_data_mean_and_exit_time() {
        // Both oracles are symbolic: x is harmonic, and (4 − x²)/6 has
        // constant image −1, so it is the expected exit time from x0.
        let model = DunklModel::rank_one(1.0).unwrap();
        let x = MultiPoly::<BigRational>::var(1, 0);
        let lap_x = dunkl_laplacian_poly(&model, &x).unwrap();
        assert!(lap_x.is_zero());
        let p = MultiPoly::constant(1, rat(2, 3)).sub(&x.mul(&x).scale(&rat(1, 6)));
        let lap_p = dunkl_laplacian_poly(&model, &p).unwrap();
        assert!(lap_p.sub(&MultiPoly::constant(1, rat(-1, 1))).is_zero());

        let v = interval(-2.0, 2.0);
        let x0 = [0.5];
        let cfg = McConfig::new(4000, 2e-4, 42);
        let exits = simulate_exits(&model, &v, &x0, &cfg).unwrap();

        let data = McEstimate::from_samples(exits.iter().map(|r| r.exit_point[0]));
        let dev = (data.mean - 0.5).abs();
        assert!(
            dev <= 3.0 * data.std_error,
            "boundary-data mean {} ± {} missed 0.5",
            data.mean,
            data.std_error
        );

        let tau = McEstimate::from_samples(exits.iter().map(|r| r.exit_time));
        let expected = p.eval(&[0.5]);
        let slack = 3.0 * tau.std_error + 30.0 * cfg.step;
        assert!(
            (tau.mean - expected).abs() <= slack,
            "mean exit time {} vs {expected} (slack {slack})",
            tau.mean
        );
    }

    #[test]
    fn mc_start_outside_is_a_point_mass() {
        let model = DunklModel::rank_one(1.0).unwrap();
        let v = interval(-2.0, 2.0);
        let cfg = McConfig::new(50, 1e-3, 3);
        let hm =
            harmonic_measure_estimate(&model, &v, &[3.0], &|p| p[0] * p[0], &cfg).unwrap();
        assert_eq!(hm.estimate.mean, 9.0);
        assert_eq!(hm.estimate.std_error, 0.0);
        assert!(hm
            .exits
            .iter()
            .all(|r| r.exit_point == vec![3.0] && r.exit_time == 0.0));
    }

    #[test]
    fn mc_shifted_interval_mass_lands_in_the_mirror() {
        // From U = (0.5, 1.5), jumps reflect paths into (−1.5, −0.5); those
        // landings are kept verbatim. Diffusion exits snap to {0.5, 1.5}.
        // Nothing may appear in the gap between the components.
        let model = DunklModel::rank_one(1.0).unwrap();
        let u = interval(0.5, 1.5);
        let cfg = McConfig::new(10_000, 1e-4, 5);
        let exits = simulate_exits(&model, &u, &[1.0], &cfg).unwrap();

        let violation = support_audit(&model, &u, &exits, cfg.snap_tol).unwrap();
        assert!(violation <= 1e-3, "support violation fraction {violation}");

        let mirrored = exits
            .iter()
            .filter(|r| (-1.5..=-0.5).contains(&r.exit_point[0]))
            .count();
        assert!(mirrored > 0, "no mass reached the mirrored component");
        assert!(exits
            .iter()
            .filter(|r| (-1.5..=-0.5).contains(&r.exit_point[0]))
            .all(|r| r.jumps > 0));

        let gap = exits
            .iter()
            .filter(|r| r.exit_point[0].abs() < 0.5 - cfg.snap_tol)
            .count();
        assert_eq!(gap, 0, "{gap} exits in the gap (−0.5, 0.5)");
    }

    #[test]
    fn mc_support_violations_do_not_grow_under_refinement() {
        let model = DunklModel::rank_one(1.0).unwrap();
        let u = interval(0.5, 1.5);
        let mut coarse = McConfig::new(4000, 2e-4, 9);
        coarse.eps = 2e-4;
        let mut fine = McConfig::new(4000, 1e-4, 9);
        fine.eps = 1e-4;
        let vc = support_audit(
            &model,
            &u,
            &simulate_exits(&model, &u, &[1.0], &coarse).unwrap(),
            coarse.snap_tol,
        )
        .unwrap();
        let vf = support_audit(
            &model,
            &u,
            &simulate_exits(&model, &u, &[1.0], &fine).unwrap(),
            fine.snap_tol,
        )
        .unwrap();
        assert!(vf <= vc, "violations grew under refinement: {vc} -> {vf}");
    }

    #[test]
    fn mc_invariant_domain_exits_sit_on_the_boundary() {
        // On a group-invariant domain a jump never leaves, so every exit is
        // a projected diffusion crossing; the cloud lives on ∂V.
        let model = DunklModel::rank_one(1.0).unwrap();
        let v = interval(-2.0, 2.0);
        let cfg = McConfig::new(3000, 2e-4, 13);
        let exits = simulate_exits(&model, &v, &[0.9], &cfg).unwrap();
        let on_boundary = exits
            .iter()
            .filter(|r| v.boundary_dist(&r.exit_point) <= cfg.snap_tol)
            .count();
        assert_eq!(on_boundary, exits.len());
        assert_eq!(
            support_audit(&model, &v, &exits, cfg.snap_tol).unwrap(),
            0.0
        );
    }

    #[test]
    fn mc_exit_clouds_respect_the_group_action() {
        // Mirroring the start mirrors the exit histogram: mass at +2 from
        // x0 matches mass at −2 from −x0 within coupled noise.
        let model = DunklModel::rank_one(1.0).unwrap();
        let v = interval(-2.0, 2.0);
        let cfg = McConfig::new(4000, 2e-4, 17);
        let right = harmonic_measure_estimate(&model, &v, &[0.7], &|p| {
            if p[0] > 0.0 {
                1.0
            } else {
                0.0
            }
        }, &cfg)
        .unwrap();
        let mut cfg2 = cfg.clone();
        cfg2.seed = 18;
        let left = harmonic_measure_estimate(&model, &v, &[-0.7], &|p| {
            if p[0] < 0.0 {
                1.0
            } else {
                0.0
            }
        }, &cfg2)
        .unwrap();
        let dev = (right.estimate.mean - left.estimate.mean).abs();
        let sigma = right.estimate.std_error.hypot(left.estimate.std_error);
        assert!(
            dev <= 3.0 * sigma,
            "histograms differ by {dev} against 3σ = {}",
            3.0 * sigma
        );
    }

    #[test]
    fn mc_green_symmetry_and_exterior_identity() {
        let model = DunklModel::rank_one(1.0).unwrap();
        let ctx = KernelContext::new(&model).unwrap();
        let v = interval(-2.0, 2.0);
        let cfg = McConfig::new(3000, 2e-4, 29);

        // Same start, same streams: the two sides cancel identically.
        let same = green_symmetry_check(&ctx, &v, &[0.8], &[0.8], &cfg).unwrap();
        assert_eq!(same.residual, 0.0);

        let report = green_symmetry_check(&ctx, &v, &[0.5], &[1.0], &cfg).unwrap();
        assert!(
            report.residual <= 3.0 * report.combined_std_error + 2e-3,
            "symmetry residual {} vs 3σ = {}",
            report.residual,
            3.0 * report.combined_std_error
        );

        // Pole outside the closure: the reverse run is the point mass at y,
        // so the check reduces to H_V G_y(x) = G(x, y).
        let ext = green_symmetry_check(&ctx, &v, &[0.5], &[3.0], &cfg).unwrap();
        assert_eq!(ext.reverse.std_error, 0.0);
        let gxy = ctx.green(&[0.5], &[3.0]).unwrap();
        assert!((ext.reverse.mean - gxy).abs() < 1e-9);
        assert!(
            ext.residual <= 3.0 * ext.combined_std_error + 2e-3,
            "exterior identity residual {} vs 3σ = {}",
            ext.residual,
            3.0 * ext.combined_std_error
        );
    }

    #[test]
    fn mc_exhaustion_estimates_decrease() {
        // Growing the domain toward V averages the superharmonic G_y over
        // more of its dip, so the swept values must not increase.
        let model = DunklModel::rank_one(1.0).unwrap();
        let ctx = KernelContext::new(&model).unwrap();
        let v = interval(-2.0, 2.0);
        let y = [1.0];
        let cfg = McConfig::new(2500, 2e-4, 31);
        let mut estimates = Vec::new();
        for n in [2.0, 4.0, 8.0] {
            let vn = v.shrink(1.0 / n).unwrap();
            let exits = simulate_exits(&model, &vn, &[0.5], &cfg).unwrap();
            let vals: Result<Vec<f64>> = exits
                .iter()
                .map(|r| ctx.green(&r.exit_point, &y))
                .collect();
            estimates.push(McEstimate::from_samples(vals.unwrap()));
        }
        for w in estimates.windows(2) {
            let slack = 3.0 * w[0].std_error.hypot(w[1].std_error);
            assert!(
                w[1].mean <= w[0].mean + slack,
                "exhaustion sequence rose: {} -> {}",
                w[0].mean,
                w[1].mean
            );
        }
    }

    #[test]
    fn solvers_agree_on_the_line() {
        let model = DunklModel::rank_one(1.0).unwrap();
        let v = interval(-2.0, 2.0);
        let h = 0.02;
        let fd = solve_fd(&model, &v, &|p| p[0], h).unwrap();
        let cfg = McConfig::new(3000, 2e-4, 23);
        let mc = solve_dirichlet_mc(&model, &v, &|p| p[0], &[vec![0.5]], &cfg).unwrap();
        let dev = (mc[0].mean - fd.eval(&[0.5])).abs();
        let band = 3.0 * mc[0].std_error + 2.0 * h * h;
        assert!(dev <= band, "solver gap {dev} over band {band}");
        assert!((fd.eval(&[0.5]) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn solvers_agree_on_the_invariant_disc() {
        // x₁x₂ is annihilated by both difference terms, so it is harmonic
        // for every Z₂² multiplicity; the grid stencil reproduces it to
        // factorization precision and the sampler must land on the same
        // surface.
        let model = DunklModel::z2_product(&[0.8, 0.8]).unwrap();
        let p = MultiPoly::<BigRational>::var(2, 0).mul(&MultiPoly::var(2, 1));
        assert!(dunkl_laplacian_poly(&model, &p).unwrap().is_zero());

        let disc = Domain::ball(2, 1.0).unwrap();
        let data = |q: &[f64]| q[0] * q[1];
        let fd = solve_fd(&model, &disc, &data, 0.05).unwrap();
        let queries = vec![vec![0.3, 0.2], vec![-0.45, 0.35]];
        for q in &queries {
            assert!(
                (fd.eval(q) - data(q)).abs() < 5e-3,
                "grid missed the harmonic surface at {q:?}: {}",
                fd.eval(q)
            );
        }
        let cfg = McConfig::new(3000, 2e-4, 37);
        let mc = solve_dirichlet_mc(&model, &disc, &data, &queries, &cfg).unwrap();
        for (q, est) in queries.iter().zip(&mc) {
            let dev = (est.mean - fd.eval(q)).abs();
            let band = 3.0 * est.std_error + 5e-3;
            assert!(dev <= band, "solver gap {dev} over band {band} at {q:?}");
        }
    }

    #[test]
    fn fd_interpolant_satisfies_the_mean_value_property() {
        use crate::means::{spherical_mean_with, MeanOptions};
        let model = DunklModel::z2_product(&[0.8, 0.8]).unwrap();
        let ctx = KernelContext::new(&model).unwrap();
        let disc = Domain::ball(2, 1.0).unwrap();
        let fd = solve_fd(&model, &disc, &|q| q[0] * q[1], 0.05).unwrap();
        let x = [0.25, 0.15];
        let g = |y: &[f64]| fd.eval(y);
        let mean =
            spherical_mean_with(&ctx, &g, &x, 0.2, 0.05, &MeanOptions::coarse()).unwrap();
        let dev = (mean - fd.eval(&x)).abs();
        assert!(dev < 1e-2, "mean-value deviation {dev}");
    }

    #[test]
    fn mc_bridge_matches_the_semigroup() {
        // Free evolution, no absorption: the sampler realizes the same
        // semigroup the heat kernel integrates.
        let model = DunklModel::rank_one(1.0).unwrap();
        let ctx = KernelContext::new(&model).unwrap();
        let bump = |y: &[f64]| {
            let u = (y[0] - 0.8) / 0.6;
            if u.abs() < 1.0 {
                (1.0 - 1.0 / (1.0 - u * u)).exp()
            } else {
                0.0
            }
        };
        let t = 0.25;
        let x0 = [0.7];
        let reference = ctx.semigroup_apply(t, &bump, &x0).unwrap();
        let cfg = McConfig::new(4000, 1e-4, 41);
        let est = semigroup_sample(&model, &x0, t, &bump, &cfg).unwrap();
        let dev = (est.mean - reference).abs();
        assert!(
            dev <= 3.0 * est.std_error,
            "bridge deviation {dev} vs 3σ = {} (mc {}, kernel {reference})",
            3.0 * est.std_error,
            est.mean
        );
    }

    #[test]
    fn mc_rejects_bad_configs() {
        let model = DunklModel::rank_one(1.0).unwrap();
        let v = interval(-2.0, 2.0);
        for cfg in [
            McConfig::new(0, 1e-3, 1),
            McConfig::new(10, 0.0, 1),
            McConfig::new(10, -1.0, 1),
        ] {
            assert!(simulate_exits(&model, &v, &[0.5], &cfg).is_err());
        }
        let mut cfg = McConfig::new(4, 1e-3, 1);
        cfg.step_budget = 10;
        match simulate_exits(&model, &v, &[0.5], &cfg) {
            Err(Error::StepBudget { budget: 10, .. }) => {}
            other => panic!("budget guard missing: {other:?}"),
        }
    }
}

