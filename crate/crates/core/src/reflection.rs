//! Root systems, reflection groups, multiplicities, and the weight `w_k`.
//!
//! A model bundles a reduced root system `R` (validated: `R ∩ Rα = {±α}`,
//! `σ_α(R) = R`), a W-invariant multiplicity function `k ≥ 0`, the generated
//! finite reflection group, and the derived constants
//!
//! ```text
//! γ = Σ_{α∈R} k(α),    λ = γ/2 + d/2 − 1,    w_k(x) = Π_{α∈R} |⟨x,α⟩|^{k(α)}.
//! ```
//!
//! The standing assumption is λ > 0; the only admitted exception is the
//! classical reduction k ≡ 0 in dimension ≥ 2 (λ = d/2 − 1 ≥ 0), which the
//! heat-kernel code uses as a cross-check and the Green-function code rejects.

use crate::error::{Error, Result};
use crate::geom::{dot, norm, norm2};
use nalgebra::DMatrix;
use num::rational::BigRational;
use num::{FromPrimitive, Zero};

/// Safety cap for group closure; finite reflection groups in d ≤ 3 are far
/// smaller, so hitting the cap means the input was not a root system.
pub const GROUP_CAP: usize = 1024;

/// Matrix deduplication tolerance for group closure.
const GROUP_DEDUP_TOL: f64 = 1e-10;

/// Reflection in the hyperplane orthogonal to `alpha`:
/// `σ_α(x) = x − 2(⟨x,α⟩/|α|²) α`.
pub fn reflect(x: &[f64], alpha: &[f64]) -> Vec<f64> {
    let c = 2.0 * dot(x, alpha) / norm2(alpha);
    x.iter().zip(alpha).map(|(xi, ai)| xi - c * ai).collect()
}

/// A reduced root system with multiplicities.
#[derive(Debug, Clone)]
pub struct RootSystem {
    pub dim: usize,
    pub roots: Vec<Vec<f64>>,
    pub multiplicities: Vec<f64>,
}

/// Exact rational copy of the model data, kept when the inputs were rational
/// so the symbolic operator can divide exactly.
#[derive(Debug, Clone)]
pub struct ExactModel {
    pub roots: Vec<Vec<BigRational>>,
    pub multiplicities: Vec<BigRational>,
}

/// Product (Z₂-type) structure: every root is `±c·e_j`. Axis j carries the
/// rank-one multiplicity `axis_k[j]` (0 when no root lies on that axis).
#[derive(Debug, Clone)]
pub struct ProductStructure {
    pub axis_k: Vec<f64>,
    pub axis_k_exact: Option<Vec<BigRational>>,
}

/// Root system + multiplicity + generated group + derived constants.
#[derive(Debug, Clone)]
pub struct DunklModel {
    root_system: RootSystem,
    exact: Option<ExactModel>,
    group: Vec<DMatrix<f64>>,
    product: Option<ProductStructure>,
    gamma: f64,
    lambda: f64,
}

impl DunklModel {
    /// Builds a model from float data. Exact symbolic division is unavailable
    /// unless the data is also provided rationally (see [`Self::from_rational`]).
    pub fn new(dim: usize, roots: Vec<Vec<f64>>, multiplicities: Vec<f64>) -> Result<Self> {
        Self::build(dim, roots, multiplicities, None)
    }

    /// Builds a model from exact rational data (config files parse decimal
    /// literals exactly, so this is the standard entry point).
    pub fn from_rational(
        dim: usize,
        roots: Vec<Vec<BigRational>>,
        multiplicities: Vec<BigRational>,
    ) -> Result<Self> {
        use crate::poly::Coeff;
        let roots_f: Vec<Vec<f64>> = roots
            .iter()
            .map(|r| r.iter().map(|c| c.to_f64()).collect())
            .collect();
        let mults_f: Vec<f64> = multiplicities.iter().map(|c| c.to_f64()).collect();
        Self::build(
            dim,
            roots_f,
            mults_f,
            Some(ExactModel {
                roots,
                multiplicities,
            }),
        )
    }

    /// Rank-one model on the line: R = {+1, −1}, both with multiplicity `k`.
    pub fn rank_one(k: f64) -> Result<Self> {
        Self::from_rational(
            1,
            vec![vec![rational_of(1.0)], vec![rational_of(-1.0)]],
            vec![rational_of(k), rational_of(k)],
        )
    }

    /// Z₂^d product model: roots ±e_j with axis multiplicities `ks`.
    pub fn z2_product(ks: &[f64]) -> Result<Self> {
        let dim = ks.len();
        let mut roots = Vec::new();
        let mut mults = Vec::new();
        for (j, &k) in ks.iter().enumerate() {
            for sign in [1.0, -1.0] {
                let mut r = vec![BigRational::zero(); dim];
                r[j] = rational_of(sign);
                roots.push(r);
                mults.push(rational_of(k));
            }
        }
        Self::from_rational(dim, roots, mults)
    }

    fn build(
        dim: usize,
        roots: Vec<Vec<f64>>,
        multiplicities: Vec<f64>,
        exact: Option<ExactModel>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidModel("dimension must be positive".into()));
        }
        if multiplicities.len() != roots.len() {
            return Err(Error::InvalidModel(format!(
                "{} roots but {} multiplicities",
                roots.len(),
                multiplicities.len()
            )));
        }
        for (i, r) in roots.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::InvalidModel(format!(
                    "root {i} has length {} in dimension {dim}",
                    r.len()
                )));
            }
            if norm(r) < 1e-12 {
                return Err(Error::InvalidModel(format!("root {i} is zero")));
            }
        }
        for (i, &k) in multiplicities.iter().enumerate() {
            if !(k >= 0.0) {
                return Err(Error::InvalidModel(format!(
                    "multiplicity of root {i} is negative or NaN"
                )));
            }
        }

        // Reducedness: the only scalar multiples of α inside R are ±α.
        for i in 0..roots.len() {
            let mut found_negative = false;
            for j in 0..roots.len() {
                if i == j {
                    continue;
                }
                if let Some(c) = scalar_ratio(&roots[j], &roots[i]) {
                    if (c + 1.0).abs() < 1e-9 {
                        if found_negative {
                            return Err(Error::InvalidModel(format!(
                                "root {i} appears more than twice up to sign"
                            )));
                        }
                        found_negative = true;
                        if (multiplicities[i] - multiplicities[j]).abs() > 1e-12 {
                            return Err(Error::InvalidModel(format!(
                                "multiplicity must satisfy k(α) = k(−α); roots {i}, {j} differ"
                            )));
                        }
                    } else {
                        return Err(Error::InvalidModel(format!(
                            "roots {j} and {i} are parallel with ratio {c}; a reduced system \
                             allows only ±α"
                        )));
                    }
                }
            }
            if !found_negative {
                return Err(Error::InvalidModel(format!(
                    "root {i} has no matching −α in the system"
                )));
            }
        }

        // Closure under its own reflections, and W-invariance of k.
        for i in 0..roots.len() {
            for j in 0..roots.len() {
                let image = reflect(&roots[j], &roots[i]);
                let found = roots
                    .iter()
                    .position(|r| crate::geom::max_abs_diff(r, &image) < 1e-9);
                match found {
                    Some(idx) => {
                        if (multiplicities[idx] - multiplicities[j]).abs() > 1e-12 {
                            return Err(Error::InvalidModel(
                                "multiplicity function is not W-invariant".into(),
                            ));
                        }
                    }
                    None => {
                        return Err(Error::InvalidModel(format!(
                            "σ_α(R) ⊄ R: reflection of root {j} by root {i} is not a root"
                        )));
                    }
                }
            }
        }

        let group = generate_group(dim, &roots)?;
        let gamma: f64 = multiplicities.iter().sum();
        let lambda = gamma / 2.0 + dim as f64 / 2.0 - 1.0;
        if !(lambda > 0.0 || (gamma == 0.0 && lambda >= 0.0)) {
            return Err(Error::StandingAssumption(format!(
                "λ = γ/2 + d/2 − 1 = {lambda} must be positive (γ = {gamma}, d = {dim})"
            )));
        }

        let product = detect_product(dim, &roots, &multiplicities, exact.as_ref());

        Ok(DunklModel {
            root_system: RootSystem {
                dim,
                roots,
                multiplicities,
            },
            exact,
            group,
            product,
            gamma,
            lambda,
        })
    }

    pub fn dim(&self) -> usize {
        self.root_system.dim
    }

    pub fn roots(&self) -> &[Vec<f64>] {
        &self.root_system.roots
    }

    pub fn multiplicities(&self) -> &[f64] {
        &self.root_system.multiplicities
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.root_system
    }

    pub fn exact(&self) -> Option<&ExactModel> {
        self.exact.as_ref()
    }

    /// Group elements as orthogonal matrices; the identity comes first.
    pub fn group(&self) -> &[DMatrix<f64>] {
        &self.group
    }

    /// Product structure when every root is axis-aligned (`±c·e_j`).
    pub fn product_structure(&self) -> Option<&ProductStructure> {
        self.product.as_ref()
    }

    /// γ = Σ_{α∈R} k(α).
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// λ = γ/2 + d/2 − 1.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The weight w_k(x) = Π_{α∈R} |⟨x,α⟩|^{k(α)}.
    pub fn weight(&self, x: &[f64]) -> f64 {
        let mut w = 1.0;
        for (alpha, &k) in self
            .root_system
            .roots
            .iter()
            .zip(&self.root_system.multiplicities)
        {
            if k > 0.0 {
                w *= dot(x, alpha).abs().powf(k);
            }
        }
        w
    }

    /// Orbit W·y with duplicates removed.
    pub fn orbit(&self, y: &[f64]) -> Vec<Vec<f64>> {
        let tol = 1e-10 * (1.0 + norm(y));
        let mut out: Vec<Vec<f64>> = Vec::new();
        for w in &self.group {
            let img = apply_matrix(w, y);
            if !out
                .iter()
                .any(|p| crate::geom::max_abs_diff(p, &img) < tol)
            {
                out.push(img);
            }
        }
        out
    }

    /// min_{w∈W} |w·y − x|, the orbit distance controlling Green-function
    /// singularities.
    pub fn min_orbit_dist(&self, x: &[f64], y: &[f64]) -> f64 {
        self.group
            .iter()
            .map(|w| {
                let img = apply_matrix(w, y);
                crate::geom::dist(&img, x)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Applies a d×d matrix to a point.
pub fn apply_matrix(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let d = x.len();
    let mut out = vec![0.0; d];
    for i in 0..d {
        let mut acc = 0.0;
        for j in 0..d {
            acc += m[(i, j)] * x[j];
        }
        out[i] = acc;
    }
    out
}

/// Breadth-first closure of the reflections σ_α under composition.
fn generate_group(dim: usize, roots: &[Vec<f64>]) -> Result<Vec<DMatrix<f64>>> {
    let mut gens: Vec<DMatrix<f64>> = Vec::new();
    for alpha in roots {
        let n2 = norm2(alpha);
        let mut m = DMatrix::<f64>::identity(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] -= 2.0 * alpha[i] * alpha[j] / n2;
            }
        }
        gens.push(m);
    }

    let mut group: Vec<DMatrix<f64>> = vec![DMatrix::identity(dim, dim)];
    let mut frontier = group.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for w in &frontier {
            for g in &gens {
                let prod = g * w;
                let known = group
                    .iter()
                    .chain(next.iter())
                    .any(|m| matrix_dist(m, &prod) < GROUP_DEDUP_TOL);
                if !known {
                    next.push(prod);
                }
            }
        }
        group.extend(next.iter().cloned());
        if group.len() > GROUP_CAP {
            return Err(Error::GroupCap { cap: GROUP_CAP });
        }
        frontier = next;
    }
    Ok(group)
}

fn matrix_dist(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let mut m = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            m = m.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    m
}

/// Returns c with a = c·b when the vectors are parallel, else None.
fn scalar_ratio(a: &[f64], b: &[f64]) -> Option<f64> {
    let nb = norm2(b);
    let c = dot(a, b) / nb;
    let residual: f64 = a
        .iter()
        .zip(b)
        .map(|(ai, bi)| (ai - c * bi) * (ai - c * bi))
        .sum::<f64>()
        .sqrt();
    if residual < 1e-9 * (1.0 + norm(a)) {
        Some(c)
    } else {
        None
    }
}

fn detect_product(
    dim: usize,
    roots: &[Vec<f64>],
    mults: &[f64],
    exact: Option<&ExactModel>,
) -> Option<ProductStructure> {
    let mut axis_k = vec![0.0f64; dim];
    let mut axis_seen = vec![false; dim];
    for (r, &k) in roots.iter().zip(mults) {
        let mut axis = None;
        for (j, &c) in r.iter().enumerate() {
            if c.abs() > 1e-12 {
                if axis.is_some() {
                    return None; // not axis-aligned
                }
                axis = Some(j);
            }
        }
        let j = axis?;
        if axis_seen[j] && (axis_k[j] - k).abs() > 1e-12 {
            return None;
        }
        axis_seen[j] = true;
        axis_k[j] = k;
    }

    let axis_k_exact = exact.map(|e| {
        let mut ks = vec![BigRational::zero(); dim];
        for (r, k) in e.roots.iter().zip(&e.multiplicities) {
            if let Some(j) = r.iter().position(|c| !Zero::is_zero(c)) {
                ks[j] = k.clone();
            }
        }
        ks
    });

    Some(ProductStructure {
        axis_k,
        axis_k_exact,
    })
}

/// Exact rational from a float (every finite f64 is rational).
pub fn rational_of(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite float")
}
