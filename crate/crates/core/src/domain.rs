//! Bounded open domains the solvers understand: balls, boxes, and annuli
//! centered at the origin, plus finite unions of intervals on the line.
//!
//! Each kind supports membership, distance to the boundary, projection onto
//! the boundary, uniform shrinking (which realizes the exhaustion
//! `V_n = {z : B(z, 1/n) ⋐ V}`), and W-saturation `^W U = ∪_w w(U)`.

use crate::error::{Error, Result};
use crate::geom::norm;
use crate::reflection::{apply_matrix, DunklModel};

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    Ball { radius: f64 },
    Box { half: Vec<f64> },
    Annulus { inner: f64, outer: f64 },
    Intervals { segs: Vec<(f64, f64)> },
}

/// A bounded open domain in dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub dim: usize,
    pub kind: DomainKind,
}

impl Domain {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument("ball radius must be positive".into()));
        }
        Ok(Domain {
            dim,
            kind: DomainKind::Ball { radius },
        })
    }

    pub fn cuboid(half: Vec<f64>) -> Result<Self> {
        if half.is_empty() || half.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::InvalidArgument(
                "box half-widths must be positive".into(),
            ));
        }
        Ok(Domain {
            dim: half.len(),
            kind: DomainKind::Box { half },
        })
    }

    pub fn annulus(dim: usize, inner: f64, outer: f64) -> Result<Self> {
        if !(0.0 < inner && inner < outer) {
            return Err(Error::InvalidArgument(
                "annulus needs 0 < inner < outer".into(),
            ));
        }
        Ok(Domain {
            dim,
            kind: DomainKind::Annulus { inner, outer },
        })
    }

    /// Union of open intervals on the line; overlapping pieces are merged.
    pub fn intervals(mut segs: Vec<(f64, f64)>) -> Result<Self> {
        if segs.is_empty() {
            return Err(Error::InvalidArgument("empty interval union".into()));
        }
        for &(a, b) in &segs {
            if !(a < b) {
                return Err(Error::InvalidArgument(format!(
                    "interval ({a}, {b}) is empty"
                )));
            }
        }
        segs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = vec![segs[0]];
        for &(a, b) in &segs[1..] {
            let last = merged.last_mut().unwrap();
            if a <= last.1 + 1e-12 {
                last.1 = last.1.max(b);
            } else {
                merged.push((a, b));
            }
        }
        Ok(Domain {
            dim: 1,
            kind: DomainKind::Intervals { segs: merged },
        })
    }

    /// Parses "ball:R", "box:h1,h2,...", "annulus:r,R",
    /// "interval:a,b" or "intervals:a,b;c,d;...".
    pub fn parse(dim: usize, spec: &str) -> Result<Self> {
        let (kind, args) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse {
                offset: 0,
                message: format!("domain spec {spec:?} must look like kind:args"),
            })?;
        let nums = |s: &str| -> Result<Vec<f64>> {
            s.split(',')
                .map(|t| {
                    t.trim().parse::<f64>().map_err(|_| Error::Parse {
                        offset: 0,
                        message: format!("bad number {t:?} in domain spec"),
                    })
                })
                .collect()
        };
        match kind.trim() {
            "ball" => {
                let v = nums(args)?;
                if v.len() != 1 {
                    return Err(Error::Parse {
                        offset: 0,
                        message: "ball takes exactly one radius".into(),
                    });
                }
                Domain::ball(dim, v[0])
            }
            "box" => {
                let v = nums(args)?;
                if v.len() != dim {
                    return Err(Error::Parse {
                        offset: 0,
                        message: format!("box needs {dim} half-widths"),
                    });
                }
                Domain::cuboid(v)
            }
            "annulus" => {
                let v = nums(args)?;
                if v.len() != 2 {
                    return Err(Error::Parse {
                        offset: 0,
                        message: "annulus takes inner,outer".into(),
                    });
                }
                Domain::annulus(dim, v[0], v[1])
            }
            "interval" | "intervals" => {
                if dim != 1 {
                    return Err(Error::UnsupportedDomain(
                        "interval unions exist only in dimension 1".into(),
                    ));
                }
                let mut segs = Vec::new();
                for part in args.split(';') {
                    let v = nums(part)?;
                    if v.len() != 2 {
                        return Err(Error::Parse {
                            offset: 0,
                            message: "each interval needs a,b".into(),
                        });
                    }
                    segs.push((v[0], v[1]));
                }
                Domain::intervals(segs)
            }
            other => Err(Error::UnsupportedDomain(format!(
                "unknown domain kind {other:?}"
            ))),
        }
    }

    /// Open-set membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            DomainKind::Ball { radius } => norm(x) < *radius,
            DomainKind::Box { half } => x.iter().zip(half).all(|(xi, h)| xi.abs() < *h),
            DomainKind::Annulus { inner, outer } => {
                let r = norm(x);
                *inner < r && r < *outer
            }
            DomainKind::Intervals { segs } => {
                segs.iter().any(|&(a, b)| a < x[0] && x[0] < b)
            }
        }
    }

    /// Distance from `x` to the boundary ∂U (defined inside and outside).
    pub fn boundary_dist(&self, x: &[f64]) -> f64 {
        match &self.kind {
            DomainKind::Ball { radius } => (radius - norm(x)).abs(),
            DomainKind::Annulus { inner, outer } => {
                let r = norm(x);
                (r - inner).abs().min((outer - r).abs())
            }
            DomainKind::Box { half } => {
                if self.contains(x) {
                    x.iter()
                        .zip(half)
                        .map(|(xi, h)| h - xi.abs())
                        .fold(f64::INFINITY, f64::min)
                } else {
                    // Distance to the closed box equals distance to ∂ from
                    // outside; on a face both vanish.
                    x.iter()
                        .zip(half)
                        .map(|(xi, h)| (xi.abs() - h).max(0.0).powi(2))
                        .sum::<f64>()
                        .sqrt()
                }
            }
            DomainKind::Intervals { segs } => segs
                .iter()
                .flat_map(|&(a, b)| [a, b])
                .map(|e| (x[0] - e).abs())
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Nearest boundary point (ties broken deterministically).
    pub fn project_to_boundary(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            DomainKind::Ball { radius } => radial_projection(x, *radius),
            DomainKind::Annulus { inner, outer } => {
                let r = norm(x);
                let target = if (r - inner).abs() <= (outer - r).abs() {
                    *inner
                } else {
                    *outer
                };
                radial_projection(x, target)
            }
            DomainKind::Box { half } => {
                if self.contains(x) {
                    let i = (0..self.dim)
                        .min_by(|&a, &b| {
                            (half[a] - x[a].abs()).total_cmp(&(half[b] - x[b].abs()))
                        })
                        .unwrap();
                    let mut out = x.to_vec();
                    out[i] = if x[i] >= 0.0 { half[i] } else { -half[i] };
                    out
                } else {
                    x.iter()
                        .zip(half)
                        .map(|(xi, h)| xi.clamp(-*h, *h))
                        .collect()
                }
            }
            DomainKind::Intervals { segs } => {
                let e = segs
                    .iter()
                    .flat_map(|&(a, b)| [a, b])
                    .min_by(|p, q| (x[0] - p).abs().total_cmp(&(x[0] - q).abs()))
                    .unwrap();
                vec![e]
            }
        }
    }

    /// Radius of a ball around the origin containing the closure.
    pub fn bounding_radius(&self) -> f64 {
        match &self.kind {
            DomainKind::Ball { radius } => *radius,
            DomainKind::Box { half } => norm(half),
            DomainKind::Annulus { outer, .. } => *outer,
            DomainKind::Intervals { segs } => segs
                .iter()
                .flat_map(|&(a, b)| [a.abs(), b.abs()])
                .fold(0.0, f64::max),
        }
    }

    /// `{z : B(z, delta) ⋐ U}`; errors when the shrink empties the domain.
    pub fn shrink(&self, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument("shrink distance must be positive".into()));
        }
        match &self.kind {
            DomainKind::Ball { radius } => Domain::ball(self.dim, radius - delta),
            DomainKind::Box { half } => {
                Domain::cuboid(half.iter().map(|h| h - delta).collect())
            }
            DomainKind::Annulus { inner, outer } => {
                Domain::annulus(self.dim, inner + delta, outer - delta)
            }
            DomainKind::Intervals { segs } => {
                let shrunk: Vec<(f64, f64)> = segs
                    .iter()
                    .map(|&(a, b)| (a + delta, b - delta))
                    .filter(|&(a, b)| a < b)
                    .collect();
                if shrunk.is_empty() {
                    return Err(Error::InvalidArgument(
                        "shrink emptied the interval union".into(),
                    ));
                }
                Domain::intervals(shrunk)
            }
        }
    }

    /// Checks W-invariance by testing membership consistency on a
    /// deterministic sample cloud.
    pub fn is_w_invariant(&self, model: &DunklModel) -> bool {
        debug_assert_eq!(self.dim, model.dim());
        for x in self.sample_cloud(400) {
            if self.boundary_dist(&x) < 1e-9 {
                continue;
            }
            let inside = self.contains(&x);
            for w in model.group() {
                if self.contains(&apply_matrix(w, &x)) != inside {
                    return false;
                }
            }
        }
        true
    }

    /// `^W U = ∪_{w∈W} w(U)` when representable: returns the domain itself
    /// when already W-invariant, mirrors interval unions on the line, and
    /// refuses everything else.
    pub fn w_saturate(&self, model: &DunklModel) -> Result<Self> {
        if self.is_w_invariant(model) {
            return Ok(self.clone());
        }
        match &self.kind {
            DomainKind::Intervals { segs } => {
                // The only nontrivial group element on the line is x ↦ −x.
                let mut all = segs.clone();
                all.extend(segs.iter().map(|&(a, b)| (-b, -a)));
                Domain::intervals(all)
            }
            _ => Err(Error::UnsupportedDomain(
                "W-saturation is only representable for interval unions or \
                 already invariant domains"
                    .into(),
            )),
        }
    }

    /// Deterministic boundary mesh with roughly `n` points.
    pub fn boundary_mesh(&self, n: usize) -> Vec<Vec<f64>> {
        match &self.kind {
            DomainKind::Intervals { segs } => segs
                .iter()
                .flat_map(|&(a, b)| [vec![a], vec![b]])
                .collect(),
            DomainKind::Ball { radius } => sphere_mesh(self.dim, *radius, n),
            DomainKind::Annulus { inner, outer } => {
                let mut out = sphere_mesh(self.dim, *inner, n / 2);
                out.extend(sphere_mesh(self.dim, *outer, n / 2));
                out
            }
            DomainKind::Box { half } => {
                if self.dim == 1 {
                    return vec![vec![-half[0]], vec![half[0]]];
                }
                // Per-face lattices.
                let per_face = (n / (2 * self.dim)).max(3);
                let side = (per_face as f64)
                    .powf(1.0 / (self.dim as f64 - 1.0))
                    .ceil() as usize;
                let mut out = Vec::new();
                for axis in 0..self.dim {
                    for sign in [-1.0, 1.0] {
                        let others: Vec<usize> =
                            (0..self.dim).filter(|&j| j != axis).collect();
                        let mut idx = vec![0usize; others.len()];
                        loop {
                            let mut p = vec![0.0; self.dim];
                            p[axis] = sign * half[axis];
                            for (m, &j) in others.iter().enumerate() {
                                let t = (idx[m] as f64 + 0.5) / side as f64;
                                p[j] = (2.0 * t - 1.0) * half[j];
                            }
                            out.push(p);
                            let mut carry = true;
                            for v in idx.iter_mut() {
                                *v += 1;
                                if *v < side {
                                    carry = false;
                                    break;
                                }
                                *v = 0;
                            }
                            if carry {
                                break;
                            }
                        }
                    }
                }
                out
            }
        }
    }

    /// Deterministic interior lattice with spacing `h`, keeping points at
    /// distance ≥ `margin` from the boundary.
    pub fn interior_lattice(&self, h: f64, margin: f64) -> Vec<Vec<f64>> {
        let r = self.bounding_radius();
        let m = (r / h).ceil() as i64;
        let mut out = Vec::new();
        let mut idx = vec![-m; self.dim];
        'outer: loop {
            let p: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
            if self.contains(&p) && self.boundary_dist(&p) >= margin {
                out.push(p);
            }
            for i in (0..self.dim).rev() {
                idx[i] += 1;
                if idx[i] <= m {
                    continue 'outer;
                }
                idx[i] = -m;
            }
            break;
        }
        out
    }

    /// Deterministic cloud covering the bounding box (used by sampling
    /// checks). Low-discrepancy additive lattice, no RNG involved.
    fn sample_cloud(&self, n: usize) -> Vec<Vec<f64>> {
        let r = self.bounding_radius() * 1.2;
        let alphas = [
            0.6180339887498949,
            0.7548776662466927,
            0.8191725133961645,
        ];
        (0..n)
            .map(|i| {
                (0..self.dim)
                    .map(|j| {
                        let a = alphas[j % alphas.len()];
                        let t = ((i + 1) as f64 * a).fract();
                        (2.0 * t - 1.0) * r
                    })
                    .collect()
            })
            .collect()
    }
}

fn radial_projection(x: &[f64], radius: f64) -> Vec<f64> {
    let r = norm(x);
    if r < 1e-300 {
        let mut out = vec![0.0; x.len()];
        out[0] = radius;
        return out;
    }
    x.iter().map(|xi| xi * radius / r).collect()
}

/// Equidistributed points on the sphere of the given radius (d ≤ 3).
fn sphere_mesh(dim: usize, radius: f64, n: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![-radius], vec![radius]],
        2 => (0..n.max(4))
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n.max(4) as f64;
                vec![radius * t.cos(), radius * t.sin()]
            })
            .collect(),
        3 => {
            // Fibonacci sphere.
            let n = n.max(8);
            let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
            (0..n)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let phi = 2.0 * std::f64::consts::PI * (i as f64 / golden).fract();
                    vec![
                        radius * rho * phi.cos(),
                        radius * rho * phi.sin(),
                        radius * z,
                    ]
                })
                .collect()
        }
        _ => panic!("sphere meshes exist only for d ≤ 3"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reflection::DunklModel;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ball_membership_and_projection() {
        let d = Domain::ball(2, 1.5).unwrap();
        assert!(d.contains(&[1.0, 0.5]));
        assert!(!d.contains(&[1.5, 0.0]));
        let p = d.project_to_boundary(&[3.0, 4.0]);
        assert_abs_diff_eq!(norm(&p), 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(d.boundary_dist(&[3.0, 4.0]), 3.5, epsilon = 1e-14);
    }

    #[test]
    fn box_projection_from_inside_and_outside() {
        let d = Domain::cuboid(vec![1.0, 2.0]).unwrap();
        let p = d.project_to_boundary(&[0.9, 0.0]);
        assert_eq!(p, vec![1.0, 0.0]);
        let q = d.project_to_boundary(&[3.0, 5.0]);
        assert_eq!(q, vec![1.0, 2.0]);
        assert_abs_diff_eq!(d.boundary_dist(&[0.9, 0.0]), 0.1, epsilon = 1e-14);
    }

    #[test]
    fn interval_union_merges_overlaps() {
        let d = Domain::intervals(vec![(0.5, 1.5), (1.2, 2.0), (-1.0, 0.0)]).unwrap();
        match &d.kind {
            DomainKind::Intervals { segs } => {
                assert_eq!(segs.len(), 2);
                assert_eq!(segs[0], (-1.0, 0.0));
                assert_eq!(segs[1], (0.5, 2.0));
            }
            _ => unreachable!(),
        }
        assert!(d.contains(&[1.7]));
        assert!(!d.contains(&[0.25]));
    }

    #[test]
    fn saturation_mirrors_interval_unions() {
        let m = DunklModel::rank_one(1.0).unwrap();
        let u = Domain::intervals(vec![(0.5, 1.5)]).unwrap();
        let s = u.w_saturate(&m).unwrap();
        assert!(s.contains(&[-1.0]));
        assert!(s.contains(&[1.0]));
        assert!(!s.contains(&[0.0]));

        let sym = Domain::intervals(vec![(-2.0, 2.0)]).unwrap();
        assert!(sym.is_w_invariant(&m));
        assert_eq!(sym.w_saturate(&m).unwrap(), sym);
    }

    #[test]
    fn invariance_detects_asymmetry() {
        let m = DunklModel::z2_product(&[0.8, 0.8]).unwrap();
        assert!(Domain::ball(2, 1.0).unwrap().is_w_invariant(&m));
        assert!(Domain::cuboid(vec![1.0, 2.0]).unwrap().is_w_invariant(&m));
        // A box is not invariant under coordinate swap, but Z₂² has no swap,
        // so test asymmetry with a shifted interval union on the line.
        let m1 = DunklModel::rank_one(1.0).unwrap();
        assert!(!Domain::intervals(vec![(0.5, 1.5)])
            .unwrap()
            .is_w_invariant(&m1));
    }

    #[test]
    fn shrink_realizes_exhaustion() {
        let v = Domain::ball(2, 1.0).unwrap();
        let v10 = v.shrink(0.1).unwrap();
        assert_eq!(v10, Domain::ball(2, 0.9).unwrap());
        assert!(Domain::ball(2, 1.0).unwrap().shrink(1.0).is_err());
        let u = Domain::intervals(vec![(0.0, 0.3), (1.0, 3.0)]).unwrap();
        let s = u.shrink(0.2).unwrap();
        match &s.kind {
            DomainKind::Intervals { segs } => assert_eq!(segs, &vec![(1.2, 2.8)]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn parse_round_trips() {
        assert_eq!(
            Domain::parse(2, "ball:1.5").unwrap(),
            Domain::ball(2, 1.5).unwrap()
        );
        assert_eq!(
            Domain::parse(2, "box:1,2").unwrap(),
            Domain::cuboid(vec![1.0, 2.0]).unwrap()
        );
        assert_eq!(
            Domain::parse(1, "interval:0.5,1.5").unwrap(),
            Domain::intervals(vec![(0.5, 1.5)]).unwrap()
        );
        assert!(Domain::parse(2, "interval:0,1").is_err());
        assert!(Domain::parse(2, "blob:1").is_err());
    }

    #[test]
    fn boundary_mesh_lies_on_boundary() {
        for d in [
            Domain::ball(2, 1.0).unwrap(),
            Domain::ball(3, 0.7).unwrap(),
            Domain::annulus(2, 0.5, 1.5).unwrap(),
            Domain::cuboid(vec![1.0, 0.5]).unwrap(),
            Domain::intervals(vec![(0.5, 1.5)]).unwrap(),
        ] {
            for p in d.boundary_mesh(64) {
                assert!(d.boundary_dist(&p) < 1e-10, "{:?} {:?}", d.kind, p);
            }
        }
    }
}
