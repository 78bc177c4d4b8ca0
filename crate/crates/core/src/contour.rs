//! Circle contours in a plane `C_J` and the two one-sided quadrature pairings.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::QuatMatrix;
use crate::quat::{ImaginaryUnit, Quaternion, SpectralSphere};
use crate::slicefn::Side;

/// Default node count per circle.
pub const DEFAULT_NODES: usize = 256;
pub const MIN_NODES: usize = 8;

/// One boundary component, or a conjugate pair of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Circle {
    /// Circle centred on the real axis.
    Real {
        center: f64,
        radius: f64,
        #[serde(default = "positive")]
        orientation: i8,
    },
    /// Circles around `u + J v` and `u - J v`.
    Pair {
        u: f64,
        v: f64,
        radius: f64,
        #[serde(default = "positive")]
        orientation: i8,
    },
}

fn positive() -> i8 {
    1
}

impl Circle {
    pub fn real(center: f64, radius: f64) -> Self {
        Circle::Real { center, radius, orientation: 1 }
    }

    pub fn pair(u: f64, v: f64, radius: f64) -> Self {
        Circle::Pair { u, v, radius, orientation: 1 }
    }

    pub fn radius(&self) -> f64 {
        match *self {
            Circle::Real { radius, .. } | Circle::Pair { radius, .. } => radius,
        }
    }

    pub fn orientation(&self) -> i8 {
        match *self {
            Circle::Real { orientation, .. } | Circle::Pair { orientation, .. } => orientation,
        }
    }

    /// Centres as points `(re, im)` of `C_J`.
    pub fn centers(&self) -> Vec<(f64, f64)> {
        match *self {
            Circle::Real { center, .. } => vec![(center, 0.0)],
            Circle::Pair { u, v, .. } => vec![(u, v), (u, -v)],
        }
    }

    pub fn with_radius(&self, r: f64) -> Self {
        match *self {
            Circle::Real { center, orientation, .. } => Circle::Real { center, radius: r, orientation },
            Circle::Pair { u, v, orientation, .. } => Circle::Pair { u, v, radius: r, orientation },
        }
    }

    fn validate(&self) -> Result<()> {
        let r = self.radius();
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Geometry(format!("circle radius must be positive, got {r}")));
        }
        if self.orientation().abs() != 1 {
            return Err(Error::Geometry("orientation must be +1 or -1".into()));
        }
        if let Circle::Pair { v, .. } = *self {
            if !(v > 0.0) {
                return Err(Error::Geometry(format!("conjugate pair needs v > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// A union of circles in `C_J`, closed under conjugation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Contour {
    #[serde(rename = "J")]
    pub j: ImaginaryUnit,
    pub circles: Vec<Circle>,
    pub nodes: usize,
}

/// A quadrature node `s` with weight `w` approximating `ds_J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub s: Quaternion,
    pub w: Quaternion,
}

impl Contour {
    pub fn new(j: ImaginaryUnit, circles: Vec<Circle>, nodes: usize) -> Result<Self> {
        let c = Self { j, circles, nodes };
        c.validate()?;
        Ok(c)
    }

    pub fn empty(j: ImaginaryUnit, nodes: usize) -> Self {
        Self { j, circles: Vec::new(), nodes }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Contour = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < MIN_NODES {
            return Err(Error::Geometry(format!("need at least {MIN_NODES} nodes per circle, got {}", self.nodes)));
        }
        self.circles.iter().try_for_each(Circle::validate)
    }

    pub fn is_empty(&self) -> bool {
        self.circles.is_empty()
    }

    pub fn with_nodes(&self, nodes: usize) -> Self {
        Self { nodes, ..self.clone() }
    }

    pub fn with_unit(&self, j: ImaginaryUnit) -> Self {
        Self { j, ..self.clone() }
    }

    /// Scales every radius by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { circles: self.circles.iter().map(|c| c.with_radius(c.radius() * factor)).collect(), ..self.clone() }
    }

    /// Trapezoid nodes `s_k = z0 + r exp(J theta_k)` with weights
    /// `w_k = orientation (2 pi / N) r exp(J theta_k)`.
    pub fn node_list(&self) -> Vec<Node> {
        let n = self.nodes;
        let h = std::f64::consts::TAU / n as f64;
        let mut out = Vec::with_capacity(n * self.circles.len() * 2);
        for c in &self.circles {
            let r = c.radius();
            let o = c.orientation() as f64;
            for (x, y) in c.centers() {
                let z0 = self.j.complex(x, y);
                for k in 0..n {
                    let e = self.j.exp(h * k as f64);
                    out.push(Node { s: z0 + e * r, w: e * (o * h * r) });
                }
            }
        }
        out
    }

    /// Sums `term(s_k, w_k)` over all nodes. Terms are evaluated in
    /// parallel and reduced in node order, so results are reproducible.
    pub fn sum<F>(&self, dim: usize, term: F) -> Result<QuatMatrix>
    where
        F: Fn(Quaternion, Quaternion) -> Result<QuatMatrix> + Sync,
    {
        let nodes = self.node_list();
        let terms: Vec<Result<QuatMatrix>> = nodes.par_iter().map(|nd| term(nd.s, nd.w)).collect();
        let mut acc = QuatMatrix::zeros(dim);
        for t in terms {
            acc += &t?;
        }
        Ok(acc)
    }
}

/// `(s, w)` pairs of the contour.
pub fn nodes(c: &Contour) -> Vec<(Quaternion, Quaternion)> {
    c.node_list().into_iter().map(|n| (n.s, n.w)).collect()
}

/// Left: `sum K(s_k) w_k f(s_k)`; right: `sum f(s_k) w_k K(s_k)`. No prefactor.
pub fn integrate<K, F>(c: &Contour, dim: usize, kernel: K, f: F, side: Side) -> Result<QuatMatrix>
where
    K: Fn(Quaternion) -> Result<QuatMatrix> + Sync,
    F: Fn(Quaternion) -> Quaternion + Sync,
{
    c.sum(dim, |s, w| {
        let k = kernel(s)?;
        Ok(match side {
            Side::Left => k.right_scale(w * f(s)),
            Side::Right => k.left_scale(f(s) * w),
        })
    })
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Smallest gap between distinct spheres, counting `2 v` between the two
/// traces of a non-real sphere; `None` for a single real point.
pub fn min_sphere_gap(spheres: &[SpectralSphere]) -> Option<f64> {
    let mut gap = f64::INFINITY;
    for (i, a) in spheres.iter().enumerate() {
        if a.v > 0.0 {
            gap = gap.min(2.0 * a.v);
        }
        for b in &spheres[i + 1..] {
            gap = gap.min(a.distance(b));
        }
    }
    (gap.is_finite() && gap > 0.0).then_some(gap)
}

/// Default clearance: a quarter of the smallest sphere gap.
pub fn default_margin(spheres: &[SpectralSphere]) -> f64 {
    min_sphere_gap(spheres).map_or(1.0, |g| 0.25 * g)
}

/// Single-linkage clusters of sphere indices under the half-plane metric.
pub fn cluster_spheres(spheres: &[SpectralSphere], indices: &[usize], threshold: f64) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..indices.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for a in 0..indices.len() {
        for b in (a + 1)..indices.len() {
            if spheres[indices[a]].distance(&spheres[indices[b]]) <= threshold {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for a in 0..indices.len() {
        let r = find(&mut parent, a);
        match roots.iter().position(|&x| x == r) {
            Some(g) => groups[g].push(indices[a]),
            None => {
                roots.push(r);
                groups.push(vec![indices[a]]);
            }
        }
    }
    groups
}

/// Radius balancing the inner and outer convergence ratios of the trapezoid
/// rule, clamped to `[inner + margin, outer - margin]`.
fn balanced_radius(inner: f64, outer: f64, margin: f64) -> Option<f64> {
    let lo = inner + margin;
    let hi = outer - margin;
    if lo > hi {
        return None;
    }
    let target = if outer.is_finite() {
        (inner.max(margin) * outer).sqrt()
    } else {
        (1.5 * inner).max(lo)
    };
    Some(target.clamp(lo, hi))
}

/// Circles enclosing exactly the traces of the selected spheres in `C_J`,
/// each with clearance at least `margin`.
pub fn auto_contour(
    spheres: &[SpectralSphere],
    selection: &[usize],
    margin: f64,
    j: ImaginaryUnit,
    nodes: usize,
) -> Result<Contour> {
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(Error::Geometry(format!("margin must be positive, got {margin}")));
    }
    if let Some(&bad) = selection.iter().find(|&&i| i >= spheres.len()) {
        return Err(Error::Geometry(format!("sphere index {bad} out of range ({} spheres)", spheres.len())));
    }
    let mut selected: Vec<usize> = selection.to_vec();
    selected.sort_unstable();
    selected.dedup();
    if selected.is_empty() {
        return Contour::new(j, Vec::new(), nodes);
    }
    let unselected: Vec<usize> = (0..spheres.len()).filter(|i| !selected.contains(i)).collect();
    for &a in &selected {
        for &b in &unselected {
            let d = spheres[a].distance(&spheres[b]);
            if d <= 2.0 * margin {
                return Err(Error::Geometry(format!(
                    "selected sphere {a} and unselected sphere {b} are {d:e} apart, need more than {:e}",
                    2.0 * margin
                )));
            }
        }
    }

    // Singular points of the kernels in C_J.
    let traces = |idx: &[usize]| -> Vec<(f64, f64)> {
        idx.iter()
            .flat_map(|&i| {
                let s = spheres[i];
                if s.v > 0.0 {
                    vec![(s.u, s.v), (s.u, -s.v)]
                } else {
                    vec![(s.u, 0.0)]
                }
            })
            .collect()
    };

    let mut circles = Vec::new();
    let clusters = if unselected.is_empty() {
        vec![selected.clone()]
    } else {
        cluster_spheres(spheres, &selected, 4.0 * margin)
    };
    for cluster in clusters {
        let others: Vec<usize> = (0..spheres.len()).filter(|i| !cluster.contains(i)).collect();
        let outside = traces(&others);
        let nearest = |z: (f64, f64), extra: &[(f64, f64)]| {
            outside.iter().chain(extra).map(|&p| dist(z, p)).fold(f64::INFINITY, f64::min)
        };

        let mut chosen = None;
        if cluster.iter().all(|&i| spheres[i].v > 0.0) {
            let m = cluster.len() as f64;
            let uc = cluster.iter().map(|&i| spheres[i].u).sum::<f64>() / m;
            let vc = cluster.iter().map(|&i| spheres[i].v).sum::<f64>() / m;
            let z = (uc, vc);
            let inner = cluster.iter().map(|&i| dist(z, (spheres[i].u, spheres[i].v))).fold(0.0, f64::max);
            let mirrored: Vec<(f64, f64)> = cluster.iter().map(|&i| (spheres[i].u, -spheres[i].v)).collect();
            let outer = nearest(z, &mirrored).min(vc);
            if let Some(r) = balanced_radius(inner, outer, margin) {
                chosen = Some(Circle::pair(uc, vc, r));
            }
        }
        if chosen.is_none() {
            let lo = cluster.iter().map(|&i| spheres[i].u).fold(f64::INFINITY, f64::min);
            let hi = cluster.iter().map(|&i| spheres[i].u).fold(f64::NEG_INFINITY, f64::max);
            let z = (0.5 * (lo + hi), 0.0);
            let inner = traces(&cluster).iter().map(|&p| dist(z, p)).fold(0.0, f64::max);
            let outer = nearest(z, &[]);
            if let Some(r) = balanced_radius(inner, outer, margin) {
                chosen = Some(Circle::real(z.0, r));
            }
        }
        match chosen {
            Some(c) => circles.push(c),
            None => {
                return Err(Error::Geometry(format!(
                    "no circle separates spheres {cluster:?} from the rest with clearance {margin:e}"
                )))
            }
        }
    }
    Contour::new(j, circles, nodes)
}
