//! The S-, Q-, P2- and F-functional calculi, moment formulas and Riesz projectors.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::contour::Contour;
use crate::error::{Error, Result};
use crate::kernels::{KernelContext, KernelKind};
use crate::operators::{s_spectrum, CommutingOperator};
use crate::qlinalg::QuatMatrix;
use crate::quat::SpectralSphere;
use crate::slicefn::{FueterOp, Side, SlicePoly};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalculusKind {
    /// `f(T)`
    S,
    /// `(D f)(T)`
    Q,
    /// `(Dbar f)(T)`
    P2,
    /// `(Delta f)(T)`
    F,
}

impl CalculusKind {
    pub const ALL: [CalculusKind; 4] = [CalculusKind::S, CalculusKind::Q, CalculusKind::P2, CalculusKind::F];

    pub fn prefactor(self) -> f64 {
        match self {
            CalculusKind::Q => -1.0 / PI,
            _ => 1.0 / (2.0 * PI),
        }
    }

    pub fn kernel(self, side: Side) -> KernelKind {
        match (self, side) {
            (CalculusKind::S, Side::Left) => KernelKind::SLeft,
            (CalculusKind::S, Side::Right) => KernelKind::SRight,
            (CalculusKind::Q, _) => KernelKind::QcsInv,
            (CalculusKind::P2, Side::Left) => KernelKind::P2Left,
            (CalculusKind::P2, Side::Right) => KernelKind::P2Right,
            (CalculusKind::F, Side::Left) => KernelKind::FLeft,
            (CalculusKind::F, Side::Right) => KernelKind::FRight,
        }
    }

    /// The Fueter operator whose image the calculus evaluates.
    pub fn fueter_op(self) -> Option<FueterOp> {
        match self {
            CalculusKind::S => None,
            CalculusKind::Q => Some(FueterOp::D),
            CalculusKind::P2 => Some(FueterOp::Dbar),
            CalculusKind::F => Some(FueterOp::Delta),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CalculusKind::S => "s",
            CalculusKind::Q => "q",
            CalculusKind::P2 => "p2",
            CalculusKind::F => "f",
        }
    }
}

impl fmt::Display for CalculusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CalculusKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s" => Ok(CalculusKind::S),
            "q" => Ok(CalculusKind::Q),
            "p2" => Ok(CalculusKind::P2),
            "f" => Ok(CalculusKind::F),
            other => Err(Error::Parse(format!("unknown calculus '{other}', expected s|q|p2|f"))),
        }
    }
}

/// Relative distance below which a spectral trace counts as lying on a circle.
const BOUNDARY_TOL: f64 = 1e-9;

/// Winding number of the contour around the point `(re, im)` of `C_J`.
fn winding(c: &Contour, p: (f64, f64)) -> Result<i32> {
    let mut w = 0;
    for circ in &c.circles {
        for z in circ.centers() {
            let d = ((z.0 - p.0).powi(2) + (z.1 - p.1).powi(2)).sqrt();
            let r = circ.radius();
            if (d - r).abs() <= BOUNDARY_TOL * (1.0 + r) {
                return Err(Error::Geometry(format!("spectral point ({}, {}) lies on the contour", p.0, p.1)));
            }
            if d < r {
                w += circ.orientation() as i32;
            }
        }
    }
    Ok(w)
}

/// Windings of both traces of every sphere.
fn sphere_windings(c: &Contour, spectrum: &[SpectralSphere]) -> Result<Vec<(i32, i32)>> {
    spectrum.iter().map(|s| Ok((winding(c, (s.u, s.v))?, winding(c, (s.u, -s.v))?))).collect()
}

/// Requires every spectral trace to be enclosed exactly once.
pub fn check_encloses_spectrum(c: &Contour, spectrum: &[SpectralSphere]) -> Result<()> {
    for (s, (a, b)) in spectrum.iter().zip(sphere_windings(c, spectrum)?) {
        if a != 1 || b != 1 {
            return Err(Error::Geometry(format!("contour does not enclose the sphere ({}, {}) exactly once", s.u, s.v)));
        }
    }
    Ok(())
}

/// Requires every spectral trace to be enclosed once or not at all, with
/// both traces of a sphere treated alike.
pub fn check_separates_spectrum(c: &Contour, spectrum: &[SpectralSphere]) -> Result<()> {
    for (s, (a, b)) in spectrum.iter().zip(sphere_windings(c, spectrum)?) {
        if a != b || !(a == 0 || a == 1) {
            return Err(Error::Geometry(format!("contour is not admissible for the sphere ({}, {})", s.u, s.v)));
        }
    }
    Ok(())
}

/// Prefactor times the one-sided pairing, with no geometric checks.
pub fn integrate_calculus(kind: CalculusKind, f: &SlicePoly, t: &CommutingOperator, c: &Contour) -> Result<QuatMatrix> {
    let ctx = KernelContext::new(t);
    let kk = kind.kernel(f.side);
    let sum = c.sum(t.dim(), |s, w| {
        let k = ctx.at(s)?.get(kk);
        Ok(match f.side {
            Side::Left => k.right_scale(w * f.eval(s)),
            Side::Right => k.left_scale(f.eval(s) * w),
        })
    })?;
    Ok(sum.scale(kind.prefactor()))
}

/// Evaluates the calculus of `kind` on the stem `f`: `f(T)`, `(Df)(T)`,
/// `(Dbar f)(T)` or `(Delta f)(T)`. The contour must enclose the whole
/// S-spectrum.
pub fn apply_calculus(kind: CalculusKind, f: &SlicePoly, t: &CommutingOperator, c: &Contour) -> Result<QuatMatrix> {
    check_encloses_spectrum(c, &s_spectrum(t)?)?;
    integrate_calculus(kind, f, t, c)
}

/// `T^j conj(T)^k` for all `j + k <= m`.
struct Powers {
    t: Vec<QuatMatrix>,
    tb: Vec<QuatMatrix>,
}

impl Powers {
    fn new(op: &CommutingOperator, m: usize) -> Self {
        let n = op.dim();
        let (tm, tbm) = (op.matrix(), op.conj_matrix());
        let mut t = vec![QuatMatrix::identity(n)];
        let mut tb = vec![QuatMatrix::identity(n)];
        for i in 0..m {
            t.push(&t[i] * &tm);
            tb.push(&tb[i] * &tbm);
        }
        Self { t, tb }
    }

    fn mixed(&self, a: usize, b: usize) -> QuatMatrix {
        &self.t[a] * &self.tb[b]
    }
}

/// Closed forms of the calculi on monomials.
///
/// S: `T^m`. Q: `-2 sum_{k=1}^m T^{m-k} conj(T)^{k-1}`.
/// F: `-4 sum_{k=1}^{m-1} (m-k) T^{m-1-k} conj(T)^{k-1}`.
/// P2: `2 [(m+1) T^m + sum_{k=0}^m T^{m-k} conj(T)^k]`, the value on `q^{m+1}`.
pub fn moment_closed_form(kind: CalculusKind, t: &CommutingOperator, m: usize) -> QuatMatrix {
    let n = t.dim();
    let pw = Powers::new(t, m + 1);
    let mut acc = QuatMatrix::zeros(n);
    match kind {
        CalculusKind::S => acc = pw.t[m].clone(),
        CalculusKind::Q => {
            for k in 1..=m {
                acc += &pw.mixed(m - k, k - 1);
            }
            acc = acc.scale(-2.0);
        }
        CalculusKind::F => {
            for k in 1..m {
                acc += &pw.mixed(m - 1 - k, k - 1).scale((m - k) as f64);
            }
            acc = acc.scale(-4.0);
        }
        CalculusKind::P2 => acc = p2_moment_undoubled(t, m).scale(2.0),
    }
    acc
}

/// `(m+1) T^m + sum_{k=0}^m T^{m-k} conj(T)^k`, without the leading factor 2.
pub fn p2_moment_undoubled(t: &CommutingOperator, m: usize) -> QuatMatrix {
    let pw = Powers::new(t, m);
    let mut acc = pw.t[m].scale((m + 1) as f64);
    for k in 0..=m {
        acc += &pw.mixed(m - k, k);
    }
    acc
}

/// The value of the calculus on the stem `q^m`.
pub fn monomial_value(kind: CalculusKind, t: &CommutingOperator, m: usize) -> QuatMatrix {
    match (kind, m) {
        (CalculusKind::P2, 0) => QuatMatrix::zeros(t.dim()),
        (CalculusKind::P2, m) => moment_closed_form(kind, t, m - 1),
        _ => moment_closed_form(kind, t, m),
    }
}

/// Degree of the monomial each projector integrates against the kernel.
fn projector_weight(kind: CalculusKind) -> (f64, usize) {
    match kind {
        CalculusKind::S => (1.0 / (2.0 * PI), 0),
        CalculusKind::Q => (1.0 / (2.0 * PI), 1),
        CalculusKind::P2 => (1.0 / (8.0 * PI), 1),
        CalculusKind::F => (-1.0 / (8.0 * PI), 2),
    }
}

fn check_projector(kind: CalculusKind, t: &CommutingOperator, c: &Contour) -> Result<()> {
    if kind != CalculusKind::S {
        t.require_projector_hypotheses()?;
    }
    check_separates_spectrum(c, &s_spectrum(t)?)
}

/// Riesz projector `c_K * int K(s) ds_J s^d` over the spectral part
/// enclosed by `c`. Prefactors and degrees: S `(1/2pi, 0)`, Q `(1/2pi, 1)`,
/// P2 `(1/8pi, 1)`, F `(-1/8pi, 2)`.
pub fn riesz_projector(kind: CalculusKind, t: &CommutingOperator, c: &Contour) -> Result<QuatMatrix> {
    riesz_projector_sided(kind, t, c, Side::Left)
}

/// The projector with the right kernel and the monomial on the left.
pub fn riesz_projector_right(kind: CalculusKind, t: &CommutingOperator, c: &Contour) -> Result<QuatMatrix> {
    riesz_projector_sided(kind, t, c, Side::Right)
}

fn riesz_projector_sided(kind: CalculusKind, t: &CommutingOperator, c: &Contour, side: Side) -> Result<QuatMatrix> {
    check_projector(kind, t, c)?;
    let (pref, deg) = projector_weight(kind);
    let ctx = KernelContext::new(t);
    let kk = kind.kernel(side);
    let sum = c.sum(t.dim(), |s, w| {
        let k = ctx.at(s)?.get(kk);
        let mono = s.powi(deg as u32);
        Ok(match side {
            Side::Left => k.right_scale(w * mono),
            Side::Right => k.left_scale(mono * w),
        })
    })?;
    Ok(sum.scale(pref))
}

/// Outcome of the node-doubling harness.
#[derive(Debug, Clone)]
pub struct Converged {
    pub value: QuatMatrix,
    pub nodes: usize,
    /// Relative change of the last doubling.
    pub change: f64,
    pub converged: bool,
}

pub const MAX_NODES: usize = 8192;

/// Doubles the node count until two successive results agree within `tol`
/// (relative) or `max_nodes` is reached.
pub fn converge<F>(c: &Contour, tol: f64, max_nodes: usize, eval: F) -> Result<Converged>
where
    F: Fn(&Contour) -> Result<QuatMatrix>,
{
    let mut n = c.nodes;
    let mut prev = eval(&c.with_nodes(n))?;
    loop {
        let next_n = 2 * n;
        if next_n > max_nodes {
            return Ok(Converged { value: prev, nodes: n, change: f64::INFINITY, converged: false });
        }
        let next = eval(&c.with_nodes(next_n))?;
        let change = (&next - &prev).norm() / next.norm().max(1.0);
        if change <= tol {
            return Ok(Converged { value: next, nodes: next_n, change, converged: true });
        }
        prev = next;
        n = next_n;
    }
}
