//! Named operator identities, each evaluated as the norm of an explicitly
//! formed difference of its two sides.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::calculus::{
    apply_calculus, check_separates_spectrum, integrate_calculus, riesz_projector, riesz_projector_right, CalculusKind,
};
use crate::contour::{auto_contour, Circle, Contour, DEFAULT_NODES};
use crate::error::{Error, Result};
use crate::kernels::{KernelContext, KernelKind, KernelSet};
use crate::operators::{s_spectrum, CommutingOperator};
use crate::qlinalg::QuatMatrix;
use crate::quat::{qinv, qs_poly, ImaginaryUnit, Quaternion, SpectralSphere, ONE};
use crate::random::Sampler;
use crate::slicefn::{stem_product, stem_shift, Side, SlicePoly};

/// Outcome of one identity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub inputs: String,
    pub residual: f64,
    /// `max(|LHS|, |RHS|, 1)`.
    pub scale: f64,
    pub pass: bool,
}

impl IdentityReport {
    fn from_pairs(name: &str, inputs: String, pairs: &[(QuatMatrix, QuatMatrix)], tol: f64) -> Self {
        let mut residual: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for (l, r) in pairs {
            residual = residual.max((l - r).norm());
            scale = scale.max(l.norm()).max(r.norm());
        }
        let pass = residual.is_finite() && residual <= tol * scale;
        Self { name: name.to_string(), inputs, residual, scale, pass }
    }

    fn failed(name: &str, err: &Error) -> Self {
        Self { name: name.to_string(), inputs: format!("error: {err}"), residual: f64::INFINITY, scale: 1.0, pass: false }
    }

    pub fn relative(&self) -> f64 {
        self.residual / self.scale
    }
}

/// How an identity consumes its inputs, and which random family feeds it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `(T, s, p[, m][, B])`.
    Pointwise,
    /// Product rules: `(T, f, g)` on contours enclosing the spectrum.
    Product,
    /// `(T, f)` with left and right forms compared.
    Intrinsic,
    /// Vanishing integrals and projectors on a split spectrum.
    Split,
    /// Reproducing property of the P2 kernel: `(T, f, p)`.
    Reproducing,
}

impl Family {
    pub fn is_pointwise(self) -> bool {
        self == Family::Pointwise
    }
}

/// Every identity in the registry.
pub const REGISTRY: &[(&str, Family)] = &[
    ("sresc", Family::Pointwise),
    ("bres", Family::Pointwise),
    ("preseq", Family::Pointwise),
    ("ress1", Family::Pointwise),
    ("qres", Family::Pointwise),
    ("wrong", Family::Pointwise),
    ("qf_left", Family::Pointwise),
    ("qf_right", Family::Pointwise),
    ("l1_left", Family::Pointwise),
    ("l1_right", Family::Pointwise),
    ("fr2_left", Family::Pointwise),
    ("fr2_right", Family::Pointwise),
    ("genreseq_left", Family::Pointwise),
    ("genreseq_right", Family::Pointwise),
    ("prl", Family::Product),
    ("prr", Family::Product),
    ("laplca1", Family::Product),
    ("pr0", Family::Product),
    ("pr4", Family::Product),
    ("product1", Family::Product),
    ("mono", Family::Split),
    ("harmo", Family::Split),
    ("intri", Family::Intrinsic),
    ("inte4", Family::Intrinsic),
    ("risz", Family::Split),
    ("rp", Family::Split),
    ("app", Family::Reproducing),
];

/// Alternative readings of some identities. They are checked on request but
/// excluded from [`verify_all`]; several of them are expected to fail.
pub const VARIANTS: &[(&str, Family)] = &[
    ("ress1_printed", Family::Pointwise),
    ("genreseq_remark_printed", Family::Pointwise),
    ("genreseq_remark_corrected", Family::Pointwise),
    ("pr4_right_printed", Family::Product),
    ("pr4_right_reordered", Family::Product),
];

pub fn family(name: &str) -> Result<Family> {
    REGISTRY
        .iter()
        .chain(VARIANTS)
        .find(|(n, _)| *n == name)
        .map(|&(_, f)| f)
        .ok_or_else(|| Error::Parse(format!("unknown identity '{name}'")))
}

/// Extra inputs of pointwise identities.
#[derive(Debug, Clone)]
pub struct PointwiseOptions {
    /// Power in the generalized resolvent equation, at least 1.
    pub m: usize,
    /// Operator commuting with `T`, required by `bres`.
    pub b: Option<DMatrix<f64>>,
    pub tol: f64,
}

impl Default for PointwiseOptions {
    fn default() -> Self {
        Self { m: 1, b: None, tol: 1e-8 }
    }
}

fn needs_p(name: &str) -> bool {
    matches!(name, "sresc" | "bres" | "preseq" | "ress1" | "ress1_printed" | "qres" | "wrong")
}

fn resolvent_point<'a>(ctx: &'a KernelContext, q: Quaternion, label: &str) -> Result<KernelSet<'a>> {
    ctx.at(q).map_err(|e| match e {
        Error::Singular { .. } => Error::Precondition(format!("{label} = {q} lies in the S-spectrum")),
        other => other,
    })
}

fn check_commutes(t: &CommutingOperator, b: &DMatrix<f64>) -> Result<()> {
    if b.nrows() != t.dim() || b.ncols() != t.dim() {
        return Err(Error::DimensionMismatch { expected: t.dim(), found: b.nrows() });
    }
    for c in t.components() {
        let d = (b * c - c * b).norm();
        if d > 1e-10 * (1.0 + b.norm() * c.norm()) {
            return Err(Error::Precondition(format!("B does not commute with T (defect {d:e})")));
        }
    }
    Ok(())
}

/// `s^m` for integer `m`.
fn spow(s: Quaternion, m: i64) -> Result<Quaternion> {
    s.powz(m as i32)
}

/// Evaluates the named pointwise identity at `(T, s, p)`.
pub fn verify_pointwise(
    name: &str,
    t: &CommutingOperator,
    s: Quaternion,
    p: Quaternion,
    opts: &PointwiseOptions,
) -> Result<IdentityReport> {
    if !family(name)?.is_pointwise() {
        return Err(Error::Precondition(format!("'{name}' is not a pointwise identity")));
    }
    let pairs = pointwise_pairs(name, t, s, p, opts)?;
    let mut inputs = format!("n={} s={}", t.dim(), q4(s));
    if needs_p(name) {
        inputs.push_str(&format!(" p={}", q4(p)));
    }
    if name.starts_with("genreseq") {
        inputs.push_str(&format!(" m={}", opts.m));
    }
    Ok(IdentityReport::from_pairs(name, inputs, &pairs, opts.tol))
}

fn pointwise_pairs(
    name: &str,
    t: &CommutingOperator,
    s: Quaternion,
    p: Quaternion,
    opts: &PointwiseOptions,
) -> Result<Vec<(QuatMatrix, QuatMatrix)>> {
    use KernelKind::*;
    let n = t.dim();
    let ctx = KernelContext::new(t);
    let ks = resolvent_point(&ctx, s, "s")?;
    let (tm, tb, tv) = (t.matrix(), t.conj_matrix(), t.vector_matrix());
    let qs = ks.qcs_inv().clone();

    if needs_p(name) {
        let kp = resolvent_point(&ctx, p, "p")?;
        let q = qs_poly(s, p);
        if q.norm() <= 1e-12 * (1.0 + s.norm_sqr()) {
            return Err(Error::Precondition(format!("s = {s} lies on the sphere of p = {p}")));
        }
        let qinv_sp = qinv(q)?;
        // [D p - conj(s) D] Q_s(p)^{-1}
        let res = |d: &QuatMatrix| (&d.right_scale(p) - &d.left_scale(s.conj())).right_scale(qinv_sp);
        let qp = kp.qcs_inv().clone();
        let (sr, sl) = (ks.get(SRight), kp.get(SLeft));
        let pair = match name {
            "sresc" => (&sr * &sl, res(&(&sr - &sl))),
            "bres" => {
                let b = opts.b.as_ref().ok_or_else(|| Error::Precondition("bres needs an operator B".into()))?;
                check_commutes(t, b)?;
                let bq = QuatMatrix::from_real(b);
                (&(&sr * &bq) * &sl, res(&(&(&sr * &bq) - &(&bq * &sl))))
            }
            "preseq" | "ress1" | "ress1_printed" => {
                let (p2r, p2l) = (ks.get(P2Right), kp.get(P2Left));
                let mut lhs = &(&sr * &p2l) + &(&p2r * &sl);
                let corr = if name == "preseq" {
                    (&(&qs * &tv) * &qp).scale(4.0)
                } else {
                    let (fr, fl) = (ks.get(FRight), kp.get(FLeft));
                    let tv2 = &tv * &tv;
                    let tv3 = &tv2 * &tv;
                    let mid = if name == "ress1" { &tv2 } else { &tv };
                    let sum = &(&(&(&p2r * &tv) * &p2l) + &(&(&p2r * mid) * &fl))
                        + &(&(&(&fr * &tv2) * &p2l) + &(&(&fr * &tv3) * &fl));
                    sum.scale(0.25)
                };
                lhs -= &corr;
                (lhs, res(&(&p2r - &p2l)))
            }
            "qres" => {
                let lhs = &(&(&qs * &sl) + &(&sr * &qp)) - &(&(&qs * &tv) * &qp).scale(2.0);
                (lhs, res(&(&qs - &qp)))
            }
            "wrong" => {
                let qq = &qs * &qp;
                let qtq = &(&qs * &tb) * &qp;
                let qt2q = &(&(&qs * &tb) * &tb) * &qp;
                let lhs = &(&qq.left_scale(s).right_scale(p) - &qtq.left_scale(s)) - &(&qtq.right_scale(p) - &qt2q);
                let d1 = &qs.left_scale(s) - &qp.left_scale(p);
                let d2 = &(&tb * &qp) - &(&qs * &tb);
                (lhs, &res(&d1) + &res(&d2))
            }
            _ => unreachable!("pointwise identity without p: {name}"),
        };
        return Ok(vec![pair]);
    }

    let pair = match name {
        "qf_left" => {
            let fl = ks.get(FLeft);
            (&fl.right_scale(s) - &(&tm * &fl), qs.scale(-4.0))
        }
        "qf_right" => {
            let fr = ks.get(FRight);
            (&fr.left_scale(s) - &(&fr * &tm), qs.scale(-4.0))
        }
        "l1_left" => (qs.clone(), (&ks.get(P2Left) + &(&tv * &ks.get(FLeft))).scale(0.25)),
        "l1_right" => (qs.clone(), (&ks.get(P2Right) + &(&ks.get(FRight) * &tv)).scale(0.25)),
        "fr2_left" => {
            let p2 = ks.get(P2Left);
            (&p2.right_scale(s) - &(&tm * &p2), (&ks.get(SLeft) - &(&tv * &qs)).scale(4.0))
        }
        "fr2_right" => {
            let p2 = ks.get(P2Right);
            (&p2.left_scale(s) - &(&p2 * &tm), (&ks.get(SRight) - &(&qs * &tv)).scale(4.0))
        }
        "genreseq_left" | "genreseq_right" | "genreseq_remark_printed" | "genreseq_remark_corrected" => {
            let m = opts.m;
            if m == 0 {
                return Err(Error::Precondition("the generalized resolvent equation needs m >= 1".into()));
            }
            let left = name != "genreseq_right";
            let tpow: Vec<QuatMatrix> = (0..=m + 1).map(|i| tm.powi(i as u32)).collect();
            let sm = spow(s, m as i64)?;
            let mut a = QuatMatrix::zeros(n);
            let mut b = QuatMatrix::zeros(n);
            let (sk, p2) = if left { (ks.get(SLeft), ks.get(P2Left)) } else { (ks.get(SRight), ks.get(P2Right)) };
            for i in 0..m {
                let si = spow(s, (m - i - 1) as i64)?;
                if left {
                    a += &(&tpow[i] * &sk).right_scale(si);
                    b += &(&(&tpow[i] * &tv) * &qs).right_scale(si);
                } else {
                    a += &(&sk * &tpow[i]).left_scale(si);
                    b += &(&(&qs * &tv) * &tpow[i]).left_scale(si);
                }
            }
            let lhs = if left {
                &p2.right_scale(sm) - &(&tpow[m] * &p2)
            } else {
                &p2.left_scale(sm) - &(&p2 * &tpow[m])
            };
            let b = match name {
                "genreseq_remark_printed" | "genreseq_remark_corrected" => {
                    let range = if name == "genreseq_remark_printed" { 1..m + 1 } else { 0..m };
                    let mut first = QuatMatrix::zeros(n);
                    for i in range {
                        first += &(&tpow[i + 1] * &qs).right_scale(spow(s, m as i64 - i as i64 - 1)?);
                    }
                    let mut second = QuatMatrix::zeros(n);
                    for i in 0..m {
                        second += &(&tpow[i] * &qs).right_scale(spow(s, (m - i - 1) as i64)?);
                    }
                    (&first - &(&tb * &second)).scale(2.0)
                }
                _ => b.scale(4.0),
            };
            (lhs, &a.scale(4.0) - &b)
        }
        _ => unreachable!("unhandled pointwise identity {name}"),
    };
    Ok(vec![pair])
}

fn calc(kind: CalculusKind, f: &SlicePoly, t: &CommutingOperator, c: &Contour) -> Result<QuatMatrix> {
    apply_calculus(kind, f, t, c)
}

/// Evaluates the named integral identity.
///
/// Product rules compute every term with `f` on `c_inner` and every term
/// with `g` or `fg` on `c_outer`; both contours must enclose the spectrum.
/// `intri`/`inte4` compare the left form on `c_inner` with the right form on
/// `c_outer`. `mono`/`harmo` integrate over both contours, which may enclose
/// part of the spectrum. `risz`/`rp` form the left projector on `c_inner` and
/// the right one on `c_outer`, which must enclose the same spheres.
pub fn verify_integral(
    name: &str,
    t: &CommutingOperator,
    f: &SlicePoly,
    g: &SlicePoly,
    c_inner: &Contour,
    c_outer: &Contour,
    tol: f64,
) -> Result<IdentityReport> {
    let pairs = integral_sides(name, t, f, g, c_inner, c_outer)?;
    let inputs = format!("n={} f={} g={} nodes={}", t.dim(), coeff_list(f), coeff_list(g), c_outer.nodes);
    Ok(IdentityReport::from_pairs(name, inputs, &pairs, tol))
}

/// The `(LHS, RHS)` pairs that [`verify_integral`] compares.
pub fn integral_sides(
    name: &str,
    t: &CommutingOperator,
    f: &SlicePoly,
    g: &SlicePoly,
    c_inner: &Contour,
    c_outer: &Contour,
) -> Result<Vec<(QuatMatrix, QuatMatrix)>> {
    use CalculusKind::{F, P2, Q, S};
    let fam = family(name)?;
    if matches!(fam, Family::Pointwise | Family::Reproducing) {
        return Err(Error::Precondition(format!("'{name}' is not an integral identity")));
    }
    let (ci, co) = (c_inner, c_outer);
    let tv = t.vector_matrix();
    let tb = t.conj_matrix();
    let pairs: Vec<(QuatMatrix, QuatMatrix)> = match fam {
        Family::Product => {
            if !f.is_intrinsic() {
                return Err(Error::Precondition("the product rules need an intrinsic f".into()));
            }
            let right = matches!(name, "prr" | "pr4_right_printed" | "pr4_right_reordered");
            let g = g.with_side(if right { Side::Right } else { Side::Left });
            let f = f.with_side(g.side);
            let fg = stem_product(&f, &g)?;
            match name {
                "prl" => {
                    let rhs = &(&(&calc(S, &f, t, ci)? * &calc(P2, &g, t, co)?) + &(&calc(P2, &f, t, ci)? * &calc(S, &g, t, co)?))
                        - &(&(&calc(Q, &f, t, ci)? * &tv) * &calc(Q, &g, t, co)?);
                    vec![(calc(P2, &fg, t, co)?, rhs)]
                }
                "prr" => {
                    let rhs = &(&(&calc(S, &g, t, co)? * &calc(P2, &f, t, ci)?) + &(&calc(P2, &g, t, co)? * &calc(S, &f, t, ci)?))
                        - &(&(&calc(Q, &g, t, co)? * &tv) * &calc(Q, &f, t, ci)?);
                    vec![(calc(P2, &fg, t, co)?, rhs)]
                }
                "laplca1" | "pr0" => {
                    let lhs = calc(F, &fg, t, co)?;
                    let (sf, ff, sg, fgv) = (calc(S, &f, t, ci)?, calc(F, &f, t, ci)?, calc(S, &g, t, co)?, calc(F, &g, t, co)?);
                    let base = &(&ff * &sg) + &(&sf * &fgv);
                    let rhs = if name == "pr0" {
                        &base - &(&calc(Q, &f, t, ci)? * &calc(Q, &g, t, co)?)
                    } else {
                        let (pf, pg) = (calc(P2, &f, t, ci)?, calc(P2, &g, t, co)?);
                        let tv2 = &tv * &tv;
                        let corr = &(&(&pf * &pg) + &(&(&pf * &tv) * &fgv))
                            + &(&(&(&ff * &tv) * &pg) + &(&(&ff * &tv2) * &fgv));
                        &base - &corr.scale(0.25)
                    };
                    vec![(lhs, rhs)]
                }
                "pr4" | "pr4_right_printed" => {
                    let (sf, qf, sg, qg) = (calc(S, &f, t, ci)?, calc(Q, &f, t, ci)?, calc(S, &g, t, co)?, calc(Q, &g, t, co)?);
                    let rhs = &(&(&sf * &qg) + &(&qf * &sg)) + &(&(&qf * &tv) * &qg);
                    vec![(calc(Q, &fg, t, co)?, rhs)]
                }
                "pr4_right_reordered" => {
                    let (sf, qf, sg, qg) = (calc(S, &f, t, ci)?, calc(Q, &f, t, ci)?, calc(S, &g, t, co)?, calc(Q, &g, t, co)?);
                    let rhs = &(&(&qg * &sf) + &(&sg * &qf)) + &(&(&qg * &tv) * &qf);
                    vec![(calc(Q, &fg, t, co)?, rhs)]
                }
                "product1" => {
                    let lhs = (&calc(Q, &stem_shift(&fg), t, co)? - &(&tb * &calc(Q, &fg, t, co)?)).scale(2.0);
                    let (sf, qf, sg, qg) = (calc(S, &f, t, ci)?, calc(Q, &f, t, ci)?, calc(S, &g, t, co)?, calc(Q, &g, t, co)?);
                    let rhs = &(&(&sf * &calc(Q, &stem_shift(&g), t, co)?) - &(&(&sf * &tb) * &qg))
                        + &(&(&calc(Q, &stem_shift(&f), t, ci)? * &sg) - &(&(&qf * &tb) * &sg));
                    vec![(lhs, rhs)]
                }
                _ => unreachable!("unhandled product rule {name}"),
            }
        }
        Family::Intrinsic => {
            if !f.is_intrinsic() {
                return Err(Error::Precondition(format!("{name} needs an intrinsic f")));
            }
            let kinds: &[CalculusKind] = if name == "intri" { &[S, Q, F] } else { &[P2] };
            let (fl, fr) = (f.with_side(Side::Left), f.with_side(Side::Right));
            kinds
                .iter()
                .map(|&k| Ok((calc(k, &fl, t, ci)?, calc(k, &fr, t, co)?)))
                .collect::<Result<_>>()?
        }
        Family::Split => {
            let spectrum = s_spectrum(t)?;
            t.require_projector_hypotheses()?;
            let zero = QuatMatrix::zeros(t.dim());
            match name {
                "mono" | "harmo" => {
                    let kind = if name == "mono" { P2 } else { Q };
                    let mut out = Vec::new();
                    for c in [ci, co] {
                        check_separates_spectrum(c, &spectrum)?;
                        for side in [Side::Left, Side::Right] {
                            out.push((integrate_calculus(kind, &SlicePoly::constant(side, ONE), t, c)?, zero.clone()));
                        }
                    }
                    out
                }
                "risz" | "rp" => {
                    let kind = if name == "risz" { P2 } else { Q };
                    let pl = riesz_projector(kind, t, ci)?;
                    let pr = riesz_projector_right(kind, t, co)?;
                    let mut out = vec![(&pl * &pl, pl.clone()), (pl.clone(), pr)];
                    if name == "risz" {
                        let tm = t.matrix();
                        out.push((&tm * &pl, &pl * &tm));
                    }
                    out
                }
                _ => unreachable!("unhandled split identity {name}"),
            }
        }
        Family::Pointwise | Family::Reproducing => unreachable!(),
    };
    Ok(pairs)
}

fn q4(q: Quaternion) -> String {
    format!("[{:?}, {:?}, {:?}, {:?}]", q.w, q.x, q.y, q.z)
}

fn coeff_list(f: &SlicePoly) -> String {
    let items: Vec<String> = f.coeffs.iter().map(|&c| q4(c)).collect();
    format!("[{}]", items.join(", "))
}

/// `(1/2pi) int f(s) ds_J (conj(s) B - B p) Q_s(p)^{-1} = B f(p)` with
/// `B = P2_L(p, T)`, for intrinsic `f` and a contour enclosing `[p]`.
pub fn verify_app(t: &CommutingOperator, f: &SlicePoly, p: Quaternion, c: &Contour, tol: f64) -> Result<IdentityReport> {
    if !f.is_intrinsic() {
        return Err(Error::Precondition("app needs an intrinsic f".into()));
    }
    let ctx = KernelContext::new(t);
    let b = resolvent_point(&ctx, p, "p")?.get(KernelKind::P2Left);
    let sum = c.sum(t.dim(), |s, w| {
        let d = &b.left_scale(s.conj()) - &b.right_scale(p);
        Ok(d.right_scale(qinv(qs_poly(s, p))?).left_scale(f.eval(s) * w))
    })?;
    let lhs = sum.scale(1.0 / std::f64::consts::TAU);
    let rhs = b.right_scale(f.eval(p));
    let inputs = format!("n={} p={} f={} nodes={}", t.dim(), q4(p), coeff_list(f), c.nodes);
    Ok(IdentityReport::from_pairs("app", inputs, &[(lhs, rhs)], tol))
}

/// Number of random trials per registry entry in [`verify_all`].
pub const POINTWISE_TRIALS: usize = 10;
pub const INTEGRAL_TRIALS: usize = 3;

fn entry_seed(seed: u64, name: &str, trial: usize) -> u64 {
    // FNV-1a over the name, mixed with the seed and trial index.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
    }
    h ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (trial as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9)
}

/// Margin equal to a fifth of the gap between selected and unselected spheres.
pub fn split_margin(spectrum: &[SpectralSphere], selection: &[usize]) -> f64 {
    let mut gap = f64::INFINITY;
    for (i, a) in spectrum.iter().enumerate() {
        for (j, b) in spectrum.iter().enumerate() {
            if selection.contains(&i) && !selection.contains(&j) {
                gap = gap.min(a.distance(b));
            }
        }
    }
    if gap.is_finite() {
        0.2 * gap
    } else {
        crate::contour::default_margin(spectrum)
    }
}

/// One circle centred on the real axis around the whole spectrum, with
/// radius `factor` times `max(1.5 rho, rho + margin)` where `rho` is the
/// largest distance from the centre to a spectral point.
pub fn enclosing_contour(spectrum: &[SpectralSphere], factor: f64, j: ImaginaryUnit, nodes: usize) -> Result<Contour> {
    if !(factor >= 1.0 && factor.is_finite()) {
        return Err(Error::Geometry(format!("enclosing factor must be at least 1, got {factor}")));
    }
    let lo = spectrum.iter().map(|s| s.u).fold(f64::INFINITY, f64::min);
    let hi = spectrum.iter().map(|s| s.u).fold(f64::NEG_INFINITY, f64::max);
    let center = if spectrum.is_empty() { 0.0 } else { 0.5 * (lo + hi) };
    let rho = spectrum.iter().map(|s| s.distance_uv(center, 0.0)).fold(0.0, f64::max);
    let margin = crate::contour::default_margin(spectrum);
    Contour::new(j, vec![Circle::real(center, factor * (1.5 * rho).max(rho + margin))], nodes)
}

/// Runs one randomized trial of the named identity. `op` replaces the
/// random operator when given.
pub fn verify_trial(name: &str, seed: u64, trial: usize, tol: f64, op: Option<&CommutingOperator>) -> Result<IdentityReport> {
    let fam = family(name)?;
    let mut rng = Sampler::new(entry_seed(seed, name, trial));
    let n = 1 + trial % 3;
    match fam {
        Family::Pointwise => {
            let t = match op {
                Some(t) => t.clone(),
                None if trial % 4 == 3 => rng.diagonal_operator(n, trial.is_multiple_of(2)),
                None => rng.commuting_operator(n, trial.is_multiple_of(2)),
            };
            let sp = s_spectrum(&t)?;
            let s = rng.point_off_spectrum(&sp, 0.5, 2.0);
            let mut avoid = sp.clone();
            avoid.push(s.sphere());
            let p = rng.point_avoiding(&avoid, 0.5, 2.0);
            let opts = PointwiseOptions { m: 1 + rng.index(5), b: Some(rng.commuting_polynomial(&t)), tol };
            verify_pointwise(name, &t, s, p, &opts)
        }
        Family::Product | Family::Intrinsic => {
            let t = match op {
                Some(t) => t.clone(),
                None => rng.real_spectrum_operator(n),
            };
            let (df, dg) = (rng.index(5), rng.index(5));
            let f = rng.intrinsic_poly(df);
            let g = rng.poly(Side::Left, dg);
            let sp = s_spectrum(&t)?;
            let inner = enclosing_contour(&sp, 1.0, rng.imaginary_unit(), DEFAULT_NODES)?;
            let outer = enclosing_contour(&sp, 1.4, rng.imaginary_unit(), DEFAULT_NODES)?;
            verify_integral(name, &t, &f, &g, &inner, &outer, tol)
        }
        Family::Split => {
            let (t, selection) = match op {
                Some(t) => {
                    let sp = s_spectrum(t)?;
                    let all: Vec<usize> = (0..sp.len()).collect();
                    let clusters = crate::contour::cluster_spheres(&sp, &all, 4.0 * crate::contour::default_margin(&sp));
                    (t.clone(), clusters.into_iter().next().unwrap_or_default())
                }
                None => rng.split_operator(2 + trial % 2),
            };
            let sp = s_spectrum(&t)?;
            let margin = split_margin(&sp, &selection);
            let inner = auto_contour(&sp, &selection, margin, rng.imaginary_unit(), DEFAULT_NODES)?;
            let outer = if name == "mono" || name == "harmo" {
                enclosing_contour(&sp, 1.2, rng.imaginary_unit(), DEFAULT_NODES)?
            } else {
                auto_contour(&sp, &selection, 0.75 * margin, rng.imaginary_unit(), DEFAULT_NODES)?
            };
            let one = SlicePoly::constant(Side::Left, ONE);
            verify_integral(name, &t, &one, &one, &inner, &outer, tol)
        }
        Family::Reproducing => {
            let t = match op {
                Some(t) => t.clone(),
                None => rng.commuting_operator(n, trial.is_multiple_of(2)),
            };
            let sp = s_spectrum(&t)?;
            let p = rng.point_off_spectrum(&sp, 0.5, 2.0);
            let df = rng.index(5);
            let f = rng.intrinsic_poly(df);
            let j = rng.imaginary_unit();
            let c = Contour::new(j, vec![Circle::real(0.0, p.norm() + 1.0)], DEFAULT_NODES)?;
            verify_app(&t, &f, p, &c, tol)
        }
    }
}

/// Runs `trials` trials and keeps the one with the largest relative residual.
pub fn verify_random(
    name: &str,
    seed: u64,
    trials: usize,
    tol: f64,
    op: Option<&CommutingOperator>,
) -> Result<IdentityReport> {
    let mut worst: Option<IdentityReport> = None;
    for k in 0..trials.max(1) {
        let r = verify_trial(name, seed, k, tol, op)?;
        if worst.as_ref().is_none_or(|w| !(r.relative() <= w.relative())) {
            worst = Some(r);
        }
    }
    Ok(worst.expect("at least one trial"))
}

/// Every registry entry on seeded random inputs. Errors become failing rows.
pub fn verify_all(seed: u64, tol: f64) -> Vec<IdentityReport> {
    REGISTRY
        .iter()
        .map(|&(name, fam)| {
            let trials = if fam.is_pointwise() { POINTWISE_TRIALS } else { INTEGRAL_TRIALS };
            verify_random(name, seed, trials, tol, None).unwrap_or_else(|e| IdentityReport::failed(name, &e))
        })
        .collect()
}

/// Writes reports as CSV with columns `name,residual,scale,pass`.
pub fn reports_to_csv(reports: &[IdentityReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "residual", "scale", "pass"]).map_err(|e| Error::Numeric(e.to_string()))?;
    for r in reports {
        w.write_record([r.name.clone(), format!("{:.16e}", r.residual), format!("{:.16e}", r.scale), r.pass.to_string()])
            .map_err(|e| Error::Numeric(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numeric(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Numeric(e.to_string()))
}
