//! Resolvent kernels of the S-, Q-, P2- and F-calculi and their series.

use crate::error::{Error, Result};
use crate::operators::{qcs_op, CommutingOperator};
use crate::qlinalg::{QuatLu, QuatMatrix};
use crate::quat::Quaternion;
use crate::slicefn::Side;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// `Q_{c,s}(T)^{-1}`
    QcsInv,
    /// `(s - conj T) Q^{-1}`
    SLeft,
    /// `Q^{-1} (s - conj T)`
    SRight,
    /// `-4 (s - conj T) Q^{-2}`
    FLeft,
    /// `-4 Q^{-2} (s - conj T)`
    FRight,
    /// `-F_L s + T0 F_L`
    P2Left,
    /// `-s F_R + T0 F_R`
    P2Right,
}

impl KernelKind {
    pub const ALL: [KernelKind; 7] = [
        KernelKind::QcsInv,
        KernelKind::SLeft,
        KernelKind::SRight,
        KernelKind::FLeft,
        KernelKind::FRight,
        KernelKind::P2Left,
        KernelKind::P2Right,
    ];
}

/// Matrices derived from `T` once and shared by every evaluation point.
#[derive(Debug, Clone)]
pub struct KernelContext {
    op: CommutingOperator,
    tbar: QuatMatrix,
    t0: QuatMatrix,
}

impl KernelContext {
    pub fn new(t: &CommutingOperator) -> Self {
        Self { op: t.clone(), tbar: t.conj_matrix(), t0: t.real_part_matrix() }
    }

    pub fn operator(&self) -> &CommutingOperator {
        &self.op
    }

    /// Factors `Q_{c,s}(T)` once; every kernel at `s` derives from it.
    pub fn at(&self, s: Quaternion) -> Result<KernelSet<'_>> {
        let qinv = QuatLu::new(&qcs_op(&self.op, s))?.inverse()?;
        let qinv2 = &qinv * &qinv;
        Ok(KernelSet { ctx: self, s, qinv, qinv2 })
    }
}

/// All kernels at one point `s`.
#[derive(Debug, Clone)]
pub struct KernelSet<'a> {
    ctx: &'a KernelContext,
    s: Quaternion,
    qinv: QuatMatrix,
    qinv2: QuatMatrix,
}

impl KernelSet<'_> {
    pub fn point(&self) -> Quaternion {
        self.s
    }

    pub fn qcs_inv(&self) -> &QuatMatrix {
        &self.qinv
    }

    fn f_left(&self) -> QuatMatrix {
        let m = &self.qinv2.left_scale(self.s) - &(&self.ctx.tbar * &self.qinv2);
        m.scale(-4.0)
    }

    fn f_right(&self) -> QuatMatrix {
        let m = &self.qinv2.right_scale(self.s) - &(&self.qinv2 * &self.ctx.tbar);
        m.scale(-4.0)
    }

    pub fn get(&self, kind: KernelKind) -> QuatMatrix {
        let s = self.s;
        match kind {
            KernelKind::QcsInv => self.qinv.clone(),
            KernelKind::SLeft => &self.qinv.left_scale(s) - &(&self.ctx.tbar * &self.qinv),
            KernelKind::SRight => &self.qinv.right_scale(s) - &(&self.qinv * &self.ctx.tbar),
            KernelKind::FLeft => self.f_left(),
            KernelKind::FRight => self.f_right(),
            KernelKind::P2Left => {
                let f = self.f_left();
                &(&self.ctx.t0 * &f) - &f.right_scale(s)
            }
            KernelKind::P2Right => {
                let f = self.f_right();
                &(&self.ctx.t0 * &f) - &f.left_scale(s)
            }
        }
    }
}

pub fn kernel(kind: KernelKind, t: &CommutingOperator, s: Quaternion) -> Result<QuatMatrix> {
    Ok(KernelContext::new(t).at(s)?.get(kind))
}

fn check_series_domain(t: &CommutingOperator, s: Quaternion) -> Result<()> {
    let norm = t.norm();
    let modulus = s.norm();
    if norm >= modulus {
        Err(Error::Divergence { norm, modulus })
    } else {
        Ok(())
    }
}

/// Partial sum through `n = N` of
/// `2 sum_{n>=1} (n T^{n-1} + sum_{k=1}^n T^{n-k} conj(T)^{k-1}) s^{-1-n}`,
/// with the powers of `s` on the right (left kernel) or on the left (right kernel).
pub fn p2_series(t: &CommutingOperator, s: Quaternion, terms: usize, side: Side) -> Result<QuatMatrix> {
    check_series_domain(t, s)?;
    let n = t.dim();
    let tm = t.matrix();
    let tbm = t.conj_matrix();
    let sinv = s.inv()?;
    let mut acc = QuatMatrix::zeros(n);
    let mut t_pow = QuatMatrix::identity(n);
    let mut tb_pow = QuatMatrix::identity(n);
    let mut mixed = QuatMatrix::zeros(n);
    let mut s_pow = sinv * sinv;
    for k in 1..=terms {
        // mixed_k = T mixed_{k-1} + conj(T)^{k-1}
        mixed = &(&tm * &mixed) + &tb_pow;
        let coeff = (&t_pow.scale(k as f64) + &mixed).scale(2.0);
        acc += &match side {
            Side::Left => coeff.right_scale(s_pow),
            Side::Right => coeff.left_scale(s_pow),
        };
        t_pow = &t_pow * &tm;
        tb_pow = &tb_pow * &tbm;
        s_pow *= sinv;
    }
    Ok(acc)
}

/// Partial sum `sum_{m<=N} T^m s^{-1-m}` (left) or `sum s^{-1-m} T^m` (right).
pub fn s_series(t: &CommutingOperator, s: Quaternion, terms: usize, side: Side) -> Result<QuatMatrix> {
    check_series_domain(t, s)?;
    let n = t.dim();
    let tm = t.matrix();
    let sinv = s.inv()?;
    let mut acc = QuatMatrix::zeros(n);
    let mut t_pow = QuatMatrix::identity(n);
    let mut s_pow = sinv;
    for _ in 0..=terms {
        acc += &match side {
            Side::Left => t_pow.right_scale(s_pow),
            Side::Right => t_pow.left_scale(s_pow),
        };
        t_pow = &t_pow * &tm;
        s_pow *= sinv;
    }
    Ok(acc)
}

/// Scalar kernels in the function-theory variables `(s, q)`, written in the
/// second (commutative) form.
pub mod scalar {
    use crate::error::Result;
    use crate::quat::{qs_poly, Quaternion};

    /// `s^2 - 2 q0 s + |q|^2`
    pub fn qcs(s: Quaternion, q: Quaternion) -> Quaternion {
        s * s - s * (2.0 * q.w) + q.norm_sqr()
    }

    pub fn s_left(s: Quaternion, q: Quaternion) -> Result<Quaternion> {
        Ok((s - q.conj()) * qcs(s, q).inv()?)
    }

    pub fn s_right(s: Quaternion, q: Quaternion) -> Result<Quaternion> {
        Ok(qcs(s, q).inv()? * (s - q.conj()))
    }

    /// The noncommutative first form `-Q_s(q)^{-1} (q - conj s)`.
    pub fn s_left_form_one(s: Quaternion, q: Quaternion) -> Result<Quaternion> {
        Ok(-(qs_poly(s, q).inv()? * (q - s.conj())))
    }

    pub fn f_left(s: Quaternion, q: Quaternion) -> Result<Quaternion> {
        let inv = qcs(s, q).inv()?;
        Ok((s - q.conj()) * inv * inv * -4.0)
    }

    pub fn f_right(s: Quaternion, q: Quaternion) -> Result<Quaternion> {
        let inv = qcs(s, q).inv()?;
        Ok(inv * inv * (s - q.conj()) * -4.0)
    }

    pub fn p2_left(s: Quaternion, q: Quaternion) -> Result<Quaternion> {
        let f = f_left(s, q)?;
        Ok(f * q.w - f * s)
    }

    pub fn p2_right(s: Quaternion, q: Quaternion) -> Result<Quaternion> {
        let f = f_right(s, q)?;
        Ok(f * q.w - s * f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::s_spectrum;
    use crate::quat::{E1, ONE};
    use crate::random::Sampler;
    use crate::slicefn::{fd_fueter_oracle, FueterOp, FD_STEP};

    fn close(a: &QuatMatrix, b: &QuatMatrix, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
    }

    fn scalar_matrix(q: Quaternion) -> QuatMatrix {
        QuatMatrix::scalar(1, q)
    }

    fn sample(seed: u64) -> (CommutingOperator, Quaternion) {
        let mut smp = Sampler::new(seed);
        let n = 1 + smp.index(3);
        let t = smp.commuting_operator(n, true);
        let sp = s_spectrum(&t).unwrap();
        let s = smp.point_off_spectrum(&sp, 0.5, 3.0);
        (t, s)
    }

    #[test]
    fn zero_operator_examples() {
        let t = CommutingOperator::zero(2);
        let s = Quaternion::new(0.5, 1.0, -0.3, 0.2);
        let si = s.inv().unwrap();
        let id = QuatMatrix::identity(2);
        let k = |kind| kernel(kind, &t, s).unwrap();
        assert!(close(&k(KernelKind::QcsInv), &id.left_scale(si * si), 1e-15));
        assert!(close(&k(KernelKind::SLeft), &id.left_scale(si), 1e-15));
        assert!(close(&k(KernelKind::FLeft), &id.left_scale(si.powi(3) * -4.0), 1e-15));
        assert!(close(&k(KernelKind::P2Left), &id.left_scale(si * si * 4.0), 1e-15));
        assert!(close(&k(KernelKind::P2Right), &id.left_scale(si * si * 4.0), 1e-15));
    }

    #[test]
    fn s_left_scalar_example_matches_first_form() {
        let t = CommutingOperator::scalar(E1);
        let s = Quaternion::real(2.0);
        let k = kernel(KernelKind::SLeft, &t, s).unwrap();
        let expect = Quaternion::new(2.0, 1.0, 0.0, 0.0) / 5.0;
        assert!((k[(0, 0)] - expect).norm() <= 1e-15);
        let first = Quaternion::new(3.0, -4.0, 0.0, 0.0).inv().unwrap() * Quaternion::new(2.0, -1.0, 0.0, 0.0);
        assert!((first - expect).norm() <= 1e-15);
        assert!((scalar::s_left_form_one(s, E1).unwrap() - expect).norm() <= 1e-15);
    }

    #[test]
    fn singular_on_spectrum() {
        let t = CommutingOperator::scalar(E1);
        let err = kernel(KernelKind::SLeft, &t, Quaternion::new(0.0, 0.0, 1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }

    #[test]
    fn forms_agree_for_scalars() {
        let mut smp = Sampler::new(3);
        for _ in 0..50 {
            let q = smp.quaternion(1.0);
            let s = smp.point_avoiding(&[q.sphere()], 0.3, 2.0);
            let a = scalar::s_left(s, q).unwrap();
            let b = scalar::s_left_form_one(s, q).unwrap();
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn scalar_reduction() {
        let mut smp = Sampler::new(4);
        for _ in 0..30 {
            let q = smp.quaternion(1.0);
            let s = smp.point_avoiding(&[q.sphere()], 0.3, 2.0);
            let t = CommutingOperator::scalar(q);
            let ks = KernelContext::new(&t);
            let set = ks.at(s).unwrap();
            let pairs = [
                (KernelKind::QcsInv, scalar::qcs(s, q).inv().unwrap()),
                (KernelKind::SLeft, scalar::s_left(s, q).unwrap()),
                (KernelKind::SRight, scalar::s_right(s, q).unwrap()),
                (KernelKind::FLeft, scalar::f_left(s, q).unwrap()),
                (KernelKind::FRight, scalar::f_right(s, q).unwrap()),
                (KernelKind::P2Left, scalar::p2_left(s, q).unwrap()),
                (KernelKind::P2Right, scalar::p2_right(s, q).unwrap()),
            ];
            for (kind, v) in pairs {
                assert!(close(&set.get(kind), &scalar_matrix(v), 1e-12), "{kind:?}");
            }
        }
    }

    /// The kernels are the Fueter images of the Cauchy kernel in `q`.
    #[test]
    fn kernels_are_fueter_images_of_cauchy_kernel() {
        let mut smp = Sampler::new(5);
        for _ in 0..20 {
            let q = smp.quaternion(1.0);
            let s = smp.point_avoiding(&[q.sphere()], 0.5, 2.0);
            let tol = 1e-5 * (1.0 + scalar::f_left(s, q).unwrap().norm());
            let left = |p| scalar::s_left(s, p).unwrap();
            let right = |p| scalar::s_right(s, p).unwrap();
            let d = fd_fueter_oracle(left, q, FueterOp::D, FD_STEP, Side::Left).unwrap();
            assert!((d + scalar::qcs(s, q).inv().unwrap() * 2.0).norm() <= tol);
            let db = fd_fueter_oracle(left, q, FueterOp::Dbar, FD_STEP, Side::Left).unwrap();
            assert!((db - scalar::p2_left(s, q).unwrap()).norm() <= tol);
            let lap = fd_fueter_oracle(left, q, FueterOp::Delta, FD_STEP, Side::Left).unwrap();
            assert!((lap - scalar::f_left(s, q).unwrap()).norm() <= tol);
            let dbr = fd_fueter_oracle(right, q, FueterOp::Dbar, FD_STEP, Side::Right).unwrap();
            assert!((dbr - scalar::p2_right(s, q).unwrap()).norm() <= tol);
            let lapr = fd_fueter_oracle(right, q, FueterOp::Delta, FD_STEP, Side::Right).unwrap();
            assert!((lapr - scalar::f_right(s, q).unwrap()).norm() <= tol);
        }
    }

    /// Compares the two readings of the right kernel at n = 1: with `F_R`
    /// (used here) and with `F_L` in both terms.
    #[test]
    fn right_p2_kernel_reading() {
        let mut smp = Sampler::new(6);
        let mut worst_fr: f64 = 0.0;
        let mut worst_fl: f64 = 0.0;
        for _ in 0..50 {
            let q = smp.quaternion(1.0);
            let s = smp.point_avoiding(&[q.sphere()], 0.5, 2.0);
            let oracle = fd_fueter_oracle(|p| scalar::s_right(s, p).unwrap(), q, FueterOp::Dbar, FD_STEP, Side::Right).unwrap();
            let with_fr = scalar::p2_right(s, q).unwrap();
            let fl = scalar::f_left(s, q).unwrap();
            let with_fl = fl * q.w - s * fl;
            let scale = oracle.norm().max(1.0);
            worst_fr = worst_fr.max((with_fr - oracle).norm() / scale);
            worst_fl = worst_fl.max((with_fl - oracle).norm() / scale);
        }
        eprintln!("right P2 kernel, max relative deviation from Dbar oracle: F_R reading {worst_fr:.3e}, F_L reading {worst_fl:.3e}");
        assert!(worst_fr <= 1e-5);
        assert!(worst_fl > 1e-3);
    }

    /// `-sum_{k=0}^{1} (-q0)^k F_L(s,q) s^{1-k}` reproduces the left P2 kernel.
    #[test]
    fn integral_representation_sign_pattern() {
        let mut smp = Sampler::new(7);
        for _ in 0..50 {
            let q = smp.quaternion(1.0);
            let s = smp.point_avoiding(&[q.sphere()], 0.3, 2.0);
            let fl = scalar::f_left(s, q).unwrap();
            let fr = scalar::f_right(s, q).unwrap();
            let left = -(fl * s + fl * -q.w);
            let right = -(s * fr + fr * -q.w);
            assert!((left - scalar::p2_left(s, q).unwrap()).norm() <= 1e-13 * left.norm().max(1.0));
            assert!((right - scalar::p2_right(s, q).unwrap()).norm() <= 1e-13 * right.norm().max(1.0));
        }
    }

    #[test]
    fn series_examples() {
        let s = Quaternion::new(0.5, 1.0, -0.3, 0.2);
        let si = s.inv().unwrap();
        let z = CommutingOperator::zero(2);
        let id = QuatMatrix::identity(2);
        for side in [Side::Left, Side::Right] {
            assert!(close(&p2_series(&z, s, 5, side).unwrap(), &id.left_scale(si * si * 4.0), 1e-15));
            assert_eq!(p2_series(&z, s, 0, side).unwrap(), QuatMatrix::zeros(2));
            assert!(close(&s_series(&z, s, 0, side).unwrap(), &id.left_scale(si), 1e-15));
            assert!(close(&s_series(&z, s, 7, side).unwrap(), &id.left_scale(si), 1e-15));
        }
        let t = CommutingOperator::scalar(Quaternion::real(2.0));
        assert!(matches!(p2_series(&t, ONE, 3, Side::Left), Err(Error::Divergence { .. })));
        assert!(matches!(s_series(&t, ONE, 3, Side::Left), Err(Error::Divergence { .. })));
    }

    #[test]
    fn series_converge_to_kernels() {
        let mut smp = Sampler::new(8);
        for _ in 0..20 {
            let n = 1 + smp.index(3);
            let t = smp.commuting_operator(n, true);
            let j = smp.imaginary_unit();
            let s = j.exp(smp.uniform(0.0, std::f64::consts::TAU)) * (2.0 * t.norm());
            let ctx = KernelContext::new(&t);
            let set = ctx.at(s).unwrap();
            let pairs = [
                (p2_series(&t, s, 60, Side::Left).unwrap(), set.get(KernelKind::P2Left)),
                (p2_series(&t, s, 60, Side::Right).unwrap(), set.get(KernelKind::P2Right)),
                (s_series(&t, s, 60, Side::Left).unwrap(), set.get(KernelKind::SLeft)),
                (s_series(&t, s, 60, Side::Right).unwrap(), set.get(KernelKind::SRight)),
            ];
            for (a, b) in pairs {
                assert!((&a - &b).norm() <= 1e-10 * b.norm().max(1.0));
            }
        }
    }

    #[test]
    fn f_kernel_relations() {
        for seed in 0..50 {
            let (t, s) = sample(seed);
            let ctx = KernelContext::new(&t);
            let set = ctx.at(s).unwrap();
            let tm = t.matrix();
            let q4 = set.qcs_inv().scale(4.0);
            let fl = set.get(KernelKind::FLeft);
            let fr = set.get(KernelKind::FRight);
            let left = &(&fl.right_scale(s) - &(&tm * &fl)) + &q4;
            let right = &(&fr.left_scale(s) - &(&fr * &tm)) + &q4;
            let scale = fl.norm().max(q4.norm()).max(1.0);
            assert!(left.norm() <= 1e-10 * scale, "seed {seed}");
            assert!(right.norm() <= 1e-10 * scale, "seed {seed}");
        }
    }
}
