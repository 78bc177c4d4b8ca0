//! Slice hyperholomorphic polynomial stems and their images under the
//! Fueter operators `D`, `Dbar` and `Delta`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::QuatMatrix;
use crate::quat::{Quaternion, E1, E2, E3, ZERO};

/// Which side of the powers the coefficients sit on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `f(q) = sum q^m a_m`
    Left,
    /// `f(q) = sum a_m q^m`
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FueterOp {
    /// `d0 + sum e_i d_i`
    D,
    /// `d0 - sum e_i d_i`
    Dbar,
    /// `D Dbar`, the Laplacian in four variables
    Delta,
}

/// A polynomial stem with quaternion coefficients on one side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicePoly {
    pub side: Side,
    pub coeffs: Vec<Quaternion>,
}

impl SlicePoly {
    pub fn new(side: Side, coeffs: Vec<Quaternion>) -> Self {
        Self { side, coeffs }
    }

    pub fn constant(side: Side, a: Quaternion) -> Self {
        Self::new(side, vec![a])
    }

    /// `q^m a` (left) or `a q^m` (right).
    pub fn monomial(side: Side, m: usize, a: Quaternion) -> Self {
        let mut coeffs = vec![ZERO; m + 1];
        coeffs[m] = a;
        Self::new(side, coeffs)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, m: usize) -> Quaternion {
        self.coeffs.get(m).copied().unwrap_or(ZERO)
    }

    /// Real coefficients: the stem lies in the intrinsic class.
    pub fn is_intrinsic(&self) -> bool {
        self.coeffs.iter().all(|a| a.x == 0.0 && a.y == 0.0 && a.z == 0.0)
    }

    pub fn with_side(&self, side: Side) -> Self {
        Self::new(side, self.coeffs.clone())
    }

    pub fn eval(&self, q: Quaternion) -> Quaternion {
        let mut acc = ZERO;
        let mut pw = Quaternion::real(1.0);
        for &a in &self.coeffs {
            acc += match self.side {
                Side::Left => pw * a,
                Side::Right => a * pw,
            };
            pw *= q;
        }
        acc
    }

    /// Direct substitution `sum T^m a_m` or `sum a_m T^m`.
    pub fn eval_matrix(&self, t: &QuatMatrix) -> QuatMatrix {
        let n = t.dim();
        let mut acc = QuatMatrix::zeros(n);
        let mut pw = QuatMatrix::identity(n);
        for &a in &self.coeffs {
            acc += &match self.side {
                Side::Left => pw.right_scale(a),
                Side::Right => pw.left_scale(a),
            };
            pw = &pw * t;
        }
        acc
    }

    /// Adds a constant to the degree-zero coefficient.
    pub fn shifted_by(&self, c: Quaternion) -> Self {
        let mut out = self.clone();
        if out.coeffs.is_empty() {
            out.coeffs.push(ZERO);
        }
        out.coeffs[0] += c;
        out
    }
}

/// A polynomial in `q` and `conj(q)`. Monomials `q^a conj(q)^b` carry a
/// quaternion coefficient on the right for left stems and on the left for
/// right stems.
#[derive(Debug, Clone, PartialEq)]
pub struct PAPoly {
    pub side: Side,
    pub terms: BTreeMap<(u32, u32), Quaternion>,
}

impl PAPoly {
    pub fn zero(side: Side) -> Self {
        Self { side, terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, a: u32, b: u32, c: Quaternion) {
        *self.terms.entry((a, b)).or_insert(ZERO) += c;
    }

    fn add_scaled(&mut self, other: &PAPoly, c: Quaternion) {
        for (&(a, b), &r) in &other.terms {
            let coeff = match self.side {
                Side::Left => r * c,
                Side::Right => c * r,
            };
            self.add_term(a, b, coeff);
        }
    }

    /// Exchanges the roles of `q` and `conj(q)`.
    pub fn swap_conj(&self) -> Self {
        Self { side: self.side, terms: self.terms.iter().map(|(&(a, b), &c)| ((b, a), c)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| *c == ZERO)
    }

    pub fn eval(&self, q: Quaternion) -> Quaternion {
        let qb = q.conj();
        self.terms
            .iter()
            .map(|(&(a, b), &c)| {
                let m = q.powi(a) * qb.powi(b);
                match self.side {
                    Side::Left => m * c,
                    Side::Right => c * m,
                }
            })
            .sum()
    }

    /// Evaluates at an operator by substituting `q -> T`, `conj(q) -> conj(T)`.
    /// Requires `T` and `conj(T)` to commute, which holds for commuting components.
    pub fn eval_operator(&self, t: &QuatMatrix, tbar: &QuatMatrix) -> QuatMatrix {
        let n = t.dim();
        let max_a = self.terms.keys().map(|k| k.0).max().unwrap_or(0);
        let max_b = self.terms.keys().map(|k| k.1).max().unwrap_or(0);
        let pows = |m: &QuatMatrix, k: u32| {
            let mut v = vec![QuatMatrix::identity(n)];
            for i in 0..k as usize {
                let next = &v[i] * m;
                v.push(next);
            }
            v
        };
        let tp = pows(t, max_a);
        let tbp = pows(tbar, max_b);
        let mut acc = QuatMatrix::zeros(n);
        for (&(a, b), &c) in &self.terms {
            let m = &tp[a as usize] * &tbp[b as usize];
            acc += &match self.side {
                Side::Left => m.right_scale(c),
                Side::Right => m.left_scale(c),
            };
        }
        acc
    }
}

/// `sum_{k=1}^n q^{n-k} conj(q)^{k-1}`, a real-valued polynomial.
pub fn real_power_sum(n: u32) -> PAPoly {
    let mut p = PAPoly::zero(Side::Left);
    for k in 1..=n {
        p.add_term(n - k, k - 1, Quaternion::real(1.0));
    }
    p
}

/// The image of the pure power `q^n` under `op`.
pub fn fueter_power(n: u32, op: FueterOp) -> PAPoly {
    let mut p = PAPoly::zero(Side::Left);
    match op {
        FueterOp::Dbar => {
            if n >= 1 {
                p.add_term(n - 1, 0, Quaternion::real(2.0 * n as f64));
                for k in 1..=n {
                    p.add_term(n - k, k - 1, Quaternion::real(2.0));
                }
            }
        }
        FueterOp::D => {
            for k in 1..=n {
                p.add_term(n - k, k - 1, Quaternion::real(-2.0));
            }
        }
        FueterOp::Delta => {
            for k in 1..n {
                p.add_term(n - 1 - k, k - 1, Quaternion::real(-4.0 * (n - k) as f64));
            }
        }
    }
    p.terms.retain(|_, c| *c != ZERO);
    p
}

/// Applies `op` to a stem by linearity over its power terms.
pub fn fueter_apply(f: &SlicePoly, op: FueterOp) -> PAPoly {
    let mut out = PAPoly::zero(f.side);
    for (m, &a) in f.coeffs.iter().enumerate() {
        if a != ZERO {
            out.add_scaled(&fueter_power(m as u32, op), a);
        }
    }
    out
}

/// `D conj(q)^n = (2n+2) conj(q)^{n-1} + 2 q sum_{k=0}^{n-2} conj(q)^{n-k-2} q^k`.
pub fn dconj_power(n: u32) -> Result<PAPoly> {
    if n == 0 {
        return Err(Error::Domain("dconj_power needs n >= 1".into()));
    }
    let mut p = PAPoly::zero(Side::Left);
    p.add_term(0, n - 1, Quaternion::real(2.0 * n as f64 + 2.0));
    for k in 0..n.saturating_sub(1) {
        p.add_term(k + 1, n - k - 2, Quaternion::real(2.0));
    }
    Ok(p)
}

/// Default finite-difference step.
pub const FD_STEP: f64 = 1e-4;

/// Central-difference approximation of `op` applied to `f` at `q`.
///
/// `side` selects whether the units `e_i` multiply the partial derivatives
/// from the left or from the right.
pub fn fd_fueter_oracle(f: impl Fn(Quaternion) -> Quaternion, q: Quaternion, op: FueterOp, h: f64, side: Side) -> Result<Quaternion> {
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {h}")));
    }
    let units = [Quaternion::real(1.0), E1, E2, E3];
    let partial = |i: usize| (f(q + units[i] * h) - f(q - units[i] * h)) / (2.0 * h);
    let unit_times = |e: Quaternion, d: Quaternion| match side {
        Side::Left => e * d,
        Side::Right => d * e,
    };
    Ok(match op {
        FueterOp::D | FueterOp::Dbar => {
            let sign = if op == FueterOp::D { 1.0 } else { -1.0 };
            let mut acc = partial(0);
            for i in 1..4 {
                acc += unit_times(units[i], partial(i)) * sign;
            }
            acc
        }
        FueterOp::Delta => {
            let f0 = f(q);
            (0..4).map(|i| (f(q + units[i] * h) - f0 * 2.0 + f(q - units[i] * h)) / (h * h)).sum()
        }
    })
}

/// `f g` for intrinsic `f`; the coefficients convolve since real
/// coefficients commute with powers of `q`.
pub fn stem_product(f: &SlicePoly, g: &SlicePoly) -> Result<SlicePoly> {
    if !f.is_intrinsic() {
        return Err(Error::Precondition("left factor of a stem product must be intrinsic".into()));
    }
    if f.coeffs.is_empty() || g.coeffs.is_empty() {
        return Ok(SlicePoly::new(g.side, Vec::new()));
    }
    let mut coeffs = vec![ZERO; f.coeffs.len() + g.coeffs.len() - 1];
    for (i, &a) in f.coeffs.iter().enumerate() {
        for (j, &b) in g.coeffs.iter().enumerate() {
            coeffs[i + j] += b * a.w;
        }
    }
    Ok(SlicePoly::new(g.side, coeffs))
}

/// `q f(q)` for left stems, `f(q) q` for right stems.
pub fn stem_shift(f: &SlicePoly) -> SlicePoly {
    let mut coeffs = Vec::with_capacity(f.coeffs.len() + 1);
    coeffs.push(ZERO);
    coeffs.extend_from_slice(&f.coeffs);
    SlicePoly::new(f.side, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Sampler;

    fn q_pow(n: usize) -> SlicePoly {
        SlicePoly::monomial(Side::Left, n, Quaternion::real(1.0))
    }

    fn close(a: Quaternion, b: Quaternion, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn power_rule_examples() {
        let q = Quaternion::new(0.3, -0.7, 1.1, 0.4);
        assert_eq!(fueter_apply(&q_pow(1), FueterOp::Dbar).eval(q), Quaternion::real(4.0));
        assert_eq!(fueter_apply(&q_pow(1), FueterOp::D).eval(q), Quaternion::real(-2.0));
        assert!(close(fueter_apply(&q_pow(2), FueterOp::D).eval(q), Quaternion::real(-4.0 * q.w), 1e-15));
        assert_eq!(fueter_apply(&q_pow(2), FueterOp::Delta).eval(q), Quaternion::real(-4.0));
        assert!(fueter_apply(&q_pow(0), FueterOp::Dbar).is_zero());
    }

    #[test]
    fn dconj_examples() {
        let p1 = dconj_power(1).unwrap();
        assert_eq!(p1.terms.get(&(0, 0)), Some(&Quaternion::real(4.0)));
        let p2 = dconj_power(2).unwrap();
        assert_eq!(p2.terms.get(&(0, 1)), Some(&Quaternion::real(6.0)));
        assert_eq!(p2.terms.get(&(1, 0)), Some(&Quaternion::real(2.0)));
        assert!(dconj_power(0).is_err());
    }

    #[test]
    fn dconj_is_swapped_dbar_power() {
        let mut s = Sampler::new(21);
        for n in 1..=10 {
            let a = dconj_power(n).unwrap();
            let b = fueter_power(n, FueterOp::Dbar).swap_conj();
            for _ in 0..20 {
                let q = s.quaternion(1.0);
                assert!(close(a.eval(q), b.eval(q), 1e-12 * (1.0 + a.eval(q).norm())));
            }
        }
    }

    #[test]
    fn fd_examples() {
        let sq = |q: Quaternion| q * q;
        let v = fd_fueter_oracle(sq, Quaternion::new(1.0, 1.0, 0.0, 0.0), FueterOp::Delta, 1e-4, Side::Left).unwrap();
        assert!(close(v, Quaternion::real(-4.0), 1e-6));
        let mut s = Sampler::new(4);
        let q = s.quaternion(1.0);
        let v = fd_fueter_oracle(|p| p.powi(3), q, FueterOp::Dbar, 1e-4, Side::Left).unwrap();
        assert!(close(v, fueter_power(3, FueterOp::Dbar).eval(q), 1e-5));
        let c = Quaternion::new(1.0, 2.0, 3.0, 4.0);
        for op in [FueterOp::D, FueterOp::Dbar, FueterOp::Delta] {
            assert!(fd_fueter_oracle(|_| c, q, op, 1e-4, Side::Left).unwrap().norm() <= 1e-9);
        }
        assert!(fd_fueter_oracle(sq, q, FueterOp::D, 0.0, Side::Left).is_err());
    }

    #[test]
    fn exact_matches_oracle_on_monomials() {
        let mut s = Sampler::new(5);
        for n in 0..=8u32 {
            for op in [FueterOp::D, FueterOp::Dbar, FueterOp::Delta] {
                let exact = fueter_power(n, op);
                for _ in 0..10 {
                    let q = s.quaternion(1.0);
                    let fd = fd_fueter_oracle(|p| p.powi(n), q, op, FD_STEP, Side::Left).unwrap();
                    assert!(close(exact.eval(q), fd, 1e-5), "n={n} op={op:?}");
                }
            }
        }
    }

    #[test]
    fn coefficients_carried_on_the_correct_side() {
        let mut s = Sampler::new(6);
        let a = s.quaternion(1.0);
        for side in [Side::Left, Side::Right] {
            let f = SlicePoly::new(side, vec![s.quaternion(1.0), a, s.quaternion(1.0), a]);
            for op in [FueterOp::D, FueterOp::Dbar, FueterOp::Delta] {
                let exact = fueter_apply(&f, op);
                let q = s.quaternion(1.0);
                let fd = fd_fueter_oracle(|p| f.eval(p), q, op, FD_STEP, side).unwrap();
                assert!(close(exact.eval(q), fd, 1e-5), "{side:?} {op:?}");
            }
        }
    }

    #[test]
    fn power_sums_are_real() {
        let mut s = Sampler::new(7);
        for n in 1..=12 {
            let p = real_power_sum(n);
            for _ in 0..100 {
                let v = p.eval(s.quaternion(1.0));
                assert!(v.vector_norm() <= 1e-12 * v.norm().max(1.0));
            }
        }
    }

    #[test]
    fn delta_recurrence_and_f5() {
        let mut s = Sampler::new(8);
        for n in 1..=10u32 {
            for _ in 0..20 {
                let q = s.quaternion(1.0);
                let lhs = fueter_power(n + 1, FueterOp::Delta).eval(q);
                let rhs = fueter_power(n, FueterOp::Delta).eval(q) * q.w - fueter_power(n, FueterOp::Dbar).eval(q);
                assert!(close(lhs, rhs, 1e-12 * lhs.norm().max(1.0)));
                let f5 = fueter_power(n, FueterOp::Delta).eval(q) * q.vector()
                    + fueter_power(n, FueterOp::D).eval(q) * 2.0
                    + fueter_power(n, FueterOp::Dbar).eval(q);
                assert!(f5.norm() <= 1e-12 * lhs.norm().max(1.0));
            }
        }
    }

    #[test]
    fn laplacian_factorizes() {
        let mut s = Sampler::new(9);
        for n in 1..=6u32 {
            let q = s.quaternion(1.0);
            let inner = |p: Quaternion| fd_fueter_oracle(|r| r.powi(n), p, FueterOp::Dbar, 1e-4, Side::Left).unwrap();
            let nested = fd_fueter_oracle(inner, q, FueterOp::D, 1e-3, Side::Left).unwrap();
            let exact = fueter_power(n, FueterOp::Delta).eval(q);
            assert!(close(nested, exact, 1e-4 * exact.norm().max(1.0)), "n={n}");
        }
    }

    #[test]
    fn stem_product_examples() {
        let mut s = Sampler::new(10);
        let g = SlicePoly::new(Side::Left, vec![s.quaternion(1.0), s.quaternion(1.0)]);
        assert_eq!(stem_product(&SlicePoly::constant(Side::Left, Quaternion::real(1.0)), &g).unwrap(), g);
        let a = s.quaternion(1.0);
        let prod = stem_product(&q_pow(2), &SlicePoly::monomial(Side::Left, 1, a)).unwrap();
        assert_eq!(prod, SlicePoly::monomial(Side::Left, 3, a));
        let f = SlicePoly::new(Side::Left, vec![Quaternion::real(0.5), Quaternion::real(-1.0), Quaternion::real(2.0)]);
        for side in [Side::Left, Side::Right] {
            let g = g.with_side(side);
            let fg = stem_product(&f, &g).unwrap();
            for _ in 0..10 {
                let q = s.quaternion(1.0);
                let expect = match side {
                    Side::Left => f.eval(q) * g.eval(q),
                    Side::Right => g.eval(q) * f.eval(q),
                };
                assert!(close(fg.eval(q), expect, 1e-13 * expect.norm().max(1.0)));
            }
        }
        assert!(matches!(stem_product(&g, &f), Err(Error::Precondition(_))));
    }

    #[test]
    fn stem_shift_examples() {
        let one = SlicePoly::constant(Side::Left, Quaternion::real(1.0));
        assert_eq!(stem_shift(&one), q_pow(1));
        let a = Quaternion::new(0.0, 1.0, 2.0, 0.0);
        assert_eq!(stem_shift(&SlicePoly::monomial(Side::Left, 1, a)), SlicePoly::monomial(Side::Left, 2, a));
        let mut s = Sampler::new(11);
        let f = SlicePoly::new(Side::Right, vec![s.quaternion(1.0), s.quaternion(1.0)]);
        let q = s.quaternion(1.0);
        assert!(close(stem_shift(&f).eval(q), f.eval(q) * q, 1e-14));
    }

    #[test]
    fn real_coefficient_stems_agree_on_both_sides_at_real_points() {
        let f = SlicePoly::new(Side::Left, vec![Quaternion::real(1.0), Quaternion::real(-2.0), Quaternion::real(3.0)]);
        let q = Quaternion::real(0.7);
        assert_eq!(f.eval(q), f.with_side(Side::Right).eval(q));
    }

    #[test]
    fn function_file_round_trip() {
        let f = SlicePoly::from_json(r#"{ "side": "left", "coeffs": [[0,0,0,0],[0,0,0,0],[1,0,0,0]] }"#).unwrap();
        assert_eq!(f, q_pow(2));
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(SlicePoly::from_json(&text).unwrap(), f);
        assert!(SlicePoly::from_json(r#"{ "side": "up", "coeffs": [] }"#).is_err());
    }
}
