//! Dense square matrices over the quaternions.
//!
//! Left and right scalar actions are distinct: `A.left_scale(s)` multiplies
//! every entry by `s` on the left, `A.right_scale(s)` on the right. Both
//! coincide with composing by the diagonal matrix `s I` on that side.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quat::{Quaternion, ONE, ZERO};

/// Reciprocal of the default condition threshold (1e12) used for pivots.
pub const DEFAULT_PIVOT_TOL: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct QuatMatrix {
    n: usize,
    data: Vec<Quaternion>,
}

impl std::fmt::Debug for QuatMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "QuatMatrix {}x{} [", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, "  ")?;
            for j in 0..self.n {
                write!(f, "{:?} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl QuatMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, ONE)
    }

    /// `s I`.
    pub fn scalar(n: usize, s: Quaternion) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = s;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<Quaternion>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            data.extend(row);
        }
        Ok(Self { n, data })
    }

    /// Embeds a real matrix.
    pub fn from_real(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "square matrix expected");
        Self::from_fn(m.nrows(), |i, j| Quaternion::real(m[(i, j)]))
    }

    /// `C0 + C1 e1 + C2 e2 + C3 e3` from real component matrices.
    pub fn from_components(c: [&DMatrix<f64>; 4]) -> Self {
        let n = c[0].nrows();
        Self::from_fn(n, |i, j| Quaternion::new(c[0][(i, j)], c[1][(i, j)], c[2][(i, j)], c[3][(i, j)]))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<Quaternion>> {
        (0..self.n).map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec()).collect()
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.data
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            Err(Error::DimensionMismatch { expected: self.n, found: other.n })
        } else {
            Ok(())
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.zip_map(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.zip_map(other, |a, b| a - b))
    }

    fn zip_map(&self, other: &Self, f: impl Fn(Quaternion, Quaternion) -> Quaternion) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(Quaternion) -> Quaternion) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&a| f(a)).collect() }
    }

    /// `s A`.
    pub fn left_scale(&self, s: Quaternion) -> Self {
        self.map(|a| s * a)
    }

    /// `A s`.
    pub fn right_scale(&self, s: Quaternion) -> Self {
        self.map(|a| a * s)
    }

    pub fn scale(&self, r: f64) -> Self {
        self.map(|a| a * r)
    }

    /// Entrywise quaternion conjugate (not the conjugate transpose).
    pub fn conj_entries(&self) -> Self {
        self.map(Quaternion::conj)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|q| q.norm()).fold(0.0, f64::max)
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.n);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|q| q.is_finite())
    }
}

impl Index<(usize, usize)> for QuatMatrix {
    type Output = Quaternion;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Quaternion {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for QuatMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Quaternion {
        &mut self.data[i * self.n + j]
    }
}

// Operator forms panic on dimension mismatch; the `try_*` forms report it.
impl Mul for &QuatMatrix {
    type Output = QuatMatrix;
    fn mul(self, rhs: &QuatMatrix) -> QuatMatrix {
        self.try_mul(rhs).expect("matrix dimensions must agree")
    }
}

impl Add for &QuatMatrix {
    type Output = QuatMatrix;
    fn add(self, rhs: &QuatMatrix) -> QuatMatrix {
        self.try_add(rhs).expect("matrix dimensions must agree")
    }
}

impl Sub for &QuatMatrix {
    type Output = QuatMatrix;
    fn sub(self, rhs: &QuatMatrix) -> QuatMatrix {
        self.try_sub(rhs).expect("matrix dimensions must agree")
    }
}

impl Neg for &QuatMatrix {
    type Output = QuatMatrix;
    fn neg(self) -> QuatMatrix {
        self.map(|a| -a)
    }
}

impl AddAssign<&QuatMatrix> for QuatMatrix {
    fn add_assign(&mut self, rhs: &QuatMatrix) {
        assert_eq!(self.n, rhs.n, "matrix dimensions must agree");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += *b;
        }
    }
}

impl SubAssign<&QuatMatrix> for QuatMatrix {
    fn sub_assign(&mut self, rhs: &QuatMatrix) {
        assert_eq!(self.n, rhs.n, "matrix dimensions must agree");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= *b;
        }
    }
}

impl Serialize for QuatMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QuatMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<Quaternion>>::deserialize(deserializer)?;
        QuatMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

pub fn qm_mul(a: &QuatMatrix, b: &QuatMatrix) -> Result<QuatMatrix> {
    a.try_mul(b)
}

pub fn qm_norm(a: &QuatMatrix) -> f64 {
    a.norm()
}

/// LU factorization `P A = L U` with partial pivoting by entry modulus.
///
/// Multipliers act from the left, so the factorization solves `A X = B`
/// for quaternionic right-hand sides without any commutativity.
#[derive(Debug, Clone)]
pub struct QuatLu {
    lu: QuatMatrix,
    perm: Vec<usize>,
}

impl QuatLu {
    pub fn new(a: &QuatMatrix) -> Result<Self> {
        Self::with_tol(a, DEFAULT_PIVOT_TOL)
    }

    /// Fails when a pivot falls below `rel_tol * |A|_F`.
    pub fn with_tol(a: &QuatMatrix, rel_tol: f64) -> Result<Self> {
        let n = a.dim();
        let threshold = rel_tol * a.norm();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, modulus) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(modulus > threshold) || modulus == 0.0 {
                return Err(Error::Singular { pivot: k, modulus, threshold });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot_inv = lu[(k, k)].inv()?;
            for i in (k + 1)..n {
                let l = lu[(i, k)] * pivot_inv;
                lu[(i, k)] = l;
                if l == ZERO {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= l * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.dim()
    }

    pub fn solve(&self, b: &QuatMatrix) -> Result<QuatMatrix> {
        let n = self.dim();
        if b.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.dim() });
        }
        let mut x = QuatMatrix::from_fn(n, |i, j| b[(self.perm[i], j)]);
        for col in 0..n {
            for i in 0..n {
                let mut acc = x[(i, col)];
                for k in 0..i {
                    acc -= self.lu[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = acc;
            }
            for i in (0..n).rev() {
                let mut acc = x[(i, col)];
                for k in (i + 1)..n {
                    acc -= self.lu[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = self.lu[(i, i)].inv()? * acc;
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<QuatMatrix> {
        self.solve(&QuatMatrix::identity(self.dim()))
    }
}

/// Solves `A X = B`.
pub fn qm_solve(a: &QuatMatrix, b: &QuatMatrix) -> Result<QuatMatrix> {
    QuatLu::new(a)?.solve(b)
}

/// The 4x4 real matrix of left multiplication by `q` on `[w, x, y, z]`.
pub fn left_mult_matrix(q: Quaternion) -> [[f64; 4]; 4] {
    [
        [q.w, -q.x, -q.y, -q.z],
        [q.x, q.w, -q.z, q.y],
        [q.y, q.z, q.w, -q.x],
        [q.z, -q.y, q.x, q.w],
    ]
}

/// Left-regular representation: a `4n x 4n` real matrix with
/// `rho(AB) = rho(A) rho(B)`.
pub fn real_adjoint(a: &QuatMatrix) -> DMatrix<f64> {
    let n = a.dim();
    let mut out = DMatrix::zeros(4 * n, 4 * n);
    for i in 0..n {
        for j in 0..n {
            let block = left_mult_matrix(a[(i, j)]);
            for r in 0..4 {
                for c in 0..4 {
                    out[(4 * i + r, 4 * j + c)] = block[r][c];
                }
            }
        }
    }
    out
}

/// Reads a quaternion matrix back from the first column of each 4x4 block.
pub fn from_real_adjoint(m: &DMatrix<f64>) -> Result<QuatMatrix> {
    if m.nrows() != m.ncols() || !m.nrows().is_multiple_of(4) {
        return Err(Error::DimensionMismatch { expected: 4 * (m.nrows() / 4), found: m.ncols() });
    }
    let n = m.nrows() / 4;
    Ok(QuatMatrix::from_fn(n, |i, j| {
        Quaternion::new(m[(4 * i, 4 * j)], m[(4 * i + 1, 4 * j)], m[(4 * i + 2, 4 * j)], m[(4 * i + 3, 4 * j)])
    }))
}

/// Inverse computed through the real representation; an oracle for
/// [`QuatLu::inverse`].
pub fn inverse_via_real_adjoint(a: &QuatMatrix) -> Result<QuatMatrix> {
    let inv = real_adjoint(a)
        .try_inverse()
        .ok_or_else(|| Error::Numeric("real representation is singular".into()))?;
    from_real_adjoint(&inv)
}

/// Operator 2-norm, via the largest singular value of the real representation.
pub fn spectral_norm(a: &QuatMatrix) -> f64 {
    let rho = real_adjoint(a);
    rho.singular_values().max()
}
