//! Operators `T = T0 + T1 e1 + T2 e2 + T3 e3` with commuting real components.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{spectral_norm, QuatMatrix};
use crate::quat::{Quaternion, SpectralSphere};

/// Relative tolerance of the constructor's commutation check.
pub const COMMUTATION_TOL: f64 = 1e-10;
/// Roots of the pencil closer than this (relative) are merged into one sphere.
pub const ROOT_CLUSTER_TOL: f64 = 1e-6;
/// Relative imaginary-part bound for the real-spectrum hypothesis.
pub const REAL_SPECTRUM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CommutingOperator {
    comps: [DMatrix<f64>; 4],
}

impl CommutingOperator {
    /// Builds `T` from its four components, checking squareness and
    /// pairwise commutation.
    pub fn new(t0: DMatrix<f64>, t1: DMatrix<f64>, t2: DMatrix<f64>, t3: DMatrix<f64>) -> Result<Self> {
        let n = t0.nrows();
        for c in [&t0, &t1, &t2, &t3] {
            if c.nrows() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.nrows() });
            }
            if c.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.ncols() });
            }
        }
        let op = Self { comps: [t0, t1, t2, t3] };
        op.check_commutation()?;
        Ok(op)
    }

    /// A scalar quaternion as a `1 x 1` operator.
    pub fn scalar(q: Quaternion) -> Self {
        let c = |v: f64| DMatrix::from_element(1, 1, v);
        Self { comps: [c(q.w), c(q.x), c(q.y), c(q.z)] }
    }

    pub fn zero(n: usize) -> Self {
        Self { comps: std::array::from_fn(|_| DMatrix::zeros(n, n)) }
    }

    /// Diagonal components; commute trivially.
    pub fn diagonal(entries: &[Quaternion]) -> Self {
        let n = entries.len();
        let comps = std::array::from_fn(|k| {
            DMatrix::from_fn(n, n, |i, j| if i == j { <[f64; 4]>::from(entries[i])[k] } else { 0.0 })
        });
        Self { comps }
    }

    fn check_commutation(&self) -> Result<()> {
        for i in 0..4 {
            for j in (i + 1)..4 {
                let a = &self.comps[i];
                let b = &self.comps[j];
                let defect = (a * b - b * a).norm();
                let bound = COMMUTATION_TOL * a.norm() * b.norm();
                if defect > bound && defect > 0.0 {
                    return Err(Error::Invariant(format!(
                        "components T{i} and T{j} do not commute: |[T{i},T{j}]| = {defect:e}"
                    )));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.comps[0].nrows()
    }

    #[inline]
    pub fn component(&self, i: usize) -> &DMatrix<f64> {
        &self.comps[i]
    }

    pub fn components(&self) -> &[DMatrix<f64>; 4] {
        &self.comps
    }

    /// `T` as a quaternion matrix.
    pub fn matrix(&self) -> QuatMatrix {
        QuatMatrix::from_components([&self.comps[0], &self.comps[1], &self.comps[2], &self.comps[3]])
    }

    /// `conj(T)` as a quaternion matrix.
    pub fn conj_matrix(&self) -> QuatMatrix {
        self.matrix().conj_entries()
    }

    /// The vector part `T1 e1 + T2 e2 + T3 e3`.
    pub fn vector_matrix(&self) -> QuatMatrix {
        let z = DMatrix::zeros(self.dim(), self.dim());
        QuatMatrix::from_components([&z, &self.comps[1], &self.comps[2], &self.comps[3]])
    }

    /// `T0` embedded as a quaternion matrix.
    pub fn real_part_matrix(&self) -> QuatMatrix {
        QuatMatrix::from_real(&self.comps[0])
    }

    pub fn has_t3(&self) -> bool {
        self.comps[3].iter().any(|&v| v != 0.0)
    }

    /// Operator norm of `T` on `H^n`.
    pub fn norm(&self) -> f64 {
        spectral_norm(&self.matrix())
    }

    /// Precondition of the disconnected-contour and projector suites.
    pub fn require_no_t3(&self) -> Result<()> {
        if self.has_t3() {
            Err(Error::Precondition("operator must have T3 = 0".into()))
        } else {
            Ok(())
        }
    }

    /// Checks that every component has real eigenvalues.
    pub fn require_real_component_spectra(&self) -> Result<()> {
        for (i, c) in self.comps.iter().enumerate() {
            let scale = c.norm();
            if scale == 0.0 {
                continue;
            }
            let eig = eigenvalues(c)?;
            if let Some(bad) = eig.iter().find(|z| z.im.abs() > REAL_SPECTRUM_TOL * scale) {
                return Err(Error::Precondition(format!(
                    "component T{i} has non-real eigenvalue {} + {}i",
                    bad.re, bad.im
                )));
            }
        }
        Ok(())
    }

    /// Hypotheses of the projector and well-posedness suites.
    pub fn require_projector_hypotheses(&self) -> Result<()> {
        self.require_no_t3()?;
        self.require_real_component_spectra()
    }
}

pub fn conj_op(t: &CommutingOperator) -> CommutingOperator {
    let [t0, t1, t2, t3] = t.components().clone();
    CommutingOperator { comps: [t0, -t1, -t2, -t3] }
}

/// `K = T0^2 + T1^2 + T2^2 + T3^2`, which equals `T conj(T)`.
pub fn gram(t: &CommutingOperator) -> DMatrix<f64> {
    t.components().iter().map(|c| c * c).fold(DMatrix::zeros(t.dim(), t.dim()), |a, b| a + b)
}

/// `Q_{c,s}(T) = s^2 I - 2 s T0 + K`.
pub fn qcs_op(t: &CommutingOperator, s: Quaternion) -> QuatMatrix {
    let k = gram(t);
    let t0 = t.component(0);
    let s2 = s * s;
    QuatMatrix::from_fn(t.dim(), |i, j| {
        let mut e = s * (-2.0 * t0[(i, j)]) + k[(i, j)];
        if i == j {
            e += s2;
        }
        e
    })
}

fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("eigenvalue iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Roots of `det(l^2 I - 2 l T0 + K)` via the `2n x 2n` companion matrix.
pub fn pencil_roots(t: &CommutingOperator) -> Result<Vec<Complex<f64>>> {
    let n = t.dim();
    let k = gram(t);
    let mut c = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        c[(i, n + i)] = 1.0;
        for j in 0..n {
            c[(n + i, j)] = -k[(i, j)];
            c[(n + i, n + j)] = 2.0 * t.component(0)[(i, j)];
        }
    }
    eigenvalues(&c)
}

/// The S-spectrum as a sorted list of spheres.
///
/// Conjugate roots `u +- iv` become the sphere `(u, v)`. Nearby roots are
/// merged and averaged, which recovers clustered roots of defective
/// pencils (for instance `T = t I`) to near machine precision.
pub fn s_spectrum(t: &CommutingOperator) -> Result<Vec<SpectralSphere>> {
    let roots = pencil_roots(t)?;
    let scale = 1.0 + roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let folded: Vec<(f64, f64)> = roots.iter().map(|z| (z.re, z.im.abs())).collect();

    let mut clusters: Vec<Vec<(f64, f64)>> = Vec::new();
    for p in folded {
        let hit = clusters.iter_mut().find(|c| {
            c.iter().any(|q| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt() <= ROOT_CLUSTER_TOL * scale)
        });
        match hit {
            Some(c) => c.push(p),
            None => clusters.push(vec![p]),
        }
    }

    let mut spheres: Vec<SpectralSphere> = clusters
        .into_iter()
        .map(|c| {
            let m = c.len() as f64;
            let u = c.iter().map(|p| p.0).sum::<f64>() / m;
            let mut v = c.iter().map(|p| p.1).sum::<f64>() / m;
            if v <= ROOT_CLUSTER_TOL * scale {
                v = 0.0;
            }
            SpectralSphere::new(u, v, c.len().div_ceil(2))
        })
        .collect();
    spheres.sort_by(|a, b| a.u.total_cmp(&b.u).then(a.v.total_cmp(&b.v)));
    Ok(spheres)
}

/// Operator file: `{ "n": int, "T0": [[...]], ..., "T3": [[...]] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub n: usize,
    #[serde(rename = "T0", default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<Vec<Vec<f64>>>,
    #[serde(rename = "T1", default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<Vec<Vec<f64>>>,
    #[serde(rename = "T2", default, skip_serializing_if = "Option::is_none")]
    pub t2: Option<Vec<Vec<f64>>>,
    #[serde(rename = "T3", default, skip_serializing_if = "Option::is_none")]
    pub t3: Option<Vec<Vec<f64>>>,
}

impl OperatorFile {
    pub fn into_operator(self) -> Result<CommutingOperator> {
        let n = self.n;
        let build = |rows: Option<Vec<Vec<f64>>>, name: &str| -> Result<DMatrix<f64>> {
            match rows {
                None => Ok(DMatrix::zeros(n, n)),
                Some(rows) => {
                    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                        return Err(Error::Parse(format!("{name} must be a {n}x{n} array")));
                    }
                    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
                }
            }
        };
        CommutingOperator::new(build(self.t0, "T0")?, build(self.t1, "T1")?, build(self.t2, "T2")?, build(self.t3, "T3")?)
    }

    pub fn from_operator(t: &CommutingOperator) -> Self {
        let rows = |m: &DMatrix<f64>| Some((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect());
        Self {
            n: t.dim(),
            t0: rows(t.component(0)),
            t1: rows(t.component(1)),
            t2: rows(t.component(2)),
            t3: rows(t.component(3)),
        }
    }
}

impl CommutingOperator {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: OperatorFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.into_operator()
    }
}
