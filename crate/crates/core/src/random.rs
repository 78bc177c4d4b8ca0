//! Seeded generators for quaternions, operators and evaluation points.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::operators::{s_spectrum, CommutingOperator};
use crate::quat::{ImaginaryUnit, Quaternion, SpectralSphere};
use crate::slicefn::{Side, SlicePoly};

/// Deterministic sampler; identical seeds give identical streams on every platform.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Components uniform in `[-scale, scale]`.
    pub fn quaternion(&mut self, scale: f64) -> Quaternion {
        Quaternion::new(
            self.uniform(-scale, scale),
            self.uniform(-scale, scale),
            self.uniform(-scale, scale),
            self.uniform(-scale, scale),
        )
    }

    pub fn real_quaternion(&mut self, scale: f64) -> Quaternion {
        Quaternion::real(self.uniform(-scale, scale))
    }

    /// Uniform on the sphere of imaginary units.
    pub fn imaginary_unit(&mut self) -> ImaginaryUnit {
        loop {
            let (x, y, z) = (self.uniform(-1.0, 1.0), self.uniform(-1.0, 1.0), self.uniform(-1.0, 1.0));
            let r2 = x * x + y * y + z * z;
            if r2 > 1e-4 && r2 <= 1.0 {
                return ImaginaryUnit::new(x, y, z).expect("nonzero vector");
            }
        }
    }

    pub fn real_matrix(&mut self, n: usize, scale: f64) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |_, _| self.rng.gen_range(-scale..scale))
    }

    fn base_matrix(&mut self, n: usize, symmetric: bool) -> DMatrix<f64> {
        let a = self.real_matrix(n, 1.0);
        let a = if symmetric { (&a + a.transpose()) * 0.5 } else { a };
        a / (n as f64).sqrt()
    }

    fn polynomial_components(&mut self, a: &DMatrix<f64>, with_t3: bool) -> CommutingOperator {
        let n = a.nrows();
        let a2 = a * a;
        let mut comps: Vec<DMatrix<f64>> = (0..4)
            .map(|_| {
                let c0 = self.uniform(-1.0, 1.0);
                let c1 = self.uniform(-1.0, 1.0);
                let c2 = self.uniform(-0.5, 0.5);
                DMatrix::identity(n, n) * c0 + a * c1 + &a2 * c2
            })
            .collect();
        if !with_t3 {
            comps[3] = DMatrix::zeros(n, n);
        }
        let [t0, t1, t2, t3]: [DMatrix<f64>; 4] = comps.try_into().expect("four components");
        CommutingOperator::new(t0, t1, t2, t3).expect("polynomials of one matrix commute")
    }

    /// Components are real polynomials of one random matrix.
    pub fn commuting_operator(&mut self, n: usize, with_t3: bool) -> CommutingOperator {
        let a = self.base_matrix(n, false);
        self.polynomial_components(&a, with_t3)
    }

    /// `T3 = 0` and every component symmetric, hence with real spectrum.
    pub fn real_spectrum_operator(&mut self, n: usize) -> CommutingOperator {
        let a = self.base_matrix(n, true);
        self.polynomial_components(&a, false)
    }

    pub fn diagonal_operator(&mut self, n: usize, with_t3: bool) -> CommutingOperator {
        let entries: Vec<Quaternion> = (0..n)
            .map(|_| {
                let mut q = self.quaternion(1.5);
                if !with_t3 {
                    q.z = 0.0;
                }
                q
            })
            .collect();
        CommutingOperator::diagonal(&entries)
    }

    /// Two clusters of spheres around well separated centres, with `T3 = 0`
    /// and real component spectra, mixed by a random real similarity.
    /// Returns the operator and the indices of the spheres in the first cluster.
    pub fn split_operator(&mut self, n: usize) -> (CommutingOperator, Vec<usize>) {
        assert!(n >= 2, "a split spectrum needs n >= 2");
        loop {
            let c1 = Quaternion::new(self.uniform(-1.0, 1.0), self.uniform(-1.0, 1.0), self.uniform(-1.0, 1.0), 0.0);
            let c2 = Quaternion::new(self.uniform(-1.0, 1.0), self.uniform(-1.0, 1.0), self.uniform(-1.0, 1.0), 0.0);
            if c1.sphere().distance(&c2.sphere()) < 1.5 {
                continue;
            }
            let k = 1 + self.index(n - 1);
            let entries: Vec<Quaternion> = (0..n)
                .map(|i| {
                    let c = if i < k { c1 } else { c2 };
                    let mut d = self.quaternion(0.1);
                    d.z = 0.0;
                    c + d
                })
                .collect();
            let d = CommutingOperator::diagonal(&entries);
            let v = DMatrix::identity(n, n) + self.real_matrix(n, 0.3 / (n as f64).sqrt());
            let Some(vinv) = v.clone().try_inverse() else { continue };
            let comps: Vec<DMatrix<f64>> = (0..4).map(|i| &v * d.component(i) * &vinv).collect();
            let [t0, t1, t2, _]: [DMatrix<f64>; 4] = comps.try_into().expect("four components");
            let z = DMatrix::zeros(n, n);
            let Ok(t) = CommutingOperator::new(t0, t1, t2, z) else { continue };
            let Ok(sp) = s_spectrum(&t) else { continue };
            let (s1, s2) = (c1.sphere(), c2.sphere());
            let sel: Vec<usize> = (0..sp.len()).filter(|&i| sp[i].distance(&s1) < sp[i].distance(&s2)).collect();
            if sel.is_empty() || sel.len() == sp.len() {
                continue;
            }
            return (t, sel);
        }
    }

    /// A stem of degree `deg` with real coefficients.
    pub fn intrinsic_poly(&mut self, deg: usize) -> SlicePoly {
        SlicePoly::new(Side::Left, (0..=deg).map(|_| self.real_quaternion(1.0)).collect())
    }

    pub fn poly(&mut self, side: Side, deg: usize) -> SlicePoly {
        SlicePoly::new(side, (0..=deg).map(|_| self.quaternion(1.0)).collect())
    }

    /// A real polynomial in the components of `t`; commutes with `t`.
    pub fn commuting_polynomial(&mut self, t: &CommutingOperator) -> DMatrix<f64> {
        let n = t.dim();
        let mut b = DMatrix::identity(n, n) * self.uniform(-1.0, 1.0);
        for i in 0..4 {
            b += t.component(i) * self.uniform(-1.0, 1.0);
        }
        b += t.component(0) * t.component(1) * self.uniform(-0.5, 0.5);
        b
    }

    /// A point with `|q_i| <= radius` at distance at least `clearance` from every sphere.
    pub fn point_off_spectrum(&mut self, spectrum: &[SpectralSphere], clearance: f64, radius: f64) -> Quaternion {
        self.point_avoiding(spectrum, clearance, radius)
    }

    /// Like [`Sampler::point_off_spectrum`], also avoiding the listed spheres.
    pub fn point_avoiding(&mut self, spheres: &[SpectralSphere], clearance: f64, radius: f64) -> Quaternion {
        let mut r = radius;
        for attempt in 0.. {
            let q = self.quaternion(r);
            if spheres.iter().all(|sp| q.sphere_distance(sp) >= clearance) {
                return q;
            }
            if attempt % 200 == 199 {
                r *= 1.5;
            }
        }
        unreachable!()
    }
}
