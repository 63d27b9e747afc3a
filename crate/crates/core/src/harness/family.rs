use crate::error::{Error, Result};
use crate::grid::{Grid, SpatialField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

/// Seeded family of smooth test functions with analytic gradients.
///
/// Members are generated in order (constant, linear, bump, then random
/// cosine sums), so a smaller family is always a prefix of a larger one with
/// the same seed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestFunctionFamily {
    pub seed: u64,
    pub count: usize,
    pub max_frequency: usize,
    /// Mode amplitudes are `U(-1, 1) / (1 + |k|)^decay`.
    pub decay: f64,
    pub include_constant: bool,
    pub include_linear: bool,
    pub include_bump: bool,
}

impl Default for TestFunctionFamily {
    fn default() -> Self {
        TestFunctionFamily {
            seed: 20240917,
            count: 200,
            max_frequency: 3,
            decay: 2.0,
            include_constant: true,
            include_linear: true,
            include_bump: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Mode {
    k: [usize; 3],
    amplitude: f64,
    phase: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Constant(f64),
    /// The first coordinate mapped to `[0, 1]`.
    Linear,
    /// Centred Gaussian with width a quarter of the shortest side.
    Bump,
    Cosines(Vec<Mode>),
}

/// One family member; evaluation is in reference coordinates `xi = (x - lo) / L`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub id: usize,
    kind: Kind,
}

/// A member sampled on a grid.
#[derive(Clone, Debug)]
pub struct SampledFunction {
    pub id: usize,
    pub values: SpatialField,
    /// Analytic gradient at cell centres.
    pub gradients: Vec<[f64; 3]>,
    /// Analytic values at boundary face centres.
    pub boundary: Vec<f64>,
}

impl TestFunction {
    pub fn is_constant(&self) -> bool {
        matches!(self.kind, Kind::Constant(_))
    }

    /// Value and gradient at `x`.
    pub fn eval(&self, grid: &Grid, x: [f64; 3]) -> (f64, [f64; 3]) {
        let dim = grid.dim();
        let mut len = [1.0; 3];
        let mut xi = [0.0; 3];
        for k in 0..dim {
            let (lo, hi) = grid.extent(k);
            len[k] = hi - lo;
            xi[k] = (x[k] - lo) / len[k];
        }
        match &self.kind {
            Kind::Constant(c) => (*c, [0.0; 3]),
            Kind::Linear => (xi[0], [1.0 / len[0], 0.0, 0.0]),
            Kind::Bump => {
                let sigma = 0.25;
                let mut r2 = 0.0;
                for k in 0..dim {
                    r2 += (xi[k] - 0.5).powi(2);
                }
                let v = (-r2 / (2.0 * sigma * sigma)).exp();
                let mut g = [0.0; 3];
                for k in 0..dim {
                    g[k] = -v * (xi[k] - 0.5) / (sigma * sigma) / len[k];
                }
                (v, g)
            }
            Kind::Cosines(modes) => {
                let mut v = 0.0;
                let mut g = [0.0; 3];
                for m in modes {
                    let mut c = [1.0; 3];
                    let mut d = [0.0; 3];
                    for k in 0..dim {
                        let w = PI * m.k[k] as f64;
                        let arg = w * xi[k] + m.phase[k];
                        c[k] = arg.cos();
                        d[k] = -w * arg.sin() / len[k];
                    }
                    v += m.amplitude * c[0] * c[1] * c[2];
                    for k in 0..dim {
                        let mut prod = d[k];
                        for j in (0..dim).filter(|&j| j != k) {
                            prod *= c[j];
                        }
                        g[k] += m.amplitude * prod;
                    }
                }
                (v, g)
            }
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<SampledFunction> {
        let mut values = Vec::with_capacity(grid.cell_count());
        let mut gradients = Vec::with_capacity(grid.cell_count());
        for c in 0..grid.cell_count() {
            let (v, g) = self.eval(grid, grid.cell_center(c));
            values.push(v);
            gradients.push(g);
        }
        let boundary = grid.boundary_faces().iter().map(|b| self.eval(grid, b.center).0).collect();
        Ok(SampledFunction {
            id: self.id,
            values: SpatialField::new(*grid, values, format!("f{}", self.id))?,
            gradients,
            boundary,
        })
    }
}

impl TestFunctionFamily {
    pub fn with_count(count: usize, seed: u64) -> Self {
        TestFunctionFamily { count, seed, ..Default::default() }
    }

    pub fn generate(&self, dim: usize) -> Result<Vec<TestFunction>> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidInput(format!("family dimension {dim}")));
        }
        if !(self.decay.is_finite() && self.decay >= 0.0) {
            return Err(Error::InvalidInput(format!("decay exponent {}", self.decay)));
        }
        let mut out = Vec::with_capacity(self.count);
        let specials = [
            (self.include_constant, Kind::Constant(1.0)),
            (self.include_linear, Kind::Linear),
            (self.include_bump, Kind::Bump),
        ];
        for (on, kind) in specials {
            if on && out.len() < self.count {
                out.push(TestFunction { id: out.len(), kind });
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let kmax = self.max_frequency;
        while out.len() < self.count {
            let mut modes = Vec::new();
            for kz in 0..=if dim > 2 { kmax } else { 0 } {
                for ky in 0..=if dim > 1 { kmax } else { 0 } {
                    for kx in 0..=kmax {
                        let k = [kx, ky, kz];
                        let norm = ((kx * kx + ky * ky + kz * kz) as f64).sqrt();
                        let amplitude = rng.random_range(-1.0..1.0) / (1.0 + norm).powf(self.decay);
                        let phase = [
                            rng.random_range(0.0..2.0 * PI),
                            rng.random_range(0.0..2.0 * PI),
                            rng.random_range(0.0..2.0 * PI),
                        ];
                        modes.push(Mode { k, amplitude, phase });
                    }
                }
            }
            out.push(TestFunction { id: out.len(), kind: Kind::Cosines(modes) });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smaller_family_is_prefix() {
        let small = TestFunctionFamily::with_count(10, 7).generate(2).unwrap();
        let big = TestFunctionFamily::with_count(25, 7).generate(2).unwrap();
        assert_eq!(small[..], big[..10]);
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let g = Grid::new(&[4, 4], &[(0.0, 2.0), (-1.0, 1.0)]).unwrap();
        let fam = TestFunctionFamily::with_count(8, 3).generate(2).unwrap();
        let x = [0.731, 0.123, 0.0];
        let h = 1e-6;
        for f in &fam {
            let (_, grad) = f.eval(&g, x);
            for k in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[k] += h;
                xm[k] -= h;
                let fd = (f.eval(&g, xp).0 - f.eval(&g, xm).0) / (2.0 * h);
                assert!((fd - grad[k]).abs() < 1e-6 * (1.0 + fd.abs()), "f{} axis {k}: {fd} vs {}", f.id, grad[k]);
            }
        }
    }

    #[test]
    fn sampling_has_expected_shapes() {
        let g = Grid::unit(3, 3).unwrap();
        let fam = TestFunctionFamily::with_count(4, 1).generate(3).unwrap();
        let s = fam[3].sample(&g).unwrap();
        assert_eq!(s.gradients.len(), 27);
        assert_eq!(s.boundary.len(), g.boundary_face_count());
        assert!(fam[0].is_constant());
    }
}
