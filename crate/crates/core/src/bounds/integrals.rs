use super::exponents::ExponentBook;
use crate::constitutive::WeightFields;
use crate::error::{Error, Result};
use crate::grid::{integrate_boundary, integrate_volume, log_weight_integral, BoundaryField, SpatialField, TimeSeries};
use crate::logspace::LogScalar;
use serde::Serialize;

/// Weight and data integrals entering the bounds, all in log form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DataIntegrals {
    /// `K1..K6`.
    pub k: [LogScalar; 6],
    pub n1: LogScalar,
    pub n2: LogScalar,
    pub n3: LogScalar,
    pub psi_t: LogScalar,
    /// `1 + int phi`.
    pub phi_star: f64,
    /// `M(t) = 1 + int_Gamma (psi^-)^{(alpha + r)/r}` on the boundary-data time grid.
    pub m_series: TimeSeries,
    /// Horizon `T` used for `Psi_T` and the `M` samples.
    pub t_final: f64,
    /// Exponents the integrals were evaluated for.
    pub alpha: f64,
    pub r: f64,
    pub r1: f64,
    /// Integrals whose continuum value may be infinite.
    pub warnings: Vec<String>,
}

impl DataIntegrals {
    pub fn k(&self, i: usize) -> LogScalar {
        self.k[i - 1]
    }
}

/// Sample times of the boundary data inside `[0, t_final]`, with both ends.
pub fn boundary_sample_times(psi: &BoundaryField, t_final: f64) -> Vec<f64> {
    let mut times = vec![0.0];
    times.extend(psi.times().iter().copied().filter(|&t| t > 0.0 && t < t_final));
    times.push(t_final);
    times
}

/// `t -> int_Gamma f(psi^-(x, t)) dS` sampled on the boundary-data grid.
pub fn boundary_series(psi: &BoundaryField, t_final: f64, f: impl Fn(f64) -> f64) -> Result<TimeSeries> {
    let mut s = TimeSeries::new();
    for t in boundary_sample_times(psi, t_final) {
        let vals = psi.at_time(t);
        s.push(t, integrate_boundary(psi.grid(), |_, b| f((-vals[b]).max(0.0)))?)?;
    }
    Ok(s)
}

/// `M(t)` samples for exponent `alpha` and shift `r`.
pub fn m_series(psi: &BoundaryField, t_final: f64, alpha: f64, r: f64) -> Result<TimeSeries> {
    let e = (alpha + r) / r;
    let mut s = boundary_series(psi, t_final, |v| if v > 0.0 { v.powf(e) } else { 0.0 })?;
    s.values.iter_mut().for_each(|v| *v += 1.0);
    Ok(s)
}

struct Collector<'a> {
    grid: &'a crate::grid::Grid,
    warnings: Vec<String>,
}

impl Collector<'_> {
    fn integral(&mut self, name: &str, factors: &[(&SpatialField, f64)]) -> Result<LogScalar> {
        let f = log_weight_integral(self.grid, factors)?;
        if f.possibly_divergent {
            self.warnings.push(format!("{name} may diverge"));
        }
        Ok(f.value)
    }
}

/// Evaluates every weight integral for the book's exponents.
///
/// `a_n` is the leading law coefficient; `psi` the boundary data up to `t_final`.
pub fn compute_data_integrals(
    book: &ExponentBook,
    phi: &SpatialField,
    weights: &WeightFields,
    a_n: &SpatialField,
    psi: &BoundaryField,
    t_final: f64,
) -> Result<DataIntegrals> {
    let grid = phi.grid();
    for f in [&weights.w1, &weights.w3, a_n] {
        phi.require_same_grid(f)?;
    }
    if psi.grid() != grid {
        return Err(Error::FieldMismatch("boundary data lives on another grid".into()));
    }
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(Error::InvalidInput(format!("horizon must be > 0, got {t_final}")));
    }
    phi.require_positive()?;
    let ExponentBook { a, lambda, alpha, r, r1, r_star, theta_tilde, mu1_tilde, p, q, .. } = *book;
    let (w1, w3) = (&weights.w1, &weights.w3);
    let mut col = Collector { grid, warnings: Vec::new() };

    let k1 = col.integral("K1", &[(phi, -1.0)])?;
    let k2_exp = -(alpha + 1.0 - lambda - a) / (alpha * (1.0 - a) - 1.0 + lambda + a);
    let k2 = col.integral("K2", &[(phi, k2_exp)])?;
    let k3 = col.integral("K3", &[(a_n, alpha / (lambda + 1.0)), (phi, 1.0 - alpha / (lambda + 1.0))])?;
    let k4 = col.integral("K4", &[(w1, -r1 / (1.0 - r1))])?;
    let k5 = col.integral("K5", &[(w3, (alpha + r) / (r + 1.0 - lambda * (3.0 - 2.0 * a)))])?;
    let k6_exp = -1.0 / ((1.0 - a) * (1.0 - theta_tilde) * (1.0 + mu1_tilde / alpha));
    let k6 = col.integral("K6", &[(phi, -1.0), (w1, k6_exp)])?;

    let phi_int = integrate_volume(grid, |c| phi.get(c))?;
    let phi_star = 1.0 + phi_int;
    let gp = p[2] * (2.0 - a) - 1.0;
    let terms = [
        LogScalar::ONE,
        col.integral("W3^q1 phi^(-q1/p1)", &[(w3, q[0]), (phi, -q[0] / p[0])])?.powf(1.0 / q[0]),
        col.integral("aN^q2 phi^(-q2/p2)", &[(a_n, q[1]), (phi, -q[1] / p[1])])?.powf(1.0 / q[1]),
        col.integral("phi^(-q4/p4)", &[(phi, -q[3] / p[3])])?.powf(1.0 / (p[2] * q[3])),
        col.integral("W1^(-q5/(1-a)) phi^(-q5/p5)", &[(w1, -q[4] / (1.0 - a)), (phi, -q[4] / p[4])])?
            .powf((1.0 - a) / (q[4] * gp)),
    ];
    let n1 = LogScalar::new(phi_star) * LogScalar::sum(terms);

    col.integral("phi^(-1/(1-a))", &[(phi, -1.0 / (1.0 - a))])?;
    let phi_rs = col.integral("phi^(2/r*-1)", &[(phi, 2.0 / r_star - 1.0)])?;
    let phi_r1 = col.integral("phi^(-r1/(1-r1))", &[(phi, -r1 / (1.0 - r1))])?;
    let n2 = phi_rs.powf(r_star / 2.0) * k4.powf(1.0 - r1).add(phi_r1.powf(1.0 - r1)).powf(1.0 / r1);
    let n3 = n1.max(n2);

    let q3 = q[2];
    let flux = boundary_series(psi, t_final, |v| if v > 0.0 { v.powf(q3) } else { 0.0 })?;
    let psi_int = flux.integral_to(t_final);
    let psi_t = LogScalar::ONE.add(LogScalar::new(psi_int).powf(p[2] * (2.0 - a) / (q3 * gp)));

    Ok(DataIntegrals {
        k: [k1, k2, k3, k4, k5, k6],
        n1,
        n2,
        n3,
        psi_t,
        phi_star,
        m_series: m_series(psi, t_final, alpha, r)?,
        t_final,
        alpha,
        r,
        r1,
        warnings: col.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::exponents::{build_exponents, ExponentInputs};
    use crate::grid::Grid;

    fn setup(psi: f64) -> (ExponentBook, DataIntegrals) {
        let grid = Grid::unit(2, 8).unwrap();
        let one = SpatialField::constant(grid, 1.0, "one");
        let half = SpatialField::constant(grid, 0.5, "w1");
        let w3 = SpatialField::constant(grid, 0.5 + 2f64.sqrt(), "w3");
        let weights = WeightFields { m_upper: one.clone(), m_lower: one.clone(), w1: half.clone(), w2: one.clone(), w3 };
        let inputs = ExponentInputs {
            r1: Some(2.0 / 3.0),
            r: Some(1.0),
            alpha: Some(40.0),
            ..ExponentInputs::new(2, 0.5, 0.5)
        };
        let book = build_exponents(&inputs).unwrap();
        let ints =
            compute_data_integrals(&book, &one, &weights, &one, &BoundaryField::constant(grid, psi), 0.1).unwrap();
        (book, ints)
    }

    #[test]
    fn reference_integrals() {
        let (_, d) = setup(0.0);
        for i in 1..=3 {
            assert!((d.k(i).value() - 1.0).abs() < 1e-14, "K{i} = {}", d.k(i).value());
        }
        assert!((d.k(4).value() - 4.0).abs() < 1e-13);
        let k5 = (0.5 + 2f64.sqrt()).powi(41);
        assert!((d.k(5).value() - k5).abs() < 1e-12 * k5);
        assert_eq!(d.psi_t, LogScalar::ONE);
        assert_eq!(d.phi_star, 2.0);
        assert!(d.m_series.values.iter().all(|&m| m == 1.0));
        assert!(d.warnings.is_empty());
        assert_eq!(d.n3, d.n1.max(d.n2));
        assert!(d.n1.ln() >= 0.0);
    }

    #[test]
    fn inflow_raises_psi_t_and_m() {
        let (book, d) = setup(-0.5);
        assert!(d.psi_t.value() > 1.0);
        // Perimeter 4, psi^- = 1/2.
        let m = 1.0 + 4.0 * 0.5f64.powf((book.alpha + book.r) / book.r);
        assert!((d.m_series.values[0] - m).abs() < 1e-15);
        let psi_int = 0.1 * 4.0 * 0.5f64.powf(book.q[2]);
        let gp = book.p[2] * 1.5 - 1.0;
        let want = 1.0 + psi_int.powf(book.p[2] * 1.5 / (book.q[2] * gp));
        assert!((d.psi_t.value() - want).abs() < 1e-12 * want);
    }

    #[test]
    fn zero_weight_under_negative_power_is_an_error() {
        let grid = Grid::unit(2, 4).unwrap();
        let one = SpatialField::constant(grid, 1.0, "one");
        let weights = WeightFields {
            m_upper: one.clone(),
            m_lower: one.clone(),
            w1: SpatialField::constant(grid, 0.0, "w1"),
            w2: one.clone(),
            w3: one.clone(),
        };
        let book = build_exponents(&ExponentInputs::new(2, 0.5, 0.5)).unwrap();
        let psi = BoundaryField::constant(grid, 0.0);
        assert!(compute_data_integrals(&book, &one, &weights, &one, &psi, 1.0).is_err());
    }
}
