//! Set derivatives of the value function, the set-valued Fenchel conjugate
//! of the discounted Lagrangian and the direction-wise HJB check.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Hypothesis, Result};
use crate::hopflax::{direction_value, optimal_arc, AnalyticArc};
use crate::lattice::{lattice_sup, HalfSpace, UpperSet};
use crate::parallel;
use crate::problem::Scenario;
use crate::report::{fmt, write_csv};

/// `𝓛_t*(s, p, ζ)`: the half-space `{ z : ζ·z ≥ p·w* − d_t(s) L_ζ(w*) }` with
/// `w* = (∇L_ζ)⁻¹(p / d_t(s))` the maximizer of `p·w − d_t(s) L_ζ(w)`.
pub fn fenchel_conjugate(scn: &Scenario, t: f64, s: f64, p: &DVector<f64>, zeta: &DVector<f64>) -> Result<HalfSpace> {
    crate::hopflax::check_interval(scn, t, s)?;
    let d = scn.discount().value(t, s);
    let l = scn.lagrangian().scalarize(zeta);
    let w = l.invert_gradient(&(p / d))?;
    Ok(HalfSpace::new(zeta.clone(), p.dot(&w) - d * l.value(&w)))
}

/// Everything the HJB equation needs in one direction at `(t, x)`.
#[derive(Debug, Clone, Serialize)]
pub struct DirectionalDerivatives {
    pub p_star: Vec<f64>,
    /// `u_{t,ζ}(t, x)`.
    pub ut: f64,
    /// `∇u_ζ(t, x) = d_t(T) ∇g_ζ(Y(T))`.
    pub grad_u: Vec<f64>,
    /// `w(t, x, ζ)`.
    pub source: Vec<f64>,
}

fn require_hjb(scn: &Scenario) -> Result<()> {
    for h in Hypothesis::ALL {
        scn.require(h)?;
    }
    Ok(())
}

fn source_along(scn: &Scenario, arc: &AnalyticArc, y_t: &DVector<f64>) -> Result<DVector<f64>> {
    let (t, horizon) = (arc.t0, scn.horizon());
    let disc = scn.discount();
    let l = scn.lagrangian().scalarize(&arc.zeta);
    let mut w = scn.terminal().value(y_t) * disc.dt(t, horizon);
    for (s, q) in scn.quadrature().points(t, horizon) {
        let v = l.invert_gradient(&(&arc.p / disc.value(t, s)))?;
        w += scn.lagrangian().value(&v) * (q * disc.dt(t, s));
    }
    Ok(w)
}

/// `u_{t,ζ}`, `∇u_ζ` and `w(t, x, ζ)` along the optimal arc for `ζ`.
pub fn derivatives(scn: &Scenario, t: f64, x: &DVector<f64>, zeta: &DVector<f64>) -> Result<DirectionalDerivatives> {
    require_hjb(scn)?;
    if t >= scn.horizon() {
        return Err(Error::Domain(format!("set derivatives need t < T, got t = {t}")));
    }
    let (sol, arc) = optimal_arc(scn, t, x, zeta)?;
    let horizon = scn.horizon();
    let y_t = DVector::from_column_slice(&sol.terminal_state);
    let l = scn.lagrangian().scalarize(zeta);
    let g = scn.terminal().scalarize(zeta);
    let d_t = scn.discount().value(t, horizon);
    let grad_g = g.gradient(&y_t);
    let w0 = l.invert_gradient(&arc.p)?;
    let source = source_along(scn, &arc, &y_t)?;
    let ut = -l.value(&w0) + zeta.dot(&source) - d_t * grad_g.dot(&w0);
    Ok(DirectionalDerivatives {
        p_star: sol.p_star,
        ut,
        grad_u: (grad_g * d_t).as_slice().to_vec(),
        source: source.as_slice().to_vec(),
    })
}

pub fn grad_u(scn: &Scenario, t: f64, x: &DVector<f64>, zeta: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(DVector::from_vec(derivatives(scn, t, x, zeta)?.grad_u))
}

pub fn ut_scalar(scn: &Scenario, t: f64, x: &DVector<f64>, zeta: &DVector<f64>) -> Result<f64> {
    Ok(derivatives(scn, t, x, zeta)?.ut)
}

/// `w(t, x, ζ) = ∫_t^T ∂d_t(s)/∂t L(Ẏ(s)) ds + ∂d_t(T)/∂t g(Y(T))`.
pub fn hjb_source(scn: &Scenario, t: f64, x: &DVector<f64>, zeta: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(DVector::from_vec(derivatives(scn, t, x, zeta)?.source))
}

/// `U_{t,ζ}(t, x) = S_{(u_{t,ζ}, ζ)}(1)`.
pub fn time_derivative_set(scn: &Scenario, t: f64, x: &DVector<f64>, zeta: &DVector<f64>) -> Result<HalfSpace> {
    Ok(HalfSpace::new(zeta.clone(), ut_scalar(scn, t, x, zeta)?))
}

/// `U_{q,ζ}(t, x) = S_{(∇u_ζ, ζ)}(q)`.
pub fn space_derivative_set(scn: &Scenario, t: f64, x: &DVector<f64>, zeta: &DVector<f64>, q: &DVector<f64>) -> Result<HalfSpace> {
    Ok(HalfSpace::new(zeta.clone(), grad_u(scn, t, x, zeta)?.dot(q)))
}

/// Threshold of `[U(t + h, x + h q) −_ζ U(t, x)] / h`.
pub fn difference_quotient(scn: &Scenario, t: f64, x: &DVector<f64>, zeta: &DVector<f64>, q: &DVector<f64>, h: f64) -> Result<f64> {
    let moved = x + q * h;
    Ok((direction_value(scn, t + h, &moved, zeta)? - direction_value(scn, t, x, zeta)?) / h)
}

#[derive(Debug, Clone)]
pub struct HjbConfig {
    pub tol: f64,
    pub fd_step: f64,
    pub fd_tol: f64,
    pub jobs: usize,
}

impl HjbConfig {
    /// `1e-6` when every scalarized Lagrangian inverts in closed form,
    /// `1e-4` when Newton inversion is involved.
    pub fn for_scenario(scn: &Scenario) -> Self {
        let closed_form = scn.cone().base_grid().iter().all(|z| scn.lagrangian().scalarize(z).is_quadratic());
        Self {
            tol: if closed_form { 1e-6 } else { 1e-4 },
            ..Self::default()
        }
    }
}

impl Default for HjbConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            fd_step: 1e-5,
            fd_tol: 1e-4,
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HjbRecord {
    pub t: f64,
    pub x: Vec<f64>,
    pub k: usize,
    pub zeta: Vec<f64>,
    pub ut: f64,
    pub grad_u: Vec<f64>,
    pub conjugate: f64,
    pub source: f64,
    pub residual: f64,
    pub fd_ut: f64,
    pub fd_grad_u: Vec<f64>,
    pub fd_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HjbReport {
    pub tol: f64,
    pub fd_tol: f64,
    pub fd_step: f64,
    pub max_residual: f64,
    pub worst: Option<(f64, Vec<f64>, usize)>,
    /// Largest `|threshold|` of the sup over directions of the residual half-spaces.
    pub sup_residual: f64,
    pub max_fd_error: f64,
    pub records: Vec<HjbRecord>,
    pub passed: bool,
}

impl HjbReport {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let Some(first) = self.records.first() else {
            return write_csv(out, &[], &[]);
        };
        let (n, d) = (first.x.len(), first.zeta.len());
        let mut header = vec!["t".to_string()];
        header.extend((0..n).map(|i| format!("x{i}")));
        header.push("k".into());
        header.extend((0..d).map(|i| format!("zeta{i}")));
        for c in ["ut", "conjugate", "source", "residual", "fd_ut", "fd_error"] {
            header.push(c.into());
        }
        let rows: Vec<Vec<String>> = self
            .records
            .iter()
            .map(|r| {
                let mut row = vec![fmt(r.t)];
                row.extend(r.x.iter().map(|v| fmt(*v)));
                row.push(r.k.to_string());
                row.extend(r.zeta.iter().map(|v| fmt(*v)));
                row.extend([r.ut, r.conjugate, r.source, r.residual, r.fd_ut, r.fd_error].map(fmt));
                row
            })
            .collect();
        write_csv(out, &header, &rows)
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

fn check_point(scn: &Scenario, t: f64, x: &DVector<f64>, cfg: &HjbConfig) -> Result<(Vec<HjbRecord>, f64)> {
    let h = cfg.fd_step;
    let n = x.len();
    let mut records = Vec::new();
    let mut restricted = Vec::new();
    for (k, zeta) in scn.cone().base_grid().iter().enumerate() {
        let run = || -> Result<HjbRecord> {
            let dd = derivatives(scn, t, x, zeta)?;
            let gu = DVector::from_column_slice(&dd.grad_u);
            let conjugate = fenchel_conjugate(scn, t, t, &-&gu, zeta)?.threshold();
            let source = zeta.dot(&DVector::from_column_slice(&dd.source));
            let residual = dd.ut - (conjugate + source);

            let v0 = direction_value(scn, t, x, zeta)?;
            let fd_ut = (direction_value(scn, t + h, x, zeta)? - v0) / h;
            let mut fd_error = relative_gap(dd.ut, fd_ut);
            let mut fd_grad_u = Vec::with_capacity(n);
            for i in 0..n {
                let mut xi = x.clone();
                xi[i] += h;
                let fd = (direction_value(scn, t, &xi, zeta)? - v0) / h;
                fd_error = fd_error.max(relative_gap(dd.grad_u[i], fd));
                fd_grad_u.push(fd);
            }
            Ok(HjbRecord {
                t,
                x: x.as_slice().to_vec(),
                k,
                zeta: zeta.as_slice().to_vec(),
                ut: dd.ut,
                grad_u: dd.grad_u,
                conjugate,
                source,
                residual,
                fd_ut,
                fd_grad_u,
                fd_error,
            })
        };
        let rec = run().map_err(|e| e.in_direction(k))?;
        // U_{t,ζ} −_ζ 𝓛_t*(t, −∇u_ζ, ζ) − w has threshold equal to the residual
        restricted.push(UpperSet::restricted(scn.cone().clone(), k, rec.residual)?);
        records.push(rec);
    }
    let sup = lattice_sup(&restricted)?;
    let sup_residual = sup.thresholds().iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok((records, sup_residual))
}

/// Evaluates the HJB residual `u_{t,ζ} − [𝓛_t*(t, −∇u_ζ, ζ) + ζ·w(t, x, ζ)]`
/// on the grid `ts × xs` in every base direction, plus one-sided finite
/// differences of the value thresholds against `u_{t,ζ}` and `∇u_ζ`.
pub fn check_hjb(scn: &Scenario, ts: &[f64], xs: &[DVector<f64>], cfg: &HjbConfig) -> Result<HjbReport> {
    require_hjb(scn)?;
    let horizon = scn.horizon();
    if let Some(t) = ts.iter().find(|&&t| !(t >= 0.0 && t + cfg.fd_step <= horizon)) {
        return Err(Error::Usage(format!("t = {t} leaves no room for a forward difference before T = {horizon}")));
    }
    let cells: Vec<(f64, &DVector<f64>)> = ts.iter().flat_map(|&t| xs.iter().map(move |x| (t, x))).collect();
    let per_point = parallel::ordered_map(cfg.jobs, &cells, |&(t, x)| check_point(scn, t, x, cfg))?;
    let mut records = Vec::new();
    let mut sup_residual = 0.0f64;
    for (recs, c) in per_point {
        records.extend(recs);
        sup_residual = sup_residual.max(c);
    }
    let worst = records.iter().max_by(|a, b| a.residual.abs().total_cmp(&b.residual.abs()));
    let max_residual = worst.map_or(0.0, |r| r.residual.abs());
    let worst = worst.map(|r| (r.t, r.x.clone(), r.k));
    let max_fd_error = records.iter().map(|r| r.fd_error).fold(0.0, f64::max);
    Ok(HjbReport {
        tol: cfg.tol,
        fd_tol: cfg.fd_tol,
        fd_step: cfg.fd_step,
        passed: max_residual <= cfg.tol && sup_residual <= cfg.tol && max_fd_error <= cfg.fd_tol,
        max_residual,
        worst,
        sup_residual,
        max_fd_error,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ConeSpec;
    use crate::problem::{presets, DiscountSpec, TerminalSpec};

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn conjugate_of_half_square() {
        let scn = presets::standard(0.3, 3).unwrap();
        let z = v(&[1.0, 0.0]);
        let c = fenchel_conjugate(&scn, 0.4, 0.4, &v(&[1.7]), &z).unwrap();
        assert!((c.threshold() - 0.5 * 1.7 * 1.7).abs() < 1e-15);
        // p = ∇L_ζ(0) d_t(s) puts the maximizer at 0
        let z = v(&[0.5, 0.5]);
        let d = scn.discount_at(0.1, 0.7).unwrap();
        let p = scn.lagrangian().scalarize(&z).gradient(&v(&[0.0])) * d;
        let c = fenchel_conjugate(&scn, 0.1, 0.7, &p, &z).unwrap();
        let l0 = scn.lagrangian().scalarize(&z).value(&v(&[0.0]));
        assert!((c.threshold() + d * l0).abs() < 1e-15);
    }

    #[test]
    fn linear_terminal_gradient() {
        let scn = presets::standard(0.1, 3).unwrap();
        let gu = grad_u(&scn, 0.4, &v(&[0.3]), &v(&[1.0, 0.0])).unwrap();
        assert!((gu[0] - (-0.1f64 * 0.6).exp()).abs() < 1e-15);
    }

    #[test]
    fn constant_rate_source_is_rate_times_cost() {
        let scn = presets::quad_sat(DiscountSpec::ConstantRate { rate: 0.2 }, 3).unwrap();
        let (t, x, z) = (0.3, v(&[0.4]), v(&[0.5, 0.5]));
        let (_, arc) = optimal_arc(&scn, t, &x, &z).unwrap();
        let cost = crate::hopflax::vector_cost(&scn, &arc.into()).unwrap();
        let w = hjb_source(&scn, t, &x, &z).unwrap();
        assert!((w - cost * 0.2).norm() < 1e-13);
    }

    #[test]
    fn zero_terminal_without_discount() {
        let scn = Scenario::new(
            ConeSpec::orthant(2, 5).unwrap(),
            presets::standard_lagrangian(),
            TerminalSpec::zero(2, 1),
            DiscountSpec::ConstantRate { rate: 0.0 },
            1.0,
        )
        .unwrap();
        let report = check_hjb(&scn, &[0.0, 0.5], &[v(&[0.0]), v(&[1.0])], &HjbConfig::default()).unwrap();
        assert!(report.max_residual < 1e-15, "{}", report.max_residual);
        assert!(report.passed);
    }
}
