//! Finite probes of the standing hypotheses. Passing probes are necessary,
//! not sufficient: they catch configuration mistakes, they prove nothing.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::Scenario;
use crate::error::Hypothesis;

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisCheck {
    pub hypothesis: Hypothesis,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn get(&self, h: Hypothesis) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.hypothesis == h)
    }

    pub fn passed(&self, h: Hypothesis) -> bool {
        self.get(h).is_some_and(|c| c.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub(crate) fn probe_all(scn: &Scenario) -> HypothesisReport {
    let checks = vec![
        outcome(Hypothesis::H1, probe_h1(scn)),
        outcome(Hypothesis::H2, probe_h2(scn)),
        outcome(Hypothesis::H3, probe_h3(scn)),
        outcome(Hypothesis::H4, probe_h4(scn)),
        outcome(Hypothesis::H5, probe_h5(scn)),
    ];
    HypothesisReport { checks }
}

fn outcome(hypothesis: Hypothesis, r: Result<String, String>) -> HypothesisCheck {
    match r {
        Ok(detail) => HypothesisCheck {
            hypothesis,
            passed: true,
            detail,
        },
        Err(detail) => HypothesisCheck {
            hypothesis,
            passed: false,
            detail,
        },
    }
}

fn unit_directions(n: usize) -> Vec<DVector<f64>> {
    let mut dirs = Vec::new();
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = DVector::zeros(n);
            e[i] = sign;
            dirs.push(e);
        }
    }
    if n > 1 {
        let diag = DVector::from_element(n, 1.0 / (n as f64).sqrt());
        dirs.push(-&diag);
        dirs.push(diag);
    }
    dirs
}

fn sample_points(n: usize) -> Vec<DVector<f64>> {
    let mut pts = vec![DVector::zeros(n)];
    for u in unit_directions(n) {
        for r in [0.5, 2.0, 10.0] {
            pts.push(&u * r);
        }
    }
    pts
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

fn probe_h1(scn: &Scenario) -> Result<String, String> {
    let n = scn.state_dim();
    let pts = sample_points(n);
    let dirs = unit_directions(n);
    for (k, zeta) in scn.cone().base_grid().iter().enumerate() {
        let l = scn.lagrangian().scalarize(zeta);
        for w in &pts {
            let eig = min_eigenvalue(&l.hessian(w));
            if !(eig > 0.0) {
                return Err(format!(
                    "Hessian of L_zeta for direction {k} has min eigenvalue {eig:.3e} at w = {:?} (not strictly convex)",
                    w.as_slice()
                ));
            }
        }
        for u in &dirs {
            let ratios: Vec<f64> = [1e2, 1e3, 1e4].iter().map(|r| l.value(&(u * *r)) / r).collect();
            if !(ratios[0] < ratios[1] && ratios[1] < ratios[2]) || ratios.iter().any(|v| !v.is_finite()) {
                return Err(format!(
                    "L_zeta(w)/|w| for direction {k} along {:?} is not superlinear: {ratios:?}",
                    u.as_slice()
                ));
            }
        }
    }
    Ok(format!(
        "{} directions: positive definite Hessians on {} points, superlinear growth on {} rays",
        scn.cone().len(),
        pts.len(),
        dirs.len()
    ))
}

fn probe_h2(scn: &Scenario) -> Result<String, String> {
    let n = scn.state_dim();
    let mut pts = vec![DVector::zeros(n)];
    for u in unit_directions(n) {
        for r in [1.0, 1e2, 1e4] {
            pts.push(&u * r);
        }
    }
    for (k, zeta) in scn.cone().base_grid().iter().enumerate() {
        let g = scn.terminal().scalarize(zeta);
        let bound = g.lipschitz_bound();
        for x in &pts {
            let gn = g.gradient(x).norm();
            if !gn.is_finite() || gn > bound * (1.0 + 1e-9) + 1e-12 {
                return Err(format!(
                    "|grad g_zeta| = {gn:.3e} exceeds the Lipschitz bound {bound:.3e} for direction {k} at {:?}",
                    x.as_slice()
                ));
            }
        }
    }
    Ok("gradient norms bounded on probe points".into())
}

fn probe_h3(scn: &Scenario) -> Result<String, String> {
    let horizon = scn.horizon();
    let d = scn.discount();
    let grid: Vec<f64> = (0..=10).map(|i| horizon * i as f64 / 10.0).collect();
    for &t in &grid {
        if d.value(t, t) != 1.0 {
            return Err(format!("d_t(t) = {} at t = {t}", d.value(t, t)));
        }
        for &s in grid.iter().filter(|&&s| s >= t) {
            let v = d.value(t, s);
            if !(v > 0.0 && v <= 1.0) {
                return Err(format!("d_t(s) = {v} outside (0, 1] at t = {t}, s = {s}"));
            }
        }
    }
    let a = d.floor(horizon);
    if !(a >= super::DISCOUNT_FLOOR_MIN) {
        return Err(format!(
            "discount floor a = {a:.3e} is below {:.0e}",
            super::DISCOUNT_FLOOR_MIN
        ));
    }
    Ok(format!("a = {a:.6}"))
}

fn probe_h4(scn: &Scenario) -> Result<String, String> {
    let horizon = scn.horizon();
    let d = scn.discount();
    if let Some(t) = d.rate_jumps(horizon).first() {
        return Err(format!("dd_t(s)/dt jumps at t = {t} (rate changes there)"));
    }
    let h = 1e-6 * horizon.max(1.0);
    for i in 1..10 {
        let t = horizon * i as f64 / 10.0;
        for j in 0..=4 {
            let s = t + (horizon - t) * j as f64 / 4.0 + h;
            let fd = (d.value(t + h, s) - d.value(t - h, s)) / (2.0 * h);
            let exact = d.dt(t, s);
            if (fd - exact).abs() > 1e-6 * exact.abs().max(1e-3) {
                return Err(format!(
                    "dd_t(s)/dt = {exact:.6e} disagrees with the finite difference {fd:.6e} at t = {t}, s = {s}"
                ));
            }
        }
    }
    Ok("closed-form time derivative matches finite differences".into())
}

fn probe_h5(scn: &Scenario) -> Result<String, String> {
    let n = scn.state_dim();
    let pts = sample_points(n);
    let term = scn.terminal();
    for i in 0..scn.objective_dim() {
        for x in &pts {
            let eig = min_eigenvalue(&term.component_hessian(i, x));
            if eig < -1e-12 {
                return Err(format!(
                    "terminal component {i} is not convex at {:?} (min eigenvalue {eig:.3e})",
                    x.as_slice()
                ));
            }
        }
    }
    for (k, zeta) in scn.cone().base_grid().iter().enumerate() {
        let g = term.scalarize(zeta);
        for x in &pts {
            let eig = min_eigenvalue(&g.hessian(x));
            if eig < -1e-12 {
                return Err(format!(
                    "g_zeta for direction {k} is not convex at {:?} (min eigenvalue {eig:.3e})",
                    x.as_slice()
                ));
            }
        }
    }
    Ok("terminal components and scalarizations convex on probe points".into())
}
