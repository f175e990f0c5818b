//! Candidate arcs, their costs, the stationarity solve for `p(t, x, ζ)` and
//! the Hopf-Lax assembly of the set-valued value function.
//!
//! For each base direction `ζ_k` the infinite-dimensional problem over arcs
//! collapses to a minimization over `p ∈ ℝ^n` of
//! `I_{t,ζ}(Y_{t,x,p,ζ})`; its minimizer solves
//! `F(p) = p + d_t(T) ∇g_ζ(Y(T)) = 0`. The value `U(t, x)` is the
//! intersection over the grid of the half-spaces
//! `{ z : ζ_k·z ≥ I_{t,ζ_k}(Y at p*) }`.

mod arc;
mod surface;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

pub use arc::{arc_position, arc_velocity, AnalyticArc, PiecewiseLinearArc, Trajectory};
pub use surface::{SurfacePoint, ValueSurface};

pub(crate) use arc::{arc_velocity_with, check_interval};

use crate::error::{Error, Hypothesis, Result};
use crate::lattice::UpperSet;
use crate::problem::{ScalarLagrangian, ScalarTerminal, Scenario};

pub const NEWTON_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITERS: usize = 50;
pub const MAX_CONDITION: f64 = 1e12;

/// Running part of the cost plus terminal state of an analytic arc.
struct Sweep {
    running: DVector<f64>,
    terminal_state: DVector<f64>,
    grad_p: Option<DMatrix<f64>>,
}

/// Integrates an analytic arc: position over `[t0, T]`, the running cost
/// `∫_from^T d_anchor(s) L(Ẏ(s)) ds` and optionally `∇_p Y(T)`.
fn sweep_analytic(
    scn: &Scenario,
    l: &ScalarLagrangian,
    arc: &AnalyticArc,
    anchor: f64,
    with_grad_p: bool,
) -> Result<Sweep> {
    let horizon = scn.horizon();
    let disc = scn.discount();
    let n = arc.x0.len();
    let mut y = arc.x0.clone();
    let mut running = DVector::zeros(scn.objective_dim());
    let mut grad_p = with_grad_p.then(|| DMatrix::zeros(n, n));

    let mut visit = |s: f64, w: f64, accumulate_cost: bool| -> Result<()> {
        let d0 = disc.value(arc.t0, s);
        let p_scaled = &arc.p / d0;
        let v = if let Some(gp) = grad_p.as_mut() {
            let (v, jac) = l.inverse_jacobian(&p_scaled)?;
            *gp += jac * (w / d0);
            v
        } else {
            l.invert_gradient(&p_scaled)?
        };
        if accumulate_cost {
            running += scn.lagrangian().value(&v) * (w * disc.value(anchor, s));
        }
        y += v * w;
        Ok(())
    };

    if arc.from > arc.t0 {
        for (s, w) in scn.quadrature().points(arc.t0, arc.from) {
            visit(s, w, false)?;
        }
    }
    for (s, w) in scn.quadrature().points(arc.from, horizon) {
        visit(s, w, true)?;
    }
    Ok(Sweep {
        running,
        terminal_state: y,
        grad_p,
    })
}

/// `∫_a^b d_anchor(s) L(ẏ(s)) ds` along any trajectory, `start ≤ a ≤ b ≤ T`.
pub fn running_cost(scn: &Scenario, traj: &Trajectory, anchor: f64, a: f64, b: f64) -> Result<DVector<f64>> {
    if a < traj.start() || b < a || b > scn.horizon() {
        return Err(Error::Domain(format!(
            "running cost interval [{a}, {b}] outside [{}, {}]",
            traj.start(),
            scn.horizon()
        )));
    }
    let disc = scn.discount();
    let mut out = DVector::zeros(scn.objective_dim());
    match traj {
        Trajectory::Analytic(arc) => {
            let l = scn.lagrangian().scalarize(&arc.zeta);
            for (s, w) in scn.quadrature().points(a, b) {
                let v = arc_velocity_with(scn, &l, arc.t0, &arc.p, s)?;
                out += scn.lagrangian().value(&v) * (w * disc.value(anchor, s));
            }
        }
        Trajectory::PiecewiseLinear(pl) => {
            for (ta, tb, v) in pl.segments() {
                let (c, e) = (ta.max(a), tb.min(b));
                if e > c {
                    out += scn.lagrangian().value(&v) * disc.integral(anchor, c, e);
                }
            }
        }
    }
    Ok(out)
}

/// `∫_start^T d_anchor(s) L(ẏ) ds + d_anchor(T) g(y(T))` together with `y(T)`.
pub fn anchored_cost(scn: &Scenario, traj: &Trajectory, anchor: f64) -> Result<(DVector<f64>, DVector<f64>)> {
    let horizon = scn.horizon();
    let (running, terminal_state) = match traj {
        Trajectory::Analytic(arc) => {
            let l = scn.lagrangian().scalarize(&arc.zeta);
            let sw = sweep_analytic(scn, &l, arc, anchor, false)?;
            (sw.running, sw.terminal_state)
        }
        Trajectory::PiecewiseLinear(pl) => (
            running_cost(scn, traj, anchor, traj.start(), horizon)?,
            pl.points().last().unwrap().clone(),
        ),
    };
    let cost = running + scn.terminal().value(&terminal_state) * scn.discount().value(anchor, horizon);
    Ok((cost, terminal_state))
}

/// The vector cost `I_t(y)` with `t` the start of the arc.
pub fn vector_cost(scn: &Scenario, traj: &Trajectory) -> Result<DVector<f64>> {
    Ok(anchored_cost(scn, traj, traj.start())?.0)
}

/// `I_{t,ζ}(y) = ζ·I_t(y)`.
pub fn scalar_cost(scn: &Scenario, traj: &Trajectory, zeta: &DVector<f64>) -> Result<f64> {
    Ok(vector_cost(scn, traj)?.dot(zeta))
}

/// `J_t(y) = I_t(y) + C` in threshold form.
pub fn cost_set(scn: &Scenario, traj: &Trajectory) -> Result<UpperSet> {
    UpperSet::from_point(scn.cone().clone(), &vector_cost(scn, traj)?)
}

struct Stationarity {
    f: DVector<f64>,
    jacobian: DMatrix<f64>,
    a_factors: (DMatrix<f64>, DMatrix<f64>),
    terminal_state: DVector<f64>,
}

fn stationarity(
    scn: &Scenario,
    l: &ScalarLagrangian,
    g: &ScalarTerminal,
    arc: &AnalyticArc,
) -> Result<Stationarity> {
    let horizon = scn.horizon();
    let sw = sweep_analytic(scn, l, arc, arc.t0, true)?;
    let d_t = scn.discount().value(arc.t0, horizon);
    let n = arc.p.len();
    let f = &arc.p + g.gradient(&sw.terminal_state) * d_t;
    let hess_g = g.hessian(&sw.terminal_state) * d_t;
    let grad_p = sw.grad_p.expect("sweep computed grad_p");
    let jacobian = DMatrix::identity(n, n) + &hess_g * &grad_p;
    Ok(Stationarity {
        f,
        jacobian,
        a_factors: (hess_g, grad_p),
        terminal_state: sw.terminal_state,
    })
}

/// `F(t, x, p, ζ) = p + d_t(T) ∇g_ζ(Y_{t,x,p,ζ}(T))`.
pub fn stationarity_f(
    scn: &Scenario,
    t: f64,
    x: &DVector<f64>,
    p: &DVector<f64>,
    zeta: &DVector<f64>,
) -> Result<DVector<f64>> {
    let arc = AnalyticArc::new(scn, t, x.clone(), p.clone(), zeta.clone())?;
    let l = scn.lagrangian().scalarize(zeta);
    let y_t = sweep_analytic(scn, &l, &arc, t, false)?.terminal_state;
    let d_t = scn.discount().value(t, scn.horizon());
    Ok(p + scn.terminal().scalarize(zeta).gradient(&y_t) * d_t)
}

/// `∇_p F = I + A` with `A = d_t(T) ∇²g_ζ(Y(T)) ∇_p Y(T)`.
pub fn stationarity_jacobian(
    scn: &Scenario,
    t: f64,
    x: &DVector<f64>,
    p: &DVector<f64>,
    zeta: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let arc = AnalyticArc::new(scn, t, x.clone(), p.clone(), zeta.clone())?;
    let st = stationarity(
        scn,
        &scn.lagrangian().scalarize(zeta),
        &scn.terminal().scalarize(zeta),
        &arc,
    )?;
    Ok(st.jacobian)
}

/// Newton solution of `F = 0` with diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct PSolveResult {
    pub p_star: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub jacobian_min_eig: f64,
    /// `Y(T)` along the optimal arc.
    pub terminal_state: Vec<f64>,
}

impl PSolveResult {
    pub fn p(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.p_star)
    }
}

/// Smallest eigenvalue of `I + H P` with `H` symmetric PSD and `P` symmetric
/// PD, through the similar symmetric matrix `I + Lᵀ H L`, `P = L Lᵀ`.
fn min_eig_of_jacobian(h: &DMatrix<f64>, p: &DMatrix<f64>, jacobian: &DMatrix<f64>) -> f64 {
    let n = h.nrows();
    let sym_p = (p + p.transpose()) * 0.5;
    let sym_h = (h + h.transpose()) * 0.5;
    match sym_p.cholesky() {
        Some(ch) => {
            let lo = ch.l();
            let m = DMatrix::identity(n, n) + lo.transpose() * sym_h * lo;
            ((&m + m.transpose()) * 0.5).symmetric_eigenvalues().min()
        }
        None => jacobian
            .complex_eigenvalues()
            .iter()
            .map(|c| c.re)
            .fold(f64::INFINITY, f64::min),
    }
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Solves `F(t, x, p, ζ) = 0` by damped Newton from
/// `p₀ = −d_t(T) ∇g_ζ(x)`. Requires convex `g_ζ` (h5).
pub fn solve_p(scn: &Scenario, t: f64, x: &DVector<f64>, zeta: &DVector<f64>) -> Result<PSolveResult> {
    scn.require(Hypothesis::H5)?;
    let horizon = scn.horizon();
    let l = scn.lagrangian().scalarize(zeta);
    let g = scn.terminal().scalarize(zeta);
    let d_t = scn.discount().value(t, horizon);
    let mut arc = AnalyticArc::new(scn, t, x.clone(), -g.gradient(x) * d_t, zeta.clone())?;

    let mut st = stationarity(scn, &l, &g, &arc)?;
    let mut res = st.f.norm();
    let mut trace = vec![res];
    let mut iterations = 1;
    let finish = |arc: &AnalyticArc, st: &Stationarity, res: f64, iterations: usize| PSolveResult {
        p_star: arc.p.as_slice().to_vec(),
        iterations,
        residual: res,
        jacobian_min_eig: min_eig_of_jacobian(&st.a_factors.0, &st.a_factors.1, &st.jacobian),
        terminal_state: st.terminal_state.as_slice().to_vec(),
    };

    loop {
        let converged = res <= NEWTON_TOL * (1.0 + arc.p.norm());
        if converged && res == 0.0 {
            return Ok(finish(&arc, &st, res, iterations));
        }
        if !converged && iterations >= NEWTON_MAX_ITERS {
            return Err(Error::Solver {
                iterations,
                residual: res,
                trace,
            });
        }
        let cond = condition_number(&st.jacobian);
        if cond > MAX_CONDITION {
            return Err(Error::Conditioning { condition: cond });
        }
        let step = st
            .jacobian
            .clone()
            .lu()
            .solve(&(-&st.f))
            .ok_or(Error::Conditioning { condition: f64::INFINITY })?;

        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda >= 1e-10 {
            let cand = AnalyticArc {
                p: &arc.p + &step * lambda,
                ..arc.clone()
            };
            let cst = stationarity(scn, &l, &g, &cand)?;
            let cres = cst.f.norm();
            if cres < res {
                accepted = Some((cand, cst, cres));
                break;
            }
            if converged {
                // one polishing step only, never damped
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((cand, cst, cres)) => {
                arc = cand;
                st = cst;
                res = cres;
                trace.push(res);
                iterations += 1;
                if converged {
                    return Ok(finish(&arc, &st, res, iterations));
                }
            }
            None if converged => return Ok(finish(&arc, &st, res, iterations)),
            None => {
                return Err(Error::Solver {
                    iterations,
                    residual: res,
                    trace,
                })
            }
        }
    }
}

/// [`solve_p`] for base direction `k`.
pub fn solve_p_k(scn: &Scenario, t: f64, x: &DVector<f64>, k: usize) -> Result<PSolveResult> {
    solve_p(scn, t, x, scn.zeta(k)?).map_err(|e| e.in_direction(k))
}

/// The optimal arc `Y_{t,x,ζ} = Y_{t,x,p(t,x,ζ),ζ}`.
pub fn optimal_arc(scn: &Scenario, t: f64, x: &DVector<f64>, zeta: &DVector<f64>) -> Result<(PSolveResult, AnalyticArc)> {
    let sol = solve_p(scn, t, x, zeta)?;
    let arc = AnalyticArc::new(scn, t, x.clone(), sol.p(), zeta.clone())?;
    Ok((sol, arc))
}

/// `inf_p I_{t,ζ}(Y_{t,x,p,ζ})`, the value threshold in one direction.
pub fn direction_value(scn: &Scenario, t: f64, x: &DVector<f64>, zeta: &DVector<f64>) -> Result<f64> {
    if t == scn.horizon() {
        scn.check_state(x)?;
        return Ok(scn.terminal().scalarize(zeta).value(x));
    }
    let (_, arc) = optimal_arc(scn, t, x, zeta)?;
    scalar_cost(scn, &arc.into(), zeta)
}

/// Per-direction outcome of the Hopf-Lax evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct DirectionRecord {
    pub k: usize,
    pub zeta: Vec<f64>,
    pub threshold: f64,
    pub p_star: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Hopf-Lax evaluation in every base direction. At `t = T` the value is
/// `g(x) + C` and no solve takes place.
pub fn value_records(scn: &Scenario, t: f64, x: &DVector<f64>) -> Result<Vec<DirectionRecord>> {
    scn.check_time(t)?;
    scn.check_state(x)?;
    scn.require(Hypothesis::H5)?;
    let horizon = scn.horizon();
    let n = scn.state_dim();
    if t == horizon {
        let gx = scn.terminal().value(x);
        return Ok(scn
            .cone()
            .base_grid()
            .iter()
            .enumerate()
            .map(|(k, zeta)| DirectionRecord {
                k,
                zeta: zeta.as_slice().to_vec(),
                threshold: zeta.dot(&gx),
                p_star: vec![0.0; n],
                iterations: 0,
                residual: 0.0,
            })
            .collect());
    }
    scn.cone()
        .base_grid()
        .iter()
        .enumerate()
        .map(|(k, zeta)| {
            let run = || -> Result<DirectionRecord> {
                let (sol, arc) = optimal_arc(scn, t, x, zeta)?;
                let threshold = scalar_cost(scn, &arc.into(), zeta)?;
                Ok(DirectionRecord {
                    k,
                    zeta: zeta.as_slice().to_vec(),
                    threshold,
                    p_star: sol.p_star,
                    iterations: sol.iterations,
                    residual: sol.residual,
                })
            };
            run().map_err(|e| e.in_direction(k))
        })
        .collect()
}

/// `U(t, x) = sup_ζ ( inf_p J_t(Y_{t,x,p,ζ}) + H⁺(ζ) )` over the base grid.
pub fn value_function(scn: &Scenario, t: f64, x: &DVector<f64>) -> Result<UpperSet> {
    let thresholds = value_records(scn, t, x)?.into_iter().map(|r| r.threshold).collect();
    UpperSet::new(scn.cone().clone(), thresholds)
}
