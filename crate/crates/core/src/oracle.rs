//! Brute-force references for the Hopf-Lax reduction: a direct method over
//! piecewise-linear arcs and an exhaustive search over `p`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hopflax::{direction_value, scalar_cost, solve_p, AnalyticArc, PiecewiseLinearArc};
use crate::parallel;
use crate::problem::Scenario;
use crate::report::{fmt, write_csv};

#[derive(Debug, Clone, PartialEq)]
pub struct DirectMethodConfig {
    /// Number of nodes `M`, including both ends.
    pub nodes: usize,
    /// Velocities are confined to `[−bound, bound]^n`.
    pub bound: f64,
    pub max_iters: usize,
    pub tol_grad: f64,
}

impl Default for DirectMethodConfig {
    fn default() -> Self {
        Self {
            nodes: 65,
            bound: 10.0,
            max_iters: 20_000,
            tol_grad: 1e-11,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DirectResult {
    pub arc: PiecewiseLinearArc,
    pub cost: f64,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// Discretized `I_{t,ζ}` over segment velocities on a uniform time grid.
struct Discrete<'a> {
    scn: &'a Scenario,
    zeta: &'a DVector<f64>,
    x: &'a DVector<f64>,
    times: Vec<f64>,
    weights: Vec<f64>,
    terminal_discount: f64,
}

impl Discrete<'_> {
    fn end(&self, v: &[DVector<f64>]) -> DVector<f64> {
        let mut y = self.x.clone();
        for (j, vj) in v.iter().enumerate() {
            y += vj * (self.times[j + 1] - self.times[j]);
        }
        y
    }

    fn cost(&self, v: &[DVector<f64>]) -> f64 {
        let running: f64 = v
            .iter()
            .zip(&self.weights)
            .map(|(vj, w)| self.zeta.dot(&self.scn.lagrangian().value(vj)) * w)
            .sum();
        running + self.terminal_discount * self.zeta.dot(&self.scn.terminal().value(&self.end(v)))
    }

    fn gradient(&self, v: &[DVector<f64>]) -> Vec<DVector<f64>> {
        let l = self.scn.lagrangian().scalarize(self.zeta);
        let g = self.scn.terminal().scalarize(self.zeta);
        let gt = g.gradient(&self.end(v)) * self.terminal_discount;
        v.iter()
            .enumerate()
            .map(|(j, vj)| l.gradient(vj) * self.weights[j] + &gt * (self.times[j + 1] - self.times[j]))
            .collect()
    }

    /// Newton direction `−H⁻¹ ∇` for the Hessian `H = D + Bᵀ G B`, with `D`
    /// the blocks `w_j ∇²L_ζ(v_j)`, `B = [h_1 I … h_m I]` and
    /// `G = d_t(T) ∇²g_ζ(y_m)`, inverted by the Woodbury identity. Falls back
    /// to the block-diagonal part when the full step is not a descent step.
    fn direction(&self, v: &[DVector<f64>], grad: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
        let l = self.scn.lagrangian().scalarize(self.zeta);
        let n = self.x.len();
        let d_inv: Vec<DMatrix<f64>> = v
            .iter()
            .zip(&self.weights)
            .map(|(vj, w)| {
                (l.hessian(vj) * *w)
                    .try_inverse()
                    .ok_or(Error::Conditioning { condition: f64::INFINITY })
            })
            .collect::<Result<_>>()?;
        let block: Vec<DVector<f64>> = d_inv.iter().zip(grad).map(|(di, g)| -(di * g)).collect();
        let g_hess = self.scn.terminal().scalarize(self.zeta).hessian(&self.end(v)) * self.terminal_discount;
        if g_hess.iter().all(|c| *c == 0.0) {
            return Ok(block);
        }
        let h = |j: usize| self.times[j + 1] - self.times[j];
        let mut s = DMatrix::zeros(n, n);
        let mut bdg = DVector::zeros(n);
        for (j, (di, b)) in d_inv.iter().zip(&block).enumerate() {
            s += di * (h(j) * h(j));
            bdg -= b * h(j);
        }
        let full = (DMatrix::identity(n, n) + &g_hess * &s)
            .lu()
            .solve(&(&g_hess * bdg))
            .map(|c| {
                d_inv
                    .iter()
                    .zip(&block)
                    .enumerate()
                    .map(|(j, (di, b))| b + di * &c * h(j))
                    .collect::<Vec<_>>()
            });
        Ok(match full {
            Some(dir) if dir.iter().zip(grad).map(|(d, g)| d.dot(g)).sum::<f64>() < 0.0 => dir,
            _ => block,
        })
    }
}

/// The predicted decrease of a full step is below the rounding of the cost.
fn at_noise_floor(grad: &[DVector<f64>], dir: &[DVector<f64>], cost: f64) -> bool {
    let decrement: f64 = -grad.iter().zip(dir).map(|(g, d)| g.dot(d)).sum::<f64>();
    decrement <= 1e-15 * (1.0 + cost.abs())
}

fn clamp(v: &DVector<f64>, bound: f64) -> DVector<f64> {
    v.map(|c| c.clamp(-bound, bound))
}

/// Minimizes `I_{t,ζ}` over piecewise-linear arcs with `cfg.nodes` uniform
/// nodes, start fixed at `x` and free end, by projected
/// Newton descent with Armijo backtracking. Segment costs use the exact
/// integral of the discount.
pub fn direct_minimize(scn: &Scenario, t: f64, x: &DVector<f64>, zeta: &DVector<f64>, cfg: &DirectMethodConfig) -> Result<DirectResult> {
    scn.require_standing()?;
    scn.check_time(t)?;
    scn.check_state(x)?;
    let horizon = scn.horizon();
    if cfg.nodes < 2 || t >= horizon {
        return Err(Error::Usage("direct method needs at least 2 nodes and t < T".into()));
    }
    let m = cfg.nodes - 1;
    let h = (horizon - t) / m as f64;
    let times: Vec<f64> = (0..=m).map(|i| if i == m { horizon } else { t + h * i as f64 }).collect();
    let weights = times.windows(2).map(|w| scn.discount().integral(t, w[0], w[1])).collect();
    let prob = Discrete {
        scn,
        zeta,
        x,
        times,
        weights,
        terminal_discount: scn.discount().value(t, horizon),
    };

    // start from the unconstrained minimizers of L_ζ
    let l = scn.lagrangian().scalarize(zeta);
    let w_min = clamp(&l.invert_gradient(&DVector::zeros(x.len()))?, cfg.bound);
    let mut v: Vec<DVector<f64>> = vec![w_min; m];
    let mut cost = prob.cost(&v);
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;
    while iterations < cfg.max_iters {
        let grad = prob.gradient(&v);
        let dir = prob.direction(&v, &grad)?;
        // projected step length as the stationarity measure
        let step_norm = v
            .iter()
            .zip(&dir)
            .map(|(vj, dj)| (clamp(&(vj + dj), cfg.bound) - vj).norm_squared())
            .sum::<f64>()
            .sqrt();
        grad_norm = grad.iter().map(|g| g.norm_squared()).sum::<f64>().sqrt();
        if step_norm <= cfg.tol_grad || at_noise_floor(&grad, &dir, cost) {
            break;
        }
        iterations += 1;
        let mut lambda = 1.0;
        loop {
            let cand: Vec<DVector<f64>> = v.iter().zip(&dir).map(|(vj, dj)| clamp(&(vj + dj * lambda), cfg.bound)).collect();
            let c = prob.cost(&cand);
            let decrease: f64 = grad.iter().zip(cand.iter().zip(&v)).map(|(g, (a, b))| g.dot(&(a - b))).sum();
            if c <= cost + 1e-4 * decrease || lambda < 1e-12 {
                if c < cost {
                    v = cand;
                    cost = c;
                }
                break;
            }
            lambda *= 0.5;
        }
        if lambda < 1e-12 {
            break;
        }
    }
    let step_ok = {
        let grad = prob.gradient(&v);
        let dir = prob.direction(&v, &grad)?;
        at_noise_floor(&grad, &dir, cost)
            || v.iter()
                .zip(&dir)
                .map(|(vj, dj)| (clamp(&(vj + dj), cfg.bound) - vj).norm_squared())
                .sum::<f64>()
                .sqrt()
                <= cfg.tol_grad.max(1e-9)
    };
    if !step_ok {
        return Err(Error::Stalled { iterations, grad_norm });
    }
    let mut pts = vec![x.clone()];
    for (j, vj) in v.iter().enumerate() {
        let next = &pts[j] + vj * (prob.times[j + 1] - prob.times[j]);
        pts.push(next);
    }
    let arc = PiecewiseLinearArc::new(prob.times.clone(), pts, horizon)?;
    Ok(DirectResult {
        arc,
        cost,
        iterations,
        grad_norm,
    })
}

/// Post-hoc box check: the analytic optimal velocities must lie strictly
/// inside `[−bound, bound]^n`.
pub fn check_velocity_box(scn: &Scenario, t: f64, x: &DVector<f64>, zeta: &DVector<f64>, bound: f64) -> Result<()> {
    let sol = solve_p(scn, t, x, zeta)?;
    let l = scn.lagrangian().scalarize(zeta);
    for (s, _) in scn.quadrature().points(t, scn.horizon()) {
        let v = l.invert_gradient(&(sol.p() / scn.discount().value(t, s)))?;
        if v.amax() >= bound {
            return Err(Error::BoxTooSmall {
                point: v.as_slice().to_vec(),
            });
        }
    }
    Ok(())
}

/// Exhaustive minimization of `p ↦ I_{t,ζ}(Y_{t,x,p,ζ})` over the grid
/// `{lo, lo + step, …, hi}^n`.
pub fn pgrid_minimize(
    scn: &Scenario,
    t: f64,
    x: &DVector<f64>,
    zeta: &DVector<f64>,
    lo: f64,
    hi: f64,
    step: f64,
) -> Result<(DVector<f64>, f64)> {
    if !(step > 0.0 && hi > lo) {
        return Err(Error::Usage("p-grid needs lo < hi and a positive step".into()));
    }
    let n = x.len();
    let count = ((hi - lo) / step).round() as usize + 1;
    let total = count
        .checked_pow(n as u32)
        .filter(|c| *c <= 50_000_000)
        .ok_or_else(|| Error::Usage("p-grid too large".into()))?;
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let p = DVector::from_fn(n, |i, _| lo + step * idx[i] as f64);
        let arc = AnalyticArc::new(scn, t, x.clone(), p, zeta.clone())?;
        let c = scalar_cost(scn, &arc.into(), zeta)?;
        if best.as_ref().is_none_or(|b| c < b.1) {
            best = Some((idx.clone(), c));
        }
        for c in idx.iter_mut() {
            *c += 1;
            if *c < count {
                break;
            }
            *c = 0;
        }
    }
    let (bi, cost) = best.expect("grid is nonempty");
    let p = DVector::from_fn(n, |i, _| lo + step * bi[i] as f64);
    if bi.iter().any(|&i| i == 0 || i + 1 == count) {
        return Err(Error::BoxTooSmall {
            point: p.as_slice().to_vec(),
        });
    }
    Ok((p, cost))
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub t: f64,
    pub x: Vec<f64>,
    pub k: usize,
    pub v_hopflax: f64,
    pub v_direct: f64,
    pub gap: f64,
    pub nodes: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub tol: f64,
    pub rows: Vec<OracleRow>,
    /// Largest `|gap| / (1 + |v|)`.
    pub max_relative_gap: f64,
    /// Smallest `v_direct − v_hopflax`.
    pub min_excess: f64,
    pub passed: bool,
}

/// Slack allowed for the direct method to undercut the Hopf-Lax value.
pub const UNDERCUT_TOL: f64 = 1e-6;

impl OracleReport {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let n = self.rows.first().map_or(0, |r| r.x.len());
        let mut header = vec!["t".to_string()];
        header.extend((0..n).map(|i| format!("x{i}")));
        for c in ["k", "v_hopflax", "v_direct", "gap", "nodes", "iterations"] {
            header.push(c.into());
        }
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![fmt(r.t)];
                row.extend(r.x.iter().map(|v| fmt(*v)));
                row.push(r.k.to_string());
                row.extend([r.v_hopflax, r.v_direct, r.gap].map(fmt));
                row.push(r.nodes.to_string());
                row.push(r.iterations.to_string());
                row
            })
            .collect();
        write_csv(out, &header, &rows)
    }
}

/// Direct method against Hopf-Lax on `points × base grid`. Passes iff every
/// gap is within `tol·(1 + |v|)` and no direct cost undercuts the Hopf-Lax
/// value by more than [`UNDERCUT_TOL`].
pub fn compare(scn: &Scenario, points: &[(f64, DVector<f64>)], cfg: &DirectMethodConfig, tol: f64, jobs: usize) -> Result<OracleReport> {
    let cells: Vec<(f64, &DVector<f64>, usize)> = points
        .iter()
        .flat_map(|(t, x)| (0..scn.cone().len()).map(move |k| (*t, x, k)))
        .collect();
    let rows = parallel::ordered_map(jobs, &cells, |&(t, x, k)| {
        let zeta = scn.zeta(k)?;
        let run = || -> Result<OracleRow> {
            check_velocity_box(scn, t, x, zeta, cfg.bound)?;
            let v_hopflax = direction_value(scn, t, x, zeta)?;
            let direct = direct_minimize(scn, t, x, zeta, cfg)?;
            Ok(OracleRow {
                t,
                x: x.as_slice().to_vec(),
                k,
                v_hopflax,
                v_direct: direct.cost,
                gap: direct.cost - v_hopflax,
                nodes: cfg.nodes,
                iterations: direct.iterations,
            })
        };
        run().map_err(|e| e.in_direction(k))
    })?;
    let max_relative_gap = rows.iter().map(|r| r.gap.abs() / (1.0 + r.v_hopflax.abs())).fold(0.0, f64::max);
    let min_excess = rows.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    Ok(OracleReport {
        tol,
        passed: max_relative_gap <= tol && min_excess >= -UNDERCUT_TOL,
        rows,
        max_relative_gap,
        min_excess,
    })
}
