//! Dynamic-programming checks: the Bellman inclusion and the infimizer
//! characterization along sampled and optimal arcs.
//!
//! For a discount that is not exponential the continuation of an arc is
//! valued with the anchor `t`, not `τ`; `W(t, τ, η)` is the correction
//! between the two valuations.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hopflax::{anchored_cost, optimal_arc, running_cost, value_function, AnalyticArc, PiecewiseLinearArc, Trajectory};
use crate::lattice::{lattice_inf, minkowski_sum_closed, UpperSet};
use crate::parallel;
use crate::problem::Scenario;
use crate::report::{fmt, write_csv};

/// `W(t, τ, η) = ∫_τ^T (d_t(s) − d_τ(s)) L(η̇(s)) ds + (d_t(T) − d_τ(T)) g(η(T))`
/// for a continuation `η` starting at `τ`.
pub fn discount_gap_cost(scn: &Scenario, t: f64, tau: f64, eta: &Trajectory) -> Result<DVector<f64>> {
    scn.check_time(t)?;
    scn.check_time(tau)?;
    if tau < t {
        return Err(Error::Domain(format!("tau = {tau} precedes t = {t}")));
    }
    if (eta.start() - tau).abs() > 1e-12 {
        return Err(Error::Domain(format!("continuation starts at {} instead of tau = {tau}", eta.start())));
    }
    if tau == t {
        return Ok(DVector::zeros(scn.objective_dim()));
    }
    Ok(anchored_cost(scn, eta, t)?.0 - anchored_cost(scn, eta, tau)?.0)
}

/// Continuations from `(τ, y(τ))` over which the inner infimum is taken.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    /// Constant speeds tried along each coordinate axis.
    pub line_speeds: Vec<f64>,
    /// Include the per-direction optimal arcs from `(τ, y(τ))`.
    pub analytic: bool,
    /// Include the tail of the arc under test.
    pub own_tail: bool,
}

impl Default for CandidateSet {
    fn default() -> Self {
        Self {
            line_speeds: vec![-4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0],
            analytic: true,
            own_tail: true,
        }
    }
}

fn continuations(scn: &Scenario, y: &Trajectory, tau: f64, candidates: &CandidateSet) -> Result<Vec<Trajectory>> {
    let horizon = scn.horizon();
    let start = y.position(scn, tau)?;
    let n = start.len();
    let mut out = Vec::new();
    if candidates.own_tail {
        out.push(y.restrict(tau)?);
    }
    if candidates.analytic {
        for zeta in scn.cone().base_grid() {
            let (_, arc) = optimal_arc(scn, tau, &start, zeta)?;
            out.push(arc.into());
        }
    }
    for i in 0..n {
        for &speed in &candidates.line_speeds {
            if speed == 0.0 && i > 0 {
                continue;
            }
            let mut end = start.clone();
            end[i] += speed * (horizon - tau);
            out.push(PiecewiseLinearArc::new(vec![tau, horizon], vec![start.clone(), end], horizon)?.into());
        }
    }
    Ok(out)
}

/// Right-hand side of the Bellman inclusion for the arc `y ∈ A(t, x)`:
/// `∫_t^τ 𝓛_t(s, ẏ) ds ⊕ inf_η [W(t, τ, η) + J_τ(η)]`, the infimum taken over
/// `candidates`.
pub fn bellman_rhs(scn: &Scenario, t: f64, y: &Trajectory, tau: f64, candidates: &CandidateSet) -> Result<UpperSet> {
    let horizon = scn.horizon();
    if tau < t || tau > horizon {
        return Err(Error::Domain(format!("tau = {tau} outside [{t}, {horizon}]")));
    }
    if (y.start() - t).abs() > 1e-12 {
        return Err(Error::Domain(format!("arc starts at {} instead of t = {t}", y.start())));
    }
    let cone = scn.cone().clone();
    let head = UpperSet::from_point(cone.clone(), &running_cost(scn, y, t, t, tau)?)?;
    let tail = if tau == horizon {
        let y_t = y.position(scn, horizon)?;
        UpperSet::from_point(cone.clone(), &(scn.terminal().value(&y_t) * scn.discount().value(t, horizon)))?
    } else {
        // W(t, τ, η) + I_τ(η) is the cost of η valued from the anchor t
        let costs = continuations(scn, y, tau, candidates)?
            .iter()
            .map(|eta| anchored_cost(scn, eta, t).map(|c| c.0))
            .collect::<Result<Vec<_>>>()?;
        let sets = costs
            .iter()
            .map(|c| UpperSet::from_point(cone.clone(), c))
            .collect::<Result<Vec<_>>>()?;
        lattice_inf(&sets)?
    };
    minkowski_sum_closed(&head, &tail)
}

#[derive(Debug, Clone)]
pub struct BellmanConfig {
    pub taus: Vec<f64>,
    pub tol: f64,
    pub tol_infimizer: f64,
    pub candidates: CandidateSet,
    pub jobs: usize,
}

impl Default for BellmanConfig {
    fn default() -> Self {
        Self {
            taus: vec![0.25, 0.5, 0.75],
            tol: 1e-6,
            tol_infimizer: 1e-4,
            candidates: CandidateSet::default(),
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SlackRecord {
    pub arc: usize,
    pub tau: f64,
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InfimizerRecord {
    pub tau: f64,
    pub k: usize,
    pub value: f64,
    pub inf_rhs: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BellmanReport {
    pub t: f64,
    pub x: Vec<f64>,
    pub tol: f64,
    pub tol_infimizer: f64,
    pub value: Vec<f64>,
    pub min_slack: f64,
    pub worst: Option<SlackRecord>,
    pub max_infimizer_gap: f64,
    pub slacks: Vec<SlackRecord>,
    pub infimizer: Vec<InfimizerRecord>,
    pub passed: bool,
}

impl BellmanReport {
    pub fn write_slack_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let header: Vec<String> = ["arc", "tau", "k", "lhs", "rhs", "slack"].map(String::from).to_vec();
        let rows: Vec<Vec<String>> = self
            .slacks
            .iter()
            .map(|r| vec![r.arc.to_string(), fmt(r.tau), r.k.to_string(), fmt(r.lhs), fmt(r.rhs), fmt(r.slack)])
            .collect();
        write_csv(out, &header, &rows)
    }
}

/// Checks `U(t, x) ⊇ rhs(y, τ)` for every sampled arc and `τ`, and that the
/// per-direction optimal arcs form an infimizer: the lattice infimum of their
/// right-hand sides reproduces `U(t, x)`.
pub fn check_bellman(scn: &Scenario, t: f64, x: &DVector<f64>, arcs: &[Trajectory], cfg: &BellmanConfig) -> Result<BellmanReport> {
    let u = value_function(scn, t, x)?;
    let horizon = scn.horizon();
    if let Some(tau) = cfg.taus.iter().find(|&&tau| !(tau >= t && tau <= horizon)) {
        return Err(Error::Usage(format!("tau = {tau} outside [{t}, {horizon}]")));
    }

    let per_arc = parallel::ordered_map(cfg.jobs, arcs, |y| {
        cfg.taus
            .iter()
            .map(|&tau| bellman_rhs(scn, t, y, tau, &cfg.candidates))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut slacks = Vec::new();
    for (a, rhs_list) in per_arc.iter().enumerate() {
        for (&tau, rhs) in cfg.taus.iter().zip(rhs_list) {
            for (k, (&lhs, &r)) in u.thresholds().iter().zip(rhs.thresholds()).enumerate() {
                slacks.push(SlackRecord {
                    arc: a,
                    tau,
                    k,
                    lhs,
                    rhs: r,
                    slack: r - lhs,
                });
            }
        }
    }

    let family: Vec<Trajectory> = scn
        .cone()
        .base_grid()
        .iter()
        .map(|zeta| {
            if t == horizon {
                let single = PiecewiseLinearArc::new(vec![horizon], vec![x.clone()], horizon)?;
                return Ok(Trajectory::from(single));
            }
            Ok(Trajectory::from(optimal_arc(scn, t, x, zeta)?.1))
        })
        .collect::<Result<_>>()?;
    let family_rhs = parallel::ordered_map(cfg.jobs, &family, |y| {
        cfg.taus
            .iter()
            .map(|&tau| bellman_rhs(scn, t, y, tau, &cfg.candidates))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut infimizer = Vec::new();
    for (i, &tau) in cfg.taus.iter().enumerate() {
        let sets: Vec<UpperSet> = family_rhs.iter().map(|r| r[i].clone()).collect();
        let inf = lattice_inf(&sets)?;
        for (k, (&value, &inf_rhs)) in u.thresholds().iter().zip(inf.thresholds()).enumerate() {
            infimizer.push(InfimizerRecord {
                tau,
                k,
                value,
                inf_rhs,
                gap: inf_rhs - value,
            });
        }
    }

    let worst = slacks.iter().min_by(|a, b| a.slack.total_cmp(&b.slack)).cloned();
    let min_slack = worst.as_ref().map_or(f64::INFINITY, |w| w.slack);
    let max_infimizer_gap = infimizer.iter().map(|r| r.gap.abs()).fold(0.0, f64::max);
    Ok(BellmanReport {
        t,
        x: x.as_slice().to_vec(),
        tol: cfg.tol,
        tol_infimizer: cfg.tol_infimizer,
        value: u.thresholds().to_vec(),
        passed: min_slack >= -cfg.tol && max_infimizer_gap <= cfg.tol_infimizer,
        min_slack,
        worst,
        max_infimizer_gap,
        slacks,
        infimizer,
    })
}

/// `count` seeded random piecewise-linear arcs from `(t, x)` with `segments`
/// equal segments and velocities uniform in `[−speed, speed]^n`.
pub fn random_piecewise_arcs(
    scn: &Scenario,
    t: f64,
    x: &DVector<f64>,
    count: usize,
    segments: usize,
    speed: f64,
    seed: u64,
) -> Result<Vec<Trajectory>> {
    scn.check_time(t)?;
    scn.check_state(x)?;
    let horizon = scn.horizon();
    if t == horizon || segments == 0 {
        return Err(Error::Usage("random arcs need t < T and at least one segment".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = (horizon - t) / segments as f64;
    let times: Vec<f64> = (0..=segments).map(|i| if i == segments { horizon } else { t + h * i as f64 }).collect();
    (0..count)
        .map(|_| {
            let mut pts = vec![x.clone()];
            for i in 0..segments {
                let v = DVector::from_fn(x.len(), |_, _| rng.gen_range(-speed..=speed));
                let next = &pts[i] + v * (times[i + 1] - times[i]);
                pts.push(next);
            }
            Ok(PiecewiseLinearArc::new(times.clone(), pts, horizon)?.into())
        })
        .collect()
}

/// Optimal analytic arcs from `(t, x)`, one per base direction.
pub fn optimal_family(scn: &Scenario, t: f64, x: &DVector<f64>) -> Result<Vec<AnalyticArc>> {
    scn.cone()
        .base_grid()
        .iter()
        .map(|zeta| Ok(optimal_arc(scn, t, x, zeta)?.1))
        .collect()
}
