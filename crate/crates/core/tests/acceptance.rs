//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Runs without the libtest harness so the lines are
//! always visible.

use std::path::Path;
use std::time::Instant;

use mocv::bellman::{check_bellman, random_piecewise_arcs, BellmanConfig};
use mocv::hjb::{check_hjb, grad_u, ut_scalar, HjbConfig};
use mocv::hopflax::{
    arc_position, direction_value, scalar_cost, solve_p, stationarity_f, value_function, AnalyticArc,
    Trajectory,
};
use mocv::lattice::{includes, lattice_inf, lattice_sup, minkowski_sum_closed, zeta_difference};
use mocv::oracle::{direct_minimize, DirectMethodConfig};
use mocv::problem::presets;
use mocv::sensitivity::{dp_dt, dp_dx, dy_dt, grad_p_y, grad_x_y, grad_x_ydot};
use mocv::{ConeSpec, DiscountSpec, HalfSpace, UpperSet};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn v1(x: f64) -> DVector<f64> {
    DVector::from_element(1, x)
}

fn v2(a: f64, b: f64) -> DVector<f64> {
    DVector::from_vec(vec![a, b])
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Value of the standard scenario in direction `(λ, 1 − λ)` worked out by
/// hand: the optimal velocity is `(1 − λ) − λ e^{−r(T − s)}`.
fn standard_closed_form(r: f64, t: f64, x: f64, lambda: f64) -> f64 {
    let tau = 1.0 - t;
    if r == 0.0 {
        let running = 0.5 * lambda * lambda * tau + 0.5 * lambda * (1.0 - lambda) * tau;
        return running + lambda * (x + (1.0 - lambda) * tau - lambda * tau);
    }
    let e = (-r * tau).exp();
    let running = 0.5 * lambda * lambda * (e - e * e) / r + 0.5 * lambda * (1.0 - lambda) * (1.0 - e) / r;
    let y_end = x + (1.0 - lambda) * tau - lambda * (1.0 - e) / r;
    running + e * lambda * y_end
}

fn standard_points() -> Vec<(f64, DVector<f64>)> {
    vec![(0.0, v1(0.0)), (0.2, v1(-0.5)), (0.4, v1(0.5)), (0.6, v1(1.0)), (0.8, v1(-1.0))]
}

fn grid_5x5() -> (Vec<f64>, Vec<DVector<f64>>) {
    let ts = (0..5).map(|i| 0.2 * i as f64).collect();
    let xs = (0..5).map(|i| v1(-1.0 + 0.5 * i as f64)).collect();
    (ts, xs)
}

fn closed_form_regression() -> Outcome {
    let start = Instant::now();
    let undiscounted = presets::standard(0.0, 33).map_err(err)?;
    let discounted = presets::standard(0.1, 33).map_err(err)?;
    let a = value_function(&undiscounted, 0.0, &v1(0.0)).map_err(err)?.threshold(0);
    let b = value_function(&discounted, 0.0, &v1(0.0)).map_err(err)?.threshold(0);
    let b_ref = -5.0 * ((-0.1f64).exp() - (-0.2f64).exp());
    let elapsed = start.elapsed().as_secs_f64();
    let (ea, eb) = ((a + 0.5).abs(), (b - b_ref).abs());
    check(
        ea <= 1e-8 && eb <= 1e-8 && elapsed < 1.0,
        format!("r=0 err {ea:.1e}, r=0.1 err {eb:.1e} (tol 1e-8), {elapsed:.2}s (limit 1s)"),
    )
}

fn direct_vs_hopflax() -> Outcome {
    let start = Instant::now();
    let scn = presets::standard(0.1, 9).map_err(err)?;
    let cfg = DirectMethodConfig::default();
    let (mut worst_rel, mut min_excess, mut worst_cf) = (0.0f64, f64::INFINITY, 0.0f64);
    for (t, x) in standard_points() {
        for zeta in scn.cone().base_grid() {
            let v = direction_value(&scn, t, &x, zeta).map_err(err)?;
            let direct = direct_minimize(&scn, t, &x, zeta, &cfg).map_err(err)?.cost;
            worst_rel = worst_rel.max((direct - v).abs() / (1.0 + v.abs()));
            min_excess = min_excess.min(direct - v);
            worst_cf = worst_cf.max((v - standard_closed_form(0.1, t, x[0], zeta[0])).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        worst_rel <= 1e-3 && min_excess >= -1e-6 && worst_cf <= 1e-8 && elapsed < 30.0,
        format!(
            "max rel gap {worst_rel:.2e} (tol 1e-3), min excess {min_excess:.2e} (floor -1e-6), \
             closed-form err {worst_cf:.1e}, {elapsed:.1}s (limit 30s)"
        ),
    )
}

fn bellman_inclusion() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, scn) in [
        ("standard", presets::standard(0.1, 33).map_err(err)?),
        ("quad_sat/hyperbolic", presets::quad_sat(DiscountSpec::Hyperbolic { k: 0.5 }, 33).map_err(err)?),
    ] {
        let x = v1(0.0);
        let arcs = random_piecewise_arcs(&scn, 0.0, &x, 100, 8, 3.0, 20240917).map_err(err)?;
        let report = check_bellman(&scn, 0.0, &x, &arcs, &BellmanConfig::default()).map_err(err)?;
        ok &= report.min_slack >= -1e-6 && report.max_infimizer_gap <= 1e-4 && report.slacks.len() == 100 * 3 * 33;
        parts.push(format!(
            "{name}: min slack {:.2e}, infimizer gap {:.1e}",
            report.min_slack, report.max_infimizer_gap
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 60.0;
    check(ok, format!("{} (tols -1e-6, 1e-4), {elapsed:.1}s (limit 60s)", parts.join("; ")))
}

fn hjb_equation() -> Outcome {
    let start = Instant::now();
    let (ts, xs) = grid_5x5();
    let linear = presets::standard(0.1, 33).map_err(err)?;
    let sat = presets::quad_sat(DiscountSpec::Hyperbolic { k: 0.5 }, 33).map_err(err)?;
    let base = HjbConfig {
        jobs: 1,
        ..HjbConfig::for_scenario(&linear)
    };
    let lin = check_hjb(&linear, &ts, &xs, &HjbConfig { tol: 1e-6, ..base.clone() }).map_err(err)?;
    let qs = check_hjb(&sat, &ts, &xs, &HjbConfig { tol: 1e-4, ..base }).map_err(err)?;
    let elapsed = start.elapsed().as_secs_f64();
    let ok = lin.max_residual <= 1e-6
        && lin.sup_residual <= 1e-6
        && qs.max_residual <= 1e-4
        && qs.sup_residual <= 1e-4
        && lin.records.len() == 25 * 33
        && qs.records.len() == 25 * 33
        && elapsed < 30.0;
    check(
        ok,
        format!(
            "linear residual {:.1e} sup {:.1e} (tol 1e-6); quad_sat residual {:.1e} sup {:.1e} (tol 1e-4); \
             fd {:.1e}/{:.1e}; {elapsed:.1}s (limit 30s)",
            lin.max_residual, lin.sup_residual, qs.max_residual, qs.sup_residual, lin.max_fd_error, qs.max_fd_error
        ),
    )
}

struct Probe {
    scn_idx: usize,
    t: f64,
    s: f64,
    x: DVector<f64>,
    p: DVector<f64>,
    k: usize,
}

fn rel_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / (1.0 + b.amax())
}

fn derivative_suite() -> Outcome {
    const PROBES: usize = 60;
    const TOL: f64 = 1e-5;
    let scenarios = [
        presets::standard(0.1, 33).map_err(err)?,
        presets::quad_sat(DiscountSpec::Hyperbolic { k: 0.5 }, 33).map_err(err)?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let probes: Vec<Probe> = (0..PROBES)
        .map(|i| {
            let t = rng.gen_range(0.01..0.9);
            Probe {
                scn_idx: i % 2,
                t,
                s: rng.gen_range(t + 0.05..=1.0),
                x: v1(rng.gen_range(-2.0..2.0)),
                p: v1(rng.gen_range(-2.0..2.0)),
                k: rng.gen_range(0..33),
            }
        })
        .collect();

    let mut worst: Vec<(&str, f64)> = Vec::new();
    let mut record = |name: &'static str, e: f64| match worst.iter_mut().find(|(n, _)| *n == name) {
        Some((_, w)) => *w = w.max(e),
        None => worst.push((name, e)),
    };

    let h = 1e-5;
    let hp = 1e-4;
    for pr in &probes {
        let scn = &scenarios[pr.scn_idx];
        let zeta = scn.cone().zeta(pr.k).clone();
        let (t, s) = (pr.t, pr.s);
        let pos = |t: f64, x: &DVector<f64>, p: &DVector<f64>| arc_position(scn, t, x, p, &zeta, s);

        let fd = (pos(t + h, &pr.x, &pr.p).map_err(err)? - pos(t - h, &pr.x, &pr.p).map_err(err)?) / (2.0 * h);
        record("dY/dt", rel_err(&dy_dt(scn, t, &pr.p, &zeta, s).map_err(err)?, &fd));

        let fd = (pos(t, &pr.x, &(&pr.p + v1(h))).map_err(err)? - pos(t, &pr.x, &(&pr.p - v1(h))).map_err(err)?)
            / (2.0 * h);
        let an = grad_p_y(scn, t, &pr.p, &zeta, s).map_err(err)?.column(0).into_owned();
        record("grad_p Y", rel_err(&an, &fd));

        let fd = (pos(t, &(&pr.x + v1(h)), &pr.p).map_err(err)? - pos(t, &(&pr.x - v1(h)), &pr.p).map_err(err)?)
            / (2.0 * h);
        record("grad_x Y", rel_err(&grad_x_y(scn).column(0).into_owned(), &fd));

        let vel = |x: DVector<f64>| {
            AnalyticArc::new(scn, t, x, pr.p.clone(), zeta.clone()).and_then(|a| Trajectory::from(a).velocity(scn, s))
        };
        let fd = (vel(&pr.x + v1(h)).map_err(err)? - vel(&pr.x - v1(h)).map_err(err)?) / (2.0 * h);
        record("grad_x Ydot", rel_err(&grad_x_ydot(scn).column(0).into_owned(), &fd));

        let p_at = |t: f64, x: &DVector<f64>| solve_p(scn, t, x, &zeta).map(|r| r.p());
        let fd = (p_at(t + hp, &pr.x).map_err(err)? - p_at(t - hp, &pr.x).map_err(err)?) / (2.0 * hp);
        record("dp/dt", rel_err(&dp_dt(scn, t, &pr.x, &zeta).map_err(err)?, &fd));

        let fd = (p_at(t, &(&pr.x + v1(hp))).map_err(err)? - p_at(t, &(&pr.x - v1(hp))).map_err(err)?) / (2.0 * hp);
        let an = dp_dx(scn, t, &pr.x, &zeta).map_err(err)?.column(0).into_owned();
        record("dp/dx", rel_err(&an, &fd));

        let u = |t: f64, x: &DVector<f64>| direction_value(scn, t, x, &zeta);
        let fd = (u(t, &(&pr.x + v1(hp))).map_err(err)? - u(t, &(&pr.x - v1(hp))).map_err(err)?) / (2.0 * hp);
        record("grad u", rel_err(&grad_u(scn, t, &pr.x, &zeta).map_err(err)?, &v1(fd)));

        let fd = (u(t + hp, &pr.x).map_err(err)? - u(t - hp, &pr.x).map_err(err)?) / (2.0 * hp);
        record("u_t", rel_err(&v1(ut_scalar(scn, t, &pr.x, &zeta).map_err(err)?), &v1(fd)));
    }

    let discounts = [
        DiscountSpec::ConstantRate { rate: 0.3 },
        DiscountSpec::Hyperbolic { k: 0.5 },
        DiscountSpec::VariableRate {
            breakpoints: vec![0.5],
            rates: vec![0.2, 0.05],
        },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..PROBES {
        let d = &discounts[i % 3];
        let mut t = rng.gen_range(0.01..0.9);
        if (t - 0.5f64).abs() < 1e-3 {
            t += 0.01;
        }
        let s = rng.gen_range(t..=1.0);
        let s = s.max(t + h);
        let fd = (d.value(t + h, s) - d.value(t - h, s)) / (2.0 * h);
        let an = d.dt(t, s);
        record("dd/dt", rel_err(&v1(an), &v1(fd)));
    }

    let max = worst.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    let detail = worst.iter().map(|(n, e)| format!("{n} {e:.1e}")).collect::<Vec<_>>().join(", ");
    check(max <= TOL && worst.len() == 9, format!("{PROBES} probes each, tol {TOL:.0e}: {detail}"))
}

fn newton_solver() -> Outcome {
    let scenarios = [
        presets::standard(0.0, 33).map_err(err)?,
        presets::standard(0.1, 33).map_err(err)?,
        presets::quad_sat(DiscountSpec::Hyperbolic { k: 0.5 }, 33).map_err(err)?,
    ];
    let (ts, xs) = grid_5x5();
    let (mut max_f, mut max_it, mut min_eig, mut solves) = (0.0f64, 0usize, f64::INFINITY, 0usize);
    for scn in &scenarios {
        for &t in &ts {
            for x in &xs {
                for zeta in scn.cone().base_grid() {
                    let sol = solve_p(scn, t, x, zeta).map_err(err)?;
                    let f = stationarity_f(scn, t, x, &sol.p(), zeta).map_err(err)?;
                    max_f = max_f.max(f.norm());
                    max_it = max_it.max(sol.iterations);
                    min_eig = min_eig.min(sol.jacobian_min_eig);
                    solves += 1;
                }
            }
        }
    }
    check(
        max_f <= 1e-10 && max_it <= 25 && min_eig >= 1.0 - 1e-8,
        format!("{solves} solves: max |F| {max_f:.1e} (tol 1e-10), max iters {max_it} (limit 25), min eig {min_eig:.10}"),
    )
}

fn random_set(cone: &std::sync::Arc<ConeSpec>, rng: &mut ChaCha8Rng) -> UpperSet {
    let z = v2(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
    let w = v2(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
    let a = UpperSet::from_point(cone.clone(), &z).unwrap();
    let b = UpperSet::from_point(cone.clone(), &w).unwrap();
    lattice_inf(&[a, b]).unwrap()
}

fn lattice_algebra() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cones = [
        std::sync::Arc::new(ConeSpec::orthant(2, 17).map_err(err)?),
        std::sync::Arc::new(ConeSpec::new(&[vec![1.0, 0.2], vec![-0.3, 1.0]], None, 17).map_err(err)?),
    ];
    let mut trials = 0;
    for cone in &cones {
        let c = UpperSet::cone_set(cone.clone());
        let empty = UpperSet::empty(cone.clone());
        for _ in 0..200 {
            trials += 1;
            let (a, b, d) = (random_set(cone, &mut rng), random_set(cone, &mut rng), random_set(cone, &mut rng));
            if minkowski_sum_closed(&a, &c).unwrap() != a {
                failures.push("neutrality");
            }
            if minkowski_sum_closed(&a, &empty).unwrap() != empty || !lattice_inf(&[a.clone(), empty.clone()]).unwrap().eq(&a) {
                failures.push("empty absorption");
            }
            for k in 0..cone.len() {
                let diff = zeta_difference(&a, &a, k).unwrap();
                if diff != HalfSpace::positive(cone.zeta(k).clone()) {
                    failures.push("self difference");
                }
            }
            let inf = lattice_inf(&[a.clone(), b.clone()]).unwrap();
            let sup = lattice_sup(&[a.clone(), b.clone()]).unwrap();
            if lattice_inf(&[a.clone(), sup.clone()]).unwrap() != a || lattice_sup(&[a.clone(), inf.clone()]).unwrap() != a {
                failures.push("absorption");
            }
            if inf != lattice_inf(&[b.clone(), a.clone()]).unwrap() || sup != lattice_sup(&[b.clone(), a.clone()]).unwrap() {
                failures.push("commutativity");
            }
            let l = lattice_inf(&[lattice_inf(&[a.clone(), b.clone()]).unwrap(), d.clone()]).unwrap();
            let r = lattice_inf(&[a.clone(), lattice_inf(&[b.clone(), d.clone()]).unwrap()]).unwrap();
            if l != r {
                failures.push("inf associativity");
            }
            if !includes(&inf, &a, 0.0).unwrap() || !includes(&a, &sup, 0.0).unwrap() {
                failures.push("order");
            }
            let s1 = minkowski_sum_closed(&minkowski_sum_closed(&a, &b).unwrap(), &d).unwrap();
            let s2 = minkowski_sum_closed(&a, &minkowski_sum_closed(&b, &d).unwrap()).unwrap();
            if s1.thresholds().iter().zip(s2.thresholds()).any(|(x, y)| (x - y).abs() > 1e-12) {
                failures.push("sum associativity");
            }
            let lambda = rng.gen_range(0.1..10.0);
            let k = rng.gen_range(0..cone.len());
            let h = HalfSpace::new(cone.zeta(k).clone(), a.threshold(k));
            let scaled = HalfSpace::new(cone.zeta(k) * lambda, a.threshold(k) * lambda);
            let probe = v2(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            if !h.same_point_set(&scaled, 1e-12) || !h.same_point_set(&h.scaled(lambda), 1e-12) || h.contains(&probe) != scaled.contains(&probe) {
                failures.push("half-space scale invariance");
            }
        }
    }

    // Scaling the direction scales the threshold and leaves the arc alone.
    let scn = presets::quad_sat(DiscountSpec::Hyperbolic { k: 0.5 }, 9).map_err(err)?;
    for zeta in scn.cone().base_grid() {
        let x = v1(0.3);
        let lambda = 2.0;
        let a = solve_p(&scn, 0.2, &x, zeta).map_err(err)?;
        let b = solve_p(&scn, 0.2, &x, &(zeta * lambda)).map_err(err)?;
        let va = direction_value(&scn, 0.2, &x, zeta).map_err(err)?;
        let vb = direction_value(&scn, 0.2, &x, &(zeta * lambda)).map_err(err)?;
        let ya = DVector::from_vec(a.terminal_state.clone());
        let yb = DVector::from_vec(b.terminal_state.clone());
        if (&b.p() - &a.p() * lambda).amax() > 1e-12 * (1.0 + a.p().amax())
            || (&ya - &yb).amax() > 1e-12
            || (vb - lambda * va).abs() > 1e-12 * (1.0 + va.abs())
        {
            failures.push("direction scale invariance");
        }
    }

    failures.dedup();
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{trials} random set triples on 2 cones, direction scaling on 9 directions: all laws hold")
        } else {
            format!("violated: {}", failures.join(", "))
        },
    )
}

fn coercivity() -> Outcome {
    let ladder = [10.0, 100.0, 1000.0];
    let quartic = {
        let file = mocv::config::ScenarioFile::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/quartic_2d.cfg"))
            .map_err(err)?;
        file.build_unchecked(Some(9), None).map_err(err)?
    };
    let scenarios = [
        presets::standard(0.1, 33).map_err(err)?,
        presets::quad_sat(DiscountSpec::Hyperbolic { k: 0.5 }, 33).map_err(err)?,
        quartic,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = 0;
    let mut bad = Vec::new();
    for (si, scn) in scenarios.iter().enumerate() {
        let n = scn.state_dim();
        let mut dirs: Vec<DVector<f64>> = if n == 1 {
            vec![v1(1.0), v1(-1.0)]
        } else {
            (0..4)
                .map(|_| {
                    let u = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
                    u.normalize()
                })
                .collect()
        };
        if n > 1 {
            dirs.push(DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 }));
        }
        let x = DVector::zeros(n);
        for (k, zeta) in scn.cone().base_grid().iter().enumerate() {
            let l = scn.lagrangian().scalarize(zeta);
            for u in &dirs {
                let mut prev = [f64::NEG_INFINITY; 3];
                for &m in &ladder {
                    let w = u * m;
                    let g = l.gradient(&w).norm();
                    let inv = l.invert_gradient(&w).map_err(err)?.norm();
                    let arc = AnalyticArc::new(scn, 0.0, x.clone(), w.clone(), zeta.clone()).map_err(err)?;
                    let cost = scalar_cost(scn, &Trajectory::from(arc), zeta).map_err(err)?;
                    let cur = [g, inv, cost];
                    if cur.iter().zip(&prev).any(|(c, p)| c <= p || c.is_nan()) {
                        bad.push(format!("scenario {si} k {k} m {m}"));
                    }
                    prev = cur;
                    checked += 1;
                }
            }
        }
    }
    check(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{checked} ladder rungs over 3 scenarios, all strictly increasing")
        } else {
            format!("not increasing at {}", bad.join("; "))
        },
    )
}

fn run_cli(args: &[&str], out: &Path, jobs: usize) -> Result<i32, String> {
    let scenario = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/standard.cfg");
    let mut full: Vec<String> = vec!["mocv".into()];
    full.extend(args.iter().map(|s| s.to_string()));
    full.extend([
        "--scenario".into(),
        scenario.display().to_string(),
        "--out".into(),
        out.display().to_string(),
        "--jobs".into(),
        jobs.to_string(),
    ]);
    Ok(mocv::cli::main_with(full))
}

fn determinism() -> Outcome {
    let commands: [&[&str]; 4] = [
        &["value-surface"],
        &["hjb-check"],
        &["bellman-check", "--grid-t", "0:0.5:2", "--grid-x", "-1:1:2", "--seed", "11"],
        &["oracle-compare", "--grid-t", "0:0.5:2", "--grid-x", "-1:1:2", "--k-grid", "5"],
    ];
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir()).collect::<Result<_, _>>().map_err(err)?;
    for (dir, jobs) in dirs.iter().zip([1, 1, 4]) {
        for cmd in &commands {
            let code = run_cli(cmd, dir.path(), jobs)?;
            if code != 0 {
                return Err(format!("{} exited with {code}", cmd[0]));
            }
        }
    }
    let mut files: Vec<_> = std::fs::read_dir(dirs[0].path())
        .map_err(err)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name())
        .filter(|n| n.to_string_lossy().ends_with(".csv"))
        .collect();
    files.sort();
    let mut differing = Vec::new();
    for name in &files {
        let reference = std::fs::read(dirs[0].path().join(name)).map_err(err)?;
        for dir in &dirs[1..] {
            if std::fs::read(dir.path().join(name)).map_err(err)? != reference {
                differing.push(name.to_string_lossy().into_owned());
            }
        }
    }
    check(
        differing.is_empty() && files.len() >= 4,
        if differing.is_empty() {
            format!("{} CSV files byte-identical across 2 serial runs and a 4-thread run", files.len())
        } else {
            format!("differing: {}", differing.join(", "))
        },
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("closed-form regression", closed_form_regression),
        ("hopf-lax vs direct method", direct_vs_hopflax),
        ("bellman inclusion and infimizer", bellman_inclusion),
        ("hjb residual and sup set", hjb_equation),
        ("derivative suite", derivative_suite),
        ("newton solver", newton_solver),
        ("lattice algebra", lattice_algebra),
        ("coercivity ladder", coercivity),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {}: {tag} {name}: {detail}", i + 1);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
