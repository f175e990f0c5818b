use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::problem::{ScalarLagrangian, Scenario};

/// The candidate arc `Y_{t,x,p,ζ}(s) = x + ∫_t^s (∇L_ζ)⁻¹(p / d_t(r)) dr`,
/// optionally restricted to `[from, T]` (its tail after `from`).
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticArc {
    pub t0: f64,
    pub x0: DVector<f64>,
    pub p: DVector<f64>,
    pub zeta: DVector<f64>,
    pub from: f64,
}

impl AnalyticArc {
    pub fn new(scn: &Scenario, t0: f64, x0: DVector<f64>, p: DVector<f64>, zeta: DVector<f64>) -> Result<Self> {
        scn.require_standing()?;
        scn.check_time(t0)?;
        scn.check_state(&x0)?;
        if p.len() != x0.len() {
            return Err(Error::Usage("p and x must have the same dimension".into()));
        }
        if zeta.len() != scn.objective_dim() {
            return Err(Error::Usage(format!(
                "direction has dimension {}, expected {}",
                zeta.len(),
                scn.objective_dim()
            )));
        }
        Ok(Self {
            t0,
            x0,
            p,
            zeta,
            from: t0,
        })
    }
}

/// Continuous, piecewise-linear arc with nodes `t_0 < t_1 < … < t_m = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearArc {
    times: Vec<f64>,
    points: Vec<DVector<f64>>,
}

impl PiecewiseLinearArc {
    pub fn new(times: Vec<f64>, points: Vec<DVector<f64>>, horizon: f64) -> Result<Self> {
        if times.is_empty() || times.len() != points.len() {
            return Err(Error::Usage("piecewise-linear arc needs matching, nonempty times and points".into()));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Usage("piecewise-linear node times must be strictly increasing".into()));
        }
        let last = *times.last().unwrap();
        if (last - horizon).abs() > 1e-12 * horizon.max(1.0) {
            return Err(Error::Usage(format!("last node time {last} must equal the horizon {horizon}")));
        }
        let n = points[0].len();
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::Usage("piecewise-linear nodes have inconsistent dimensions".into()));
        }
        let mut times = times;
        *times.last_mut().unwrap() = horizon;
        Ok(Self { times, points })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    /// `(t_a, t_b, velocity)` for every segment.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, DVector<f64>)> + '_ {
        self.times.windows(2).zip(self.points.windows(2)).map(|(t, y)| {
            let v = (&y[1] - &y[0]) / (t[1] - t[0]);
            (t[0], t[1], v)
        })
    }

    fn segment_index(&self, s: f64) -> usize {
        let m = self.times.len();
        self.times.partition_point(|&t| t <= s).clamp(1, m - 1) - 1
    }

    pub fn velocity(&self, s: f64) -> DVector<f64> {
        if self.times.len() == 1 {
            return DVector::zeros(self.points[0].len());
        }
        let i = self.segment_index(s);
        (&self.points[i + 1] - &self.points[i]) / (self.times[i + 1] - self.times[i])
    }

    pub fn position(&self, s: f64) -> DVector<f64> {
        if self.times.len() == 1 {
            return self.points[0].clone();
        }
        let i = self.segment_index(s);
        let lam = (s - self.times[i]) / (self.times[i + 1] - self.times[i]);
        &self.points[i] * (1.0 - lam) + &self.points[i + 1] * lam
    }

    /// Tail on `[from, T]`.
    pub fn restrict(&self, from: f64) -> Self {
        let mut times = vec![from];
        let mut points = vec![self.position(from)];
        for (t, y) in self.times.iter().zip(&self.points) {
            if *t > from {
                times.push(*t);
                points.push(y.clone());
            }
        }
        Self { times, points }
    }
}

/// An admissible arc: analytic candidate or piecewise-linear test arc.
#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    Analytic(AnalyticArc),
    PiecewiseLinear(PiecewiseLinearArc),
}

impl Trajectory {
    pub fn start(&self) -> f64 {
        match self {
            Self::Analytic(a) => a.from,
            Self::PiecewiseLinear(pl) => pl.times[0],
        }
    }

    pub fn velocity(&self, scn: &Scenario, s: f64) -> Result<DVector<f64>> {
        match self {
            Self::Analytic(a) => arc_velocity_with(scn, &scn.lagrangian().scalarize(&a.zeta), a.t0, &a.p, s),
            Self::PiecewiseLinear(pl) => Ok(pl.velocity(s)),
        }
    }

    pub fn position(&self, scn: &Scenario, s: f64) -> Result<DVector<f64>> {
        match self {
            Self::Analytic(a) => arc_position_with(scn, &scn.lagrangian().scalarize(&a.zeta), a.t0, &a.x0, &a.p, s),
            Self::PiecewiseLinear(pl) => Ok(pl.position(s)),
        }
    }

    /// Tail of the arc on `[from, T]`, an element of `A(from, y(from))`.
    pub fn restrict(&self, from: f64) -> Result<Self> {
        if from < self.start() {
            return Err(Error::Domain(format!(
                "cannot restrict an arc starting at {} to [{from}, T]",
                self.start()
            )));
        }
        Ok(match self {
            Self::Analytic(a) => Self::Analytic(AnalyticArc { from, ..a.clone() }),
            Self::PiecewiseLinear(pl) => Self::PiecewiseLinear(pl.restrict(from)),
        })
    }
}

impl From<AnalyticArc> for Trajectory {
    fn from(a: AnalyticArc) -> Self {
        Self::Analytic(a)
    }
}

impl From<PiecewiseLinearArc> for Trajectory {
    fn from(a: PiecewiseLinearArc) -> Self {
        Self::PiecewiseLinear(a)
    }
}

pub(crate) fn arc_velocity_with(
    scn: &Scenario,
    l: &ScalarLagrangian,
    t: f64,
    p: &DVector<f64>,
    s: f64,
) -> Result<DVector<f64>> {
    l.invert_gradient(&(p / scn.discount().value(t, s)))
}

pub(crate) fn arc_position_with(
    scn: &Scenario,
    l: &ScalarLagrangian,
    t: f64,
    x: &DVector<f64>,
    p: &DVector<f64>,
    s: f64,
) -> Result<DVector<f64>> {
    let mut y = x.clone();
    for (r, w) in scn.quadrature().points(t, s) {
        y += arc_velocity_with(scn, l, t, p, r)? * w;
    }
    Ok(y)
}

/// `Ẏ_{t,x,p,ζ}(s) = (∇L_ζ)⁻¹(p / d_t(s))`.
pub fn arc_velocity(scn: &Scenario, t: f64, p: &DVector<f64>, zeta: &DVector<f64>, s: f64) -> Result<DVector<f64>> {
    check_interval(scn, t, s)?;
    arc_velocity_with(scn, &scn.lagrangian().scalarize(zeta), t, p, s)
}

/// `Y_{t,x,p,ζ}(s)` by composite Gauss–Legendre quadrature of the velocity.
pub fn arc_position(
    scn: &Scenario,
    t: f64,
    x: &DVector<f64>,
    p: &DVector<f64>,
    zeta: &DVector<f64>,
    s: f64,
) -> Result<DVector<f64>> {
    check_interval(scn, t, s)?;
    scn.check_state(x)?;
    arc_position_with(scn, &scn.lagrangian().scalarize(zeta), t, x, p, s)
}

pub(crate) fn check_interval(scn: &Scenario, t: f64, s: f64) -> Result<()> {
    scn.check_time(t)?;
    scn.check_time(s)?;
    if s < t {
        return Err(Error::Domain(format!("arc evaluated at s = {s} before its start t = {t}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_linear_basics() {
        let arc = PiecewiseLinearArc::new(
            vec![0.0, 0.5, 1.0],
            vec![DVector::from_vec(vec![0.0]), DVector::from_vec(vec![1.0]), DVector::from_vec(vec![0.0])],
            1.0,
        )
        .unwrap();
        assert_eq!(arc.velocity(0.25)[0], 2.0);
        assert_eq!(arc.velocity(0.75)[0], -2.0);
        assert_eq!(arc.velocity(1.0)[0], -2.0);
        assert_eq!(arc.position(0.25)[0], 0.5);
        let tail = arc.restrict(0.25);
        assert_eq!(tail.times(), &[0.25, 0.5, 1.0]);
        assert_eq!(tail.points()[0][0], 0.5);
    }

    #[test]
    fn piecewise_linear_validation() {
        let p = |v: f64| DVector::from_vec(vec![v]);
        assert!(PiecewiseLinearArc::new(vec![0.0, 0.0, 1.0], vec![p(0.0), p(0.0), p(0.0)], 1.0).is_err());
        assert!(PiecewiseLinearArc::new(vec![0.0, 0.5], vec![p(0.0), p(0.0)], 1.0).is_err());
        assert!(PiecewiseLinearArc::new(vec![1.0], vec![p(3.0)], 1.0).is_ok());
    }
}
