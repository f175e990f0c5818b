//! Problem instances: vector Lagrangian, terminal cost, discount and horizon.

mod discount;
mod hypotheses;
mod lagrangian;
mod terminal;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

pub use discount::DiscountSpec;
pub use hypotheses::{HypothesisCheck, HypothesisReport};
pub use lagrangian::{LagrangianSpec, QuadraticTerm, ScalarLagrangian};
pub use terminal::{ScalarTerminal, TerminalSpec};

use crate::error::{Error, Hypothesis, Result};
use crate::lattice::ConeSpec;
use crate::quadrature::CompositeRule;

/// Smallest admissible discount floor `a`.
pub const DISCOUNT_FLOOR_MIN: f64 = 1e-6;

/// Immutable problem instance. Hypotheses h1–h3 are probed at construction;
/// h4 and h5 are recorded and enforced by the operations that need them.
#[derive(Debug, Clone)]
pub struct Scenario {
    cone: Arc<ConeSpec>,
    lagrangian: LagrangianSpec,
    terminal: TerminalSpec,
    discount: DiscountSpec,
    horizon: f64,
    quadrature: CompositeRule,
    discount_floor: f64,
    hypotheses: HypothesisReport,
}

impl Scenario {
    pub fn new(
        cone: impl Into<Arc<ConeSpec>>,
        lagrangian: LagrangianSpec,
        terminal: TerminalSpec,
        discount: DiscountSpec,
        horizon: f64,
    ) -> Result<Self> {
        Self::with_quadrature(cone, lagrangian, terminal, discount, horizon, CompositeRule::default())
    }

    pub fn with_quadrature(
        cone: impl Into<Arc<ConeSpec>>,
        lagrangian: LagrangianSpec,
        terminal: TerminalSpec,
        discount: DiscountSpec,
        horizon: f64,
        quadrature: CompositeRule,
    ) -> Result<Self> {
        let scn = Self::unchecked(cone, lagrangian, terminal, discount, horizon, quadrature)?;
        scn.require_standing()?;
        Ok(scn)
    }

    /// Builds and probes without enforcing h1–h3, for diagnostics. Every
    /// operation still checks the hypotheses it needs.
    pub fn unchecked(
        cone: impl Into<Arc<ConeSpec>>,
        lagrangian: LagrangianSpec,
        terminal: TerminalSpec,
        discount: DiscountSpec,
        horizon: f64,
        quadrature: CompositeRule,
    ) -> Result<Self> {
        let cone = cone.into();
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Config(format!("horizon T = {horizon} must be positive")));
        }
        let d = cone.dim();
        if lagrangian.objective_dim() != d {
            return Err(Error::Config(format!(
                "lagrangian has {} components but the cone lives in R^{d}",
                lagrangian.objective_dim()
            )));
        }
        if terminal.objective_dim() != d {
            return Err(Error::Config(format!(
                "terminal cost has {} components but the cone lives in R^{d}",
                terminal.objective_dim()
            )));
        }
        if terminal.state_dim() != lagrangian.state_dim() {
            return Err(Error::Config(format!(
                "terminal cost acts on R^{} but the lagrangian on R^{}",
                terminal.state_dim(),
                lagrangian.state_dim()
            )));
        }
        discount.validate()?;
        let mut scn = Self {
            discount_floor: discount.floor(horizon),
            cone,
            lagrangian,
            terminal,
            discount,
            horizon,
            quadrature,
            hypotheses: HypothesisReport::default(),
        };
        scn.hypotheses = hypotheses::probe_all(&scn);
        Ok(scn)
    }

    /// Same scenario integrated with `panels` Gauss–Legendre panels.
    pub fn with_panels(mut self, panels: usize) -> Self {
        self.quadrature = CompositeRule::new(self.quadrature.order(), panels);
        self
    }

    /// Same scenario over a different base grid of the same cone.
    pub fn with_cone(mut self, cone: impl Into<Arc<ConeSpec>>) -> Result<Self> {
        let cone = cone.into();
        if cone.dim() != self.cone.dim() {
            return Err(Error::Config("replacement cone has a different dimension".into()));
        }
        self.cone = cone;
        self.hypotheses = hypotheses::probe_all(&self);
        self.require_standing()?;
        Ok(self)
    }

    /// Fails with the recorded probe detail unless `h` passed.
    pub fn require(&self, h: Hypothesis) -> Result<()> {
        match self.hypotheses.get(h) {
            Some(c) if c.passed => Ok(()),
            Some(c) => Err(Error::Hypothesis {
                hypothesis: h,
                detail: c.detail.clone(),
            }),
            None => Err(Error::Hypothesis {
                hypothesis: h,
                detail: "not probed".into(),
            }),
        }
    }

    /// h1–h3, assumed by every evaluation of costs and arcs.
    pub fn require_standing(&self) -> Result<()> {
        for h in [Hypothesis::H1, Hypothesis::H2, Hypothesis::H3] {
            self.require(h)?;
        }
        Ok(())
    }

    pub fn cone(&self) -> &Arc<ConeSpec> {
        &self.cone
    }

    pub fn lagrangian(&self) -> &LagrangianSpec {
        &self.lagrangian
    }

    pub fn terminal(&self) -> &TerminalSpec {
        &self.terminal
    }

    pub fn discount_spec(&self) -> &DiscountSpec {
        &self.discount
    }

    pub(crate) fn discount(&self) -> &DiscountSpec {
        &self.discount
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn quadrature(&self) -> &CompositeRule {
        &self.quadrature
    }

    /// The computed `a = inf d_t(s)`.
    pub fn discount_floor(&self) -> f64 {
        self.discount_floor
    }

    pub fn hypotheses(&self) -> &HypothesisReport {
        &self.hypotheses
    }

    /// `n`.
    pub fn state_dim(&self) -> usize {
        self.lagrangian.state_dim()
    }

    /// `d`.
    pub fn objective_dim(&self) -> usize {
        self.cone.dim()
    }

    pub fn zeta(&self, k: usize) -> Result<&DVector<f64>> {
        if k >= self.cone.len() {
            return Err(Error::Usage(format!(
                "base index {k} out of range (grid has {} directions)",
                self.cone.len()
            )));
        }
        Ok(self.cone.zeta(k))
    }

    /// `L_ζ(w)` for base direction `k`.
    pub fn scalarize_l(&self, k: usize, w: &DVector<f64>) -> Result<f64> {
        Ok(self.lagrangian.scalarize(self.zeta(k)?).value(w))
    }

    pub fn grad_l_zeta(&self, k: usize, w: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.lagrangian.scalarize(self.zeta(k)?).gradient(w))
    }

    pub fn hess_l_zeta(&self, k: usize, w: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(self.lagrangian.scalarize(self.zeta(k)?).hessian(w))
    }

    /// `(∇L_ζ)⁻¹(p)` for base direction `k`.
    pub fn invert_grad_l(&self, k: usize, p: &DVector<f64>) -> Result<DVector<f64>> {
        self.lagrangian.scalarize(self.zeta(k)?).invert_gradient(p)
    }

    fn check_times(&self, t: f64, s: f64) -> Result<()> {
        if !(0.0..=self.horizon).contains(&t) || !(0.0..=self.horizon).contains(&s) || s < t {
            return Err(Error::Domain(format!(
                "discount needs 0 <= t <= s <= T = {}, got t = {t}, s = {s}",
                self.horizon
            )));
        }
        Ok(())
    }

    /// `d_t(s)`, checked.
    pub fn discount_at(&self, t: f64, s: f64) -> Result<f64> {
        self.check_times(t, s)?;
        Ok(self.discount.value(t, s))
    }

    /// `∂d_t(s)/∂t`, checked.
    pub fn discount_dt(&self, t: f64, s: f64) -> Result<f64> {
        self.check_times(t, s)?;
        Ok(self.discount.dt(t, s))
    }

    pub(crate) fn check_state(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.state_dim() {
            return Err(Error::Usage(format!(
                "state has dimension {}, scenario has n = {}",
                x.len(),
                self.state_dim()
            )));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("non-finite state".into()));
        }
        Ok(())
    }

    pub(crate) fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::Domain(format!("time {t} outside [0, {}]", self.horizon)));
        }
        Ok(())
    }
}

/// Ready-made instances used by the examples, tests and bundled configs.
pub mod presets {
    use super::*;

    /// `n = 1`, `d = 2`, `C = ℝ²₊`, `L = (½w², ½(w − 1)²)`, `g = (x, 0)`,
    /// constant rate `r`, `T = 1`.
    pub fn standard(rate: f64, grid: usize) -> Result<Scenario> {
        Scenario::new(
            ConeSpec::orthant(2, grid)?,
            standard_lagrangian(),
            TerminalSpec::linear(DMatrix::from_row_slice(2, 1, &[1.0, 0.0]), DVector::zeros(2))?,
            DiscountSpec::ConstantRate { rate },
            1.0,
        )
    }

    pub fn standard_lagrangian() -> LagrangianSpec {
        LagrangianSpec::Quadratic {
            terms: vec![QuadraticTerm::scalar(1.0, 0.0, 0.0), QuadraticTerm::scalar(1.0, 1.0, 0.0)],
        }
    }

    /// Standard Lagrangian with the saturating convex terminal cost
    /// `g = (√(1 + (x − ½)²), √(1 + (x + ½)²))`.
    pub fn quad_sat(discount: DiscountSpec, grid: usize) -> Result<Scenario> {
        Scenario::new(
            ConeSpec::orthant(2, grid)?,
            standard_lagrangian(),
            TerminalSpec::convex_quad_sat(
                vec![1.0, 1.0],
                vec![DVector::from_element(1, 0.5), DVector::from_element(1, -0.5)],
                DMatrix::zeros(2, 1),
                DVector::zeros(2),
            )?,
            discount,
            1.0,
        )
    }
}
