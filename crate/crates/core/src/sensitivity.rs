//! Analytic derivatives of the candidate arcs and of `p(t, x, ζ)` with
//! respect to the anchor `(t, x)` and the parameter `p`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Hypothesis, Result};
use crate::hopflax::{arc_velocity_with, check_interval, solve_p};
use crate::problem::Scenario;

/// `∂Y_{t,x,p,ζ}(s)/∂t = −(∇L_ζ)⁻¹(p) − ∫_t^s ∂d_t(r)/∂t [∇²L_ζ(Ẏ(r))]⁻¹ p / d_t(r)² dr`.
pub fn dy_dt(scn: &Scenario, t: f64, p: &DVector<f64>, zeta: &DVector<f64>, s: f64) -> Result<DVector<f64>> {
    check_interval(scn, t, s)?;
    let l = scn.lagrangian().scalarize(zeta);
    let disc = scn.discount();
    let mut out = -l.invert_gradient(p)?;
    for (r, w) in scn.quadrature().points(t, s) {
        let d = disc.value(t, r);
        let (_, jac) = l.inverse_jacobian(&(p / d))?;
        out -= jac * p * (w * disc.dt(t, r) / (d * d));
    }
    Ok(out)
}

/// `∂Ẏ_{t,x,p,ζ}(s)/∂t = −∂d_t(s)/∂t [∇²L_ζ(Ẏ(s))]⁻¹ p / d_t(s)²`.
pub fn dydot_dt(scn: &Scenario, t: f64, p: &DVector<f64>, zeta: &DVector<f64>, s: f64) -> Result<DVector<f64>> {
    check_interval(scn, t, s)?;
    let l = scn.lagrangian().scalarize(zeta);
    let d = scn.discount().value(t, s);
    let (_, jac) = l.inverse_jacobian(&(p / d))?;
    Ok(-(jac * p) * (scn.discount().dt(t, s) / (d * d)))
}

/// `∇_p Y(s) = ∫_t^s [∇²L_ζ(Ẏ(r))]⁻¹ / d_t(r) dr`.
pub fn grad_p_y(scn: &Scenario, t: f64, p: &DVector<f64>, zeta: &DVector<f64>, s: f64) -> Result<DMatrix<f64>> {
    check_interval(scn, t, s)?;
    let l = scn.lagrangian().scalarize(zeta);
    let n = p.len();
    let mut out = DMatrix::zeros(n, n);
    for (r, w) in scn.quadrature().points(t, s) {
        let d = scn.discount().value(t, r);
        let (_, jac) = l.inverse_jacobian(&(p / d))?;
        out += jac * (w / d);
    }
    Ok(out)
}

/// `∇_p Ẏ(s) = [∇²L_ζ(Ẏ(s))]⁻¹ / d_t(s)`.
pub fn grad_p_ydot(scn: &Scenario, t: f64, p: &DVector<f64>, zeta: &DVector<f64>, s: f64) -> Result<DMatrix<f64>> {
    check_interval(scn, t, s)?;
    let d = scn.discount().value(t, s);
    let (_, jac) = scn.lagrangian().scalarize(zeta).inverse_jacobian(&(p / d))?;
    Ok(jac / d)
}

/// `∇_x Y(s) = I`: the arc is a translate of its start point.
pub fn grad_x_y(scn: &Scenario) -> DMatrix<f64> {
    let n = scn.state_dim();
    DMatrix::identity(n, n)
}

/// `∇_x Ẏ(s) = 0`.
pub fn grad_x_ydot(scn: &Scenario) -> DMatrix<f64> {
    let n = scn.state_dim();
    DMatrix::zeros(n, n)
}

/// Ingredients shared by `∂p/∂t` and `∂p/∂x` at the solved `p*`.
struct Implicit {
    p: DVector<f64>,
    y_t: DVector<f64>,
    jacobian: DMatrix<f64>,
    d_hess_g: DMatrix<f64>,
}

fn implicit(scn: &Scenario, t: f64, x: &DVector<f64>, zeta: &DVector<f64>) -> Result<Implicit> {
    scn.require(Hypothesis::H4)?;
    let sol = solve_p(scn, t, x, zeta)?;
    let p = sol.p();
    let y_t = DVector::from_column_slice(&sol.terminal_state);
    let horizon = scn.horizon();
    let d_t = scn.discount().value(t, horizon);
    let d_hess_g = scn.terminal().scalarize(zeta).hessian(&y_t) * d_t;
    let n = p.len();
    let jacobian = DMatrix::identity(n, n) + &d_hess_g * grad_p_y(scn, t, &p, zeta, horizon)?;
    Ok(Implicit {
        p,
        y_t,
        jacobian,
        d_hess_g,
    })
}

fn solve_jacobian(jac: DMatrix<f64>, rhs: DMatrix<f64>) -> Result<DMatrix<f64>> {
    jac.lu()
        .solve(&rhs)
        .ok_or(Error::Conditioning { condition: f64::INFINITY })
}

/// `∂p/∂t = −(I + A)⁻¹ [∂d_t(T)/∂t ∇g_ζ(Y(T)) + d_t(T) ∇²g_ζ(Y(T)) ∂Y(T)/∂t]`.
pub fn dp_dt(scn: &Scenario, t: f64, x: &DVector<f64>, zeta: &DVector<f64>) -> Result<DVector<f64>> {
    let imp = implicit(scn, t, x, zeta)?;
    let horizon = scn.horizon();
    let g = scn.terminal().scalarize(zeta);
    let rhs = g.gradient(&imp.y_t) * scn.discount().dt(t, horizon) + &imp.d_hess_g * dy_dt(scn, t, &imp.p, zeta, horizon)?;
    let n = rhs.len();
    let sol = solve_jacobian(imp.jacobian, DMatrix::from_column_slice(n, 1, rhs.as_slice()))?;
    Ok(-sol.column(0).into_owned())
}

/// `∂p/∂x = −(I + A)⁻¹ d_t(T) ∇²g_ζ(Y(T))`.
pub fn dp_dx(scn: &Scenario, t: f64, x: &DVector<f64>, zeta: &DVector<f64>) -> Result<DMatrix<f64>> {
    let imp = implicit(scn, t, x, zeta)?;
    Ok(-solve_jacobian(imp.jacobian, imp.d_hess_g)?)
}

/// Velocity of the optimal arc at `s`, used by the derivative checks.
pub fn optimal_velocity(scn: &Scenario, t: f64, p: &DVector<f64>, zeta: &DVector<f64>, s: f64) -> Result<DVector<f64>> {
    check_interval(scn, t, s)?;
    arc_velocity_with(scn, &scn.lagrangian().scalarize(zeta), t, p, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopflax::arc_position;
    use crate::problem::{presets, DiscountSpec};

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * (1.0 + b.abs())
    }

    #[test]
    fn dy_dt_matches_central_difference() {
        let scn = presets::quad_sat(DiscountSpec::Hyperbolic { k: 0.6 }, 5).unwrap();
        let (x, p, z) = (v(&[0.3]), v(&[-0.7]), v(&[0.25, 0.75]));
        let (t, s, h) = (0.2, 0.8, 1e-6);
        let fd = (arc_position(&scn, t + h, &x, &p, &z, s).unwrap()[0] - arc_position(&scn, t - h, &x, &p, &z, s).unwrap()[0])
            / (2.0 * h);
        assert!(close(dy_dt(&scn, t, &p, &z, s).unwrap()[0], fd, 1e-7));
    }

    #[test]
    fn grad_p_y_matches_central_difference() {
        let scn = presets::quad_sat(DiscountSpec::ConstantRate { rate: 0.3 }, 5).unwrap();
        let (x, p, z) = (v(&[0.3]), v(&[0.4]), v(&[0.5, 0.5]));
        let h = 1e-6;
        let fd = (arc_position(&scn, 0.1, &x, &(&p + v(&[h])), &z, 0.9).unwrap()[0]
            - arc_position(&scn, 0.1, &x, &(&p - v(&[h])), &z, 0.9).unwrap()[0])
            / (2.0 * h);
        assert!(close(grad_p_y(&scn, 0.1, &p, &z, 0.9).unwrap()[(0, 0)], fd, 1e-7));
    }

    #[test]
    fn linear_terminal_has_constant_p_in_x() {
        let scn = presets::standard(0.1, 3).unwrap();
        let z = v(&[1.0, 0.0]);
        assert_eq!(dp_dx(&scn, 0.3, &v(&[1.0]), &z).unwrap()[(0, 0)], 0.0);
        // p* = −e^{−0.1(1−t)}, so ∂p/∂t = −0.1 e^{−0.1(1−t)}
        let expected = -0.1 * (-0.1f64 * 0.7).exp();
        assert!(close(dp_dt(&scn, 0.3, &v(&[1.0]), &z).unwrap()[0], expected, 1e-12));
    }
}
