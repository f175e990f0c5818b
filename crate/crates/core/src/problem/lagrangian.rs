use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// One quadratic component `½ (w − a)ᵀ Q (w − a) + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticTerm {
    pub q: DMatrix<f64>,
    pub a: DVector<f64>,
    pub b: f64,
}

impl QuadraticTerm {
    pub fn new(q: DMatrix<f64>, a: DVector<f64>, b: f64) -> Self {
        Self { q, a, b }
    }

    /// One-dimensional `½ q (w − a)² + b`.
    pub fn scalar(q: f64, a: f64, b: f64) -> Self {
        Self::new(DMatrix::from_element(1, 1, q), DVector::from_element(1, a), b)
    }
}

/// Vector Lagrangian `L : ℝ^n → ℝ^d`, one component per objective.
#[derive(Debug, Clone, PartialEq)]
pub enum LagrangianSpec {
    /// Component `i` is `½ (w − a_i)ᵀ Q_i (w − a_i) + b_i`.
    Quadratic { terms: Vec<QuadraticTerm> },
    /// Quadratic plus `ε_i |w|⁴`.
    QuarticReg {
        terms: Vec<QuadraticTerm>,
        eps: Vec<f64>,
    },
}

impl LagrangianSpec {
    pub fn quadratic(terms: Vec<QuadraticTerm>) -> Result<Self> {
        validate_terms(&terms)?;
        Ok(Self::Quadratic { terms })
    }

    pub fn quartic_reg(terms: Vec<QuadraticTerm>, eps: Vec<f64>) -> Result<Self> {
        validate_terms(&terms)?;
        if eps.len() != terms.len() {
            return Err(Error::Config(format!(
                "lagrangian: {} quartic weights for {} components",
                eps.len(),
                terms.len()
            )));
        }
        if let Some(e) = eps.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
            return Err(Error::Config(format!(
                "lagrangian: quartic weight {e} must be finite and nonnegative"
            )));
        }
        Ok(Self::QuarticReg { terms, eps })
    }

    fn terms(&self) -> &[QuadraticTerm] {
        match self {
            Self::Quadratic { terms } | Self::QuarticReg { terms, .. } => terms,
        }
    }

    pub fn objective_dim(&self) -> usize {
        self.terms().len()
    }

    pub fn state_dim(&self) -> usize {
        self.terms()[0].a.len()
    }

    /// The vector value `L(w)`.
    pub fn value(&self, w: &DVector<f64>) -> DVector<f64> {
        let w4 = w.norm_squared().powi(2);
        DVector::from_iterator(
            self.objective_dim(),
            self.terms().iter().enumerate().map(|(i, t)| {
                let e = w - &t.a;
                let mut v = 0.5 * e.dot(&(&t.q * &e)) + t.b;
                if let Self::QuarticReg { eps, .. } = self {
                    v += eps[i] * w4;
                }
                v
            }),
        )
    }

    /// The scalarization `L_ζ = ζ·L`, expanded into a single quadratic form
    /// plus quartic term.
    pub fn scalarize(&self, zeta: &DVector<f64>) -> ScalarLagrangian {
        let n = self.state_dim();
        let mut q = DMatrix::zeros(n, n);
        let mut shift = DVector::zeros(n);
        let mut constant = 0.0;
        for (t, &z) in self.terms().iter().zip(zeta.iter()) {
            let qa = &t.q * &t.a;
            q += &t.q * z;
            shift += &qa * z;
            constant += z * (0.5 * t.a.dot(&qa) + t.b);
        }
        let quartic = match self {
            Self::Quadratic { .. } => 0.0,
            Self::QuarticReg { eps, .. } => eps.iter().zip(zeta.iter()).map(|(e, z)| e * z).sum(),
        };
        let q_inv = q.clone().try_inverse();
        ScalarLagrangian {
            q,
            shift,
            constant,
            quartic,
            q_inv,
        }
    }
}

fn validate_terms(terms: &[QuadraticTerm]) -> Result<()> {
    let Some(first) = terms.first() else {
        return Err(Error::Config("lagrangian: at least one component is required".into()));
    };
    let n = first.a.len();
    if n == 0 {
        return Err(Error::Config("lagrangian: state dimension must be positive".into()));
    }
    for (i, t) in terms.iter().enumerate() {
        if t.a.len() != n || t.q.nrows() != n || t.q.ncols() != n {
            return Err(Error::Config(format!(
                "lagrangian component {i}: expected Q {n}x{n} and a of length {n}"
            )));
        }
        if (&t.q - t.q.transpose()).amax() > 1e-12 * (1.0 + t.q.amax()) {
            return Err(Error::Config(format!("lagrangian component {i}: Q is not symmetric")));
        }
        if !t.q.iter().chain(t.a.iter()).all(|v| v.is_finite()) || !t.b.is_finite() {
            return Err(Error::Config(format!("lagrangian component {i}: non-finite parameter")));
        }
    }
    Ok(())
}

/// `L_ζ(w) = ½ wᵀQw − shift·w + constant + quartic·|w|⁴`.
#[derive(Debug, Clone)]
pub struct ScalarLagrangian {
    q: DMatrix<f64>,
    shift: DVector<f64>,
    constant: f64,
    quartic: f64,
    q_inv: Option<DMatrix<f64>>,
}

const INVERSION_MAX_ITERS: usize = 50;
const INVERSION_TOL: f64 = 1e-12;

impl ScalarLagrangian {
    pub fn value(&self, w: &DVector<f64>) -> f64 {
        0.5 * w.dot(&(&self.q * w)) - self.shift.dot(w) + self.constant + self.quartic * w.norm_squared().powi(2)
    }

    pub fn gradient(&self, w: &DVector<f64>) -> DVector<f64> {
        let mut g = &self.q * w - &self.shift;
        if self.quartic != 0.0 {
            g += w * (4.0 * self.quartic * w.norm_squared());
        }
        g
    }

    pub fn hessian(&self, w: &DVector<f64>) -> DMatrix<f64> {
        let mut h = self.q.clone();
        if self.quartic != 0.0 {
            let n = w.len();
            h += DMatrix::identity(n, n) * (4.0 * self.quartic * w.norm_squared());
            h += (w * w.transpose()) * (8.0 * self.quartic);
        }
        h
    }

    pub fn is_quadratic(&self) -> bool {
        self.quartic == 0.0
    }

    /// `(∇L_ζ)⁻¹(p)`: closed form for quadratic scalarizations, damped Newton
    /// otherwise.
    pub fn invert_gradient(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        if self.quartic == 0.0 {
            let inv = self.q_inv.as_ref().ok_or(Error::Inversion {
                residual: f64::INFINITY,
                iterations: 0,
            })?;
            return Ok(inv * (p + &self.shift));
        }
        self.newton_invert(p)
    }

    fn newton_invert(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        let tol = INVERSION_TOL * (1.0 + p.norm());
        let residual = |w: &DVector<f64>| (self.gradient(w) - p).norm();

        // Quadratic-part solution, or the pure quartic scale when that is closer.
        let target = p + &self.shift;
        let mut w = match &self.q_inv {
            Some(inv) => inv * &target,
            None => DVector::zeros(p.len()),
        };
        let tn = target.norm();
        if tn > 0.0 {
            let r = (tn / (4.0 * self.quartic)).cbrt();
            let cubic = &target * (r / tn);
            if residual(&cubic) < residual(&w) {
                w = cubic;
            }
        }

        let mut res = residual(&w);
        for it in 0..INVERSION_MAX_ITERS {
            if res <= tol {
                return Ok(w);
            }
            let step = self
                .hessian(&w)
                .lu()
                .solve(&(p - self.gradient(&w)))
                .ok_or(Error::Inversion {
                    residual: res,
                    iterations: it,
                })?;
            let mut lambda = 1.0;
            loop {
                let cand = &w + &step * lambda;
                let r = residual(&cand);
                if r < res || lambda < 1e-10 {
                    w = cand;
                    res = r;
                    break;
                }
                lambda *= 0.5;
            }
        }
        if res <= tol {
            Ok(w)
        } else {
            Err(Error::Inversion {
                residual: res,
                iterations: INVERSION_MAX_ITERS,
            })
        }
    }

    /// `∇(∇L_ζ)⁻¹(p) = [∇²L_ζ((∇L_ζ)⁻¹(p))]⁻¹`, returned with the preimage.
    pub fn inverse_jacobian(&self, p: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let w = self.invert_gradient(p)?;
        if self.quartic == 0.0 {
            if let Some(inv) = &self.q_inv {
                return Ok((w, inv.clone()));
            }
        }
        let h = self.hessian(&w);
        let inv = h.try_inverse().ok_or_else(|| Error::Hypothesis {
            hypothesis: crate::Hypothesis::H1,
            detail: format!("singular Hessian of L_zeta at w = {:?}", w.as_slice()),
        })?;
        Ok((w, inv))
    }
}
