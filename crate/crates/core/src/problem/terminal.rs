use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Terminal cost `g : ℝ^n → ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub enum TerminalSpec {
    /// `g(x) = G x + g0`, `G` of shape `d × n`.
    Linear { g: DMatrix<f64>, offset: DVector<f64> },
    /// `g_i(x) = s_i √(1 + |x − m_i|²) + (H x)_i + c_i` with `s_i ≥ 0`: smooth,
    /// convex and globally Lipschitz.
    ConvexQuadSat {
        scales: Vec<f64>,
        centers: Vec<DVector<f64>>,
        linear: DMatrix<f64>,
        offset: DVector<f64>,
    },
}

impl TerminalSpec {
    pub fn linear(g: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        if offset.len() != g.nrows() || g.ncols() == 0 {
            return Err(Error::Config(format!(
                "terminal: G is {}x{} but offset has length {}",
                g.nrows(),
                g.ncols(),
                offset.len()
            )));
        }
        if !g.iter().chain(offset.iter()).all(|v| v.is_finite()) {
            return Err(Error::Config("terminal: non-finite parameter".into()));
        }
        Ok(Self::Linear { g, offset })
    }

    /// `g ≡ 0`.
    pub fn zero(d: usize, n: usize) -> Self {
        Self::Linear {
            g: DMatrix::zeros(d, n),
            offset: DVector::zeros(d),
        }
    }

    pub fn convex_quad_sat(
        scales: Vec<f64>,
        centers: Vec<DVector<f64>>,
        linear: DMatrix<f64>,
        offset: DVector<f64>,
    ) -> Result<Self> {
        let d = scales.len();
        if d == 0 || centers.len() != d || linear.nrows() != d || offset.len() != d {
            return Err(Error::Config(
                "terminal: scales, centers, linear rows and offset must all have one entry per objective".into(),
            ));
        }
        let n = linear.ncols();
        if n == 0 || centers.iter().any(|c| c.len() != n) {
            return Err(Error::Config(format!("terminal: centers must have length {n}")));
        }
        if let Some(s) = scales.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::Config(format!("terminal: scale {s} must be finite and nonnegative")));
        }
        Ok(Self::ConvexQuadSat {
            scales,
            centers,
            linear,
            offset,
        })
    }

    pub fn objective_dim(&self) -> usize {
        match self {
            Self::Linear { offset, .. } | Self::ConvexQuadSat { offset, .. } => offset.len(),
        }
    }

    pub fn state_dim(&self) -> usize {
        match self {
            Self::Linear { g, .. } => g.ncols(),
            Self::ConvexQuadSat { linear, .. } => linear.ncols(),
        }
    }

    pub fn value(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::Linear { g, offset } => g * x + offset,
            Self::ConvexQuadSat {
                scales,
                centers,
                linear,
                offset,
            } => {
                let mut out = linear * x + offset;
                for (i, (s, m)) in scales.iter().zip(centers).enumerate() {
                    out[i] += s * (1.0 + (x - m).norm_squared()).sqrt();
                }
                out
            }
        }
    }

    /// Hessian of component `i`.
    pub fn component_hessian(&self, i: usize, x: &DVector<f64>) -> DMatrix<f64> {
        let n = x.len();
        match self {
            Self::Linear { .. } => DMatrix::zeros(n, n),
            Self::ConvexQuadSat { scales, centers, .. } => sat_hessian(scales[i], &centers[i], x),
        }
    }

    pub fn scalarize(&self, zeta: &DVector<f64>) -> ScalarTerminal {
        match self {
            Self::Linear { g, offset } => ScalarTerminal {
                sat: Vec::new(),
                coef: g.transpose() * zeta,
                constant: offset.dot(zeta),
            },
            Self::ConvexQuadSat {
                scales,
                centers,
                linear,
                offset,
            } => ScalarTerminal {
                sat: scales
                    .iter()
                    .zip(centers)
                    .zip(zeta.iter())
                    .filter(|((s, _), z)| **s * **z != 0.0)
                    .map(|((s, m), z)| (s * z, m.clone()))
                    .collect(),
                coef: linear.transpose() * zeta,
                constant: offset.dot(zeta),
            },
        }
    }
}

fn sat_hessian(scale: f64, center: &DVector<f64>, x: &DVector<f64>) -> DMatrix<f64> {
    let n = x.len();
    let e = x - center;
    let rho2 = 1.0 + e.norm_squared();
    let rho = rho2.sqrt();
    (DMatrix::identity(n, n) / rho - (&e * e.transpose()) / (rho2 * rho)) * scale
}

/// `g_ζ = ζ·g` as a weighted sum of saturating terms plus an affine part.
#[derive(Debug, Clone)]
pub struct ScalarTerminal {
    sat: Vec<(f64, DVector<f64>)>,
    coef: DVector<f64>,
    constant: f64,
}

impl ScalarTerminal {
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.sat
            .iter()
            .map(|(w, m)| w * (1.0 + (x - m).norm_squared()).sqrt())
            .sum::<f64>()
            + self.coef.dot(x)
            + self.constant
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = self.coef.clone();
        for (w, m) in &self.sat {
            let e = x - m;
            let rho = (1.0 + e.norm_squared()).sqrt();
            g += e * (w / rho);
        }
        g
    }

    pub fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = x.len();
        self.sat
            .iter()
            .fold(DMatrix::zeros(n, n), |acc, (w, m)| acc + sat_hessian(*w, m, x))
    }

    pub fn is_affine(&self) -> bool {
        self.sat.is_empty()
    }

    /// Global Lipschitz constant of `g_ζ`.
    pub fn lipschitz_bound(&self) -> f64 {
        self.coef.norm() + self.sat.iter().map(|(w, _)| w.abs()).sum::<f64>()
    }
}
