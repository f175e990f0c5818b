//! Scenario files: TOML with `[cone]`, `[lagrangian]`, `[terminal]`,
//! `[discount]` and an optional `[run]` section.
//!
//! ```toml
//! horizon = 1.0
//!
//! [cone]
//! generators = [[1.0, 0.0], [0.0, 1.0]]   # dual generators, one per row
//! k_grid = 33                              # c0 = [..] is optional
//!
//! [lagrangian]
//! family = "quadratic"                     # or "quartic_reg" with eps = [..]
//! q = [[[1.0]], [[1.0]]]                   # one n×n matrix per component
//! a = [[0.0], [1.0]]
//! b = [0.0, 0.0]
//!
//! [terminal]
//! family = "linear"                        # g(x) = G x + offset
//! g = [[1.0], [0.0]]
//!
//! [discount]
//! family = "constant_rate"
//! rate = 0.1
//! ```

use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::lattice::ConeSpec;
use crate::problem::{DiscountSpec, LagrangianSpec, QuadraticTerm, Scenario, TerminalSpec};
use crate::quadrature::CompositeRule;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub horizon: f64,
    pub cone: ConeSection,
    pub lagrangian: LagrangianSection,
    pub terminal: TerminalSection,
    pub discount: DiscountSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSection {
    pub generators: Vec<Vec<f64>>,
    pub c0: Option<Vec<f64>>,
    #[serde(default = "default_k")]
    pub k_grid: usize,
}

fn default_k() -> usize {
    ConeSpec::DEFAULT_GRID
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum LagrangianSection {
    Quadratic {
        q: Vec<Vec<Vec<f64>>>,
        a: Vec<Vec<f64>>,
        b: Option<Vec<f64>>,
    },
    QuarticReg {
        q: Vec<Vec<Vec<f64>>>,
        a: Vec<Vec<f64>>,
        b: Option<Vec<f64>>,
        eps: Vec<f64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum TerminalSection {
    Linear {
        g: Vec<Vec<f64>>,
        offset: Option<Vec<f64>>,
    },
    ConvexQuadSat {
        scales: Vec<f64>,
        centers: Vec<Vec<f64>>,
        linear: Option<Vec<Vec<f64>>>,
        offset: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiscountSection {
    ConstantRate { rate: f64 },
    VariableRate { breakpoints: Vec<f64>, rates: Vec<f64> },
    Hyperbolic { k: f64 },
}

/// Defaults for the CLI; every field can be overridden by a flag.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub grid_t: Option<String>,
    pub grid_x: Option<Vec<String>>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub arcs: Option<usize>,
    pub taus: Option<Vec<f64>>,
    pub panels: Option<usize>,
    pub oracle_nodes: Option<usize>,
}

/// Rows of a matrix given as nested arrays.
fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Config(format!("{what}: expected a nonempty rectangular matrix")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn terms(q: &[Vec<Vec<f64>>], a: &[Vec<f64>], b: Option<&[f64]>) -> Result<Vec<QuadraticTerm>> {
    if q.len() != a.len() || b.is_some_and(|b| b.len() != q.len()) {
        return Err(Error::Config(format!(
            "lagrangian: q, a and b must have one entry per component ({} q, {} a)",
            q.len(),
            a.len()
        )));
    }
    q.iter()
        .zip(a)
        .enumerate()
        .map(|(i, (qi, ai))| {
            Ok(QuadraticTerm::new(
                matrix(qi, &format!("lagrangian.q[{i}]"))?,
                DVector::from_column_slice(ai),
                b.map_or(0.0, |b| b[i]),
            ))
        })
        .collect()
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read scenario {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn cone(&self, k_grid: Option<usize>) -> Result<ConeSpec> {
        ConeSpec::new(&self.cone.generators, self.cone.c0.as_deref(), k_grid.unwrap_or(self.cone.k_grid))
    }

    pub fn lagrangian(&self) -> Result<LagrangianSpec> {
        match &self.lagrangian {
            LagrangianSection::Quadratic { q, a, b } => LagrangianSpec::quadratic(terms(q, a, b.as_deref())?),
            LagrangianSection::QuarticReg { q, a, b, eps } => LagrangianSpec::quartic_reg(terms(q, a, b.as_deref())?, eps.clone()),
        }
    }

    pub fn terminal(&self) -> Result<TerminalSpec> {
        match &self.terminal {
            TerminalSection::Linear { g, offset } => {
                let g = matrix(g, "terminal.g")?;
                let offset = offset
                    .as_ref()
                    .map_or_else(|| DVector::zeros(g.nrows()), |o| DVector::from_column_slice(o));
                TerminalSpec::linear(g, offset)
            }
            TerminalSection::ConvexQuadSat {
                scales,
                centers,
                linear,
                offset,
            } => {
                let d = scales.len();
                let n = centers.first().map_or(0, Vec::len);
                let linear = match linear {
                    Some(rows) => matrix(rows, "terminal.linear")?,
                    None => DMatrix::zeros(d, n),
                };
                let offset = offset.as_ref().map_or_else(|| DVector::zeros(d), |o| DVector::from_column_slice(o));
                TerminalSpec::convex_quad_sat(
                    scales.clone(),
                    centers.iter().map(|c| DVector::from_column_slice(c)).collect(),
                    linear,
                    offset,
                )
            }
        }
    }

    pub fn discount(&self) -> DiscountSpec {
        match &self.discount {
            DiscountSection::ConstantRate { rate } => DiscountSpec::ConstantRate { rate: *rate },
            DiscountSection::VariableRate { breakpoints, rates } => DiscountSpec::VariableRate {
                breakpoints: breakpoints.clone(),
                rates: rates.clone(),
            },
            DiscountSection::Hyperbolic { k } => DiscountSpec::Hyperbolic { k: *k },
        }
    }

    /// Builds the scenario, optionally overriding the grid size and the
    /// number of quadrature panels.
    pub fn build(&self, k_grid: Option<usize>, panels: Option<usize>) -> Result<Scenario> {
        let scn = self.build_unchecked(k_grid, panels)?;
        scn.require_standing()?;
        Ok(scn)
    }

    /// As [`ScenarioFile::build`] but keeps scenarios whose h1–h3 probes fail.
    pub fn build_unchecked(&self, k_grid: Option<usize>, panels: Option<usize>) -> Result<Scenario> {
        let panels = panels.or(self.run.panels).unwrap_or(CompositeRule::DEFAULT_PANELS);
        if panels == 0 {
            return Err(Error::Config("run.panels must be at least 1".into()));
        }
        Scenario::unchecked(
            Arc::new(self.cone(k_grid)?),
            self.lagrangian()?,
            self.terminal()?,
            self.discount(),
            self.horizon,
            CompositeRule::new(CompositeRule::DEFAULT_ORDER, panels),
        )
    }
}

/// `LO:HI:N`, `N` evenly spaced points including both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| if i + 1 == self.n { self.hi } else { self.lo + step * i as f64 })
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Usage(format!("grid '{s}' is not of the form LO:HI:N"));
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(bad());
        };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(Error::Usage(format!("grid '{s}' needs at least one point")));
        }
        if !(lo.is_finite() && hi.is_finite()) || hi < lo || (n > 1 && hi == lo) {
            return Err(Error::Usage(format!("grid '{s}' needs finite LO < HI")));
        }
        Ok(Self { lo, hi, n })
    }
}

/// Cartesian product of per-dimension grids, first dimension slowest.
pub fn product_grid(dims: &[GridSpec]) -> Vec<DVector<f64>> {
    let mut out = vec![Vec::new()];
    for g in dims {
        let pts = g.points();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                pts.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(DVector::from_vec).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const STANDARD: &str = include_str!("../scenarios/standard.cfg");

    #[test]
    fn bundled_standard_scenario() {
        let file = ScenarioFile::parse(STANDARD).unwrap();
        let scn = file.build(None, None).unwrap();
        assert_eq!(scn.cone().len(), 33);
        assert_eq!(scn.state_dim(), 1);
        assert!(scn.hypotheses().all_passed());
        assert_eq!(file.build(Some(9), None).unwrap().cone().len(), 9);
    }

    #[test]
    fn grid_parsing() {
        let g: GridSpec = "0:0.8:5".parse().unwrap();
        assert_eq!(g.points(), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8]);
        assert_eq!("0.5:0.5:1".parse::<GridSpec>().unwrap().points(), vec![0.5]);
        assert!("0:1".parse::<GridSpec>().is_err());
        assert!("1:0:3".parse::<GridSpec>().is_err());
        assert!("0:1:0".parse::<GridSpec>().is_err());
    }

    #[test]
    fn product_order() {
        let grid = product_grid(&["0:1:2".parse().unwrap(), "5:6:2".parse().unwrap()]);
        let flat: Vec<Vec<f64>> = grid.iter().map(|p| p.as_slice().to_vec()).collect();
        assert_eq!(flat, vec![vec![0.0, 5.0], vec![0.0, 6.0], vec![1.0, 5.0], vec![1.0, 6.0]]);
    }

    #[test]
    fn parse_errors_point_at_the_field() {
        let err = ScenarioFile::parse(&STANDARD.replace("rate = 0.1", "rate = \"fast\"")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line"), "{msg}");
        let err = ScenarioFile::parse(&STANDARD.replace("k_grid", "kgrid")).unwrap_err();
        assert!(err.to_string().contains("kgrid"));
    }

    #[test]
    fn zero_generator_is_rejected() {
        let text = STANDARD.replace("[0.0, 1.0]]", "[0.0, 0.0]]");
        let err = ScenarioFile::parse(&text).unwrap().build(None, None).unwrap_err();
        assert!(err.to_string().contains("ConeSpec invariant"), "{err}");
    }
}
