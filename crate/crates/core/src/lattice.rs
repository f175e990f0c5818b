//! Upper sets of the ordering cone, represented by lower support thresholds.
//!
//! An [`UpperSet`] `A` is stored as the vector `v_k = inf { ζ_k·z : z ∈ A }`
//! over a fixed base grid `ζ_1..ζ_K` of the dual cone, and stands for the
//! polyhedron `⋂_k { z : ζ_k·z ≥ v_k }`. That set is closed, convex and
//! invariant under addition of the cone. Every set produced by the value
//! function pipeline is an intersection of half-spaces with normals on the
//! grid, so nothing is lost for those sets.
//!
//! Extended-real rules: `+∞` in any direction means the empty set (the whole
//! vector is normalized to `+∞`), `−∞` in every direction is all of `ℝ^d`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Ordering cone `C`, described through generators of its dual cone `C⁺`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSpec {
    dim: usize,
    generators_dual: Vec<DVector<f64>>,
    c0: DVector<f64>,
    base_grid: Vec<DVector<f64>>,
}

impl ConeSpec {
    pub const DEFAULT_GRID: usize = 33;

    /// Builds the cone from dual generators (rows), an optional interior
    /// point `c0` and the requested base grid size.
    ///
    /// Without `c0`, the point solving `g_j·c0 = 1` for every generator is
    /// used when there are exactly `d` generators, otherwise their sum.
    pub fn new(generators: &[Vec<f64>], c0: Option<&[f64]>, grid_size: usize) -> Result<Self> {
        let Some(first) = generators.first() else {
            return Err(Error::Config(
                "ConeSpec invariant violated: at least one dual generator is required".into(),
            ));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(Error::Config(
                "ConeSpec invariant violated: objective dimension must be positive".into(),
            ));
        }
        if grid_size == 0 {
            return Err(Error::Config("ConeSpec: base grid size must be at least 1".into()));
        }
        let mut gens = Vec::with_capacity(generators.len());
        for (j, g) in generators.iter().enumerate() {
            if g.len() != dim {
                return Err(Error::Config(format!(
                    "ConeSpec: dual generator {j} has length {}, expected {dim}",
                    g.len()
                )));
            }
            let v = DVector::from_column_slice(g);
            let norm = v.norm();
            if !norm.is_finite() || norm == 0.0 {
                return Err(Error::Config(format!(
                    "ConeSpec invariant violated: dual generator {j} is the zero vector"
                )));
            }
            gens.push(v / norm);
        }

        let c0 = match c0 {
            Some(c) => {
                if c.len() != dim {
                    return Err(Error::Config(format!(
                        "ConeSpec: c0 has length {}, expected {dim}",
                        c.len()
                    )));
                }
                DVector::from_column_slice(c)
            }
            None => default_interior_point(&gens),
        };
        for (j, g) in gens.iter().enumerate() {
            if g.dot(&c0) <= 0.0 || !c0.iter().all(|c| c.is_finite()) {
                return Err(Error::Config(format!(
                    "ConeSpec invariant violated: c0 = {:?} is not interior to C (generator {j} gives {:.3e}); the cone needs nonempty interior",
                    c0.as_slice(),
                    g.dot(&c0)
                )));
            }
        }

        let base_grid = barycentric_grid(&gens, grid_size)
            .into_iter()
            .map(|z| {
                let s = z.dot(&c0);
                z / s
            })
            .collect();
        let cone = Self {
            dim,
            generators_dual: gens,
            c0,
            base_grid,
        };
        cone.validate()?;
        Ok(cone)
    }

    /// The nonnegative orthant `ℝ^d_+` (self-dual), with `c0 = (1, …, 1)`.
    pub fn orthant(dim: usize, grid_size: usize) -> Result<Self> {
        let gens: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(&gens, None, grid_size)
    }

    fn validate(&self) -> Result<()> {
        let probes = self.interior_probes();
        for (k, z) in self.base_grid.iter().enumerate() {
            if z.iter().all(|&c| c == 0.0) {
                return Err(Error::Config(format!(
                    "ConeSpec invariant violated: base direction {k} is zero"
                )));
            }
            let s = z.dot(&self.c0);
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "ConeSpec invariant violated: base direction {k} has zeta.c0 = {s}"
                )));
            }
            for c in &probes {
                if z.dot(c) <= 0.0 {
                    return Err(Error::Config(format!(
                        "ConeSpec invariant violated: base direction {k} is not positive on interior probe {:?}",
                        c.as_slice()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Vectors interior to `C`: `c0` and small perturbations of it that keep
    /// every dual generator strictly positive.
    pub fn interior_probes(&self) -> Vec<DVector<f64>> {
        let margin = self
            .generators_dual
            .iter()
            .map(|g| g.dot(&self.c0))
            .fold(f64::INFINITY, f64::min);
        let eps = 0.5 * margin;
        let mut probes = vec![self.c0.clone()];
        for i in 0..self.dim {
            for sign in [-1.0, 1.0] {
                let mut c = self.c0.clone();
                c[i] += sign * eps;
                if self.generators_dual.iter().all(|g| g.dot(&c) > 0.0) {
                    probes.push(c);
                }
            }
        }
        probes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of base grid directions `K`.
    pub fn len(&self) -> usize {
        self.base_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base_grid.is_empty()
    }

    pub fn zeta(&self, k: usize) -> &DVector<f64> {
        &self.base_grid[k]
    }

    pub fn base_grid(&self) -> &[DVector<f64>] {
        &self.base_grid
    }

    pub fn c0(&self) -> &DVector<f64> {
        &self.c0
    }

    pub fn generators_dual(&self) -> &[DVector<f64>] {
        &self.generators_dual
    }

    /// `true` if `z` lies in `C`, i.e. every dual generator is nonnegative on it.
    pub fn contains(&self, z: &DVector<f64>, tol: f64) -> bool {
        self.generators_dual.iter().all(|g| g.dot(z) >= -tol)
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.len() {
            return Err(Error::Usage(format!(
                "base index {k} out of range (grid has {} directions)",
                self.len()
            )));
        }
        Ok(())
    }
}

fn default_interior_point(gens: &[DVector<f64>]) -> DVector<f64> {
    let dim = gens[0].len();
    if gens.len() == dim {
        let m = DMatrix::from_fn(dim, dim, |i, j| gens[i][j]);
        if let Some(inv) = m.try_inverse() {
            return inv * DVector::from_element(dim, 1.0);
        }
    }
    let sum = gens
        .iter()
        .fold(DVector::zeros(dim), |acc: DVector<f64>, g| acc + g);
    let n = sum.norm();
    if n > 0.0 {
        sum / n
    } else {
        sum
    }
}

/// Uniform barycentric grid over the generators. Two generators give exactly
/// `size` points ordered from the first generator to the second; more
/// generators use the finest simplex lattice with at most `size` points.
fn barycentric_grid(gens: &[DVector<f64>], size: usize) -> Vec<DVector<f64>> {
    let m = gens.len();
    match m {
        1 => vec![gens[0].clone()],
        2 => {
            if size == 1 {
                return vec![(&gens[0] + &gens[1]) * 0.5];
            }
            (0..size)
                .map(|i| {
                    let lam = i as f64 / (size - 1) as f64;
                    &gens[0] * (1.0 - lam) + &gens[1] * lam
                })
                .collect()
        }
        _ => {
            let mut divisions = 1;
            while lattice_count(m, divisions + 1) <= size {
                divisions += 1;
            }
            let mut out = Vec::new();
            let mut counts = vec![0usize; m];
            compositions(divisions, 0, &mut counts, &mut |c| {
                let z = c.iter().zip(gens).fold(
                    DVector::zeros(gens[0].len()),
                    |acc: DVector<f64>, (&ci, g)| acc + g * (ci as f64 / divisions as f64),
                );
                out.push(z);
            });
            out
        }
    }
}

fn lattice_count(parts: usize, divisions: usize) -> usize {
    // C(divisions + parts - 1, parts - 1)
    let mut c = 1usize;
    for i in 0..parts - 1 {
        c = c * (divisions + 1 + i) / (i + 1);
    }
    c
}

fn compositions(remaining: usize, idx: usize, counts: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if idx == counts.len() - 1 {
        counts[idx] = remaining;
        f(counts);
        return;
    }
    for c in (0..=remaining).rev() {
        counts[idx] = c;
        compositions(remaining - c, idx + 1, counts, f);
    }
}

/// Closed half-space `{ z : ζ·z ≥ v }` with `v` an extended real.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    zeta: DVector<f64>,
    threshold: f64,
}

impl HalfSpace {
    pub fn new(zeta: DVector<f64>, threshold: f64) -> Self {
        Self { zeta, threshold }
    }

    /// `H⁺(ζ) = { z : ζ·z ≥ 0 }`.
    pub fn positive(zeta: DVector<f64>) -> Self {
        Self::new(zeta, 0.0)
    }

    pub fn zeta(&self) -> &DVector<f64> {
        &self.zeta
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn is_empty(&self) -> bool {
        self.threshold == f64::INFINITY
    }

    pub fn is_whole_space(&self) -> bool {
        self.threshold == f64::NEG_INFINITY
    }

    pub fn contains(&self, z: &DVector<f64>) -> bool {
        self.zeta.dot(z) >= self.threshold
    }

    /// Same point set described with normal `λζ`.
    pub fn scaled(&self, lambda: f64) -> Self {
        assert!(lambda > 0.0, "half-space scale must be positive");
        Self::new(&self.zeta * lambda, self.threshold * lambda)
    }

    /// Translate by `w`: `{ z + w : ζ·z ≥ v }`.
    pub fn translated(&self, w: &DVector<f64>) -> Self {
        Self::new(self.zeta.clone(), self.threshold + self.zeta.dot(w))
    }

    /// Compare point sets: normals positively parallel and thresholds equal
    /// after scaling to unit normals.
    pub fn same_point_set(&self, other: &HalfSpace, tol: f64) -> bool {
        match (self.is_empty(), other.is_empty()) {
            (true, true) => return true,
            (true, false) | (false, true) => return false,
            _ => {}
        }
        if self.is_whole_space() || other.is_whole_space() {
            return self.is_whole_space() && other.is_whole_space();
        }
        let (na, nb) = (self.zeta.norm(), other.zeta.norm());
        let ua = &self.zeta / na;
        let ub = &other.zeta / nb;
        (ua - ub).norm() <= tol && (self.threshold / na - other.threshold / nb).abs() <= tol
    }

    /// Express this half-space as an [`UpperSet`] when its normal is a positive
    /// multiple of base direction `k`; the other directions are unconstrained.
    pub fn to_upper_set(&self, cone: &Arc<ConeSpec>, k: usize) -> Result<UpperSet> {
        cone.check_index(k)?;
        let base = cone.zeta(k);
        let lambda = self.zeta.dot(base) / base.norm_squared();
        if lambda <= 0.0 || (&self.zeta - base * lambda).norm() > 1e-12 * self.zeta.norm() {
            return Err(Error::Usage(format!(
                "half-space normal is not a positive multiple of base direction {k}"
            )));
        }
        UpperSet::restricted(cone.clone(), k, self.threshold / lambda)
    }
}

/// Element of the lattice of closed upper sets, in threshold form.
#[derive(Debug, Clone)]
pub struct UpperSet {
    cone: Arc<ConeSpec>,
    thresholds: Vec<f64>,
}

impl PartialEq for UpperSet {
    fn eq(&self, other: &Self) -> bool {
        same_cone(&self.cone, &other.cone) && self.thresholds == other.thresholds
    }
}

impl UpperSet {
    pub fn new(cone: Arc<ConeSpec>, mut thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.len() != cone.len() {
            return Err(Error::Usage(format!(
                "expected {} thresholds, got {}",
                cone.len(),
                thresholds.len()
            )));
        }
        if thresholds.iter().any(|v| v.is_nan()) {
            return Err(Error::Domain("NaN threshold in upper set".into()));
        }
        if thresholds.contains(&f64::INFINITY) {
            thresholds.iter_mut().for_each(|v| *v = f64::INFINITY);
        }
        Ok(Self { cone, thresholds })
    }

    /// The cone `C` itself, neutral element of `⊕`.
    pub fn cone_set(cone: Arc<ConeSpec>) -> Self {
        let k = cone.len();
        Self {
            cone,
            thresholds: vec![0.0; k],
        }
    }

    pub fn empty(cone: Arc<ConeSpec>) -> Self {
        let k = cone.len();
        Self {
            cone,
            thresholds: vec![f64::INFINITY; k],
        }
    }

    pub fn whole_space(cone: Arc<ConeSpec>) -> Self {
        let k = cone.len();
        Self {
            cone,
            thresholds: vec![f64::NEG_INFINITY; k],
        }
    }

    /// `{z} + C` in threshold form.
    pub fn from_point(cone: Arc<ConeSpec>, z: &DVector<f64>) -> Result<Self> {
        if z.len() != cone.dim() {
            return Err(Error::Usage(format!(
                "point has dimension {}, cone has {}",
                z.len(),
                cone.dim()
            )));
        }
        let thresholds = cone.base_grid().iter().map(|zeta| zeta.dot(z)).collect();
        Self::new(cone, thresholds)
    }

    /// Half-space in base direction `k` with threshold `v`; every other
    /// direction is `−∞`.
    pub fn restricted(cone: Arc<ConeSpec>, k: usize, v: f64) -> Result<Self> {
        cone.check_index(k)?;
        let mut thresholds = vec![f64::NEG_INFINITY; cone.len()];
        thresholds[k] = v;
        Self::new(cone, thresholds)
    }

    pub fn cone(&self) -> &Arc<ConeSpec> {
        &self.cone
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn threshold(&self, k: usize) -> f64 {
        self.thresholds[k]
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.iter().all(|&v| v == f64::INFINITY)
    }

    pub fn is_whole_space(&self) -> bool {
        self.thresholds.iter().all(|&v| v == f64::NEG_INFINITY)
    }

    pub fn contains(&self, z: &DVector<f64>, tol: f64) -> bool {
        self.cone
            .base_grid()
            .iter()
            .zip(&self.thresholds)
            .all(|(zeta, &v)| zeta.dot(z) >= v - tol)
    }
}

fn same_cone(a: &Arc<ConeSpec>, b: &Arc<ConeSpec>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

fn check_shared(a: &UpperSet, b: &UpperSet) -> Result<()> {
    if same_cone(&a.cone, &b.cone) {
        Ok(())
    } else {
        Err(Error::Config("upper sets are built on different cones".into()))
    }
}

fn extended_add(a: f64, b: f64) -> f64 {
    if a == f64::INFINITY || b == f64::INFINITY {
        f64::INFINITY
    } else {
        a + b
    }
}

/// `A ⊕ B = cl(A + B)`: thresholds add, the empty set absorbs.
pub fn minkowski_sum_closed(a: &UpperSet, b: &UpperSet) -> Result<UpperSet> {
    check_shared(a, b)?;
    let thresholds = a
        .thresholds
        .iter()
        .zip(&b.thresholds)
        .map(|(&x, &y)| extended_add(x, y))
        .collect();
    UpperSet::new(a.cone.clone(), thresholds)
}

/// `A −_ζ B` for base direction `k`. Always a half-space, the empty set or
/// the whole space.
pub fn zeta_difference(a: &UpperSet, b: &UpperSet, k: usize) -> Result<HalfSpace> {
    check_shared(a, b)?;
    a.cone.check_index(k)?;
    let (va, vb) = (a.thresholds[k], b.thresholds[k]);
    let threshold = if vb == f64::INFINITY {
        f64::NEG_INFINITY
    } else if vb == f64::NEG_INFINITY {
        if va == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    } else if va == f64::INFINITY {
        f64::INFINITY
    } else {
        va - vb
    };
    Ok(HalfSpace::new(a.cone.zeta(k).clone(), threshold))
}

fn fold_thresholds(sets: &[UpperSet], pick: fn(f64, f64) -> f64) -> Result<UpperSet> {
    let (first, rest) = sets
        .split_first()
        .ok_or_else(|| Error::Usage("lattice operation on an empty collection".into()))?;
    let mut out = first.thresholds.clone();
    for s in rest {
        check_shared(first, s)?;
        for (o, &v) in out.iter_mut().zip(&s.thresholds) {
            *o = pick(*o, v);
        }
    }
    UpperSet::new(first.cone.clone(), out)
}

/// Lattice infimum `cl ⋃ A`: pointwise minimum of thresholds.
pub fn lattice_inf(sets: &[UpperSet]) -> Result<UpperSet> {
    fold_thresholds(sets, f64::min)
}

/// Lattice supremum `⋂ A`: pointwise maximum of thresholds. Exact for
/// families of grid-aligned half-spaces, an outer approximation otherwise.
pub fn lattice_sup(sets: &[UpperSet]) -> Result<UpperSet> {
    fold_thresholds(sets, f64::max)
}

/// `a ⊇ b` up to `tol`: every threshold of `a` is at most that of `b`.
pub fn includes(a: &UpperSet, b: &UpperSet, tol: f64) -> Result<bool> {
    check_shared(a, b)?;
    Ok(a
        .thresholds
        .iter()
        .zip(&b.thresholds)
        .all(|(&va, &vb)| va == f64::NEG_INFINITY || vb == f64::INFINITY || va <= vb + tol))
}

/// `S_(η,ζ_k)(x) = { z : ζ_k·z ≥ η·x }`.
pub fn linear_set(cone: &ConeSpec, eta: &DVector<f64>, k: usize, x: &DVector<f64>) -> Result<HalfSpace> {
    cone.check_index(k)?;
    if eta.len() != x.len() {
        return Err(Error::Usage(format!(
            "eta has length {}, x has length {}",
            eta.len(),
            x.len()
        )));
    }
    Ok(HalfSpace::new(cone.zeta(k).clone(), eta.dot(x)))
}
