use std::io::Write;

use nalgebra::DVector;
use serde::Serialize;

use super::{value_records, DirectionRecord};
use crate::error::{Error, Result};
use crate::lattice::UpperSet;
use crate::parallel;
use crate::problem::Scenario;
use crate::report::{csv_err, fmt};

#[derive(Debug, Clone, Serialize)]
pub struct SurfacePoint {
    pub t: f64,
    pub x: Vec<f64>,
    #[serde(skip)]
    pub value: UpperSet,
    pub directions: Vec<DirectionRecord>,
}

/// Value function sampled on a `(t, x)` grid, ordered by `(t, x)` index.
#[derive(Debug, Clone, Serialize)]
pub struct ValueSurface {
    pub points: Vec<SurfacePoint>,
}

impl ValueSurface {
    /// Evaluates `U(t, x)` on the product grid `ts × xs` with `jobs` workers
    /// (0 = all cores). The output order never depends on `jobs`.
    pub fn compute(scn: &Scenario, ts: &[f64], xs: &[DVector<f64>], jobs: usize) -> Result<Self> {
        let cells: Vec<(f64, &DVector<f64>)> = ts.iter().flat_map(|&t| xs.iter().map(move |x| (t, x))).collect();
        let points = parallel::ordered_map(jobs, &cells, |&(t, x)| {
            let directions = value_records(scn, t, x)?;
            let value = UpperSet::new(scn.cone().clone(), directions.iter().map(|r| r.threshold).collect())?;
            if value.thresholds().iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("non-finite value threshold at t = {t}, x = {:?}", x.as_slice())));
            }
            Ok(SurfacePoint {
                t,
                x: x.as_slice().to_vec(),
                value,
                directions,
            })
        })?;
        Ok(Self { points })
    }

    pub fn rows(&self) -> usize {
        self.points.iter().map(|p| p.directions.len()).sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let Some(first) = self.points.first() else {
            w.flush()?;
            return Ok(());
        };
        let n = first.x.len();
        let d = first.directions.first().map_or(0, |r| r.zeta.len());
        let mut header = vec!["t".to_string()];
        header.extend((0..n).map(|i| format!("x{i}")));
        header.push("k".into());
        header.extend((0..d).map(|i| format!("zeta{i}")));
        header.push("threshold".into());
        header.extend((0..n).map(|i| format!("p{i}")));
        header.push("iterations".into());
        header.push("residual".into());
        w.write_record(&header).map_err(csv_err)?;
        for pt in &self.points {
            for r in &pt.directions {
                let mut row = vec![fmt(pt.t)];
                row.extend(pt.x.iter().map(|v| fmt(*v)));
                row.push(r.k.to_string());
                row.extend(r.zeta.iter().map(|v| fmt(*v)));
                row.push(fmt(r.threshold));
                row.extend(r.p_star.iter().map(|v| fmt(*v)));
                row.push(r.iterations.to_string());
                row.push(fmt(r.residual));
                w.write_record(&row).map_err(csv_err)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self).map_err(|e| Error::Io(e.into()))
    }
}
