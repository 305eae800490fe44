use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::capacity::{secrecy_capacity, CapacityParams, CapacityPoint, GainModel};
use super::efficiency::{practical_efficiency, EfficiencyParams};
use crate::devices::LinkBudget;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// Total efficiency, with `Q_AB = η`.
    Eta,
    /// Fiber length in km through the link budget.
    Distance,
    DeltaTheta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    /// Fixed values for the axes not swept. `base.gain` is used by the
    /// δθ axis; the distance axis uses `link`.
    pub base: CapacityParams,
    pub link: LinkBudget,
    pub efficiency: Option<EfficiencyParams>,
}

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub p1: f64,
    pub delta_theta: f64,
    pub eta: f64,
    pub q_ab: f64,
    pub q_aba: f64,
    pub e_ab: f64,
    pub e_aba: f64,
    pub i_ab: f64,
    pub i_be: f64,
    pub c_s: f64,
    pub e_s: Option<f64>,
}

impl From<&CapacityPoint> for SweepRow {
    fn from(p: &CapacityPoint) -> Self {
        Self {
            axis_value: f64::NAN,
            p1: p.params.p1,
            delta_theta: p.params.delta_theta,
            eta: p.q_ab,
            q_ab: p.q_ab,
            q_aba: p.q_aba,
            e_ab: p.errors.total_ab,
            e_aba: p.errors.total_aba,
            i_ab: p.i_ab,
            i_be: p.i_be,
            c_s: p.c_s,
            e_s: p.e_s,
        }
    }
}

fn monotone(grid: &[f64]) -> bool {
    grid.windows(2).all(|w| w[1] > w[0]) || grid.windows(2).all(|w| w[1] < w[0])
}

/// Evaluates every grid point in parallel. Rows come back in grid order.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<(SweepRow, CapacityPoint)>> {
    if spec.grid.is_empty() || !monotone(&spec.grid) {
        return Err(invalid("sweep grid must be non-empty and strictly monotone"));
    }
    spec.grid
        .par_iter()
        .map(|&x| {
            let mut params = spec.base;
            match spec.axis {
                SweepAxis::Eta => params.gain = GainModel::Total { eta: x },
                SweepAxis::Distance => params.gain = GainModel::Link(LinkBudget { distance_km: x, ..spec.link }),
                SweepAxis::DeltaTheta => params.delta_theta = x,
            }
            let mut point = secrecy_capacity(&params)?;
            point.e_s = spec.efficiency.map(|e| practical_efficiency(point.c_s, &e));
            let row = SweepRow { axis_value: x, ..SweepRow::from(&point) };
            Ok((row, point))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(axis: SweepAxis, grid: Vec<f64>) -> SweepSpec {
        SweepSpec {
            axis,
            grid,
            base: CapacityParams::with_eta(0.1, 0.0, 1.0),
            link: LinkBudget::default(),
            efficiency: Some(EfficiencyParams::default()),
        }
    }

    #[test]
    fn rows_follow_grid() {
        let rows = sweep(&spec(SweepAxis::Eta, vec![0.2, 0.5, 0.9])).unwrap();
        let xs: Vec<f64> = rows.iter().map(|(r, _)| r.axis_value).collect();
        assert_eq!(xs, vec![0.2, 0.5, 0.9]);
        assert!(rows[0].0.c_s < rows[2].0.c_s);
    }

    #[test]
    fn distance_reduces_gain() {
        let rows = sweep(&spec(SweepAxis::Distance, vec![0.0, 10.0, 50.0])).unwrap();
        assert!(rows[0].0.q_ab > rows[1].0.q_ab && rows[1].0.q_ab > rows[2].0.q_ab);
    }

    #[test]
    fn rejects_unsorted_grid() {
        assert!(sweep(&spec(SweepAxis::DeltaTheta, vec![0.1, 0.05, 0.2])).is_err());
        assert!(sweep(&spec(SweepAxis::DeltaTheta, vec![])).is_err());
    }
}
