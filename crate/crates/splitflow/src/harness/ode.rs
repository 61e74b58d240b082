use serde::{Deserialize, Serialize};

use super::{csv_bytes, fmt_num, HarnessError};
use crate::continuous::{first_order_velocity, integrate_first_order, integrate_hessian_damped};
use crate::objective::ObjectiveSpec;
use crate::vector::{max_abs, sub};

/// Comparison of the first-order system against the Hessian-damped
/// second-order equation it is equivalent to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeCompareConfig {
    pub objective: ObjectiveSpec,
    pub alpha: f64,
    pub beta: f64,
    pub t0: f64,
    pub t1: f64,
    /// Coarsest step; the comparison also runs at `dt/2` and `dt/4`.
    pub dt: f64,
    pub x0: Vec<f64>,
    pub xdot0: Vec<f64>,
}

impl Default for OdeCompareConfig {
    fn default() -> Self {
        Self {
            objective: ObjectiveSpec::F1,
            alpha: 3.0,
            beta: 0.1,
            t0: 1.0,
            t1: 10.0,
            dt: 1e-2,
            x0: vec![1.0, -2.0],
            xdot0: vec![0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeLevel {
    pub dt: f64,
    /// Largest coordinate gap between the two position trajectories.
    pub sup_gap: f64,
    /// `log₂` of the gap ratio against the previous (coarser) level.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeCompareReport {
    pub levels: Vec<OdeLevel>,
}

impl OdeCompareReport {
    /// Smallest observed order across refinements.
    pub fn min_order(&self) -> Option<f64> {
        self.levels.iter().filter_map(|l| l.order).reduce(f64::min)
    }
}

fn sup_gap(cfg: &OdeCompareConfig, dt: f64) -> Result<f64, HarnessError> {
    let obj = cfg.objective.build()?;
    let v0 = first_order_velocity(&obj, cfg.t0, &cfg.x0, &cfg.xdot0, cfg.alpha, cfg.beta);
    let a = integrate_first_order(&obj, &cfg.x0, &v0, cfg.alpha, cfg.beta, cfg.t0, cfg.t1, dt)?;
    let b = integrate_hessian_damped(&obj, &cfg.x0, &cfg.xdot0, cfg.alpha, cfg.beta, cfg.t0, cfg.t1, dt)?;
    Ok(a.x.iter().zip(&b.x).map(|(p, q)| max_abs(&sub(p, q))).fold(0.0, f64::max))
}

/// Sup-gaps at `dt`, `dt/2`, `dt/4` and the observed orders, plus a CSV.
pub fn cmd_ode_compare(cfg: &OdeCompareConfig) -> Result<(OdeCompareReport, Vec<u8>), HarnessError> {
    let mut levels: Vec<OdeLevel> = Vec::new();
    for k in 0..3 {
        let dt = cfg.dt / f64::from(1u32 << k);
        let gap = sup_gap(cfg, dt)?;
        let order = levels.last().map(|prev| (prev.sup_gap / gap).log2());
        levels.push(OdeLevel { dt, sup_gap: gap, order });
    }
    let rows: Vec<Vec<String>> = levels
        .iter()
        .map(|l| vec![fmt_num(l.dt), fmt_num(l.sup_gap), l.order.map_or(String::new(), fmt_num)])
        .collect();
    let bytes = csv_bytes(&["dt", "sup_gap", "observed_order"], &rows)?;
    Ok((OdeCompareReport { levels }, bytes))
}
