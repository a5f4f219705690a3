//! Congestion controllers: PHCC plus the Reno, Vegas and HSTCP baselines.

pub mod hstcp;
pub mod phcc;
pub mod reno;
pub mod vegas;

use crate::bayes::LossProbCombine;
use crate::error::{Result, SimError};
use crate::tcp::{CongestionController, CwndBounds};

pub use phcc::{DMaxCombiner, Phase, Phcc, PhccConfig};

/// Controller selection by scenario name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerKind {
    Phcc,
    Reno,
    Vegas,
    Hstcp,
}

impl ControllerKind {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "phcc" => Ok(ControllerKind::Phcc),
            "reno" => Ok(ControllerKind::Reno),
            "vegas" => Ok(ControllerKind::Vegas),
            "hstcp" => Ok(ControllerKind::Hstcp),
            other => Err(SimError::InvalidConfig(format!(
                "unknown controller '{other}' (known: phcc, reno, vegas, hstcp)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ControllerKind::Phcc => "phcc",
            ControllerKind::Reno => "reno",
            ControllerKind::Vegas => "vegas",
            ControllerKind::Hstcp => "hstcp",
        }
    }
}

/// Tunables shared by the controller factory. PHCC-specific constants ride
/// in [`PhccConfig`]; the baselines only need the bounds and the Vegas
/// dead-band.
#[derive(Debug, Clone)]
pub struct ControllerParams {
    pub bounds: CwndBounds,
    pub phcc: PhccConfig,
    pub vegas_alpha_pkts: f64,
    pub vegas_beta_pkts: f64,
}

impl ControllerParams {
    pub fn new(cwnd_max_pkts: f64) -> Self {
        ControllerParams {
            bounds: CwndBounds::new(cwnd_max_pkts),
            phcc: PhccConfig::default(),
            vegas_alpha_pkts: 1.0,
            vegas_beta_pkts: 3.0,
        }
    }
}

pub fn build_controller(kind: ControllerKind, params: &ControllerParams) -> Box<dyn CongestionController> {
    match kind {
        ControllerKind::Phcc => Box::new(Phcc::new(params.phcc.clone(), params.bounds)),
        ControllerKind::Reno => Box::new(reno::Reno::new(params.bounds)),
        ControllerKind::Vegas => Box::new(vegas::Vegas::new(
            params.vegas_alpha_pkts,
            params.vegas_beta_pkts,
            params.bounds,
        )),
        ControllerKind::Hstcp => Box::new(hstcp::Hstcp::new(params.bounds)),
    }
}

/// Re-exported so scenario plumbing can name the combine rule.
pub type LossCombine = LossProbCombine;
