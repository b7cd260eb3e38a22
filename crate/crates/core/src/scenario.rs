//! Problem instances and their JSON file format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::energy::{UavParams, WptParams};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub pos: Vec3,
    /// Initial battery energy (J).
    #[serde(rename = "e_B")]
    pub e_b: f64,
    /// Battery capacity (J).
    #[serde(rename = "e_U")]
    pub e_u: f64,
    /// Energy that must be delivered (J).
    #[serde(rename = "e_D")]
    pub e_d: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub nodes: Vec<Node>,
    pub uav: UavParams,
    pub wpt: WptParams,
    /// Base station; every tour starts and ends here.
    pub base: Vec3,
}

impl Scenario {
    pub fn positions(&self) -> Vec<Vec3> {
        self.nodes.iter().map(|n| n.pos).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.wpt.cone()?;
        self.uav.validate()?;
        for (i, n) in self.nodes.iter().enumerate() {
            let ok = n.pos.is_finite()
                && n.e_b >= 0.0
                && n.e_u > 0.0
                && n.e_d >= 0.0
                && n.e_b <= n.e_u;
            if !ok {
                return Err(Error::InvalidParameter(format!("node {i} is malformed: {n:?}")));
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(s)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
