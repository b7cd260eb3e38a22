//! Comparison methods: alternative position generators, direction selectors and tour searches.

mod aco;
mod directions;
mod positions;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use aco::{aco_tour, AcoParams};
pub use directions::{generate_directions, polyhedron_directions, DirectionMethod, DirectionParams, PolyhedronKind};
pub use positions::{
    cluster_positions, enclosing_sphere, generate_positions, grid_positions, group_positions, kmeans,
    PositionMethod, PositionParams, Sphere,
};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::tour::{greedy_tour, improve_tour, Tour, TourOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TourMethod {
    LkhStyle,
    Greedy,
    Aco,
}

impl TourMethod {
    pub const ALL: [TourMethod; 3] = [TourMethod::LkhStyle, TourMethod::Greedy, TourMethod::Aco];

    pub fn as_str(self) -> &'static str {
        match self {
            TourMethod::LkhStyle => "lkh_style",
            TourMethod::Greedy => "greedy",
            TourMethod::Aco => "aco",
        }
    }
}

impl fmt::Display for TourMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TourMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TourMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown tour method {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TourParams {
    pub local_search: TourOptions,
    pub aco: AcoParams,
}

pub fn tour_baseline(positions: &[Vec3], l0: Vec3, method: TourMethod, params: &TourParams) -> Tour {
    match method {
        TourMethod::LkhStyle => improve_tour(positions, l0, &params.local_search),
        TourMethod::Greedy => greedy_tour(positions, l0),
        TourMethod::Aco => aco_tour(positions, l0, &params.aco),
    }
}

/// One stage choice per pipeline step, written `pos:dir:tour` on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MethodChoice {
    pub position: PositionMethod,
    pub direction: DirectionMethod,
    pub tour: TourMethod,
}

impl MethodChoice {
    pub const FELKH3D: MethodChoice = MethodChoice {
        position: PositionMethod::Node,
        direction: DirectionMethod::FuncEqv,
        tour: TourMethod::LkhStyle,
    };
    pub const GRID_ACC_GREEDY: MethodChoice = MethodChoice {
        position: PositionMethod::Grid,
        direction: DirectionMethod::Acc,
        tour: TourMethod::Greedy,
    };
    pub const GROUP_POLY_ANT: MethodChoice = MethodChoice {
        position: PositionMethod::Group,
        direction: DirectionMethod::Polyhedron,
        tour: TourMethod::Aco,
    };

    pub fn new(position: PositionMethod, direction: DirectionMethod, tour: TourMethod) -> Self {
        MethodChoice {
            position,
            direction,
            tour,
        }
    }

    /// Display name used in result tables.
    pub fn scheme_name(&self) -> String {
        match *self {
            MethodChoice::FELKH3D => "FELKH-3D".into(),
            MethodChoice::GRID_ACC_GREEDY => "Sch-GridAccGreedy".into(),
            MethodChoice::GROUP_POLY_ANT => "Sch-GroupPolyAnt".into(),
            _ => self.to_string(),
        }
    }
}

impl Default for MethodChoice {
    fn default() -> Self {
        MethodChoice::FELKH3D
    }
}

impl fmt::Display for MethodChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.position, self.direction, self.tour)
    }
}

impl FromStr for MethodChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "FELKH-3D" | "felkh3d" => return Ok(MethodChoice::FELKH3D),
            "Sch-GridAccGreedy" => return Ok(MethodChoice::GRID_ACC_GREEDY),
            "Sch-GroupPolyAnt" => return Ok(MethodChoice::GROUP_POLY_ANT),
            _ => {}
        }
        let parts: Vec<&str> = s.split(':').collect();
        let [p, d, t] = parts.as_slice() else {
            return Err(Error::InvalidParameter(format!("scheme must look like pos:dir:tour, got {s:?}")));
        };
        Ok(MethodChoice::new(p.parse()?, d.parse()?, t.parse()?))
    }
}
