//! Charging tour schedule (CTS) items.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum ItemState {
    Charge,
    Fly,
}

impl From<ItemState> for u8 {
    fn from(s: ItemState) -> u8 {
        match s {
            ItemState::Charge => 0,
            ItemState::Fly => 1,
        }
    }
}

impl TryFrom<u8> for ItemState {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            0 => Ok(ItemState::Charge),
            1 => Ok(ItemState::Fly),
            other => Err(format!("invalid item state {other}")),
        }
    }
}

/// One step of a schedule: fly straight to `x`, or transmit along `v`, for `t` seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CtsItem {
    pub state: ItemState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec3>,
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec3>,
}

impl CtsItem {
    pub fn fly(x: Vec3, t: f64) -> Self {
        CtsItem {
            state: ItemState::Fly,
            x: Some(x),
            t,
            v: None,
        }
    }

    pub fn charge(v: Vec3, t: f64) -> Self {
        CtsItem {
            state: ItemState::Charge,
            x: None,
            t,
            v: Some(v),
        }
    }

    pub fn is_fly(&self) -> bool {
        self.state == ItemState::Fly
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CtsSchedule {
    pub items: Vec<CtsItem>,
}

impl CtsSchedule {
    pub fn new(items: Vec<CtsItem>) -> Self {
        CtsSchedule { items }
    }

    /// End time of each item when executed back to back.
    pub fn cumulative_times(&self) -> Vec<f64> {
        self.items
            .iter()
            .scan(0.0, |acc, it| {
                *acc += it.t;
                Some(*acc)
            })
            .collect()
    }

    pub fn timespan(&self) -> f64 {
        self.items.iter().map(|i| i.t).sum()
    }

    pub fn charge_time(&self) -> f64 {
        self.items.iter().filter(|i| !i.is_fly()).map(|i| i.t).sum()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}
