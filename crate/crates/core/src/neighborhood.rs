//! Neighborhood geometry: closed balls on the square lattice.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CamError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// von Neumann ball: `|dy| + |dx| <= r`.
    Manhattan,
    /// Chebyshev ball: `max(|dy|, |dx|) <= r`.
    Moore,
}

impl Topology {
    /// The topology's own distance of an offset from the origin.
    #[inline]
    pub fn distance(self, dy: isize, dx: isize) -> usize {
        match self {
            Topology::Manhattan => dy.unsigned_abs() + dx.unsigned_abs(),
            Topology::Moore => dy.unsigned_abs().max(dx.unsigned_abs()),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Manhattan => "manhattan",
            Topology::Moore => "moore",
        })
    }
}

impl FromStr for Topology {
    type Err = CamError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "manhattan" | "von-neumann" | "vonneumann" => Ok(Topology::Manhattan),
            "moore" => Ok(Topology::Moore),
            other => Err(CamError::InvalidConfig(format!(
                "unknown topology {other:?}"
            ))),
        }
    }
}

/// Topology plus radius. The radius is validated at construction, so every
/// `NeighborhoodSpec` in circulation has `r >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct NeighborhoodSpec {
    topology: Topology,
    radius: usize,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    topology: Topology,
    radius: usize,
}

impl TryFrom<RawSpec> for NeighborhoodSpec {
    type Error = CamError;

    fn try_from(raw: RawSpec) -> Result<Self> {
        NeighborhoodSpec::new(raw.topology, raw.radius)
    }
}

impl From<NeighborhoodSpec> for RawSpec {
    fn from(s: NeighborhoodSpec) -> Self {
        RawSpec {
            topology: s.topology,
            radius: s.radius,
        }
    }
}

impl NeighborhoodSpec {
    pub fn new(topology: Topology, radius: usize) -> Result<Self> {
        if radius == 0 {
            return Err(CamError::ZeroRadius);
        }
        Ok(Self { topology, radius })
    }

    pub fn manhattan(radius: usize) -> Result<Self> {
        Self::new(Topology::Manhattan, radius)
    }

    pub fn moore(radius: usize) -> Result<Self> {
        Self::new(Topology::Moore, radius)
    }

    #[inline]
    pub fn topology(&self) -> Topology {
        self.topology
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Closed-form neighborhood size K.
    pub fn size(&self) -> usize {
        let r = self.radius;
        match self.topology {
            Topology::Manhattan => 2 * r * r + 2 * r + 1,
            Topology::Moore => (2 * r + 1) * (2 * r + 1),
        }
    }

    /// All `(dy, dx)` inside the ball, row-major: `dy` ascending, then `dx`.
    ///
    /// This order fixes the bijection between rule weights and offsets.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let r = self.radius as isize;
        let mut out = Vec::with_capacity(self.size());
        for dy in -r..=r {
            for dx in -r..=r {
                if self.topology.distance(dy, dx) <= self.radius {
                    out.push((dy, dx));
                }
            }
        }
        out
    }
}

impl fmt::Display for NeighborhoodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-r{}", self.topology, self.radius)
    }
}

pub fn neighborhood_size(spec: &NeighborhoodSpec) -> usize {
    spec.size()
}

pub fn neighborhood_offsets(spec: &NeighborhoodSpec) -> Vec<(isize, isize)> {
    spec.offsets()
}
