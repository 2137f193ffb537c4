use serde::{Deserialize, Serialize};

use super::Domain;
use crate::error::Result;

fn dirichlet_default() -> bool {
    true
}

/// Serializable description of a [`Domain`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Line1d {
        #[serde(rename = "L")]
        half_width: f64,
        n: usize,
        #[serde(default = "dirichlet_default")]
        dirichlet: bool,
    },
    Plane2d {
        #[serde(rename = "L")]
        half_width: f64,
        n: usize,
        #[serde(default = "dirichlet_default")]
        dirichlet: bool,
    },
    Cylinder {
        #[serde(rename = "L")]
        half_width: f64,
        n: usize,
        n_theta: usize,
        #[serde(default = "dirichlet_default")]
        dirichlet: bool,
    },
}

impl DomainConfig {
    pub fn line1d(half_width: f64, n: usize) -> Self {
        DomainConfig::Line1d { half_width, n, dirichlet: true }
    }

    pub fn plane2d(half_width: f64, n: usize) -> Self {
        DomainConfig::Plane2d { half_width, n, dirichlet: true }
    }

    pub fn cylinder(half_width: f64, n: usize, n_theta: usize) -> Self {
        DomainConfig::Cylinder { half_width, n, n_theta, dirichlet: true }
    }

    pub fn build(&self) -> Result<Domain> {
        Ok(match *self {
            DomainConfig::Line1d { half_width, n, dirichlet } => Domain::line1d(half_width, n)?.with_dirichlet(dirichlet),
            DomainConfig::Plane2d { half_width, n, dirichlet } => {
                Domain::plane2d(half_width, n)?.with_dirichlet(dirichlet)
            }
            DomainConfig::Cylinder { half_width, n, n_theta, dirichlet } => {
                Domain::cylinder(half_width, n, n_theta)?.with_dirichlet(dirichlet)
            }
        })
    }
}
