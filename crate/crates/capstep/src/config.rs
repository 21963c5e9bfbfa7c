//! Configuration file: every gait constant plus plant-only settings.

use std::path::Path;

use capstep_core::config::EstimationConfig;
use capstep_core::control::{reference_trajectory, FilterConfig, GaitTarget, RefConfig, StepTimeConfig};
use capstep_core::cpg::CpgConfig;
use capstep_core::estimation::KinematicModel;
use capstep_core::{GaitConfig, PendulumParams};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fall detection radii around the support foot, m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub fall_radius_x: f64,
    pub fall_radius_y: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { fall_radius_x: 0.3, fall_radius_y: 0.2 }
    }
}

/// On-disk layout: one table per core config section, plus `[sim]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub pendulum: PendulumParams,
    pub reference: RefConfig,
    pub filter: FilterConfig,
    pub step_time: StepTimeConfig,
    pub cpg: CpgConfig,
    pub kinematics: KinematicModel,
    pub estimation: EstimationConfig,
    pub sim: SimConfig,
}

impl FileConfig {
    pub fn gait(&self) -> GaitConfig {
        GaitConfig {
            pendulum: self.pendulum,
            reference: self.reference,
            filter: self.filter,
            step_time: self.step_time,
            cpg: self.cpg,
            kinematics: self.kinematics,
            estimation: self.estimation,
        }
    }

    pub fn from_gait(g: GaitConfig, sim: SimConfig) -> Self {
        Self {
            pendulum: g.pendulum,
            reference: g.reference,
            filter: g.filter,
            step_time: g.step_time,
            cpg: g.cpg,
            kinematics: g.kinematics,
            estimation: g.estimation,
            sim,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        self.gait().validate().map_err(|e| e.to_string())?;
        if !(self.sim.fall_radius_x > 0.0 && self.sim.fall_radius_y > 0.0) {
            return Err("sim fall radii must be positive".into());
        }
        Ok(())
    }

    /// Nominal apex-to-exchange time at rest, s.
    pub fn tau(&self) -> f64 {
        reference_trajectory(&GaitTarget::STOP, 1.0, &self.reference, &self.pendulum).tau
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |message: String| Error::Config { path: path.to_path_buf(), message };
        let cfg: FileConfig = toml::from_str(text).map_err(|e| err(e.to_string()))?;
        cfg.validate().map_err(err)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config { path: path.to_path_buf(), message: e.to_string() })?;
        Self::parse(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
