//! Aggregate gait configuration.

use crate::control::{ControlConfigError, ControllerConfig, FilterConfig, RefConfig, StepTimeConfig};
use crate::cpg::{CpgConfig, CpgConfigError};
use crate::estimation::{EstimationError, KinematicModel};
use crate::lipm::{LipmError, PendulumParams};

/// Support-exchange detection.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct EstimationConfig {
    /// Sole height difference needed to switch support, m.
    pub hysteresis: f64,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self { hysteresis: 0.005 }
    }
}

/// Every physical and tuning constant of the gait. The loop period lives in
/// `cpg.rho` and is shared with the controller.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct GaitConfig {
    pub pendulum: PendulumParams,
    pub reference: RefConfig,
    pub filter: FilterConfig,
    pub step_time: StepTimeConfig,
    pub cpg: CpgConfig,
    pub kinematics: KinematicModel,
    pub estimation: EstimationConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConfigError {
    Pendulum(LipmError),
    Control(ControlConfigError),
    Cpg(CpgConfigError),
    Kinematics(EstimationError),
    Invalid(&'static str),
}

impl core::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ConfigError::Pendulum(e) => write!(f, "pendulum: {e}"),
            ConfigError::Control(e) => write!(f, "reference: {e}"),
            ConfigError::Cpg(e) => write!(f, "cpg: {e}"),
            ConfigError::Kinematics(e) => write!(f, "kinematics: {e}"),
            ConfigError::Invalid(what) => f.write_str(what),
        }
    }
}

impl GaitConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.pendulum.validate().map_err(ConfigError::Pendulum)?;
        self.reference.validate().map_err(ConfigError::Control)?;
        self.cpg.validate().map_err(ConfigError::Cpg)?;
        self.kinematics.validate().map_err(ConfigError::Kinematics)?;
        if !(self.filter.epsilon > 0.0) {
            return Err(ConfigError::Invalid("filter.epsilon must be positive"));
        }
        if !(self.filter.k >= 0.0) {
            return Err(ConfigError::Invalid("filter.k must be non-negative"));
        }
        if !(self.filter.latency >= 0.0) {
            return Err(ConfigError::Invalid("filter.latency must be non-negative"));
        }
        if !(self.step_time.tipover_hold > 0.0) {
            return Err(ConfigError::Invalid("step_time.tipover_hold must be positive"));
        }
        if !(self.estimation.hysteresis >= 0.0) {
            return Err(ConfigError::Invalid("estimation.hysteresis must be non-negative"));
        }
        Ok(())
    }

    pub fn controller(&self) -> ControllerConfig {
        ControllerConfig {
            pendulum: self.pendulum,
            reference: self.reference,
            filter: self.filter,
            step_time: self.step_time,
            rho: self.cpg.rho,
        }
    }
}
