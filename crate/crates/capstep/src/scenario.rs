//! Scenario files: what to command, when to push, how noisy the sensors are.

use std::path::Path;

use capstep_core::control::GaitTarget;
use capstep_core::ComState;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::Push;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Open,
    #[default]
    Closed,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Open => "open",
            Mode::Closed => "closed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Noise {
    /// Standard deviation of CoM position noise, m.
    #[serde(default)]
    pub position: f64,
    /// Standard deviation of CoM velocity noise, m/s.
    #[serde(default)]
    pub velocity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandEntry {
    pub time: f64,
    #[serde(default)]
    pub vx: f64,
    #[serde(default)]
    pub vy: f64,
    #[serde(default)]
    pub vpsi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PushEntry {
    pub time: f64,
    #[serde(default)]
    pub dvx: f64,
    #[serde(default)]
    pub dvy: f64,
    #[serde(default)]
    pub dx: f64,
    #[serde(default)]
    pub dy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub cx: f64,
    pub vx: f64,
    pub cy: f64,
    pub vy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    /// s
    pub duration: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    /// Actuation latency of the plant and the controller's prediction
    /// horizon, s. Defaults to `filter.latency` of the config.
    #[serde(default)]
    pub latency: Option<f64>,
    /// Extra sensing delay in loop periods.
    #[serde(default)]
    pub sensor_delay: usize,
    /// Support sign at t = 0.
    #[serde(default = "default_support")]
    pub initial_support: i8,
    /// CoM relative to the support foot at t = 0. Defaults to the start of
    /// the nominal step for the first command.
    #[serde(default)]
    pub initial: Option<InitialState>,
    #[serde(default)]
    pub noise: Noise,
    #[serde(default, rename = "command")]
    pub commands: Vec<CommandEntry>,
    #[serde(default, rename = "push")]
    pub pushes: Vec<PushEntry>,
}

fn default_support() -> i8 {
    1
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            id: "default".into(),
            duration: 10.0,
            seed: 0,
            mode: Mode::Closed,
            latency: None,
            sensor_delay: 0,
            initial_support: 1,
            initial: None,
            noise: Noise::default(),
            commands: Vec::new(),
            pushes: Vec::new(),
        }
    }
}

fn sorted_by_time(times: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = times.collect();
    v.windows(2).all(|w| w[0] <= w[1])
}

impl Scenario {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err("duration must be positive".into());
        }
        if self.initial_support != 1 && self.initial_support != -1 {
            return Err("initial_support must be 1 or -1".into());
        }
        if let Some(l) = self.latency {
            if !(l >= 0.0 && l.is_finite()) {
                return Err("latency must be non-negative".into());
            }
        }
        if !(self.noise.position >= 0.0 && self.noise.velocity >= 0.0)
            || !self.noise.position.is_finite()
            || !self.noise.velocity.is_finite()
        {
            return Err("noise levels must be non-negative".into());
        }
        if !sorted_by_time(self.commands.iter().map(|c| c.time)) {
            return Err("commands must be sorted by time".into());
        }
        if !sorted_by_time(self.pushes.iter().map(|p| p.time)) {
            return Err("pushes must be sorted by time".into());
        }
        for c in &self.commands {
            if !(c.time >= 0.0) || [c.vx, c.vy, c.vpsi].iter().any(|v| !(v.abs() <= 1.0)) {
                return Err(format!("command at t={} out of range", c.time));
            }
        }
        for p in &self.pushes {
            let all = [p.time, p.dvx, p.dvy, p.dx, p.dy];
            if !(p.time >= 0.0) || all.iter().any(|v| !v.is_finite()) {
                return Err(format!("push at t={} is invalid", p.time));
            }
        }
        if let Some(i) = self.initial {
            if ![i.cx, i.vx, i.cy, i.vy].iter().all(|v| v.is_finite()) {
                return Err("initial state must be finite".into());
            }
        }
        Ok(())
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |message: String| Error::Scenario { path: path.to_path_buf(), message };
        let sc: Scenario = toml::from_str(text).map_err(|e| err(e.to_string()))?;
        sc.validate().map_err(err)?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Scenario { path: path.to_path_buf(), message: e.to_string() })?;
        Self::parse(&text, path)
    }

    /// Velocity command in force at `t`.
    pub fn target_at(&self, t: f64) -> GaitTarget {
        self.commands
            .iter()
            .take_while(|c| c.time <= t)
            .last()
            .map_or(GaitTarget::STOP, |c| GaitTarget::new(c.vx, c.vy, c.vpsi))
    }

    pub fn plant_pushes(&self) -> Vec<Push> {
        self.pushes.iter().map(|p| Push { time: p.time, dvx: p.dvx, dvy: p.dvy, dx: p.dx, dy: p.dy }).collect()
    }

    pub fn initial_state(&self) -> Option<ComState> {
        self.initial.map(|i| ComState::new(i.cx, i.vx, i.cy, i.vy))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"
id = "t"
duration = 2.0
seed = 3
mode = "open"

[noise]
position = 0.001

[[command]]
time = 0.0
vx = 0.5

[[command]]
time = 1.0
vy = -0.2

[[push]]
time = 0.5
dvy = 0.1
"#;

    #[test]
    fn parses_and_schedules() {
        let sc = Scenario::parse(TEXT, Path::new("t")).unwrap();
        assert_eq!(sc.mode, Mode::Open);
        assert_eq!(sc.target_at(0.5).vx, 0.5);
        assert_eq!(sc.target_at(1.5).vy, -0.2);
        assert_eq!(sc.target_at(1.5).vx, 0.0);
        assert_eq!(sc.plant_pushes()[0].dvy, 0.1);
        assert_eq!(sc.latency, None);
    }

    #[test]
    fn rejects_unsorted() {
        let text = TEXT.replace("time = 1.0", "time = -1.0");
        assert_eq!(Scenario::parse(&text, Path::new("t")).unwrap_err().exit_code(), 4);
        let text = TEXT.replace("vy = -0.2", "vy = -2");
        assert!(Scenario::parse(&text, Path::new("t")).is_err());
        let text = TEXT.replace("seed = 3", "sed = 3");
        assert!(Scenario::parse(&text, Path::new("t")).is_err());
    }
}
