//! Offline state estimation over a recorded sensor log.
//!
//! Input columns: `timestamp,theta_roll,theta_pitch` followed by the six leg
//! joints of the right leg then the left leg, each in the order
//! `hip_yaw,hip_roll,hip_pitch,knee,ankle_pitch,ankle_roll` and prefixed
//! `r_` or `l_`. Output columns: `timestamp,c_x,v_x,c_y,v_y,lambda,exchanged`.

use std::io::{Read, Write};
use std::path::Path;

use capstep_core::cpg::{JointAngles, LegJoints};
use capstep_core::estimation::{SensorFrame, StateEstimator};
use serde::{Deserialize, Serialize};

use crate::config::FileConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorRecord {
    pub timestamp: f64,
    pub theta_roll: f64,
    pub theta_pitch: f64,
    pub r_hip_yaw: f64,
    pub r_hip_roll: f64,
    pub r_hip_pitch: f64,
    pub r_knee: f64,
    pub r_ankle_pitch: f64,
    pub r_ankle_roll: f64,
    pub l_hip_yaw: f64,
    pub l_hip_roll: f64,
    pub l_hip_pitch: f64,
    pub l_knee: f64,
    pub l_ankle_pitch: f64,
    pub l_ankle_roll: f64,
}

impl SensorRecord {
    pub fn from_frame(f: &SensorFrame) -> Self {
        let r = f.joints.right_leg.to_array();
        let l = f.joints.left_leg.to_array();
        Self {
            timestamp: f.timestamp,
            theta_roll: f.theta_roll,
            theta_pitch: f.theta_pitch,
            r_hip_yaw: r[0],
            r_hip_roll: r[1],
            r_hip_pitch: r[2],
            r_knee: r[3],
            r_ankle_pitch: r[4],
            r_ankle_roll: r[5],
            l_hip_yaw: l[0],
            l_hip_roll: l[1],
            l_hip_pitch: l[2],
            l_knee: l[3],
            l_ankle_pitch: l[4],
            l_ankle_roll: l[5],
        }
    }

    pub fn frame(&self) -> SensorFrame {
        let joints = JointAngles {
            right_leg: LegJoints::from_array([
                self.r_hip_yaw,
                self.r_hip_roll,
                self.r_hip_pitch,
                self.r_knee,
                self.r_ankle_pitch,
                self.r_ankle_roll,
            ]),
            left_leg: LegJoints::from_array([
                self.l_hip_yaw,
                self.l_hip_roll,
                self.l_hip_pitch,
                self.l_knee,
                self.l_ankle_pitch,
                self.l_ankle_roll,
            ]),
            ..Default::default()
        };
        SensorFrame { joints, theta_roll: self.theta_roll, theta_pitch: self.theta_pitch, timestamp: self.timestamp }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComRecord {
    pub timestamp: f64,
    pub c_x: f64,
    pub v_x: f64,
    pub c_y: f64,
    pub v_y: f64,
    pub lambda: f64,
    pub exchanged: bool,
}

/// Estimates the CoM for every row of `input`.
pub fn estimate<R: Read>(cfg: &FileConfig, input: R, initial_support: f64, path: &Path) -> Result<Vec<ComRecord>> {
    let mut est = StateEstimator::new(cfg.kinematics, cfg.estimation.hysteresis, initial_support);
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<SensorRecord>().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::SensorLog { path: path.to_path_buf(), row, message: e.to_string() })?;
        let o = est.tick(&rec.frame()).map_err(|e| Error::SensorLog {
            path: path.to_path_buf(),
            row,
            message: e.to_string(),
        })?;
        out.push(ComRecord {
            timestamp: rec.timestamp,
            c_x: o.com.cx,
            v_x: o.com.vx,
            c_y: o.com.cy,
            v_y: o.com.vy,
            lambda: o.support.lambda,
            exchanged: o.exchanged,
        });
    }
    Ok(out)
}

pub fn write_com<W: Write>(out: W, rows: &[ComRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use capstep_core::cpg::{compose_pose, CpgConfig, MotionPhase, SwingAmplitude};

    #[test]
    fn record_round_trip() {
        let joints =
            compose_pose(&MotionPhase::new(0.7), &SwingAmplitude::new(0.3, 0.1, 0.2), &CpgConfig::default()).joints;
        let f = SensorFrame { joints, theta_roll: 0.01, theta_pitch: -0.02, timestamp: 1.5 };
        let back = SensorRecord::from_frame(&f).frame();
        assert_eq!(back.joints.right_leg, f.joints.right_leg);
        assert_eq!(back.joints.left_leg, f.joints.left_leg);
        assert_eq!(back.timestamp, 1.5);
    }

    #[test]
    fn rejects_bad_rows() {
        let cfg = FileConfig::default();
        let mut text = String::new();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(SensorRecord { timestamp: 1.0, r_knee: 0.5, l_knee: 0.5, ..Default::default() }).unwrap();
        w.serialize(SensorRecord { timestamp: 1.0, r_knee: 0.5, l_knee: 0.5, ..Default::default() }).unwrap();
        text.push_str(std::str::from_utf8(&w.into_inner().unwrap()).unwrap());
        let e = estimate(&cfg, text.as_bytes(), 1.0, Path::new("s")).unwrap_err();
        assert!(matches!(e, Error::SensorLog { row: 2, .. }), "{e}");
        let e = estimate(&cfg, "timestamp\n1\n".as_bytes(), 1.0, Path::new("s")).unwrap_err();
        assert!(matches!(e, Error::SensorLog { row: 1, .. }));
    }
}
