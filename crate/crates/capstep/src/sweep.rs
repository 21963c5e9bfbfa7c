//! Phase-space stability sweeps.
//!
//! Each grid cell perturbs the nominal walk at mid-step of the third step by
//! a CoM displacement and velocity jump in one plane, then runs the walk
//! open-loop and closed-loop.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::FileConfig;
use crate::error::{Error, Result};
use crate::run::{run_scenario, Outcome, RunOptions};
use crate::scenario::{Mode, PushEntry, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Plane {
    Lateral,
    Sagittal,
}

impl Plane {
    pub fn as_str(self) -> &'static str {
        match self {
            Plane::Lateral => "lateral",
            Plane::Sagittal => "sagittal",
        }
    }
}

/// Evenly spaced values `a..=b`, `n` of them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.a];
        }
        let step = (self.b - self.a) / (self.n - 1) as f64;
        (0..self.n).map(|i| if i + 1 == self.n { self.b } else { self.a + step * i as f64 }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneGrid {
    pub plane: Plane,
    pub pos: Axis,
    pub vel: Axis,
}

/// Parses `"cy=a:b:n,vy=a:b:n|cx=a:b:n,vx=a:b:n"`; either plane may be left out.
pub fn parse_grid(spec: &str) -> Result<Vec<PlaneGrid>> {
    let bad = |m: String| Error::Grid(m);
    let mut planes = Vec::new();
    for part in spec.split('|').map(str::trim).filter(|p| !p.is_empty()) {
        let mut pos = None;
        let mut vel = None;
        let mut plane = None;
        for item in part.split(',').map(str::trim) {
            let (name, range) =
                item.split_once('=').ok_or_else(|| bad(format!("expected name=a:b:n, got {item:?}")))?;
            let nums: Vec<&str> = range.split(':').collect();
            let [a, b, n] = nums[..] else {
                return Err(bad(format!("expected a:b:n, got {range:?}")));
            };
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
            let axis =
                Axis { a: parse(a)?, b: parse(b)?, n: n.trim().parse().map_err(|e| bad(format!("{n:?}: {e}")))? };
            if axis.n == 0 || !axis.a.is_finite() || !axis.b.is_finite() {
                return Err(bad(format!("empty or non-finite axis {item:?}")));
            }
            let (p, slot) = match name.trim() {
                "cy" => (Plane::Lateral, &mut pos),
                "vy" => (Plane::Lateral, &mut vel),
                "cx" => (Plane::Sagittal, &mut pos),
                "vx" => (Plane::Sagittal, &mut vel),
                other => return Err(bad(format!("unknown axis {other:?}"))),
            };
            if plane.is_some_and(|q| q != p) {
                return Err(bad(format!("mixed planes in {part:?}")));
            }
            if slot.replace(axis).is_some() {
                return Err(bad(format!("duplicate axis {name:?}")));
            }
            plane = Some(p);
        }
        match (plane, pos, vel) {
            (Some(plane), Some(pos), Some(vel)) => planes.push(PlaneGrid { plane, pos, vel }),
            _ => return Err(bad(format!("plane {part:?} needs a position and a velocity axis"))),
        }
    }
    if planes.is_empty() {
        return Err(bad("no planes".into()));
    }
    Ok(planes)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub cell: usize,
    pub plane: Plane,
    pub pos: f64,
    pub vel: f64,
    pub open: Outcome,
    pub closed: Outcome,
}

/// Walk the sweep perturbs: standing-still command for 8 s, no noise.
pub fn default_base() -> Scenario {
    Scenario { id: "sweep".into(), duration: 8.0, ..Default::default() }
}

fn perturbed(base: &Scenario, plane: Plane, pos: f64, vel: f64, time: f64, mode: Mode) -> Scenario {
    let mut sc = base.clone();
    sc.mode = mode;
    let push = match plane {
        Plane::Lateral => PushEntry { time, dvx: 0.0, dvy: vel, dx: 0.0, dy: pos },
        Plane::Sagittal => PushEntry { time, dvx: vel, dvy: 0.0, dx: pos, dy: 0.0 },
    };
    let at = sc.pushes.partition_point(|p| p.time <= time);
    sc.pushes.insert(at, push);
    sc
}

/// Runs every cell in both modes on up to `workers` threads. Rows come back
/// in cell order regardless of scheduling.
pub fn sweep(cfg: &FileConfig, base: &Scenario, grids: &[PlaneGrid], workers: usize) -> Vec<Cell> {
    let push_time = 5.0 * cfg.tau();
    let cells: Vec<(Plane, f64, f64)> = grids
        .iter()
        .flat_map(|g| {
            let vels = g.vel.values();
            g.pos.values().into_iter().flat_map(move |p| {
                let vels = vels.clone();
                vels.into_iter().map(move |v| (g.plane, p, v))
            })
        })
        .collect();
    let work = || {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, &(plane, pos, vel))| {
                let outcome = |mode| {
                    let sc = perturbed(base, plane, pos, vel, push_time, mode);
                    run_scenario(cfg, &sc, RunOptions::default()).report.outcome
                };
                Cell { cell: i, plane, pos, vel, open: outcome(Mode::Open), closed: outcome(Mode::Closed) }
            })
            .collect()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    }
}

pub fn write_cells<W: std::io::Write>(out: W, cells: &[Cell]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cell", "plane", "pos", "vel", "open", "closed"])?;
    for c in cells {
        w.write_record([
            c.cell.to_string(),
            c.plane.as_str().to_string(),
            c.pos.to_string(),
            c.vel.to_string(),
            c.open.as_str().to_string(),
            c.closed.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Recovered-cell counts per mode and whether the closed-loop set contains
/// the open-loop set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Containment {
    pub cells: usize,
    pub open: usize,
    pub closed: usize,
    pub contained: bool,
}

pub fn containment<'a>(cells: impl IntoIterator<Item = &'a Cell>) -> Containment {
    let mut c = Containment { cells: 0, open: 0, closed: 0, contained: true };
    for cell in cells {
        c.cells += 1;
        let open = cell.open == Outcome::Recovered;
        let closed = cell.closed == Outcome::Recovered;
        c.open += usize::from(open);
        c.closed += usize::from(closed);
        if open && !closed {
            c.contained = false;
        }
    }
    c
}
