//! Closed- and open-loop scenario execution.

use std::collections::VecDeque;
use std::io::Write;
use std::time::Instant;

use capstep_core::control::{open_loop_step, reference_trajectory, Diagnostics, GaitTarget};
use capstep_core::cpg::SwingAmplitude;
use capstep_core::estimation::SupportState;
use capstep_core::{ComState, FootstepController, StepParams, ZmpOffset};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::config::FileConfig;
use crate::plant::{Plant, PlantEvent};
use crate::scenario::{Mode, Noise, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Recovered,
    Fell,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Recovered => "RECOVERED",
            Outcome::Fell => "FELL",
        }
    }
}

/// One logged control tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TickRow {
    pub time: f64,
    /// True CoM relative to the support foot.
    pub com: ComState,
    pub lambda: f64,
    pub params: StepParams,
    pub case: &'static str,
    pub event: String,
    pub diagnostics: Option<Diagnostics>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingStats {
    pub ticks: usize,
    pub mean: f64,
    pub max: f64,
    pub p99: f64,
}

impl TimingStats {
    /// `None` for fewer than 1000 samples.
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.len() < 1000 {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let idx = ((sorted.len() as f64 * 0.99).ceil() as usize).clamp(1, sorted.len()) - 1;
        Some(Self {
            ticks: sorted.len(),
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            max: *sorted.last().unwrap(),
            p99: sorted[idx],
        })
    }
}

/// Summary written next to the trajectory log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub mode: Mode,
    pub seed: u64,
    pub outcome: Outcome,
    pub steps: usize,
    pub falls: usize,
    pub fall_time: Option<f64>,
    /// Lateral apex distance of each step that had one, m.
    pub apex_distances: Vec<f64>,
    /// Time between consecutive support exchanges, s.
    pub step_periods: Vec<f64>,
    /// Controller tick duration, s.
    pub timing: Option<TimingStats>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub report: RunReport,
    pub rows: Vec<TickRow>,
    pub tick_durations: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    /// Keep per-tick rows.
    pub record: bool,
    /// Measure controller tick durations.
    pub timing: bool,
    /// Keep controller diagnostics in the rows.
    pub diagnostics: bool,
}

impl RunOptions {
    pub fn full() -> Self {
        Self { record: true, timing: true, diagnostics: true }
    }
}

struct Sensor {
    rng: ChaCha8Rng,
    position: Option<Normal<f64>>,
    velocity: Option<Normal<f64>>,
    delay: VecDeque<(ComState, SupportState)>,
    delay_ticks: usize,
}

impl Sensor {
    fn new(noise: &Noise, seed: u64, delay_ticks: usize) -> Self {
        let dist = |s: f64| (s > 0.0).then(|| Normal::new(0.0, s).expect("validated noise level"));
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            position: dist(noise.position),
            velocity: dist(noise.velocity),
            delay: VecDeque::with_capacity(delay_ticks + 1),
            delay_ticks,
        }
    }

    fn sense(&mut self, truth: ComState, support: SupportState) -> (ComState, SupportState) {
        let mut c = truth;
        if let Some(d) = self.position {
            c.cx += d.sample(&mut self.rng);
            c.cy += d.sample(&mut self.rng);
        }
        if let Some(d) = self.velocity {
            c.vx += d.sample(&mut self.rng);
            c.vy += d.sample(&mut self.rng);
        }
        self.delay.push_back((c, support));
        if self.delay.len() > self.delay_ticks + 1 {
            self.delay.pop_front();
        }
        *self.delay.front().unwrap()
    }
}

/// CoM state at the start of the nominal step, relative to the support foot.
pub fn nominal_step_start(cfg: &FileConfig, v: &GaitTarget, lambda: f64) -> ComState {
    let n = reference_trajectory(v, lambda, &cfg.reference, &cfg.pendulum);
    // the state a nominal exchange leaves behind, mirrored into this support
    let prev = reference_trajectory(v, -lambda, &cfg.reference, &cfg.pendulum);
    // start of the sagittal orbit through -sx and sx that is symmetric about
    // midstance; `n.svx` is its midstance velocity
    let c = cfg.pendulum.c;
    let vx = n.svx * (c * n.tau).cosh();
    ComState::new(-n.sx, vx, -prev.sy, prev.svy)
}

/// Beyond a fall radius and not coming back: laterally either tipping over
/// the support foot (positive energy) or running away from it after an apex.
fn fall_condition(local: &ComState, energy: f64, cfg: &FileConfig) -> bool {
    let lateral_escape = energy > 0.0 || local.cy * local.vy > 0.0;
    !local.is_finite()
        || (lateral_escape && local.cy.abs() > cfg.sim.fall_radius_y)
        || local.cx.abs() > cfg.sim.fall_radius_x
}

pub fn run_scenario(cfg: &FileConfig, sc: &Scenario, opts: RunOptions) -> RunResult {
    let rho = cfg.cpg.rho;
    let latency = sc.latency.unwrap_or(cfg.filter.latency);
    let mut gait = cfg.gait();
    gait.filter.latency = latency;
    let ctrl_cfg = gait.controller();

    let lambda0 = f64::from(sc.initial_support);
    let initial = sc.initial_state().unwrap_or_else(|| nominal_step_start(cfg, &sc.target_at(0.0), lambda0));
    let mut plant = Plant::new(initial, lambda0, cfg.pendulum, cfg.reference, latency, sc.plant_pushes());
    let mut controller = FootstepController::new(ctrl_cfg);
    let mut sensor = Sensor::new(&sc.noise, sc.seed, sc.sensor_delay);
    let persistence = 2.0 * cfg.tau();

    let n_ticks = (sc.duration / rho).round() as usize;
    let mut rows = Vec::with_capacity(if opts.record { n_ticks + 1 } else { 0 });
    let mut durations = Vec::with_capacity(if opts.timing { n_ticks + 1 } else { 0 });
    let mut exchanges = vec![0.0];
    let mut apexes: Vec<Option<f64>> = vec![None];
    let mut fall_since: Option<f64> = None;
    let mut fall_time = None;

    for k in 0..=n_ticks {
        let t = k as f64 * rho;
        plant.advance_to(t);
        let mut event = String::new();
        let mut note = |s: &str| {
            if !event.is_empty() {
                event.push(';');
            }
            event.push_str(s);
        };
        if k == 0 {
            note(match sc.mode {
                Mode::Open => "mode=open",
                Mode::Closed => "mode=closed",
            });
        }
        for e in plant.drain_events() {
            match e {
                PlantEvent::Exchange { time, .. } => {
                    exchanges.push(time);
                    apexes.push(None);
                    note("exchange");
                }
                PlantEvent::Push { .. } => note("push"),
                PlantEvent::Apex { distance, .. } => {
                    let slot = apexes.last_mut().unwrap();
                    if slot.is_none() {
                        *slot = Some(distance);
                        note("apex");
                    }
                }
            }
        }

        let local = plant.state.local();
        if fall_condition(&local, plant.lateral_energy(), cfg) {
            let since = *fall_since.get_or_insert(t);
            if t - since >= persistence || !local.is_finite() {
                fall_time = Some(t);
                note("fall");
            }
        } else {
            fall_since = None;
        }

        let support = plant.state.support();
        let (sensed, sensed_support) = sensor.sense(local, support);
        let v = sc.target_at(t);
        let (params, case, diagnostics) = match sc.mode {
            Mode::Open => (open_loop_step(&v, &support, &ctrl_cfg), "open_loop", None),
            Mode::Closed => {
                let start = opts.timing.then(Instant::now);
                let (params, diag) = controller.tick(&v, &sensed, &sensed_support);
                if let Some(s) = start {
                    durations.push(s.elapsed().as_secs_f64());
                }
                (params, diag.case.as_str(), opts.diagnostics.then_some(diag))
            }
        };
        plant.command(params);

        if opts.record {
            rows.push(TickRow { time: t, com: local, lambda: plant.state.lambda, params, case, event, diagnostics });
        }
        if fall_time.is_some() {
            break;
        }
    }

    let step_periods = exchanges.windows(2).skip(1).map(|w| w[1] - w[0]).collect();
    let report = RunReport {
        scenario: sc.id.clone(),
        mode: sc.mode,
        seed: sc.seed,
        outcome: if fall_time.is_some() { Outcome::Fell } else { Outcome::Recovered },
        steps: exchanges.len() - 1,
        falls: usize::from(fall_time.is_some()),
        fall_time,
        apex_distances: apexes.into_iter().flatten().collect(),
        step_periods,
        timing: TimingStats::from_samples(&durations),
    };
    RunResult { report, rows, tick_durations: durations }
}

pub const CSV_HEADER: [&str; 14] =
    ["time", "c_x", "v_x", "c_y", "v_y", "lambda", "Z_x", "Z_y", "T", "case", "A_x", "A_y", "A_psi", "event"];

/// Writes the trajectory log. Floats use the shortest representation that
/// round-trips, so identical runs give identical bytes.
pub fn write_trajectory<W: Write>(out: W, rows: &[TickRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let StepParams { amplitude: SwingAmplitude { ax, ay, apsi }, step_time, zmp: ZmpOffset { zx, zy } } = r.params;
        let nums = [r.time, r.com.cx, r.com.vx, r.com.cy, r.com.vy, r.lambda, zx, zy, step_time];
        let mut rec: Vec<String> = nums.iter().map(|v| v.to_string()).collect();
        rec.push(r.case.to_string());
        rec.extend([ax, ay, apsi].iter().map(|v| v.to_string()));
        rec.push(r.event.clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nominal_start_is_mirrored_exchange_state() {
        let cfg = FileConfig::default();
        let s = nominal_step_start(&cfg, &GaitTarget::STOP, 1.0);
        assert!((s.cy - 0.06).abs() < 1e-15);
        assert!((s.vy + 0.134164).abs() < 1e-6);
        assert_eq!((s.cx, s.vx), (0.0, 0.0));
    }

    #[test]
    fn noiseless_sensor_is_a_delay_line() {
        let mut s = Sensor::new(&Noise::default(), 3, 2);
        let sup = SupportState::new(1.0);
        let seen: Vec<f64> = (0..5).map(|i| s.sense(ComState::new(i as f64, 0.0, 0.0, 0.0), sup).0.cx).collect();
        assert_eq!(seen, [0.0, 0.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn sensor_noise_has_the_configured_spread() {
        let noise = Noise { position: 0.002, velocity: 0.01 };
        let mut s = Sensor::new(&noise, 11, 0);
        let sup = SupportState::new(1.0);
        let n = 100_000;
        let (mut sx, mut sxx, mut sv, mut svv) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let c = s.sense(ComState::default(), sup).0;
            (sx, sxx, sv, svv) = (sx + c.cx, sxx + c.cx * c.cx, sv + c.vy, svv + c.vy * c.vy);
        }
        let std = |s: f64, ss: f64| (ss / n as f64 - (s / n as f64).powi(2)).sqrt();
        assert!((std(sx, sxx) / 0.002 - 1.0).abs() < 0.05);
        assert!((std(sv, svv) / 0.01 - 1.0).abs() < 0.05);

        let mut a = Sensor::new(&noise, 11, 0);
        let mut b = Sensor::new(&noise, 11, 0);
        for _ in 0..10 {
            assert_eq!(a.sense(ComState::default(), sup), b.sense(ComState::default(), sup));
        }
    }

    #[test]
    fn timing_stats() {
        assert!(TimingStats::from_samples(&[1.0; 999]).is_none());
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        let s = TimingStats::from_samples(&v).unwrap();
        assert_eq!((s.mean, s.max, s.p99), (500.5, 1000.0, 990.0));
    }

    #[test]
    fn open_loop_walks_on_the_limit_cycle() {
        let cfg = FileConfig::default();
        let sc = Scenario { mode: Mode::Open, duration: 3.0, ..Default::default() };
        let r = run_scenario(&cfg, &sc, RunOptions::default());
        assert_eq!(r.report.outcome, Outcome::Recovered);
        let two_tau = 2.0 * cfg.tau();
        for p in &r.report.step_periods {
            assert!((p - two_tau).abs() < 1e-9, "{p}");
        }
        for a in &r.report.apex_distances {
            assert!((a - 0.04).abs() < 1e-6, "{a}");
        }
    }

    #[test]
    fn huge_lateral_push_falls() {
        let cfg = FileConfig::default();
        let mut sc = Scenario { duration: 5.0, ..Default::default() };
        sc.pushes.push(crate::scenario::PushEntry { time: 1.0, dvx: 0.0, dvy: 10.0, dx: 0.0, dy: 0.0 });
        let r = run_scenario(&cfg, &sc, RunOptions::default());
        assert_eq!(r.report.outcome, Outcome::Fell);
    }
}
