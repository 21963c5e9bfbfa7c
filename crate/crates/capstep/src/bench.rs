//! Controller latency benchmark on a noisy closed-loop walk.

use serde::Serialize;

use crate::config::FileConfig;
use crate::run::{run_scenario, RunOptions, TimingStats};
use crate::scenario::{CommandEntry, Mode, Noise, PushEntry, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchReport {
    /// Controller tick duration statistics, s.
    pub timing: TimingStats,
    pub limit: f64,
    pub passed: bool,
}

/// Walk used for timing: varied commands, light noise and a few pushes so
/// every step-time rule gets exercised.
pub fn bench_scenario(ticks: usize, rho: f64, seed: u64) -> Scenario {
    let duration = ticks as f64 * rho;
    let commands = (0..)
        .map(|i| i as f64 * 10.0)
        .take_while(|t| *t < duration)
        .enumerate()
        .map(|(i, time)| {
            let v = [(0.0, 0.0), (0.6, 0.0), (0.3, 0.5), (-0.4, -0.3), (0.0, 0.8)][i % 5];
            CommandEntry { time, vx: v.0, vy: v.1, vpsi: 0.0 }
        })
        .collect();
    let pushes = (0..)
        .map(|i| 7.3 + i as f64 * 20.0)
        .take_while(|t| *t < duration)
        .enumerate()
        .map(|(i, time)| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            PushEntry { time, dvx: 0.08 * s, dvy: -0.06 * s, dx: 0.0, dy: 0.0 }
        })
        .collect();
    Scenario {
        id: "bench".into(),
        duration,
        seed,
        mode: Mode::Closed,
        noise: Noise { position: 0.001, velocity: 0.005 },
        commands,
        pushes,
        ..Default::default()
    }
}

/// Runs at least `ticks` controller ticks. A fall only restarts the walk.
pub fn bench(cfg: &FileConfig, ticks: usize, limit: f64) -> BenchReport {
    let opts = RunOptions { record: false, timing: true, diagnostics: false };
    let mut samples = Vec::with_capacity(ticks + 1);
    let mut seed = 0;
    while samples.len() < ticks {
        let sc = bench_scenario(ticks - samples.len(), cfg.cpg.rho, seed);
        samples.extend(run_scenario(cfg, &sc, opts).tick_durations);
        seed += 1;
    }
    let timing = TimingStats::from_samples(&samples).expect("at least 1000 ticks");
    BenchReport { timing, limit, passed: timing.mean < limit }
}
