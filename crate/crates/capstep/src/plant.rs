//! Point-mass plant: two uncoupled pendulums over a moving support foot.
//!
//! Integration is exact. Between events the base is fixed, so the closed
//! form from `capstep_core::lipm` is used piecewise. Events are command
//! activations (issue time plus actuation latency), support exchanges and
//! pushes.

use std::collections::VecDeque;

use capstep_core::control::{amplitude_to_step, RefConfig};
use capstep_core::estimation::{Frame2, SupportState};
use capstep_core::lipm::{lipm_predict, orbital_energy, velocity_arrivals};
use capstep_core::{ComState, PendulumParams, StepParams, ZmpOffset};

/// Velocity and position impulse applied at `time`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Push {
    pub time: f64,
    pub dvx: f64,
    pub dvy: f64,
    pub dx: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlantEvent {
    Exchange { time: f64, step: (f64, f64), lambda: f64 },
    Push { time: f64 },
    Apex { time: f64, distance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Command {
    active_at: f64,
    lambda: f64,
    params: StepParams,
}

/// True plant state. The CoM is in world coordinates; the support foot
/// never rotates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    pub com: ComState,
    pub foot: (f64, f64),
    pub lambda: f64,
    pub time: f64,
    pub last_exchange: f64,
    /// Previous support foot expressed relative to the current one.
    pub relocation: (f64, f64),
}

impl PlantState {
    /// CoM relative to the support foot.
    pub fn local(&self) -> ComState {
        let mut c = self.com;
        c.cx -= self.foot.0;
        c.cy -= self.foot.1;
        c
    }

    pub fn support(&self) -> SupportState {
        SupportState {
            lambda: self.lambda,
            frame: Frame2::new(self.foot.0, self.foot.1, 0.0),
            time_since_exchange: self.time - self.last_exchange,
            relocation: Frame2::new(self.relocation.0, self.relocation.1, 0.0),
            armed: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Plant {
    pub state: PlantState,
    pendulum: PendulumParams,
    reference: RefConfig,
    latency: f64,
    queue: VecDeque<Command>,
    active: Option<Command>,
    exchange_at: Option<f64>,
    pushes: VecDeque<Push>,
    events: Vec<PlantEvent>,
}

impl Plant {
    /// `initial` is relative to the support foot, which starts at the origin.
    pub fn new(
        initial: ComState,
        lambda: f64,
        pendulum: PendulumParams,
        reference: RefConfig,
        latency: f64,
        mut pushes: Vec<Push>,
    ) -> Self {
        pushes.sort_by(|a, b| a.time.total_cmp(&b.time));
        Self {
            state: PlantState {
                com: initial,
                foot: (0.0, 0.0),
                lambda: if lambda < 0.0 { -1.0 } else { 1.0 },
                time: 0.0,
                last_exchange: 0.0,
                relocation: (0.0, 0.0),
            },
            pendulum,
            reference,
            latency,
            queue: VecDeque::new(),
            active: None,
            exchange_at: None,
            pushes: pushes.into(),
            events: Vec::new(),
        }
    }

    /// ZMP offset currently applied, relative to the support foot.
    pub fn zmp(&self) -> ZmpOffset {
        self.active.map_or(ZmpOffset::ZERO, |c| c.params.zmp)
    }

    /// Queues step parameters computed now; they take effect after the latency.
    /// Parameters computed for a support foot that is gone by then are dropped.
    pub fn command(&mut self, params: StepParams) {
        self.queue.push_back(Command { active_at: self.state.time + self.latency, lambda: self.state.lambda, params });
    }

    /// Events since the last call.
    pub fn drain_events(&mut self) -> Vec<PlantEvent> {
        std::mem::take(&mut self.events)
    }

    pub fn advance(&mut self, dt: f64) {
        let end = self.state.time + dt;
        self.advance_to(end);
    }

    pub fn advance_to(&mut self, end: f64) {
        loop {
            let next_cmd = self.queue.front().map(|c| c.active_at);
            let next_push = self.pushes.front().map(|p| p.time);
            let next =
                [next_cmd, self.exchange_at, next_push].into_iter().flatten().fold(end, f64::min).max(self.state.time);
            self.integrate_to(next);
            if next >= end
                && next_cmd.is_none_or(|t| t > end)
                && self.exchange_at.is_none_or(|t| t > end)
                && next_push.is_none_or(|t| t > end)
            {
                break;
            }
            self.fire_events();
        }
    }

    fn fire_events(&mut self) {
        let now = self.state.time;
        while self.queue.front().is_some_and(|c| c.active_at <= now) {
            let c = self.queue.pop_front().unwrap();
            if c.lambda != self.state.lambda {
                continue;
            }
            self.exchange_at = Some(now + c.params.step_time.max(0.0));
            self.active = Some(c);
        }
        if self.exchange_at.is_some_and(|t| t <= now) {
            self.exchange();
        }
        while self.pushes.front().is_some_and(|p| p.time <= now) {
            let p = self.pushes.pop_front().unwrap();
            self.state.com.vx += p.dvx;
            self.state.com.vy += p.dvy;
            self.state.com.cx += p.dx;
            self.state.com.cy += p.dy;
            self.events.push(PlantEvent::Push { time: now });
        }
    }

    fn exchange(&mut self) {
        let Some(cmd) = self.active else { return };
        let step = amplitude_to_step(&cmd.params.amplitude, self.state.lambda, &self.reference);
        let s = &mut self.state;
        s.foot.0 += step.0;
        s.foot.1 += step.1;
        s.relocation = step;
        s.lambda = -s.lambda;
        s.last_exchange = s.time;
        self.active = None;
        self.exchange_at = None;
        let lambda = s.lambda;
        self.queue.retain(|c| c.lambda == lambda);
        self.events.push(PlantEvent::Exchange { time: s.time, step, lambda });
    }

    fn integrate_to(&mut self, t: f64) {
        let dt = t - self.state.time;
        if dt <= 0.0 {
            return;
        }
        let z = self.zmp();
        let local = self.state.local();
        let p = &self.pendulum;
        let shifted = capstep_core::State1D::new(local.cy - z.zy, local.vy);
        for ta in velocity_arrivals(0.0, shifted, p).as_slice() {
            if *ta > 0.0 && *ta <= dt {
                let at = lipm_predict(&local, &z, p, *ta);
                self.events.push(PlantEvent::Apex { time: self.state.time + ta, distance: at.cy.abs() });
            }
        }
        let next = lipm_predict(&local, &z, p, dt);
        let s = &mut self.state;
        s.com = ComState::new(next.cx + s.foot.0, next.vx, next.cy + s.foot.1, next.vy);
        s.time = t;
    }

    /// Lateral orbital energy about the support foot.
    pub fn lateral_energy(&self) -> f64 {
        orbital_energy(self.state.local().lateral(), &self.pendulum)
    }
}
