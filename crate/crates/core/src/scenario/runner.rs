use super::{check_convergence, Method, Scenario, ScheduleAction};
use crate::analysis::{measure_state, NetworkMetrics};
use crate::command::{Applied, Command, CommandLog};
use crate::error::{ConfigError, Result};
use crate::model::{InitMode, SimulationState};

/// Progress of a method through its stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// No staged behaviour.
    Running,
    /// Plasmodial shrinkage waiting for a hole-free sheet.
    Settling,
    /// Plasmodial shrinkage removing agents.
    Reducing,
    /// Plasmodial shrinkage reached its target population.
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    MaxSteps,
    Converged,
    /// Stopped from outside, e.g. by the steering service shutting down.
    Command,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_state: SimulationState,
    pub metrics: Vec<NetworkMetrics>,
    pub termination: Termination,
    pub command_log: CommandLog,
    pub warnings: Vec<String>,
}

/// Steps a scenario one system step at a time.
///
/// Each call to [`Runner::step`] applies, in order: schedule actions due at
/// the current step, the method's pre-step work (removal, then spawning),
/// one system step, and a metrics sample when due. Steering commands are
/// applied between calls with [`Runner::apply_command`], so at a given
/// boundary they take effect before that step's schedule actions.
#[derive(Debug, Clone)]
pub struct Runner {
    scenario: Scenario,
    state: SimulationState,
    next_action: usize,
    spawn_rate: usize,
    phase: Phase,
    hole_free: usize,
    ready_since: Option<u64>,
    metrics: Vec<NetworkMetrics>,
    log: CommandLog,
    warnings: Vec<String>,
    starved_steps: u64,
    discarded: usize,
}

/// Consecutive steps without any successful spawn before a warning is
/// recorded.
const STARVATION_WARNING_STEPS: u64 = 1000;

impl Runner {
    pub fn new(scenario: Scenario) -> Result<Self, ConfigError> {
        scenario.validate()?;
        let params = scenario.params.clone();
        let nodes = scenario.nodes.clone();
        let (state, spawn_rate, phase) = match scenario.method {
            Method::FilamentousShrinkage | Method::FreeRun => {
                let mode = if params.population_pct > 40.0 {
                    InitMode::FullCoverage
                } else {
                    InitMode::UniformRandom
                };
                (SimulationState::init_population(params, mode, nodes, scenario.seed)?, 0, Phase::Running)
            }
            Method::FilamentousForaging { spawn_per_node_per_step } => {
                // Everyone starts in the queue and enters at the spawn rate.
                let mut s = SimulationState::empty(params, nodes, scenario.seed)?;
                s.spawn_queue = s.params.target_population();
                (s, spawn_per_node_per_step, Phase::Running)
            }
            Method::PlasmodialShrinkage(_) => (
                SimulationState::init_population(params, InitMode::FullCoverage, nodes, scenario.seed)?,
                0,
                Phase::Settling,
            ),
        };
        let mut runner = Self {
            scenario,
            state,
            next_action: 0,
            spawn_rate,
            phase,
            hole_free: 0,
            ready_since: None,
            metrics: Vec::new(),
            log: CommandLog::new(),
            warnings: Vec::new(),
            starved_steps: 0,
            discarded: 0,
        };
        runner.sample();
        Ok(runner)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn state(&self) -> &SimulationState {
        &self.state
    }

    /// Direct access to the state. Changes made this way bypass the
    /// command log and so are not reproduced by replay.
    pub fn state_mut(&mut self) -> &mut SimulationState {
        &mut self.state
    }

    pub fn metrics(&self) -> &[NetworkMetrics] {
        &self.metrics
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn command_log(&self) -> &CommandLog {
        &self.log
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Agents dropped from the respawn queue when reduction finished.
    pub fn discarded(&self) -> usize {
        self.discarded
    }

    pub fn spawn_rate(&self) -> usize {
        self.spawn_rate
    }

    /// Validate and apply a steering command at the current step boundary
    /// and record it in the command log.
    pub fn apply_command(&mut self, command: &Command) -> Result<Applied, ConfigError> {
        let applied = command.apply(&mut self.state)?;
        self.log.push(self.state.step, command.clone());
        Ok(applied)
    }

    /// Advance one system step. Returns the metrics sample if one was taken.
    pub fn step(&mut self) -> Option<&NetworkMetrics> {
        self.apply_due_actions();
        self.pre_step();
        self.state.system_step();
        if self.state.step % self.scenario.metrics_every == 0 {
            self.sample();
            return self.metrics.last();
        }
        None
    }

    fn apply_due_actions(&mut self) {
        let entries = &self.scenario.schedule.entries;
        while self.next_action < entries.len() && entries[self.next_action].step <= self.state.step {
            let action = entries[self.next_action].action;
            self.next_action += 1;
            match action {
                ScheduleAction::SetParam { name, value } => {
                    // Validated at load against the same sequence of changes,
                    // but steering may have moved other parameters since.
                    match name.updated(&self.state.params, value) {
                        Ok(p) => self.state.params = p,
                        Err(e) => self
                            .warnings
                            .push(format!("step {}: schedule action skipped: {e}", self.state.step)),
                    }
                }
                ScheduleAction::SetNodeEnabled { id, enabled } => {
                    if let Some(n) = self.state.node_mut(id) {
                        n.enabled = enabled;
                    }
                }
                ScheduleAction::BeginReduction => {
                    if self.phase == Phase::Settling {
                        self.phase = Phase::Reducing;
                    }
                }
                ScheduleAction::SpawnRate(r) => self.spawn_rate = r,
            }
        }
    }

    fn pre_step(&mut self) {
        match self.scenario.method {
            Method::FilamentousForaging { .. } => {
                if self.state.spawn_queue == 0 || self.spawn_rate == 0 {
                    return;
                }
                if self.state.spawn_from_queue(Some(self.spawn_rate)) > 0 {
                    self.starved_steps = 0;
                } else {
                    self.starved_steps += 1;
                    if self.starved_steps == STARVATION_WARNING_STEPS {
                        self.warnings.push(format!(
                            "step {}: spawn starved for {} steps with {} agents queued",
                            self.state.step, STARVATION_WARNING_STEPS, self.state.spawn_queue
                        ));
                    }
                }
            }
            Method::PlasmodialShrinkage(k) if self.phase == Phase::Reducing => {
                self.state.remove_random(k.p_remove);
                self.state.spawn_from_queue(None);
                let target = (k.target_population_pct / 100.0 * self.state.params.area() as f64).round() as usize;
                if self.state.population() <= target {
                    self.discarded += self.state.spawn_queue;
                    self.state.spawn_queue = 0;
                    self.phase = Phase::Finished;
                }
            }
            _ => {}
        }
    }

    fn sample(&mut self) {
        let m = measure_state(&self.state, &self.scenario.analysis);
        if let Method::PlasmodialShrinkage(k) = self.scenario.method {
            if self.phase == Phase::Settling {
                self.hole_free = if m.cycle_count == 0 { self.hole_free + 1 } else { 0 };
                if self.hole_free >= k.hole_free_samples {
                    self.phase = Phase::Reducing;
                }
            }
        }
        let ready = self.next_action == self.scenario.schedule.entries.len()
            && matches!(self.phase, Phase::Running | Phase::Finished)
            && self.state.spawn_queue == 0;
        self.ready_since = match (ready, self.ready_since) {
            (false, _) => None,
            (true, None) => Some(m.step),
            (true, since) => since,
        };
        self.metrics.push(m);
    }

    /// Samples covering the last `window_steps` steps, if the history is
    /// long enough to span the whole window.
    pub fn convergence_window(&self) -> Option<&[NetworkMetrics]> {
        let last = self.metrics.last()?.step;
        let start = last.checked_sub(self.scenario.convergence.window_steps)?;
        let first = self.metrics.iter().position(|m| m.step >= start)?;
        (self.metrics[first].step == start).then(|| &self.metrics[first..])
    }

    /// Whether the network has been stationary over a full window that
    /// lies entirely after the last schedule action, spawn or reduction.
    pub fn converged(&self) -> bool {
        let (Some(since), Some(window)) = (self.ready_since, self.convergence_window()) else {
            return false;
        };
        window[0].step >= since
            && window.len() >= 2
            && check_convergence(window, self.scenario.convergence.tolerance).unwrap_or(false)
    }

    /// Run until `max_steps` or, if enabled, convergence.
    pub fn run(mut self) -> RunResult {
        let termination = loop {
            if self.state.step >= self.scenario.max_steps {
                break Termination::MaxSteps;
            }
            if self.step().is_some() && self.scenario.stop_on_convergence && self.converged() {
                break Termination::Converged;
            }
        };
        self.finish(termination)
    }

    pub fn finish(self, termination: Termination) -> RunResult {
        RunResult {
            final_state: self.state,
            metrics: self.metrics,
            termination,
            command_log: self.log,
            warnings: self.warnings,
        }
    }

    /// Re-run a scenario applying logged commands at their recorded step
    /// boundaries, stopping at step `until`.
    pub fn replay(scenario: Scenario, log: &CommandLog, until: u64) -> Result<Self, ConfigError> {
        let mut runner = Self::new(scenario)?;
        let mut pending = log.entries().iter().peekable();
        loop {
            while let Some(e) = pending.next_if(|e| e.step <= runner.state.step) {
                runner
                    .apply_command(&e.command)
                    .map_err(|err| err.within(&format!("command at step {}", e.step)))?;
            }
            if runner.state.step >= until {
                return Ok(runner);
            }
            runner.step();
        }
    }
}
