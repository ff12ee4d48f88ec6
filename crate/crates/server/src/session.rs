//! The simulation thread. It owns the runner; everything else talks to it
//! through a channel, so commands only ever land between system steps.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde::Serialize;
use tokio::sync::{mpsc as tmpsc, oneshot};
use trailnet::command::{Applied, Command, CommandLog, LoggedCommand};
use trailnet::io::append_logged;
use trailnet::model::{NodeSource, SimulationParams};
use trailnet::scenario::{Runner, Scenario};
use trailnet::ConfigError;

use crate::protocol::{encode_frame, ServerMessage};

/// Frames queued for one client beyond which new frames are dropped for
/// it. Text messages are never dropped.
pub const MAX_PENDING_FRAMES: usize = 8;

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub start_paused: bool,
    pub steps_per_second: f64,
    /// Frame cadence in steps. `None` uses the scenario's `frames_every`,
    /// or every step when that is zero.
    pub frames_every: Option<u64>,
    pub agent_overlay: bool,
    /// Append each applied command to this JSON-lines file.
    pub command_log_path: Option<PathBuf>,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self {
            start_paused: false,
            steps_per_second: 60.0,
            frames_every: None,
            agent_overlay: false,
            command_log_path: None,
        }
    }
}

#[derive(Debug)]
pub enum Outbound {
    Frame(Arc<[u8]>),
    Text(String),
}

/// One connected client's outbound queue.
#[derive(Debug, Clone)]
pub struct Subscriber {
    tx: tmpsc::UnboundedSender<Outbound>,
    pending_frames: Arc<AtomicUsize>,
}

impl Subscriber {
    pub fn new() -> (Self, tmpsc::UnboundedReceiver<Outbound>) {
        let (tx, rx) = tmpsc::unbounded_channel();
        (Self { tx, pending_frames: Arc::new(AtomicUsize::new(0)) }, rx)
    }

    /// Call after a frame has been written to the socket.
    pub fn frame_sent(&self) {
        self.pending_frames.fetch_sub(1, Ordering::AcqRel);
    }

    /// False once the client has gone away.
    fn send_frame(&self, frame: &Arc<[u8]>) -> bool {
        if self.pending_frames.load(Ordering::Acquire) >= MAX_PENDING_FRAMES {
            return !self.tx.is_closed();
        }
        self.pending_frames.fetch_add(1, Ordering::AcqRel);
        self.tx.send(Outbound::Frame(frame.clone())).is_ok()
    }

    fn send_text(&self, msg: &ServerMessage) -> bool {
        self.tx.send(Outbound::Text(msg.to_json())).is_ok()
    }
}

/// Bootstrap snapshot served at `GET /state`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateView {
    pub step: u64,
    pub width: usize,
    pub height: usize,
    pub paused: bool,
    pub steps_per_second: f64,
    pub population: usize,
    pub params: SimulationParams,
    pub nodes: Vec<NodeSource>,
}

pub(crate) enum Inbound {
    Subscribe(Subscriber),
    Command { command: Command, reply: Subscriber },
    State(oneshot::Sender<StateView>),
    Shutdown,
}

/// Handle to a running simulation thread.
pub struct SimHandle {
    tx: mpsc::Sender<Inbound>,
    thread: Option<JoinHandle<CommandLog>>,
}

#[derive(Clone)]
pub struct SimClient {
    tx: mpsc::Sender<Inbound>,
}

impl SimClient {
    /// Register a client; returns false if the simulation has stopped.
    pub fn subscribe(&self, sub: Subscriber) -> bool {
        self.tx.send(Inbound::Subscribe(sub)).is_ok()
    }

    pub fn command(&self, command: Command, reply: Subscriber) -> bool {
        self.tx.send(Inbound::Command { command, reply }).is_ok()
    }

    pub async fn state(&self) -> Option<StateView> {
        let (tx, rx) = oneshot::channel();
        self.tx.send(Inbound::State(tx)).ok()?;
        rx.await.ok()
    }
}

impl SimHandle {
    /// Validate the scenario and start its simulation thread.
    pub fn spawn(scenario: Scenario, options: ServeOptions) -> Result<Self, ConfigError> {
        if !(options.steps_per_second.is_finite() && options.steps_per_second > 0.0) {
            return Err(ConfigError::new("steps_per_second", "must be positive"));
        }
        if options.frames_every == Some(0) {
            return Err(ConfigError::new("frames_every", "must be at least 1"));
        }
        let frames_every = options.frames_every.unwrap_or(scenario.frames_every.max(1));
        if let Some(path) = &options.command_log_path {
            std::fs::File::create(path).map_err(|e| ConfigError::new("command_log_path", e.to_string()))?;
        }
        let runner = Runner::new(scenario)?;
        let (tx, rx) = mpsc::channel();
        let thread = std::thread::Builder::new()
            .name("simulation".into())
            .spawn(move || Session::new(runner, options, frames_every).run(rx))
            .expect("spawn simulation thread");
        Ok(Self { tx, thread: Some(thread) })
    }

    pub fn client(&self) -> SimClient {
        SimClient { tx: self.tx.clone() }
    }

    /// Stop the loop and return every command it applied.
    pub fn shutdown(mut self) -> CommandLog {
        let _ = self.tx.send(Inbound::Shutdown);
        self.thread.take().expect("joined once").join().expect("simulation thread panicked")
    }
}

impl Drop for SimHandle {
    fn drop(&mut self) {
        if let Some(t) = self.thread.take() {
            let _ = self.tx.send(Inbound::Shutdown);
            let _ = t.join();
        }
    }
}

struct Session {
    runner: Runner,
    options: ServeOptions,
    frames_every: u64,
    subscribers: Vec<Subscriber>,
    paused: bool,
    period: Duration,
    pending_steps: u64,
    next_due: Instant,
}

impl Session {
    fn new(runner: Runner, options: ServeOptions, frames_every: u64) -> Self {
        Self {
            runner,
            paused: options.start_paused,
            period: Duration::from_secs_f64(1.0 / options.steps_per_second),
            options,
            frames_every,
            subscribers: Vec::new(),
            pending_steps: 0,
            next_due: Instant::now(),
        }
    }

    fn run(mut self, rx: mpsc::Receiver<Inbound>) -> CommandLog {
        loop {
            // Everything that has arrived applies at this boundary.
            loop {
                match rx.try_recv() {
                    Ok(msg) => {
                        if !self.handle(msg) {
                            return self.runner.command_log().clone();
                        }
                    }
                    Err(mpsc::TryRecvError::Empty) => break,
                    Err(mpsc::TryRecvError::Disconnected) => return self.runner.command_log().clone(),
                }
            }
            if self.pending_steps > 0 {
                self.pending_steps -= 1;
                self.step();
                continue;
            }
            let msg = if self.paused {
                rx.recv().map_err(|_| ())
            } else {
                let now = Instant::now();
                if now >= self.next_due {
                    self.next_due = (self.next_due + self.period).max(now);
                    self.step();
                    continue;
                }
                match rx.recv_timeout(self.next_due - now) {
                    Ok(m) => Ok(m),
                    Err(mpsc::RecvTimeoutError::Timeout) => continue,
                    Err(mpsc::RecvTimeoutError::Disconnected) => Err(()),
                }
            };
            let keep_going = match msg {
                Ok(m) => self.handle(m),
                Err(()) => false,
            };
            if !keep_going {
                return self.runner.command_log().clone();
            }
        }
    }

    /// Returns false on shutdown.
    fn handle(&mut self, msg: Inbound) -> bool {
        match msg {
            Inbound::Subscribe(sub) => {
                if let Some(frame) = self.frame() {
                    sub.send_frame(&frame);
                }
                self.subscribers.push(sub);
            }
            Inbound::Command { command, reply } => self.apply(command, &reply),
            Inbound::State(tx) => {
                let s = self.runner.state();
                let _ = tx.send(StateView {
                    step: s.step,
                    width: s.params.width,
                    height: s.params.height,
                    paused: self.paused,
                    steps_per_second: 1.0 / self.period.as_secs_f64(),
                    population: s.population(),
                    params: s.params.clone(),
                    nodes: s.nodes.clone(),
                });
            }
            Inbound::Shutdown => return false,
        }
        true
    }

    fn apply(&mut self, command: Command, reply: &Subscriber) {
        let applied = match self.runner.apply_command(&command) {
            Ok(a) => a,
            Err(e) => {
                reply.send_text(&ServerMessage::Error { reason: e.to_string() });
                return;
            }
        };
        match command {
            Command::Pause {} => self.paused = true,
            Command::Resume {} => {
                self.paused = false;
                self.next_due = Instant::now();
            }
            Command::Step { count } => self.pending_steps += count,
            Command::SetSpeed { steps_per_second } => {
                self.period = Duration::from_secs_f64(1.0 / steps_per_second);
            }
            Command::Snapshot {} => {
                if let Some(frame) = self.frame() {
                    reply.send_frame(&frame);
                }
            }
            _ => {}
        }
        let step = self.runner.state().step;
        if let Some(path) = &self.options.command_log_path {
            let entry = LoggedCommand { step, command };
            let written = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(trailnet::Error::from)
                .and_then(|mut f| append_logged(&mut f, &entry).and_then(|_| Ok(f.flush()?)));
            if let Err(e) = written {
                eprintln!("warning: could not append to command log: {e}");
            }
        }
        let node_id = match applied {
            Applied::NodeAdded(id) => Some(id),
            _ => None,
        };
        reply.send_text(&ServerMessage::Ack { applied_at_step: step, node_id });
    }

    fn frame(&self) -> Option<Arc<[u8]>> {
        let s = self.runner.state();
        let occupancy = self.options.agent_overlay.then(|| s.occupancy());
        match encode_frame(s.step, &s.trail, s.params.trail_display_cap, occupancy) {
            Ok(f) => Some(f.into()),
            Err(e) => {
                eprintln!("warning: frame not encoded: {e}");
                None
            }
        }
    }

    fn step(&mut self) {
        let metrics = self.runner.step().cloned();
        if let Some(m) = metrics {
            let msg = ServerMessage::Metrics(m);
            self.subscribers.retain(|s| s.send_text(&msg));
        }
        if self.runner.state().step % self.frames_every == 0 {
            if let Some(frame) = self.frame() {
                self.subscribers.retain(|s| s.send_frame(&frame));
            }
        }
    }
}
