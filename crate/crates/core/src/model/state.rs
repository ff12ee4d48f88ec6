use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::agent::{attempt_move, random_heading, sense, Agent};
use super::node::{inject_nodes, NodeSource};
use super::params::SimulationParams;
use super::trail::TrailField;
use crate::error::ConfigError;

/// The simulation's random number generator.
///
/// Per system step the draw order is: one Fisher–Yates shuffle of the
/// living agents (`n - 1` bounded draws), then for each agent in visiting
/// order at most one tie-break bit while sensing and at most one heading
/// draw after a blocked move. Initialisation draws a cell index then a
/// heading for each agent placed at random; agents placed on node discs
/// draw a heading only.
pub type SimRng = ChaCha8Rng;

/// How the initial population is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Distinct random free cells anywhere on the lattice.
    UniformRandom,
    /// Only on node disc cells; the remainder waits in the spawn queue.
    NodeRestricted,
    /// Same placement as `UniformRandom`, used for very large populations.
    FullCoverage,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationState {
    pub params: SimulationParams,
    pub agents: Vec<Agent>,
    #[serde(skip)]
    occupancy: Vec<bool>,
    pub trail: TrailField,
    pub nodes: Vec<NodeSource>,
    pub step: u64,
    /// Agents waiting to be placed on a free node-disc cell.
    pub spawn_queue: usize,
    pub rng: SimRng,
}

impl PartialEq for SimulationState {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
            && self.agents == other.agents
            && self.trail == other.trail
            && self.nodes == other.nodes
            && self.step == other.step
            && self.spawn_queue == other.spawn_queue
            && self.rng == other.rng
    }
}

impl SimulationState {
    /// An empty lattice: no agents, zero trail.
    pub fn empty(
        params: SimulationParams,
        nodes: Vec<NodeSource>,
        seed: u64,
    ) -> Result<Self, ConfigError> {
        params.validate().map_err(|e| e.within("params"))?;
        for (i, n) in nodes.iter().enumerate() {
            n.validate(params.width, params.height)
                .map_err(|e| e.within(&format!("nodes[{i}]")))?;
        }
        let (w, h) = (params.width, params.height);
        Ok(Self {
            agents: Vec::new(),
            occupancy: vec![false; w * h],
            trail: TrailField::new(w, h),
            nodes,
            step: 0,
            spawn_queue: 0,
            rng: SimRng::seed_from_u64(seed),
            params,
        })
    }

    /// Create a state and place `round(population_pct% × area)` agents.
    pub fn init_population(
        params: SimulationParams,
        mode: InitMode,
        nodes: Vec<NodeSource>,
        seed: u64,
    ) -> Result<Self, ConfigError> {
        let mut state = Self::empty(params, nodes, seed)?;
        let target = state.params.target_population();
        match mode {
            InitMode::UniformRandom | InitMode::FullCoverage => {
                if target > state.params.area() {
                    return Err(ConfigError::new(
                        "params.population_pct",
                        "population exceeds lattice area",
                    ));
                }
                state.place_random(target);
            }
            InitMode::NodeRestricted => {
                state.spawn_queue = target;
                state.spawn_from_queue(None);
            }
        }
        Ok(state)
    }

    /// Rebuild the occupancy lattice after deserialisation.
    pub fn rebuild_occupancy(&mut self) {
        let w = self.params.width;
        self.occupancy = vec![false; w * self.params.height];
        for a in self.agents.iter().filter(|a| a.alive) {
            let (x, y) = a.cell();
            self.occupancy[y * w + x] = true;
        }
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    pub fn is_occupied(&self, x: usize, y: usize) -> bool {
        self.occupancy[y * self.params.width + x]
    }

    pub fn population(&self) -> usize {
        self.agents.iter().filter(|a| a.alive).count()
    }

    /// Place `count` agents on distinct random free cells, each at the
    /// cell centre with a uniform heading.
    pub fn place_random(&mut self, count: usize) -> usize {
        let mut free: Vec<usize> = (0..self.occupancy.len())
            .filter(|&i| !self.occupancy[i])
            .collect();
        let count = count.min(free.len());
        let w = self.params.width;
        for i in 0..count {
            let j = self.rng.gen_range(i..free.len());
            free.swap(i, j);
            let cell = free[i];
            let heading = random_heading(&mut self.rng);
            self.add_agent_at(cell % w, cell / w, heading);
        }
        count
    }

    /// Place an agent at the centre of cell `(x, y)`. Returns false if the
    /// cell is occupied or outside the lattice.
    pub fn add_agent_at(&mut self, x: usize, y: usize, heading_deg: f64) -> bool {
        let w = self.params.width;
        if x >= w || y >= self.params.height || self.occupancy[y * w + x] {
            return false;
        }
        self.occupancy[y * w + x] = true;
        self.agents
            .push(Agent::new(x as f64 + 0.5, y as f64 + 0.5, heading_deg));
        true
    }

    /// Move queued agents onto free node-disc cells. Nodes are visited in
    /// id order and disc cells in row-major order; at most `per_node` agents
    /// are placed per node when a limit is given. Returns the number placed.
    pub fn spawn_from_queue(&mut self, per_node: Option<usize>) -> usize {
        let mut order: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| self.nodes[i].enabled)
            .collect();
        order.sort_by_key(|&i| self.nodes[i].id);
        let mut placed = 0;
        for i in order {
            let mut here = 0;
            let cells: Vec<(usize, usize)> = self.nodes[i].disc_cells().collect();
            for (x, y) in cells {
                if self.spawn_queue == 0 || per_node.is_some_and(|limit| here >= limit) {
                    break;
                }
                if !self.is_occupied(x, y) {
                    let heading = random_heading(&mut self.rng);
                    self.add_agent_at(x, y, heading);
                    self.spawn_queue -= 1;
                    here += 1;
                }
            }
            placed += here;
        }
        placed
    }

    /// Remove each living agent independently with probability `p`,
    /// visiting agents in storage order (one uniform draw each). Removed
    /// agents join the spawn queue. Returns the number removed.
    pub fn remove_random(&mut self, p: f64) -> usize {
        let w = self.params.width;
        let mut removed = 0;
        for a in self.agents.iter_mut().filter(|a| a.alive) {
            if self.rng.gen::<f64>() < p {
                a.alive = false;
                let (x, y) = a.cell();
                self.occupancy[y * w + x] = false;
                removed += 1;
            }
        }
        self.agents.retain(|a| a.alive);
        self.spawn_queue += removed;
        removed
    }

    /// One system step: shuffle, sense-then-move each agent in turn, inject
    /// node stimulus, diffuse, advance the counter.
    pub fn system_step(&mut self) {
        let Self {
            params,
            agents,
            occupancy,
            trail,
            nodes,
            rng,
            ..
        } = self;

        for i in (1..agents.len()).rev() {
            let j = rng.gen_range(0..=i);
            agents.swap(i, j);
        }

        for agent in agents.iter_mut().filter(|a| a.alive) {
            agent.heading_deg = sense(agent, trail, params, rng);
            attempt_move(agent, occupancy, trail, params, rng);
        }

        inject_nodes(trail, nodes, params.node_stimulus_scale);
        trail.diffuse(params.damp, params.boundary);
        if let Some(cap) = params.trail_cap {
            trail.clamp_max(cap);
        }
        self.step += 1;
    }

    pub fn run(&mut self, steps: u64) {
        for _ in 0..steps {
            self.system_step();
        }
    }

    /// Check the one-agent-per-cell invariant and that occupancy mirrors
    /// the living agents exactly.
    pub fn occupancy_consistent(&self) -> bool {
        let w = self.params.width;
        let mut seen = vec![false; self.occupancy.len()];
        for a in self.agents.iter().filter(|a| a.alive) {
            let (x, y) = a.cell();
            if x >= w || y >= self.params.height {
                return false;
            }
            let i = y * w + x;
            if seen[i] {
                return false;
            }
            seen[i] = true;
        }
        seen == self.occupancy
    }

    pub fn node(&self, id: u32) -> Option<&NodeSource> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_mut(&mut self, id: u32) -> Option<&mut NodeSource> {
        self.nodes.iter_mut().find(|n| n.id == id)
    }

    pub fn next_node_id(&self) -> u32 {
        self.nodes.iter().map(|n| n.id + 1).max().unwrap_or(0)
    }
}
