use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::{Boundary, SimulationParams};
use super::trail::TrailField;

/// A particle agent: continuous position, heading in degrees
/// (0° = +x, counter-clockwise positive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub x: f64,
    pub y: f64,
    pub heading_deg: f64,
    pub alive: bool,
}

impl Agent {
    pub fn new(x: f64, y: f64, heading_deg: f64) -> Self {
        Self {
            x,
            y,
            heading_deg: normalize_deg(heading_deg),
            alive: true,
        }
    }

    /// The lattice cell this agent occupies.
    #[inline]
    pub fn cell(&self) -> (usize, usize) {
        (self.x.floor() as usize, self.y.floor() as usize)
    }
}

pub fn normalize_deg(deg: f64) -> f64 {
    let d = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if d >= 360.0 {
        0.0
    } else {
        d
    }
}

/// What the three forward sensors report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SensorReading {
    /// Trail levels at the left (+SA), front and right (−SA) sensors.
    Values { left: f64, front: f64, right: f64 },
    /// At least one sensor point lies off a fixed-boundary lattice and the
    /// corner rule is active.
    OffLattice,
}

/// Map a continuous coordinate to a lattice cell index, or `None` if it
/// falls off a fixed-boundary lattice.
#[inline]
fn to_cell(v: f64, extent: usize, boundary: Boundary) -> Option<usize> {
    let c = v.floor() as i64;
    match boundary {
        Boundary::Periodic => Some(c.rem_euclid(extent as i64) as usize),
        Boundary::Fixed => (c >= 0 && c < extent as i64).then_some(c as usize),
    }
}

fn sample_block(trail: &TrailField, cx: i64, cy: i64, width: usize, boundary: Boundary) -> f64 {
    if width == 1 {
        return trail.get(cx as usize, cy as usize);
    }
    let (w, h) = (trail.width() as i64, trail.height() as i64);
    let half = (width / 2) as i64;
    let mut sum = 0.0;
    for dy in -half..=half {
        for dx in -half..=half {
            let (mut x, mut y) = (cx + dx, cy + dy);
            match boundary {
                Boundary::Periodic => {
                    x = x.rem_euclid(w);
                    y = y.rem_euclid(h);
                }
                Boundary::Fixed => {
                    if x < 0 || y < 0 || x >= w || y >= h {
                        continue;
                    }
                }
            }
            sum += trail.get(x as usize, y as usize);
        }
    }
    sum / (width * width) as f64
}

/// Sample the left, front and right sensors of `agent`.
pub fn read_sensors(agent: &Agent, trail: &TrailField, params: &SimulationParams) -> SensorReading {
    let mut vals = [0.0; 3];
    let offsets = [params.sensor_angle_deg, 0.0, -params.sensor_angle_deg];
    for (slot, off) in vals.iter_mut().zip(offsets) {
        let (sin, cos) = (agent.heading_deg + off).to_radians().sin_cos();
        let sx = agent.x + params.sensor_offset * cos;
        let sy = agent.y + params.sensor_offset * sin;
        match (
            to_cell(sx, trail.width(), params.boundary),
            to_cell(sy, trail.height(), params.boundary),
        ) {
            (Some(cx), Some(cy)) => {
                *slot = sample_block(
                    trail,
                    cx as i64,
                    cy as i64,
                    params.sensor_width,
                    params.boundary,
                );
            }
            _ if params.corner_rule => return SensorReading::OffLattice,
            _ => *slot = 0.0,
        }
    }
    SensorReading::Values {
        left: vals[0],
        front: vals[1],
        right: vals[2],
    }
}

/// Apply the forward-biased rotation rule to a reading and return the new
/// heading. Only the lateral tie case (both sides stronger than the front)
/// consumes a random draw.
pub fn decide_heading<R: Rng + ?Sized>(
    heading_deg: f64,
    reading: SensorReading,
    rotation_deg: f64,
    rng: &mut R,
) -> f64 {
    let turned = match reading {
        SensorReading::OffLattice => heading_deg - rotation_deg,
        SensorReading::Values { left, front, right } => {
            if front > left && front > right {
                heading_deg
            } else if front < left && front < right {
                if rng.gen::<bool>() {
                    heading_deg + rotation_deg
                } else {
                    heading_deg - rotation_deg
                }
            } else if left > right {
                heading_deg + rotation_deg
            } else if right > left {
                heading_deg - rotation_deg
            } else {
                heading_deg
            }
        }
    };
    normalize_deg(turned)
}

/// Sense the trail and return the agent's new heading.
pub fn sense<R: Rng + ?Sized>(
    agent: &Agent,
    trail: &TrailField,
    params: &SimulationParams,
    rng: &mut R,
) -> f64 {
    let reading = read_sensors(agent, trail, params);
    decide_heading(agent.heading_deg, reading, params.rotation_angle_deg, rng)
}

/// Try to step forward by `step_size`.
///
/// On success the agent moves, the occupancy lattice is updated and
/// `deposit` is added at the destination cell. On failure (occupied
/// destination or off a fixed boundary) the agent stays put, deposits
/// nothing and draws a fresh uniform heading.
pub fn attempt_move<R: Rng + ?Sized>(
    agent: &mut Agent,
    occupancy: &mut [bool],
    trail: &mut TrailField,
    params: &SimulationParams,
    rng: &mut R,
) -> bool {
    let (w, h) = (trail.width(), trail.height());
    let (sin, cos) = agent.heading_deg.to_radians().sin_cos();
    let mut nx = agent.x + params.step_size * cos;
    let mut ny = agent.y + params.step_size * sin;

    let target = match params.boundary {
        Boundary::Periodic => {
            nx = wrap_coord(nx, w);
            ny = wrap_coord(ny, h);
            Some((nx.floor() as usize, ny.floor() as usize))
        }
        Boundary::Fixed => {
            let inside = nx >= 0.0 && ny >= 0.0 && nx < w as f64 && ny < h as f64;
            inside.then(|| (nx.floor() as usize, ny.floor() as usize))
        }
    };

    let (ox, oy) = agent.cell();
    let free = match target {
        Some((tx, ty)) => (tx, ty) == (ox, oy) || !occupancy[ty * w + tx],
        None => false,
    };
    match target {
        Some((tx, ty)) if free => {
            occupancy[oy * w + ox] = false;
            occupancy[ty * w + tx] = true;
            agent.x = nx;
            agent.y = ny;
            trail.add(tx, ty, params.deposit);
            true
        }
        _ => {
            agent.heading_deg = random_heading(rng);
            false
        }
    }
}

#[inline]
fn wrap_coord(v: f64, extent: usize) -> f64 {
    let e = extent as f64;
    let r = v.rem_euclid(e);
    if r >= e {
        0.0
    } else {
        r
    }
}

pub fn random_heading<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    normalize_deg(rng.gen::<f64>() * 360.0)
}
