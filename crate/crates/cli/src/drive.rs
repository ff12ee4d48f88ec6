//! Batch driver shared by `run` and `replay`: steps a runner, applies any
//! logged commands at their boundaries, and writes frames and metrics.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use trailnet::analysis::NetworkMetrics;
use trailnet::command::CommandLog;
use trailnet::io::{write_agent_overlay, write_command_log, write_frame, MetricsWriter};
use trailnet::scenario::{Runner, Scenario, Termination};
use trailnet::{ConfigError, Error};

pub struct DriveOptions {
    pub out: PathBuf,
    pub until: u64,
    pub agents: bool,
}

pub struct Summary {
    pub steps: u64,
    pub termination: Termination,
    pub checksum: u64,
    pub last: NetworkMetrics,
    pub warnings: Vec<String>,
}

fn frame_paths(out: &Path, step: u64) -> (PathBuf, PathBuf) {
    let dir = out.join("frames");
    (dir.join(format!("frame_{step:06}.pgm")), dir.join(format!("agents_{step:06}.pgm")))
}

fn write_frames(runner: &Runner, opts: &DriveOptions, path: &Path, agents: &Path) -> Result<(), Error> {
    let s = runner.state();
    write_frame(&s.trail, path, s.params.trail_display_cap)?;
    if opts.agents {
        write_agent_overlay(s.occupancy(), s.params.width, s.params.height, agents)?;
    }
    Ok(())
}

/// Runs to `until` steps, stopping early on convergence when the scenario
/// asks for it and no logged commands remain. Config errors in the log are
/// returned as `Error::Config`.
pub fn drive(scenario: Scenario, log: Option<&CommandLog>, opts: &DriveOptions) -> Result<Summary, Error> {
    let frames_every = scenario.frames_every;
    let stop_on_convergence = scenario.stop_on_convergence;
    let mut runner = Runner::new(scenario)?;
    std::fs::create_dir_all(&opts.out)?;
    if frames_every > 0 {
        std::fs::create_dir_all(opts.out.join("frames"))?;
    }
    let mut metrics = MetricsWriter::new(BufWriter::new(File::create(opts.out.join("metrics.csv"))?))?;
    for m in runner.metrics() {
        metrics.append(m)?;
    }
    if frames_every > 0 {
        let (p, a) = frame_paths(&opts.out, 0);
        write_frames(&runner, opts, &p, &a)?;
    }

    let entries = log.map(|l| l.entries()).unwrap_or(&[]);
    let mut next = 0;
    let termination = loop {
        while next < entries.len() && entries[next].step <= runner.state().step {
            let e = &entries[next];
            runner
                .apply_command(&e.command)
                .map_err(|err: ConfigError| err.within(&format!("command at step {}", e.step)))?;
            next += 1;
        }
        if runner.state().step >= opts.until {
            break Termination::MaxSteps;
        }
        let sampled = runner.step().cloned();
        if let Some(m) = &sampled {
            metrics.append(m)?;
        }
        let step = runner.state().step;
        if frames_every > 0 && step % frames_every == 0 {
            let (p, a) = frame_paths(&opts.out, step);
            write_frames(&runner, opts, &p, &a)?;
        }
        if sampled.is_some() && stop_on_convergence && next == entries.len() && runner.converged() {
            break Termination::Converged;
        }
    };
    metrics.flush()?;

    write_frames(&runner, opts, &opts.out.join("final.pgm"), &opts.out.join("final_agents.pgm"))?;
    let state_json = serde_json::to_vec(runner.state())?;
    std::fs::write(opts.out.join("state.json"), state_json)?;
    if !runner.command_log().is_empty() {
        write_command_log(BufWriter::new(File::create(opts.out.join("commands.jsonl"))?), runner.command_log())?;
    }

    let last = runner.metrics().last().cloned().unwrap_or_default();
    Ok(Summary {
        steps: runner.state().step,
        termination,
        checksum: runner.state().trail.checksum(),
        last,
        warnings: runner.warnings().to_vec(),
    })
}
