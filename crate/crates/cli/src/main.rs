mod drive;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;
use trailnet::analysis::{measure_state, measure_trail, mst_length, steiner_length_oracle, AnalysisConfig};
use trailnet::io::{load_command_log, load_scenario, read_pgm};
use trailnet::model::{SimulationState, TrailField};
use trailnet::scenario::Scenario;
use trailnet::{ConfigError, Error};
use trailnet_server::{serve, ServeOptions, SimHandle};

use drive::{drive, DriveOptions};

#[derive(Parser)]
#[command(name = "trailnet", version, about = "Agent-based transport network simulation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct RunFlags {
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scenario's max_steps.
    #[arg(long)]
    steps: Option<u64>,
    /// Output directory (default: scenario output_dir, else ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write agent-occupancy overlays next to each frame.
    #[arg(long)]
    agents: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Batch run writing frames, metrics.csv, final.pgm and state.json.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Re-run a scenario applying a JSON-lines command log.
    Replay {
        scenario: PathBuf,
        commands: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Print metrics for a PGM frame or a saved state.json.
    Analyze {
        input: PathBuf,
        /// Scenario or node list giving nodes for connectivity (PGM input only).
        #[arg(long)]
        nodes: Option<PathBuf>,
    },
    /// Run a scenario live behind a WebSocket steering endpoint.
    Serve {
        scenario: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[arg(long)]
        seed: Option<u64>,
        /// Start paused.
        #[arg(long)]
        paused: bool,
        /// Steps per second.
        #[arg(long, default_value_t = 60.0)]
        speed: f64,
        /// Frame cadence in steps.
        #[arg(long)]
        frames_every: Option<u64>,
        /// Include the agent bitmap in frames.
        #[arg(long)]
        agents: bool,
        /// Directory for commands.jsonl.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print MST and Steiner tree lengths over node centres.
    Oracle {
        #[arg(long)]
        nodes: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// Errors reading the user's inputs count as configuration errors.
fn input<T>(path: &Path, r: Result<T, Error>) -> Result<T, Error> {
    r.map_err(|e| match e {
        Error::Io(io) => ConfigError::new(path.display().to_string(), io.to_string()).into(),
        Error::Csv(c) => ConfigError::new(path.display().to_string(), c.to_string()).into(),
        Error::Frame(f) => ConfigError::new(path.display().to_string(), f).into(),
        other => other,
    })
}

fn scenario_with(path: &Path, seed: Option<u64>, steps: Option<u64>) -> Result<Scenario, Error> {
    let mut sc = input(path, load_scenario(path))?;
    if let Some(s) = seed {
        sc.seed = s;
    }
    if let Some(s) = steps {
        sc.max_steps = s;
    }
    Ok(sc)
}

fn out_dir(flag: Option<PathBuf>, sc: &Scenario) -> PathBuf {
    flag.or_else(|| sc.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn dispatch(cmd: Cmd) -> Result<(), Error> {
    match cmd {
        Cmd::Run { scenario, flags } => batch(&scenario, None, flags),
        Cmd::Replay { scenario, commands, flags } => batch(&scenario, Some(&commands), flags),
        Cmd::Analyze { input: path, nodes } => analyze(&path, nodes.as_deref()),
        Cmd::Serve { scenario, port, host, seed, paused, speed, frames_every, agents, out } => {
            let sc = scenario_with(&scenario, seed, None)?;
            let dir = out_dir(out, &sc);
            std::fs::create_dir_all(&dir)?;
            let options = ServeOptions {
                start_paused: paused,
                steps_per_second: speed,
                frames_every,
                agent_overlay: agents,
                command_log_path: Some(dir.join("commands.jsonl")),
            };
            serve_blocking(sc, options, SocketAddr::new(host, port))
        }
        Cmd::Oracle { nodes } => {
            let points = input(&nodes, load_points(&nodes))?;
            let steiner = steiner_length_oracle(&points);
            println!("MST {}", fmt_len(mst_length(&points)));
            if steiner.exact {
                println!("Steiner {}", fmt_len(steiner.length));
            } else {
                println!("Steiner {} (MST fallback, more than 5 nodes)", fmt_len(steiner.length));
            }
            Ok(())
        }
    }
}

fn fmt_len(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn batch(scenario: &Path, commands: Option<&Path>, flags: RunFlags) -> Result<(), Error> {
    let sc = scenario_with(scenario, flags.seed, flags.steps)?;
    let log = match commands {
        Some(p) => Some(input(p, load_command_log(p))?),
        None => None,
    };
    // A replay runs at least until its last logged command.
    let until = log
        .as_ref()
        .and_then(|l| l.entries().last())
        .map_or(sc.max_steps, |e| sc.max_steps.max(e.step));
    let opts = DriveOptions { out: out_dir(flags.out, &sc), until, agents: flags.agents };
    let s = drive(sc, log.as_ref(), &opts)?;
    for w in &s.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "steps {} ({:?}) checksum {:016x} length {} cycles {} connected {}",
        s.steps, s.termination, s.checksum, s.last.skeleton_length, s.last.cycle_count, s.last.nodes_connected
    );
    println!("output {}", opts.out.display());
    Ok(())
}

fn analyze(path: &Path, nodes: Option<&Path>) -> Result<(), Error> {
    let cfg = AnalysisConfig::default();
    let is_pgm = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    let metrics = if is_pgm {
        let (w, h, px) = input(path, read_pgm(path))?;
        let trail = TrailField::from_values(w, h, px.into_iter().map(f64::from).collect());
        let nodes = match nodes {
            Some(p) => input(p, load_scenario(p))?.nodes,
            None => Vec::new(),
        };
        measure_trail(&trail, &nodes, &cfg)
    } else {
        let text = input(path, std::fs::read_to_string(path).map_err(Error::from))?;
        let mut state: SimulationState = serde_json::from_str(&text)?;
        state.rebuild_occupancy();
        measure_state(&state, &cfg)
    };
    println!("{}", serde_json::to_string_pretty(&metrics)?);
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointSpec {
    Pair([f64; 2]),
    Xy { x: f64, y: f64 },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NodesFile {
    List(Vec<PointSpec>),
    Wrapped { nodes: Vec<PointSpec> },
}

/// Node centres from a JSON list of `[x, y]` pairs or `{x, y}` objects,
/// optionally wrapped in `{"nodes": [...]}` as in a scenario file.
fn load_points(path: &Path) -> Result<Vec<(f64, f64)>, Error> {
    let text = std::fs::read_to_string(path)?;
    let file: NodesFile = serde_json::from_str(&text)?;
    let specs = match file {
        NodesFile::List(v) | NodesFile::Wrapped { nodes: v } => v,
    };
    Ok(specs
        .into_iter()
        .map(|p| match p {
            PointSpec::Pair([x, y]) | PointSpec::Xy { x, y } => (x, y),
        })
        .collect())
}

fn serve_blocking(sc: Scenario, options: ServeOptions, addr: SocketAddr) -> Result<(), Error> {
    let log_path = options.command_log_path.clone();
    let handle = SimHandle::spawn(sc, options)?;
    let rt = tokio::runtime::Runtime::new()?;
    let log = rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        serve(listener, handle, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
    })?;
    if let Some(p) = log_path {
        eprintln!("{} commands logged to {}", log.len(), p.display());
    }
    Ok(())
}
