//! Command-line driver.
//!
//! Exit codes: 0 success, 2 bad usage, 3 deck syntax error, 4 invalid
//! configuration, 5 I/O error, 6 malformed report file, 7 simulation aborted.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use tilepic::deck::{parse_deck, preset_deck, Preset};
use tilepic::engine::{run, EngineOptions, MergeMode, SimState};
use tilepic::error::exit;
use tilepic::report::{read_report, report_to_csv, DirSink};
use tilepic::{Error, Result};

#[derive(Parser)]
#[command(name = "tpic", version, about = "Tiled 2D electromagnetic particle-in-cell simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a deck, writing reports to DIR.
    Run {
        deck: PathBuf,
        /// Worker threads.
        #[arg(long, env = "TPIC_THREADS")]
        threads: Option<usize>,
        /// Bitwise reproducible for any thread count.
        #[arg(long)]
        deterministic: bool,
        #[arg(long, default_value = "tpic-out")]
        out: PathBuf,
    },
    /// Print a preset deck (cold, warm or weibel).
    Preset {
        name: String,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Parse and check a deck.
    Validate { deck: PathBuf },
    /// Print a report file as CSV.
    ReportDump { file: PathBuf },
}

fn read_deck(path: &Path) -> Result<tilepic::deck::Deck> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    parse_deck(&text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::OK });
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("tpic: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Run { deck, threads, deterministic, out } => {
            let deck = read_deck(&deck)?;
            let threads = match threads {
                Some(0) => return Err(Error::InvalidArgument("--threads must be at least 1".into())),
                Some(n) => n,
                None => std::thread::available_parallelism().map_or(1, |n| n.get()),
            };
            let mode = if deterministic { MergeMode::Deterministic } else { MergeMode::Fast };
            let n_steps = deck.config.n_steps;
            let mut state = SimState::new(deck.config, EngineOptions { threads, mode })?;
            state.reports = deck.reports;
            let mut sink = DirSink::new(&out)?;
            let t0 = Instant::now();
            run(&mut state, n_steps, &mut [&mut sink])?;
            eprintln!(
                "{} steps, {} particles, {} reports in {} ({:.2} s)",
                n_steps,
                state.particle_count(),
                sink.written.len(),
                out.display(),
                t0.elapsed().as_secs_f64()
            );
            Ok(())
        }
        Cmd::Preset { name, scale } => {
            print!("{}", preset_deck(name.parse::<Preset>()?, scale)?);
            Ok(())
        }
        Cmd::Validate { deck } => {
            let d = read_deck(&deck)?;
            let c = &d.config;
            let particles: usize = c.species.iter().map(|s| s.ppc.0 * s.ppc.1 * c.nx * c.ny).sum();
            println!(
                "ok: {}x{} grid, {} tiles of {}x{}, {} species, {} particles",
                c.nx,
                c.ny,
                c.tiles_x() * c.tiles_y(),
                c.tile_nx,
                c.tile_ny,
                c.species.len(),
                particles
            );
            Ok(())
        }
        Cmd::ReportDump { file } => {
            let f = std::fs::File::open(&file)
                .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", file.display()))))?;
            let r = read_report(std::io::BufReader::new(f))?;
            let stdout = std::io::stdout();
            report_to_csv(std::io::BufWriter::new(stdout.lock()), &r)?;
            Ok(())
        }
    }
}
