//! Counter-streaming electrons and positrons: the Weibel instability turns
//! streaming kinetic energy into magnetic field.
//!
//! cargo run --release --example weibel -- [scale] [steps] [out_dir]

use tilepic::deck::{preset, Preset};
use tilepic::engine::{run, EngineOptions, MergeMode, ReportKind, ReportSink, SimState};
use tilepic::report::DirSink;
use tilepic::{GridReport, Result};

/// Magnetic energy at every report, as `(step, energy)`.
pub fn demo(scale: f64, steps: u64, out: Option<&str>) -> Result<Vec<(u64, f64)>> {
    let mut deck = preset(Preset::Weibel, scale)?;
    deck.config.report_every = 10;
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut state = SimState::new(deck.config, EngineOptions { threads, mode: MergeMode::Fast })?;
    state.reports = vec![ReportKind::Energy];

    let mut energies: Vec<GridReport> = Vec::new();
    let mut files = match out {
        Some(dir) => {
            state.reports = vec![ReportKind::Energy, ReportKind::BAbs, ReportKind::Charge];
            Some(DirSink::new(dir)?)
        }
        None => None,
    };
    let mut sinks: Vec<&mut dyn ReportSink> = vec![&mut energies];
    if let Some(f) = files.as_mut() {
        sinks.push(f);
    }
    run(&mut state, steps, &mut sinks)?;

    let series: Vec<(u64, f64)> =
        energies.iter().filter(|r| r.name == "energy").map(|r| (r.step, r.data[1])).collect();
    for (step, eb) in &series {
        let bar = "#".repeat(((eb.max(1e-30).log10() + 30.0) * 1.5) as usize);
        println!("{step:>5} {eb:>12.4e} {bar}");
    }
    Ok(series)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let scale = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.128);
    let steps = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(400);
    demo(scale, steps, args.get(3).map(String::as_str))?;
    Ok(())
}
