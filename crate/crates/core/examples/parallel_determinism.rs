//! Deterministic mode gives bitwise identical fields for any worker count;
//! fast mode differs from it only by rounding. Both are checked against the
//! untiled serial oracle.
//!
//! cargo run --release --example parallel_determinism -- [scale] [steps]

use tilepic::deck::{preset, Preset};
use tilepic::engine::{EngineOptions, MergeMode, SimState};
use tilepic::reference::{naive_run, NaiveState};
use tilepic::Result;

fn bz(s: &SimState) -> Vec<f64> {
    s.emf.b.interior().into_iter().map(|v| v.z).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `(deterministic runs identical, fast vs serial, engine vs naive)`.
pub fn demo(scale: f64, steps: u64) -> Result<(bool, f64, f64)> {
    let cfg = preset(Preset::Weibel, scale)?.config;
    let run = |threads, mode| -> Result<SimState> {
        let mut s = SimState::new(cfg.clone(), EngineOptions { threads, mode })?;
        for _ in 0..steps {
            s.step()?;
        }
        Ok(s)
    };
    let serial = run(1, MergeMode::Deterministic)?;
    let mut identical = true;
    for threads in [2, 4] {
        let s = run(threads, MergeMode::Deterministic)?;
        let same = s.emf == serial.emf;
        println!("deterministic, {threads} threads: bitwise identical = {same}");
        identical &= same;
    }
    let fast = run(4, MergeMode::Fast)?;
    let d_fast = max_diff(&bz(&fast), &bz(&serial));
    println!("fast, 4 threads: max |ΔBz| = {d_fast:.3e}");

    let mut naive = NaiveState::from_sim(&SimState::new(cfg.clone(), EngineOptions::default())?)?;
    naive_run(&mut naive, steps)?;
    let d_naive = max_diff(&naive.b_component(2), &bz(&serial));
    println!("untiled serial oracle: max |ΔBz| = {d_naive:.3e}");
    Ok((identical, d_fast, d_naive))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let scale = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.064);
    let steps = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(50);
    demo(scale, steps)?;
    Ok(())
}
