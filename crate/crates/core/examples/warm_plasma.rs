//! Thermal plasma: total energy drift and the mean momentum over time.
//!
//! cargo run --release --example warm_plasma -- [scale] [steps]

use tilepic::deck::{preset, Preset};
use tilepic::engine::{EngineOptions, MergeMode, SimState};
use tilepic::{Result, Vec3};

fn total_energy(s: &SimState) -> f64 {
    let (e, b) = s.field_energy();
    e + b + s.kinetic_energy()
}

fn mean_u(s: &SimState) -> Vec3 {
    let ps = &s.species[0].map.particles;
    ps.iter().fold(Vec3::ZERO, |a, p| a + p.u) * (1.0 / ps.len() as f64)
}

/// Relative energy drift after `steps`.
pub fn demo(scale: f64, steps: u64) -> Result<f64> {
    let mut deck = preset(Preset::Warm, scale)?;
    deck.config.filter_passes = 1;
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut state = SimState::new(deck.config, EngineOptions { threads, mode: MergeMode::Fast })?;
    let w0 = total_energy(&state);
    println!("{:>6} {:>14} {:>28}", "step", "energy", "mean u");
    for k in 0..=steps {
        if k % 20 == 0 || k == steps {
            let u = mean_u(&state);
            println!("{k:>6} {:>14.6e} ({:+.2e}, {:+.2e}, {:+.2e})", total_energy(&state), u.x, u.y, u.z);
        }
        if k < steps {
            state.step()?;
        }
    }
    let drift = (total_energy(&state) - w0) / w0;
    println!("relative energy drift: {drift:.3e}");
    Ok(drift)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let scale = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.064);
    let steps = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(100);
    demo(scale, steps)?;
    Ok(())
}
