//! A cold plasma at rest is an exact fixpoint: no current, no fields, no motion.
//!
//! cargo run --release --example cold_plasma -- [scale] [steps]

use tilepic::deck::{preset, Preset};
use tilepic::engine::{EngineOptions, SimState};
use tilepic::{Result, Vec3};

pub fn demo(scale: f64, steps: u64) -> Result<bool> {
    let deck = preset(Preset::Cold, scale)?;
    let mut state = SimState::new(deck.config, EngineOptions::default())?;
    let before = state.species[0].map.particles.clone();
    let zero = |g: &tilepic::Grid2<Vec3>| g.as_slice().iter().all(|v| *v == Vec3::ZERO);
    let mut quiet = true;
    for _ in 0..steps {
        state.step()?;
        quiet &= zero(&state.current.j) && zero(&state.emf.e) && zero(&state.emf.b);
    }
    let unmoved = state.species[0].map.particles == before;
    println!(
        "{}x{} grid, {} particles, {steps} steps: fields quiet = {quiet}, particles unmoved = {unmoved}",
        state.cfg.nx,
        state.cfg.ny,
        state.particle_count()
    );
    Ok(quiet && unmoved)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let scale = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.128);
    let steps = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(200);
    demo(scale, steps)?;
    Ok(())
}
