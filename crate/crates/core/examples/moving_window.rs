//! A moving window following a light-speed front: the box advances one cell
//! whenever light has crossed one, dropping plasma on the left and loading
//! fresh plasma on the right.
//!
//! cargo run --release --example moving_window -- [steps]

use tilepic::engine::{EngineOptions, SimState};
use tilepic::{Result, SimConfig, SpeciesSpec, Vec3};

/// `(window shifts, particle counts per step)`.
pub fn demo(steps: u64) -> Result<(u64, Vec<usize>)> {
    let cfg = SimConfig {
        nx: 48,
        ny: 16,
        tile_nx: 8,
        tile_ny: 8,
        moving_window: true,
        species: vec![SpeciesSpec::new("electrons", -1.0, (2, 2)).with_thermal(Vec3::new(0.05, 0.05, 0.05))],
        ..SimConfig::default()
    };
    let mut state = SimState::new(cfg, EngineOptions::default())?;
    // a transverse pulse entering from the right edge region
    for j in 0..16 {
        for i in 36..44 {
            let a = ((i - 36) as f64 / 8.0 * std::f64::consts::PI).sin();
            state.emf.e[(i, j)].y = 0.05 * a;
            state.emf.b[(i, j)].z = 0.05 * a;
        }
    }
    state.emf.refresh_guards();
    let mut counts = vec![state.particle_count()];
    for _ in 0..steps {
        state.step()?;
        counts.push(state.particle_count());
    }
    let (e, b) = state.field_energy();
    println!(
        "{steps} steps: window moved {} cells ({:.2} in x), {} particles, field energy {:.3e}",
        state.window_shifts,
        state.window_shifts as f64 * state.cfg.dx,
        state.particle_count(),
        e + b
    );
    Ok((state.window_shifts, counts))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let steps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    demo(steps)?;
    Ok(())
}
