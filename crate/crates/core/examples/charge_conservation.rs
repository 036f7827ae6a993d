//! The current deposit satisfies the discrete continuity equation to
//! rounding error, including steps that cross one or two cell faces.
//!
//! cargo run --example charge_conservation -- [trials]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tilepic::deposit::{deposit_current, split_trajectory};
use tilepic::fields::{update_gc_add, CurrentGrid};
use tilepic::particle::CellPos;
use tilepic::pusher::push_position;
use tilepic::reference::{charge_density, continuity_residual, Mesh};
use tilepic::{Particle, Result, Vec3};

/// Worst residual and how many trials crossed 0, 1 and 2 faces.
pub fn demo(trials: usize) -> Result<(f64, [usize; 3])> {
    let mesh = Mesh { nx: 6, ny: 6, dx: 0.1, dy: 0.1 };
    let (dt, q) = (0.07, -0.25);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    let mut segments = [0; 3];
    for _ in 0..trials {
        let mut p = Particle::at_rest(rng.gen_range(0..6), rng.gen_range(0..6), rng.gen(), rng.gen());
        p.u = Vec3::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0), rng.gen_range(-5.0..5.0));
        let old = p.position();
        let new = push_position(&p, dt, mesh.dx, mesh.dy)?.pos;
        segments[split_trajectory(old, new)?.len() - 1] += 1;

        let mut j = CurrentGrid::new(mesh.nx, mesh.ny, 2);
        deposit_current(old, new, p.u, q, dt, (mesh.dx, mesh.dy), &mut j.j)?;
        update_gc_add(&mut j);
        let jflat: Vec<[f64; 3]> = j.j.interior().into_iter().map(|v| [v.x, v.y, v.z]).collect();

        let before = charge_density(&[p], q, &mesh);
        p.set_position(CellPos::new(new.ix.rem_euclid(6), new.iy.rem_euclid(6), new.x, new.y));
        let after = charge_density(&[p], q, &mesh);
        worst = worst.max(continuity_residual(&jflat, &before, &after, dt, &mesh));
    }
    println!("{trials} random steps, segments 1/2/3: {segments:?}, worst residual {worst:.3e}");
    Ok((worst, segments))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10_000);
    demo(trials)?;
    Ok(())
}
