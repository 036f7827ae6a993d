//! The five-step tile sort on a two-tile example, then on a larger random
//! almost-sorted array.
//!
//! cargo run --example tile_sort

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tilepic::tiling::{TileGeometry, TileMap};
use tilepic::{Particle, Result};

fn tags(map: &TileMap, t: usize) -> Vec<u32> {
    let mut v: Vec<u32> = map.section(t).iter().map(|p| p.u.x as u32).collect();
    v.sort_unstable();
    v
}

/// Copies made by the two-tile example and by the random one.
pub fn demo(n_random: usize) -> Result<(usize, usize)> {
    // two 2×1-cell tiles; particle k carries tag k in u.x
    let geometry = TileGeometry::new(4, 1, 2, 1);
    let tile_of = [1, 0, 1, 1, 1, 0, 0, 0, 1, 0];
    let particles: Vec<Particle> = tile_of
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut p = Particle::at_rest(2 * t + (k as i32 % 2), 0, 0.5, 0.5);
            p.u.x = k as f64;
            p
        })
        .collect();
    let mut map = TileMap { geometry, particles, tile_offset: vec![0, 4, 10] };

    let new_offsets = map.count_and_prefix();
    let leaving = map.register_leaving(&new_offsets);
    let buffers = map.register_entering(&new_offsets, leaving)?;
    println!("new offsets  {new_offsets:?}");
    println!("target slots {:?}", buffers.target_idx);
    println!("source slots {:?}", buffers.source_idx);
    let copies = map.apply_moves(&buffers);
    map.tile_offset = new_offsets;
    println!("tile 0 {:?}, tile 1 {:?}, {copies} copies", tags(&map, 0), tags(&map, 1));

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let geometry = TileGeometry::new(64, 64, 8, 8);
    let ps: Vec<Particle> = (0..n_random)
        .map(|_| Particle::at_rest(rng.gen_range(0..64), rng.gen_range(0..64), rng.gen(), rng.gen()))
        .collect();
    let mut big = TileMap::from_particles(geometry, ps);
    for p in &mut big.particles {
        if rng.gen_bool(0.1) {
            p.ix = (p.ix + rng.gen_range(-1..=1)).rem_euclid(64);
            p.iy = (p.iy + rng.gen_range(-1..=1)).rem_euclid(64);
        }
    }
    let stats = big.sort_tiles()?;
    println!("{n_random} particles, 10% nudged: {} copies, sorted = {}", stats.copies, big.is_sorted());
    Ok((copies, stats.copies))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    demo(100_000)?;
    Ok(())
}
