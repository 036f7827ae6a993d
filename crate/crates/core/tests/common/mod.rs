#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tilepic::engine::{EngineOptions, SimState};
use tilepic::fields::YeeGrid;
use tilepic::tiling::{TileGeometry, TileMap};
use tilepic::{Particle, SimConfig, SpeciesSpec, Vec3};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_vec(rng: &mut ChaCha8Rng, amp: f64) -> Vec3 {
    Vec3::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp), rng.gen_range(-amp..amp))
}

pub fn small_config(n: usize, tile: usize) -> SimConfig {
    SimConfig {
        nx: n,
        ny: n,
        dx: 0.1,
        dy: 0.1,
        dt: 0.07,
        tile_nx: tile,
        tile_ny: tile,
        guard: 2,
        species: vec![
            SpeciesSpec::new("electrons", -1.0, (2, 2)),
            SpeciesSpec::new("ions", 20.0, (1, 2)),
        ],
        ..SimConfig::default()
    }
}

/// Random fields and `per_species` randomly placed particles per species.
pub fn random_state(seed: u64, n: usize, tile: usize, per_species: usize, options: EngineOptions) -> SimState {
    let cfg = small_config(n, tile);
    let mut r = rng(seed);
    let mut emf = YeeGrid::new(n, n, cfg.guard, cfg.dx, cfg.dy);
    for v in emf.e.as_mut_slice() {
        *v = rand_vec(&mut r, 0.5);
    }
    for v in emf.b.as_mut_slice() {
        *v = rand_vec(&mut r, 0.5);
    }
    let geometry = TileGeometry::new(n, n, tile, tile);
    let species = cfg
        .species
        .iter()
        .map(|spec| {
            let ps: Vec<Particle> = (0..per_species)
                .map(|_| Particle {
                    ix: r.gen_range(0..n as i32),
                    iy: r.gen_range(0..n as i32),
                    x: r.gen(),
                    y: r.gen(),
                    u: rand_vec(&mut r, 2.0),
                })
                .collect();
            (spec.clone(), TileMap::from_particles(geometry, ps))
        })
        .collect();
    SimState::from_parts(cfg, Some(emf), species, options).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn component(g: &tilepic::Grid2<Vec3>, c: usize) -> Vec<f64> {
    g.interior().into_iter().map(|v| v.get(c)).collect()
}

/// Bit patterns of every particle, sorted, per tile.
pub fn tile_multisets(map: &TileMap) -> Vec<Vec<[u64; 7]>> {
    (0..map.n_tiles())
        .map(|t| {
            let mut v: Vec<[u64; 7]> = map.section(t).iter().map(Particle::bits).collect();
            v.sort_unstable();
            v
        })
        .collect()
}
