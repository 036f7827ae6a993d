//! Particle records and species initialization.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{SimConfig, SpeciesSpec};
use crate::vec3::Vec3;

/// A macro-particle: integer cell plus fractional offset in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Particle {
    pub ix: i32,
    pub iy: i32,
    pub x: f64,
    pub y: f64,
    /// Generalized velocity `γv`.
    pub u: Vec3,
}

impl Particle {
    pub fn at_rest(ix: i32, iy: i32, x: f64, y: f64) -> Self {
        Particle { ix, iy, x, y, u: Vec3::ZERO }
    }

    pub fn position(&self) -> CellPos {
        CellPos { ix: self.ix, iy: self.iy, x: self.x, y: self.y }
    }

    pub fn set_position(&mut self, p: CellPos) {
        self.ix = p.ix;
        self.iy = p.iy;
        self.x = p.x;
        self.y = p.y;
    }

    /// Bitwise identity key, used when comparing particle multisets.
    pub fn bits(&self) -> [u64; 7] {
        [
            self.ix as u32 as u64,
            self.iy as u32 as u64,
            self.x.to_bits(),
            self.y.to_bits(),
            self.u.x.to_bits(),
            self.u.y.to_bits(),
            self.u.z.to_bits(),
        ]
    }
}

/// Position in cell units: cell index plus in-cell offset.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellPos {
    pub ix: i32,
    pub iy: i32,
    pub x: f64,
    pub y: f64,
}

impl CellPos {
    pub fn new(ix: i32, iy: i32, x: f64, y: f64) -> Self {
        CellPos { ix, iy, x, y }
    }
}

/// Words of ChaCha8 keystream reserved per particle.
const WORDS_PER_PARTICLE: u128 = 64;

/// Stream id for the initial load of species number `species_index`.
pub fn init_stream(species_index: usize) -> u64 {
    species_index as u64
}

/// Stream id for moving-window injection of species number `species_index`.
pub fn injection_stream(species_index: usize) -> u64 {
    (1u64 << 32) | species_index as u64
}

/// Draws the generalized velocity of particle `index` on `stream`.
///
/// The generator is ChaCha8 seeded from `seed`, switched to `stream` and
/// positioned at word `64 * index`, so each particle's draw depends only on
/// its key and never on the order (or the thread) that asked for it.
pub fn draw_velocity(spec: &SpeciesSpec, seed: u64, stream: u64, index: u64) -> Vec3 {
    if spec.u_th == Vec3::ZERO {
        return spec.u_fl;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(index as u128 * WORDS_PER_PARTICLE);
    let mut n = || -> f64 { StandardNormal.sample(&mut rng) };
    let (gx, gy, gz) = (n(), n(), n());
    Vec3::new(
        spec.u_fl.x + spec.u_th.x * gx,
        spec.u_fl.y + spec.u_th.y * gy,
        spec.u_fl.z + spec.u_th.z * gz,
    )
}

/// Loads the particles of one cell column `ix` (all `iy`), appending to `out`.
///
/// Particles sit on a uniform `ppc.0 × ppc.1` sub-lattice at offsets
/// `(k + ½) / ppc`. `key_column` is the global column used for the RNG key.
pub fn load_column(
    spec: &SpeciesSpec,
    ny: usize,
    ix: i32,
    key_column: u64,
    seed: u64,
    stream: u64,
    out: &mut Vec<Particle>,
) {
    let (px, py) = spec.ppc;
    for iy in 0..ny {
        load_cell(spec, ix, iy as i32, (key_column * ny as u64 + iy as u64) * (px * py) as u64, seed, stream, out);
    }
}

fn load_cell(
    spec: &SpeciesSpec,
    ix: i32,
    iy: i32,
    first_index: u64,
    seed: u64,
    stream: u64,
    out: &mut Vec<Particle>,
) {
    let (px, py) = spec.ppc;
    for ky in 0..py {
        let y = (ky as f64 + 0.5) / py as f64;
        for kx in 0..px {
            let x = (kx as f64 + 0.5) / px as f64;
            let index = first_index + (ky * px + kx) as u64;
            out.push(Particle { ix, iy, x, y, u: draw_velocity(spec, seed, stream, index) });
        }
    }
}

/// Initial particle load for `spec`: `nx·ny·ppc.0·ppc.1` particles in
/// cell-major order, velocities keyed by global particle index.
pub fn init_species(spec: &SpeciesSpec, species_index: usize, cfg: &SimConfig, seed: u64) -> Vec<Particle> {
    let (px, py) = spec.ppc;
    let per_cell = (px * py) as u64;
    let stream = init_stream(species_index);
    let mut out = Vec::with_capacity(cfg.nx * cfg.ny * px * py);
    for iy in 0..cfg.ny {
        for ix in 0..cfg.nx {
            let first = (iy * cfg.nx + ix) as u64 * per_cell;
            load_cell(spec, ix as i32, iy as i32, first, seed, stream, &mut out);
        }
    }
    out
}
