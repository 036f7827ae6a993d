//! Tile decomposition and the tile-sorted particle container.
//!
//! All particles of a species live in one contiguous array. The bookmark
//! array `tile_offset` maps tile `t` to the section
//! `tile_offset[t]..tile_offset[t + 1]`, and every particle in that section
//! lies in tile `t`.
//!
//! After a push only a few particles change tile, so [`TileMap::sort_tiles`]
//! repairs the ordering in five steps instead of re-sorting:
//!
//! 1. count particles per tile at their new position and prefix-sum the
//!    counts into new section bounds;
//! 2. register every slot whose occupant no longer belongs to the tile that
//!    now owns the slot (`target_idx`, the holes);
//! 3. register every particle sitting outside its tile's new section
//!    (`source_idx`, the entering particles) — per tile this balances 2;
//! 4. gather the registered particles;
//! 5. scatter them into the holes of their destination tile.
//!
//! Particles that stay in a slot owned by their tile are never touched.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::particle::Particle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileGeometry {
    pub nx: usize,
    pub ny: usize,
    pub tile_nx: usize,
    pub tile_ny: usize,
}

impl TileGeometry {
    pub fn new(nx: usize, ny: usize, tile_nx: usize, tile_ny: usize) -> Self {
        assert!(nx % tile_nx == 0 && ny % tile_ny == 0, "tiles must divide the grid");
        TileGeometry { nx, ny, tile_nx, tile_ny }
    }

    pub fn tiles_x(&self) -> usize {
        self.nx / self.tile_nx
    }

    pub fn tiles_y(&self) -> usize {
        self.ny / self.tile_ny
    }

    pub fn n_tiles(&self) -> usize {
        self.tiles_x() * self.tiles_y()
    }

    /// Tile containing cell `(ix, iy)`.
    #[inline(always)]
    pub fn tile_of_cell(&self, ix: i32, iy: i32) -> usize {
        debug_assert!(
            ix >= 0 && iy >= 0 && (ix as usize) < self.nx && (iy as usize) < self.ny,
            "cell ({ix}, {iy}) outside {}x{} grid",
            self.nx,
            self.ny
        );
        (iy as usize / self.tile_ny) * self.tiles_x() + ix as usize / self.tile_nx
    }

    #[inline(always)]
    pub fn tile_of(&self, p: &Particle) -> usize {
        self.tile_of_cell(p.ix, p.iy)
    }

    /// First interior cell of tile `t`.
    pub fn tile_origin(&self, t: usize) -> (i32, i32) {
        let tx = t % self.tiles_x();
        let ty = t / self.tiles_x();
        ((tx * self.tile_nx) as i32, (ty * self.tile_ny) as i32)
    }
}

/// Per-tile move lists built by the sort.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MoveBuffers {
    /// `source_idx[t]`: indices of particles that must move into tile `t`.
    pub source_idx: Vec<Vec<usize>>,
    /// `target_idx[t]`: slots of tile `t`'s new section that must be refilled.
    pub target_idx: Vec<Vec<usize>>,
}

impl MoveBuffers {
    pub fn registered(&self) -> usize {
        self.source_idx.iter().map(Vec::len).sum()
    }

    pub fn is_balanced(&self) -> bool {
        self.source_idx.iter().zip(&self.target_idx).all(|(s, t)| s.len() == t.len())
    }
}

/// Outcome of one sort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SortStats {
    /// Particles copied to a new slot.
    pub copies: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TileMap {
    pub geometry: TileGeometry,
    pub particles: Vec<Particle>,
    /// Bookmark array, length `n_tiles + 1`.
    pub tile_offset: Vec<usize>,
}

impl TileMap {
    /// Builds a sorted map with a full counting sort.
    pub fn from_particles(geometry: TileGeometry, particles: Vec<Particle>) -> Self {
        let n_tiles = geometry.n_tiles();
        let mut counts = vec![0usize; n_tiles];
        for p in &particles {
            counts[geometry.tile_of(p)] += 1;
        }
        let tile_offset = prefix_sum(&counts);
        let mut cursor = tile_offset.clone();
        let mut sorted = vec![Particle::default(); particles.len()];
        for p in particles {
            let t = geometry.tile_of(&p);
            sorted[cursor[t]] = p;
            cursor[t] += 1;
        }
        TileMap { geometry, particles: sorted, tile_offset }
    }

    pub fn n_tiles(&self) -> usize {
        self.geometry.n_tiles()
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn section(&self, t: usize) -> &[Particle] {
        &self.particles[self.tile_offset[t]..self.tile_offset[t + 1]]
    }

    /// Disjoint mutable views of every tile section.
    pub fn sections_mut(&mut self) -> Vec<&mut [Particle]> {
        split_sections(&mut self.particles, &self.tile_offset)
    }

    /// True iff the bookmark array is consistent and every particle sits in
    /// its own tile's section.
    pub fn is_sorted(&self) -> bool {
        let off = &self.tile_offset;
        if off.len() != self.n_tiles() + 1 || off[0] != 0 || *off.last().unwrap() != self.particles.len() {
            return false;
        }
        (0..self.n_tiles()).all(|t| off[t] <= off[t + 1] && self.section(t).iter().all(|p| self.geometry.tile_of(p) == t))
    }

    /// Step 1: bookmark array for the particles' current tiles.
    pub fn count_and_prefix(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_tiles()];
        for p in &self.particles {
            counts[self.geometry.tile_of(p)] += 1;
        }
        prefix_sum(&counts)
    }

    /// Step 2: the holes of every tile's new section.
    pub fn register_leaving(&self, new_offsets: &[usize]) -> MoveBuffers {
        let n = self.n_tiles();
        let target_idx = (0..n)
            .map(|t| {
                (new_offsets[t]..new_offsets[t + 1])
                    .filter(|&k| self.geometry.tile_of(&self.particles[k]) != t)
                    .collect()
            })
            .collect();
        MoveBuffers { source_idx: vec![Vec::new(); n], target_idx }
    }

    /// Step 3: every particle outside its tile's new section, grouped by
    /// destination tile.
    pub fn register_entering(&self, new_offsets: &[usize], mut buffers: MoveBuffers) -> Result<MoveBuffers> {
        // every misplaced particle occupies some tile's hole
        for &k in buffers.target_idx.iter().flatten() {
            let dest = self.geometry.tile_of(&self.particles[k]);
            buffers.source_idx[dest].push(k);
        }
        check_balance(&buffers, new_offsets)?;
        Ok(buffers)
    }

    /// Steps 4 and 5: gather the registered particles, then write each one
    /// into a hole of its destination tile. Returns the number of copies.
    pub fn apply_moves(&mut self, buffers: &MoveBuffers) -> usize {
        let moving: Vec<Vec<Particle>> =
            buffers.source_idx.iter().map(|src| src.iter().map(|&k| self.particles[k]).collect()).collect();
        let mut copies = 0;
        for (holes, ps) in buffers.target_idx.iter().zip(&moving) {
            for (&k, p) in holes.iter().zip(ps) {
                self.particles[k] = *p;
                copies += 1;
            }
        }
        copies
    }

    /// Restores strict tile ordering (serial, deterministic slot assignment).
    pub fn sort_tiles(&mut self) -> Result<SortStats> {
        let new_offsets = self.count_and_prefix();
        let buffers = self.register_leaving(&new_offsets);
        let buffers = self.register_entering(&new_offsets, buffers)?;
        let copies = self.apply_moves(&buffers);
        self.tile_offset = new_offsets;
        Ok(SortStats { copies })
    }

    /// Parallel variant of [`sort_tiles`](Self::sort_tiles).
    ///
    /// Entering particles reserve slots in their destination's list with an
    /// atomic counter, so which hole a given particle fills is not
    /// deterministic. The per-tile particle multisets are.
    pub fn sort_tiles_parallel(&mut self) -> Result<SortStats> {
        let geom = self.geometry;
        let n = self.n_tiles();
        let tiles: Vec<u32> = self.particles.par_iter().map(|p| geom.tile_of(p) as u32).collect();

        // (1) per-tile counts via per-chunk histograms
        let counts = tiles
            .par_chunks(1 << 16)
            .fold(
                || vec![0usize; n],
                |mut acc, chunk| {
                    for &t in chunk {
                        acc[t as usize] += 1;
                    }
                    acc
                },
            )
            .reduce(
                || vec![0usize; n],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        let new_offsets = prefix_sum(&counts);

        // (2) holes, scanned per destination section
        let target_idx: Vec<Vec<usize>> = (0..n)
            .into_par_iter()
            .map(|t| (new_offsets[t]..new_offsets[t + 1]).filter(|&k| tiles[k] as usize != t).collect())
            .collect();

        // (3) entering particles, reserved atomically into fixed-size lists
        let fill: Vec<AtomicUsize> = (0..n).map(|_| AtomicUsize::new(0)).collect();
        let slots: Vec<Vec<AtomicUsize>> =
            target_idx.iter().map(|h| (0..h.len()).map(|_| AtomicUsize::new(usize::MAX)).collect()).collect();
        let overflow = AtomicUsize::new(0);
        target_idx.par_iter().for_each(|holes| {
            for &k in holes {
                let dest = tiles[k] as usize;
                let r = fill[dest].fetch_add(1, Ordering::Relaxed);
                match slots[dest].get(r) {
                    Some(s) => s.store(k, Ordering::Relaxed),
                    None => {
                        overflow.fetch_add(1, Ordering::Relaxed);
                    }
                }
            }
        });
        if overflow.load(Ordering::Relaxed) != 0 {
            return Err(Error::SortInvariant("more entering particles than holes".into()));
        }
        let source_idx: Vec<Vec<usize>> =
            slots.into_iter().map(|s| s.into_iter().map(AtomicUsize::into_inner).collect()).collect();
        let buffers = MoveBuffers { source_idx, target_idx };
        check_balance(&buffers, &new_offsets)?;

        // (4) gather
        let moving: Vec<Vec<Particle>> = buffers
            .source_idx
            .par_iter()
            .map(|src| src.iter().map(|&k| self.particles[k]).collect())
            .collect();
        // (5) scatter; every hole of tile t lies in t's new section
        let copies = buffers.registered();
        let sections = split_sections(&mut self.particles, &new_offsets);
        sections.into_par_iter().enumerate().for_each(|(t, section)| {
            let base = new_offsets[t];
            for (&k, p) in buffers.target_idx[t].iter().zip(&moving[t]) {
                section[k - base] = *p;
            }
        });
        self.tile_offset = new_offsets;
        Ok(SortStats { copies })
    }
}

fn check_balance(buffers: &MoveBuffers, new_offsets: &[usize]) -> Result<()> {
    for (t, (s, h)) in buffers.source_idx.iter().zip(&buffers.target_idx).enumerate() {
        if s.len() != h.len() {
            return Err(Error::SortInvariant(format!(
                "tile {t}: {} entering particles for {} holes (section {}..{})",
                s.len(),
                h.len(),
                new_offsets[t],
                new_offsets[t + 1]
            )));
        }
    }
    Ok(())
}

/// Exclusive prefix sum with the total appended.
pub fn prefix_sum(counts: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(counts.len() + 1);
    let mut acc = 0;
    out.push(0);
    for &c in counts {
        acc += c;
        out.push(acc);
    }
    out
}

fn split_sections<'a, T>(mut rest: &'a mut [T], offsets: &[usize]) -> Vec<&'a mut [T]> {
    let mut out = Vec::with_capacity(offsets.len().saturating_sub(1));
    for w in offsets.windows(2) {
        let (head, tail) = rest.split_at_mut(w[1] - w[0]);
        out.push(head);
        rest = tail;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec3::Vec3;

    fn tagged(ix: i32, tag: f64) -> Particle {
        Particle { ix, iy: 0, x: 0.5, y: 0.5, u: Vec3::new(tag, 0.0, 0.0) }
    }

    #[test]
    fn tile_index_examples() {
        let g = TileGeometry::new(500, 500, 25, 25);
        assert_eq!(g.tile_of_cell(0, 0), 0);
        assert_eq!(g.tile_of_cell(24, 0), 0);
        assert_eq!(g.tile_of_cell(25, 0), 1);
        assert_eq!(g.n_tiles(), 400);
        assert_eq!(g.tile_of_cell(499, 499), 399);
        assert_eq!(g.tile_origin(21), (25, 25));
    }

    #[test]
    fn sorted_input_is_untouched() {
        let g = TileGeometry::new(8, 4, 4, 4);
        let ps: Vec<Particle> = (0..8).map(|i| tagged(i, i as f64)).collect();
        let mut m = TileMap::from_particles(g, ps);
        let before = m.clone();
        assert_eq!(m.count_and_prefix(), m.tile_offset);
        let b = m.register_leaving(&m.tile_offset.clone());
        assert!(b.target_idx.iter().all(Vec::is_empty));
        assert_eq!(m.sort_tiles().unwrap().copies, 0);
        assert_eq!(m, before);
    }

    /// Two tiles: four particles enter tile 0 and three leave it, so its
    /// section grows by one slot and the tile-1 particle in that slot is
    /// relocated too.
    fn two_tile_fixture() -> TileMap {
        let g = TileGeometry::new(4, 2, 2, 2);
        // old sections: tile 0 = slots 0..4, tile 1 = slots 4..10
        let mut ps = Vec::new();
        for k in 0..4 {
            ps.push(tagged(0, k as f64));
        }
        for k in 4..10 {
            ps.push(tagged(2, k as f64));
        }
        let mut m = TileMap::from_particles(g, ps);
        assert_eq!(m.tile_offset, vec![0, 4, 10]);
        for k in [0, 2, 3] {
            m.particles[k].ix = 2;
        }
        for k in [5, 6, 7, 9] {
            m.particles[k].ix = 1;
        }
        m
    }

    #[test]
    fn two_tile_walkthrough() {
        let mut m = two_tile_fixture();
        let off = m.count_and_prefix();
        assert_eq!(off, vec![0, 5, 10]);
        let b = m.register_leaving(&off);
        assert_eq!(b.target_idx, vec![vec![0, 2, 3, 4], vec![5, 6, 7, 9]]);
        let b = m.register_entering(&off, b).unwrap();
        assert_eq!(b.source_idx, vec![vec![5, 6, 7, 9], vec![0, 2, 3, 4]]);
        assert!(b.is_balanced());
        let copies = m.apply_moves(&b);
        m.tile_offset = off;
        assert_eq!(copies, 8);
        assert!(m.is_sorted());
        let tags = |t: usize| {
            let mut v: Vec<i64> = m.section(t).iter().map(|p| p.u.x as i64).collect();
            v.sort();
            v
        };
        assert_eq!(tags(0), vec![1, 5, 6, 7, 9]);
        assert_eq!(tags(1), vec![0, 2, 3, 4, 8]);
    }

    #[test]
    fn parallel_sort_matches_serial_multisets() {
        let mut a = two_tile_fixture();
        let mut b = two_tile_fixture();
        let sa = a.sort_tiles().unwrap();
        let sb = b.sort_tiles_parallel().unwrap();
        assert_eq!(sa, sb);
        assert!(b.is_sorted());
        assert_eq!(a.tile_offset, b.tile_offset);
        for t in 0..2 {
            let mut x: Vec<_> = a.section(t).iter().map(Particle::bits).collect();
            let mut y: Vec<_> = b.section(t).iter().map(Particle::bits).collect();
            x.sort();
            y.sort();
            assert_eq!(x, y);
        }
    }

    #[test]
    fn imbalance_is_reported() {
        let m = two_tile_fixture();
        let off = m.count_and_prefix();
        let mut b = m.register_leaving(&off);
        b.target_idx[0].pop();
        assert!(matches!(m.register_entering(&off, b), Err(Error::SortInvariant(_))));
    }

    #[test]
    fn sort_is_idempotent() {
        let mut m = two_tile_fixture();
        m.sort_tiles().unwrap();
        let once = m.clone();
        assert_eq!(m.sort_tiles().unwrap().copies, 0);
        assert_eq!(m, once);
    }
}
