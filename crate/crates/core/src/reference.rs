//! Brute-force oracles.
//!
//! Everything here works on flat periodic arrays without guard cells or
//! tiles and is written independently of the engine: interpolation is
//! floor based, trajectories are cut by classifying sub-interval midpoints,
//! and fluxes use the segment-midpoint form. Only plain data types
//! ([`Particle`], [`SimState`]) are shared.

use crate::config::SimConfig;
use crate::engine::SimState;
use crate::error::{Error, Result};
use crate::particle::Particle;
use crate::tiling::TileGeometry;

/// Grid shape and spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl Mesh {
    pub fn of(cfg: &SimConfig) -> Self {
        Mesh { nx: cfg.nx, ny: cfg.ny, dx: cfg.dx, dy: cfg.dy }
    }

    #[inline(always)]
    pub fn at(&self, i: i64, j: i64) -> usize {
        let i = i.rem_euclid(self.nx as i64) as usize;
        let j = j.rem_euclid(self.ny as i64) as usize;
        j * self.nx + i
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }
}

#[derive(Debug, Clone)]
pub struct NaiveSpecies {
    pub name: String,
    pub q: f64,
    pub q_over_m: f64,
    pub particles: Vec<Particle>,
}

/// Untiled serial simulation state. Field arrays are row-major, x fastest.
#[derive(Debug, Clone)]
pub struct NaiveState {
    pub mesh: Mesh,
    pub dt: f64,
    pub filter_passes: usize,
    pub step: u64,
    pub e: Vec<[f64; 3]>,
    pub b: Vec<[f64; 3]>,
    pub j: Vec<[f64; 3]>,
    pub species: Vec<NaiveSpecies>,
}

impl NaiveState {
    /// Copies the interior fields and particles of an engine state.
    pub fn from_sim(s: &SimState) -> Result<Self> {
        if s.cfg.moving_window {
            return Err(Error::Unsupported("the naive oracle is periodic only".into()));
        }
        let arr = |g: &crate::grid::Grid2<crate::vec3::Vec3>| g.interior().into_iter().map(|v| [v.x, v.y, v.z]).collect();
        Ok(NaiveState {
            mesh: Mesh::of(&s.cfg),
            dt: s.cfg.dt,
            filter_passes: s.cfg.filter_passes,
            step: s.step_index,
            e: arr(&s.emf.e),
            b: arr(&s.emf.b),
            j: arr(&s.current.j),
            species: s
                .species
                .iter()
                .map(|sp| NaiveSpecies {
                    name: sp.spec.name.clone(),
                    q: sp.q,
                    q_over_m: 1.0 / sp.spec.m_over_q,
                    particles: sp.map.particles.clone(),
                })
                .collect(),
        })
    }

    pub fn b_component(&self, c: usize) -> Vec<f64> {
        self.b.iter().map(|v| v[c]).collect()
    }

    pub fn e_component(&self, c: usize) -> Vec<f64> {
        self.e.iter().map(|v| v[c]).collect()
    }

    pub fn j_component(&self, c: usize) -> Vec<f64> {
        self.j.iter().map(|v| v[c]).collect()
    }

    pub fn charge(&self, species: usize) -> Vec<f64> {
        let s = &self.species[species];
        charge_density(&s.particles, s.q, &self.mesh)
    }

    /// `(½Σ|E|²·dx·dy, ½Σ|B|²·dx·dy)`.
    pub fn field_energy(&self) -> (f64, f64) {
        let area = self.mesh.dx * self.mesh.dy;
        let mut ee = 0.0;
        let mut eb = 0.0;
        for j in 0..self.mesh.ny {
            for i in 0..self.mesh.nx {
                let k = j * self.mesh.nx + i;
                ee += self.e[k][0] * self.e[k][0] + self.e[k][1] * self.e[k][1] + self.e[k][2] * self.e[k][2];
                eb += self.b[k][0] * self.b[k][0] + self.b[k][1] * self.b[k][1] + self.b[k][2] * self.b[k][2];
            }
        }
        (0.5 * ee * area, 0.5 * eb * area)
    }

    pub fn kinetic_energy(&self) -> f64 {
        let mut total = 0.0;
        for s in &self.species {
            let mut sum = 0.0;
            for p in &s.particles {
                sum += (1.0 + p.u.x * p.u.x + p.u.y * p.u.y + p.u.z * p.u.z).sqrt() - 1.0;
            }
            total += s.q / s.q_over_m * sum * self.mesh.dx * self.mesh.dy;
        }
        total
    }
}

/// Offsets of the staggered components in cell units: E then B.
const E_STAGGER: [(f64, f64); 3] = [(0.5, 0.0), (0.0, 0.5), (0.0, 0.0)];
const B_STAGGER: [(f64, f64); 3] = [(0.0, 0.5), (0.5, 0.0), (0.5, 0.5)];

fn sample(field: &[[f64; 3]], mesh: &Mesh, p: &Particle, c: usize, (hx, hy): (f64, f64)) -> f64 {
    let sx = p.x - hx;
    let sy = p.y - hy;
    let (fx, fy) = (sx.floor(), sy.floor());
    let (wx, wy) = (sx - fx, sy - fy);
    let i = p.ix as i64 + fx as i64;
    let j = p.iy as i64 + fy as i64;
    field[mesh.at(i, j)][c] * (1.0 - wx) * (1.0 - wy)
        + field[mesh.at(i + 1, j)][c] * wx * (1.0 - wy)
        + field[mesh.at(i, j + 1)][c] * (1.0 - wx) * wy
        + field[mesh.at(i + 1, j + 1)][c] * wx * wy
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Relativistic Boris momentum update.
pub fn boris(u: [f64; 3], e: [f64; 3], b: [f64; 3], q_over_m: f64, dt: f64) -> [f64; 3] {
    let h = 0.5 * q_over_m * dt;
    let um: [f64; 3] = std::array::from_fn(|k| u[k] + h * e[k]);
    let g = (1.0 + um[0] * um[0] + um[1] * um[1] + um[2] * um[2]).sqrt();
    let t: [f64; 3] = std::array::from_fn(|k| h / g * b[k]);
    let t2 = t[0] * t[0] + t[1] * t[1] + t[2] * t[2];
    let s: [f64; 3] = std::array::from_fn(|k| 2.0 * t[k] / (1.0 + t2));
    let c1 = cross(um, t);
    let up: [f64; 3] = std::array::from_fn(|k| um[k] + c1[k]);
    let c2 = cross(up, s);
    std::array::from_fn(|k| um[k] + c2[k] + h * e[k])
}

/// New `(cell, offset)` after moving by `delta` cells.
fn advance_coord(cell: i32, frac: f64, delta: f64) -> (i32, f64) {
    let s = frac + delta;
    let f = s.floor();
    let mut r = s - f;
    let mut carry = f as i32;
    if r >= 1.0 {
        r = 0.0;
        carry += 1;
    }
    (cell + carry, r)
}

fn deposit_move(
    j: &mut [[f64; 3]],
    mesh: &Mesh,
    dt: f64,
    q: f64,
    vz: f64,
    old: &Particle,
    new: (i32, i32, f64, f64),
) -> Result<()> {
    let (di, dj) = (new.0 - old.ix, new.1 - old.iy);
    if di.abs() > 1 || dj.abs() > 1 {
        let (axis, carry) = if di.abs() > 1 { ('x', di) } else { ('y', dj) };
        return Err(Error::CourantBreach { axis, carry: carry as i64 });
    }
    let (x0, y0) = (old.x, old.y);
    let (ex, ey) = (di as f64 + new.2, dj as f64 + new.3);
    let (mx, my) = (ex - x0, ey - y0);
    let mut ts = vec![0.0];
    if di != 0 {
        ts.push(((if di > 0 { 1.0 } else { 0.0 }) - x0) / mx);
    }
    if dj != 0 {
        ts.push(((if dj > 0 { 1.0 } else { 0.0 }) - y0) / my);
    }
    ts.push(1.0);
    ts.sort_by(f64::total_cmp);

    for w in ts.windows(2) {
        let (ta, tb) = (w[0].clamp(0.0, 1.0), w[1].clamp(0.0, 1.0));
        if tb <= ta {
            continue;
        }
        let tm = 0.5 * (ta + tb);
        let (ox, oy) = ((x0 + tm * mx).floor(), (y0 + tm * my).floor());
        let (ax, ay) = (x0 + ta * mx - ox, y0 + ta * my - oy);
        let (bx, by) = if tb == 1.0 { (ex - ox, ey - oy) } else { (x0 + tb * mx - ox, y0 + tb * my - oy) };
        let (i, k) = (old.ix as i64 + ox as i64, old.iy as i64 + oy as i64);
        let (sx, sy) = (bx - ax, by - ay);
        let (xm, ym) = (0.5 * (ax + bx), 0.5 * (ay + by));
        let cx = q * mesh.dx / dt * sx;
        let cy = q * mesh.dy / dt * sy;
        j[mesh.at(i, k)][0] += cx * (1.0 - ym);
        j[mesh.at(i, k + 1)][0] += cx * ym;
        j[mesh.at(i, k)][1] += cy * (1.0 - xm);
        j[mesh.at(i + 1, k)][1] += cy * xm;
        let cz = q * vz * (tb - ta);
        j[mesh.at(i, k)][2] += cz * (1.0 - xm) * (1.0 - ym);
        j[mesh.at(i + 1, k)][2] += cz * xm * (1.0 - ym);
        j[mesh.at(i, k + 1)][2] += cz * (1.0 - xm) * ym;
        j[mesh.at(i + 1, k + 1)][2] += cz * xm * ym;
    }
    Ok(())
}

/// Moves one particle through `(e, b)` and deposits its current into `j`.
pub fn naive_particle_step(
    p: &mut Particle,
    e: &[[f64; 3]],
    b: &[[f64; 3]],
    j: &mut [[f64; 3]],
    mesh: &Mesh,
    dt: f64,
    q: f64,
    q_over_m: f64,
) -> Result<()> {
    let ef: [f64; 3] = std::array::from_fn(|c| sample(e, mesh, p, c, E_STAGGER[c]));
    let bf: [f64; 3] = std::array::from_fn(|c| sample(b, mesh, p, c, B_STAGGER[c]));
    let u = boris([p.u.x, p.u.y, p.u.z], ef, bf, q_over_m, dt);
    let g = (1.0 + u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let (nix, nx) = advance_coord(p.ix, p.x, u[0] / g * dt / mesh.dx);
    let (niy, ny) = advance_coord(p.iy, p.y, u[1] / g * dt / mesh.dy);
    deposit_move(j, mesh, dt, q, u[2] / g, p, (nix, niy, nx, ny))?;
    p.ix = nix.rem_euclid(mesh.nx as i32);
    p.iy = niy.rem_euclid(mesh.ny as i32);
    p.x = nx;
    p.y = ny;
    p.u = crate::vec3::Vec3::new(u[0], u[1], u[2]);
    Ok(())
}

fn filter_axis(j: &mut Vec<[f64; 3]>, mesh: &Mesh, (sx, sy): (i64, i64)) {
    let mut out = vec![[0.0; 3]; j.len()];
    for y in 0..mesh.ny as i64 {
        for x in 0..mesh.nx as i64 {
            let (l, c, r) = (j[mesh.at(x - sx, y - sy)], j[mesh.at(x, y)], j[mesh.at(x + sx, y + sy)]);
            out[mesh.at(x, y)] = std::array::from_fn(|k| (l[k] + r[k]) * 0.25 + c[k] * 0.5);
        }
    }
    *j = out;
}

/// Periodic `[¼, ½, ¼]` smoothing, x then y, `passes` times.
pub fn naive_filter(j: &mut Vec<[f64; 3]>, mesh: &Mesh, passes: usize) {
    for _ in 0..passes {
        filter_axis(j, mesh, (1, 0));
        filter_axis(j, mesh, (0, 1));
    }
}

fn faraday(b: &mut [[f64; 3]], e: &[[f64; 3]], mesh: &Mesh, h: f64) {
    for y in 0..mesh.ny as i64 {
        for x in 0..mesh.nx as i64 {
            let c = e[mesh.at(x, y)];
            let r = e[mesh.at(x + 1, y)];
            let u = e[mesh.at(x, y + 1)];
            let k = mesh.at(x, y);
            b[k][0] -= h / mesh.dy * (u[2] - c[2]);
            b[k][1] += h / mesh.dx * (r[2] - c[2]);
            b[k][2] += h / mesh.dy * (u[0] - c[0]) - h / mesh.dx * (r[1] - c[1]);
        }
    }
}

fn ampere(e: &mut [[f64; 3]], b: &[[f64; 3]], j: &[[f64; 3]], mesh: &Mesh, dt: f64) {
    for y in 0..mesh.ny as i64 {
        for x in 0..mesh.nx as i64 {
            let c = b[mesh.at(x, y)];
            let l = b[mesh.at(x - 1, y)];
            let d = b[mesh.at(x, y - 1)];
            let k = mesh.at(x, y);
            e[k][0] += dt / mesh.dy * (c[2] - d[2]) - dt * j[k][0];
            e[k][1] += -dt / mesh.dx * (c[2] - l[2]) - dt * j[k][1];
            e[k][2] += dt / mesh.dx * (c[1] - l[1]) - dt / mesh.dy * (c[0] - d[0]) - dt * j[k][2];
        }
    }
}

/// Half Faraday, full Ampère, half Faraday on periodic arrays.
pub fn naive_emf(e: &mut [[f64; 3]], b: &mut [[f64; 3]], j: &[[f64; 3]], mesh: &Mesh, dt: f64) {
    faraday(b, e, mesh, 0.5 * dt);
    ampere(e, b, j, mesh, dt);
    faraday(b, e, mesh, 0.5 * dt);
}

/// One serial step over every particle in storage order.
pub fn naive_step(s: &mut NaiveState) -> Result<()> {
    let mesh = s.mesh;
    s.j.iter_mut().for_each(|v| *v = [0.0; 3]);
    for sp in &mut s.species {
        for p in &mut sp.particles {
            naive_particle_step(p, &s.e, &s.b, &mut s.j, &mesh, s.dt, sp.q, sp.q_over_m)
                .map_err(|e| Error::Step { step: s.step, source: Box::new(e) })?;
        }
    }
    naive_filter(&mut s.j, &mesh, s.filter_passes);
    naive_emf(&mut s.e, &mut s.b, &s.j, &mesh, s.dt);
    s.step += 1;
    Ok(())
}

pub fn naive_run(s: &mut NaiveState, n_steps: u64) -> Result<()> {
    for _ in 0..n_steps {
        naive_step(s)?;
    }
    Ok(())
}

/// Bilinear area-weighted charge on the nodes, periodic.
pub fn charge_density(particles: &[Particle], q: f64, mesh: &Mesh) -> Vec<f64> {
    let mut rho = vec![0.0; mesh.cells()];
    for p in particles {
        let (i, j) = (p.ix as i64, p.iy as i64);
        rho[mesh.at(i, j)] += q * (1.0 - p.x) * (1.0 - p.y);
        rho[mesh.at(i + 1, j)] += q * p.x * (1.0 - p.y);
        rho[mesh.at(i, j + 1)] += q * (1.0 - p.x) * p.y;
        rho[mesh.at(i + 1, j + 1)] += q * p.x * p.y;
    }
    rho
}

/// `max |ΔJx/dx + ΔJy/dy + (ρ_after − ρ_before)/dt|` over the interior,
/// periodic. `j` holds `[Jx, Jy, Jz]` per cell.
pub fn continuity_residual(j: &[[f64; 3]], rho_before: &[f64], rho_after: &[f64], dt: f64, mesh: &Mesh) -> f64 {
    let mut worst: f64 = 0.0;
    for y in 0..mesh.ny as i64 {
        for x in 0..mesh.nx as i64 {
            let k = mesh.at(x, y);
            let div = (j[k][0] - j[mesh.at(x - 1, y)][0]) / mesh.dx + (j[k][1] - j[mesh.at(x, y - 1)][1]) / mesh.dy;
            worst = worst.max((div + (rho_after[k] - rho_before[k]) / dt).abs());
        }
    }
    worst
}

fn tile_index(p: &Particle, g: &TileGeometry) -> usize {
    let tx = p.ix as usize / g.tile_nx;
    let ty = p.iy as usize / g.tile_ny;
    ty * (g.nx / g.tile_nx) + tx
}

/// Stable comparison sort by tile, with the matching offsets.
pub fn naive_sort(particles: &[Particle], geometry: &TileGeometry) -> (Vec<Particle>, Vec<usize>) {
    let n_tiles = (geometry.nx / geometry.tile_nx) * (geometry.ny / geometry.tile_ny);
    let mut out = particles.to_vec();
    out.sort_by_key(|p| tile_index(p, geometry));
    let mut offsets = vec![0; n_tiles + 1];
    for p in &out {
        offsets[tile_index(p, geometry) + 1] += 1;
    }
    for t in 0..n_tiles {
        offsets[t + 1] += offsets[t];
    }
    (out, offsets)
}

/// Slots whose occupant does not belong to the tile owning that slot after
/// sorting: the fewest copies any in-place regrouping can make.
pub fn misplaced_count(particles: &[Particle], geometry: &TileGeometry) -> usize {
    let (_, offsets) = naive_sort(particles, geometry);
    let mut owner = 0;
    let mut n = 0;
    for (slot, p) in particles.iter().enumerate() {
        while offsets[owner + 1] <= slot {
            owner += 1;
        }
        if tile_index(p, geometry) != owner {
            n += 1;
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec3::Vec3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const MESH: Mesh = Mesh { nx: 6, ny: 6, dx: 0.1, dy: 0.1 };

    #[test]
    fn density_examples() {
        let rho = charge_density(&[Particle::at_rest(2, 3, 0.5, 0.5)], 2.0, &MESH);
        for (i, j) in [(2, 3), (3, 3), (2, 4), (3, 4)] {
            assert_eq!(rho[MESH.at(i, j)], 0.5);
        }
        let rho = charge_density(&[Particle::at_rest(5, 5, 0.0, 0.0)], 2.0, &MESH);
        assert_eq!(rho[MESH.at(5, 5)], 2.0);
        assert_eq!(rho.iter().filter(|v| **v != 0.0).count(), 1);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ps: Vec<Particle> = (0..1000)
            .map(|_| Particle::at_rest(rng.gen_range(0..6), rng.gen_range(0..6), rng.gen(), rng.gen()))
            .collect();
        let total: f64 = charge_density(&ps, 0.3, &MESH).iter().sum();
        assert!((total - 300.0).abs() <= 1e-12 * 300.0);
    }

    #[test]
    fn residual_examples() {
        let z = vec![0.0; 36];
        assert_eq!(continuity_residual(&[[0.0; 3]; 36], &z, &z, 0.07, &MESH), 0.0);
        let mut j = vec![[0.0; 3]; 36];
        j[MESH.at(2, 2)][0] = 1e-3;
        let r = continuity_residual(&j, &z, &z, 0.07, &MESH);
        assert!((r - 1e-3 / 0.1).abs() < 1e-15);
    }

    fn random_walk(seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let mut p = Particle::at_rest(rng.gen_range(0..6), rng.gen_range(0..6), rng.gen(), rng.gen());
            let dt = 0.07;
            let before = charge_density(&[p], -0.4, &MESH);
            let mut j = vec![[0.0; 3]; 36];
            let (ex, ey, ez) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), 0.0);
            let mut e = vec![[ex, ey, ez]; 36];
            e[MESH.at(p.ix as i64, p.iy as i64)][2] = 0.5;
            let b = vec![[0.0, 0.0, rng.gen_range(-2.0..2.0)]; 36];
            p.u = Vec3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-1.0..1.0));
            naive_particle_step(&mut p, &e, &b, &mut j, &MESH, dt, -0.4, -1.0).unwrap();
            let after = charge_density(&[p], -0.4, &MESH);
            worst = worst.max(continuity_residual(&j, &before, &after, dt, &MESH));
        }
        worst
    }

    #[test]
    fn naive_step_conserves_charge() {
        for seed in 0..5 {
            assert!(random_walk(seed) <= 1e-12);
        }
    }

    #[test]
    fn vacuum_and_uniform_fixpoints() {
        let z = vec![[0.0; 3]; 36];
        let (mut e, mut b) = (z.clone(), z.clone());
        naive_emf(&mut e, &mut b, &z, &MESH, 0.05);
        assert_eq!((e.clone(), b.clone()), (z.clone(), z.clone()));
        let (mut e, mut b) = (vec![[1.0, -2.0, 0.5]; 36], vec![[0.25, 3.0, -1.0]; 36]);
        naive_emf(&mut e, &mut b, &z, &MESH, 0.05);
        assert!(e.iter().all(|v| *v == [1.0, -2.0, 0.5]));
        assert!(b.iter().all(|v| *v == [0.25, 3.0, -1.0]));
    }

    #[test]
    fn boris_rotation_keeps_norm() {
        let u = boris([0.3, -1.2, 0.7], [0.0; 3], [1.0, 2.0, -0.5], -1.0, 0.1);
        let n0 = 0.3f64 * 0.3 + 1.44 + 0.49;
        let n1 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
        assert!((n0 - n1).abs() <= 1e-14);
    }

    #[test]
    fn filter_preserves_constant() {
        let mut j = vec![[1.0, 2.0, 3.0]; 36];
        naive_filter(&mut j, &MESH, 3);
        assert!(j.iter().all(|v| *v == [1.0, 2.0, 3.0]));
    }

    #[test]
    fn sort_examples() {
        let g = TileGeometry::new(8, 8, 4, 4);
        let (ps, off) = naive_sort(&[], &g);
        assert!(ps.is_empty());
        assert_eq!(off, vec![0; 5]);

        let input = [Particle::at_rest(5, 5, 0.1, 0.0), Particle::at_rest(0, 0, 0.2, 0.0), Particle::at_rest(1, 1, 0.3, 0.0)];
        let (ps, off) = naive_sort(&input, &g);
        assert_eq!(off, vec![0, 2, 2, 2, 3]);
        // stable
        assert_eq!(ps[0].x, 0.2);
        assert_eq!(ps[1].x, 0.3);
        assert_eq!(misplaced_count(&input, &g), 2);
    }
}
