//! The simulation loop.
//!
//! Particles are advanced tile by tile. Each worker deposits into a private
//! tile-sized current buffer (tile plus guard ring) which is then merged into
//! the global current, either in ascending tile order
//! ([`MergeMode::Deterministic`]) or with concurrent atomic adds
//! ([`MergeMode::Fast`]).

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::config::{validate_config, SimConfig, SpeciesSpec};
use crate::deposit::deposit_current;
use crate::error::{Error, Result};
use crate::fields::{
    advance_emf, binomial_filter, field_energy, fold_guards, shift_window, update_gc_add, Boundary, CurrentGrid,
    YeeGrid,
};
use crate::grid::Grid2;
use crate::particle::{init_species, injection_stream, load_column, CellPos, Particle};
use crate::pusher::{advance_momentum, interpolate_emf, push_position};
use crate::report::GridReport;
use crate::tiling::{TileGeometry, TileMap};
use crate::vec3::{lorentz_gamma, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MergeMode {
    /// Fixed ascending-tile reduction and serial sorting: results are
    /// bitwise identical for any worker count.
    #[default]
    Deterministic,
    /// Dynamic tile scheduling, atomic merges and parallel sorting.
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineOptions {
    pub threads: usize,
    pub mode: MergeMode,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { threads: 1, mode: MergeMode::Deterministic }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Bx,
    By,
    Bz,
    /// `|B|` from the three components stored at each cell index.
    BAbs,
    /// One report per species, named `charge_<species>`.
    Charge,
    /// 3×1 report: electric, magnetic and kinetic energy.
    Energy,
}

impl ReportKind {
    pub const ALL: [ReportKind; 6] =
        [ReportKind::Bx, ReportKind::By, ReportKind::Bz, ReportKind::BAbs, ReportKind::Charge, ReportKind::Energy];

    pub fn name(self) -> &'static str {
        match self {
            ReportKind::Bx => "bx",
            ReportKind::By => "by",
            ReportKind::Bz => "bz",
            ReportKind::BAbs => "b_abs",
            ReportKind::Charge => "charge",
            ReportKind::Energy => "energy",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        ReportKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Default report set.
pub const DEFAULT_REPORTS: [ReportKind; 4] = [ReportKind::BAbs, ReportKind::Bz, ReportKind::Charge, ReportKind::Energy];

/// Destination for grid reports.
pub trait ReportSink {
    fn emit(&mut self, report: &GridReport) -> Result<()>;
}

impl ReportSink for Vec<GridReport> {
    fn emit(&mut self, report: &GridReport) -> Result<()> {
        self.push(report.clone());
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SpeciesState {
    pub spec: SpeciesSpec,
    /// Density-weighted charge of one particle.
    pub q: f64,
    pub map: TileMap,
}

/// Constants shared by every particle of a species during one step.
#[derive(Debug, Clone, Copy)]
pub struct PushParams {
    pub q: f64,
    pub q_over_m: f64,
    pub dt: f64,
    pub dx: f64,
    pub dy: f64,
    pub nx: i32,
    pub ny: i32,
    pub boundary: Boundary,
}

#[derive(Clone)]
pub struct SimState {
    pub cfg: SimConfig,
    pub emf: YeeGrid,
    pub current: CurrentGrid,
    pub species: Vec<SpeciesState>,
    pub step_index: u64,
    /// Cells the moving window has advanced so far.
    pub window_shifts: u64,
    pub reports: Vec<ReportKind>,
    options: EngineOptions,
    pool: Arc<rayon::ThreadPool>,
}

impl std::fmt::Debug for SimState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SimState")
            .field("cfg", &self.cfg)
            .field("step_index", &self.step_index)
            .field("window_shifts", &self.window_shifts)
            .field("options", &self.options)
            .finish_non_exhaustive()
    }
}

impl SimState {
    /// Validates `cfg`, loads every species and zeroes the fields.
    pub fn new(cfg: SimConfig, options: EngineOptions) -> Result<Self> {
        let cfg = validate_config(cfg)?;
        let geometry = geometry(&cfg);
        let species = cfg
            .species
            .iter()
            .enumerate()
            .map(|(k, spec)| {
                let particles = init_species(spec, k, &cfg, cfg.seed);
                (spec.clone(), TileMap::from_particles(geometry, particles))
            })
            .collect();
        Self::from_parts(cfg, None, species, options)
    }

    /// Builds a state from explicit fields and particles.
    pub fn from_parts(
        cfg: SimConfig,
        emf: Option<YeeGrid>,
        species: Vec<(SpeciesSpec, TileMap)>,
        options: EngineOptions,
    ) -> Result<Self> {
        let cfg = validate_config(cfg)?;
        let boundary = if cfg.moving_window { Boundary::MovingWindow } else { Boundary::Periodic };
        let mut emf = emf
            .unwrap_or_else(|| YeeGrid::new(cfg.nx, cfg.ny, cfg.guard, cfg.dx, cfg.dy))
            .with_boundary(boundary);
        emf.refresh_guards();
        let current = CurrentGrid::new(cfg.nx, cfg.ny, cfg.guard).with_boundary(boundary);
        let species = species
            .into_iter()
            .map(|(spec, map)| {
                if !map.is_sorted() {
                    return Err(Error::SortInvariant(format!("species `{}` is not tile-sorted", spec.name)));
                }
                Ok(SpeciesState { q: spec.particle_charge(), spec, map })
            })
            .collect::<Result<Vec<_>>>()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.threads.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        Ok(SimState {
            cfg,
            emf,
            current,
            species,
            step_index: 0,
            window_shifts: 0,
            reports: DEFAULT_REPORTS.to_vec(),
            options,
            pool: Arc::new(pool),
        })
    }

    pub fn options(&self) -> EngineOptions {
        self.options
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.cfg.dt
    }

    pub fn geometry(&self) -> TileGeometry {
        geometry(&self.cfg)
    }

    pub fn particle_count(&self) -> usize {
        self.species.iter().map(|s| s.map.len()).sum()
    }

    fn push_params(&self, s: &SpeciesState) -> PushParams {
        PushParams {
            q: s.q,
            q_over_m: s.spec.q_over_m(),
            dt: self.cfg.dt,
            dx: self.cfg.dx,
            dy: self.cfg.dy,
            nx: self.cfg.nx as i32,
            ny: self.cfg.ny as i32,
            boundary: self.emf.boundary,
        }
    }

    /// Advances the simulation by one time step.
    pub fn step(&mut self) -> Result<()> {
        let pool = Arc::clone(&self.pool);
        pool.install(|| self.step_inner()).map_err(|e| Error::Step { step: self.step_index, source: Box::new(e) })
    }

    fn step_inner(&mut self) -> Result<()> {
        self.current.zero();
        for k in 0..self.species.len() {
            let params = self.push_params(&self.species[k]);
            let species = &mut self.species[k];
            match self.options.mode {
                MergeMode::Deterministic => advance_deterministic(
                    &mut species.map,
                    &self.emf,
                    &mut self.current,
                    &params,
                    self.options.threads.max(1),
                )?,
                MergeMode::Fast => advance_fast(&mut species.map, &self.emf, &mut self.current, &params)?,
            }
        }
        update_gc_add(&mut self.current);
        if self.cfg.filter_passes > 0 {
            binomial_filter(&mut self.current, self.cfg.filter_passes);
        }
        advance_emf(&mut self.emf, &self.current, self.cfg.dt);

        for s in &mut self.species {
            match self.emf.boundary {
                Boundary::Periodic => match self.options.mode {
                    MergeMode::Deterministic => s.map.sort_tiles()?,
                    MergeMode::Fast => s.map.sort_tiles_parallel()?,
                },
                Boundary::MovingWindow => {
                    let nx = self.cfg.nx as i32;
                    let mut ps = std::mem::take(&mut s.map.particles);
                    ps.retain(|p| (0..nx).contains(&p.ix));
                    s.map = TileMap::from_particles(s.map.geometry, ps);
                    Default::default()
                }
            };
        }
        self.step_index += 1;

        if self.cfg.moving_window && self.time() >= (self.window_shifts + 1) as f64 * self.cfg.dx {
            self.shift_window()?;
        }
        Ok(())
    }

    /// Moves the box one cell toward +x: fields and particles shift left,
    /// particles leaving at x < 0 are dropped and a fresh column of plasma
    /// is loaded at the right edge.
    pub fn shift_window(&mut self) -> Result<()> {
        shift_window(&mut self.emf)?;
        self.window_shifts += 1;
        let (nx, ny) = (self.cfg.nx, self.cfg.ny);
        let key_column = nx as u64 - 1 + self.window_shifts;
        for (k, s) in self.species.iter_mut().enumerate() {
            let mut ps = std::mem::take(&mut s.map.particles);
            ps.retain_mut(|p| {
                p.ix -= 1;
                p.ix >= 0
            });
            load_column(&s.spec, ny, nx as i32 - 1, key_column, self.cfg.seed, injection_stream(k), &mut ps);
            s.map = TileMap::from_particles(s.map.geometry, ps);
        }
        Ok(())
    }

    /// Builds the configured reports for the current state.
    pub fn build_reports(&self) -> Vec<GridReport> {
        let mut out = Vec::new();
        for &kind in &self.reports {
            match kind {
                ReportKind::Bx | ReportKind::By | ReportKind::Bz => {
                    let c = match kind {
                        ReportKind::Bx => 0,
                        ReportKind::By => 1,
                        _ => 2,
                    };
                    let data = self.emf.b.interior().into_iter().map(|v| v.get(c)).collect();
                    out.push(self.grid_report(kind.name().into(), data));
                }
                ReportKind::BAbs => {
                    let data = self.emf.b.interior().into_iter().map(Vec3::norm).collect();
                    out.push(self.grid_report(kind.name().into(), data));
                }
                ReportKind::Charge => {
                    for s in &self.species {
                        let rho = charge_density(&s.map.particles, s.q, &self.cfg, self.emf.boundary);
                        out.push(self.grid_report(format!("charge_{}", s.spec.name), rho.interior()));
                    }
                }
                ReportKind::Energy => {
                    let (ee, eb) = field_energy(&self.emf);
                    let mut r = self.grid_report(kind.name().into(), vec![ee, eb, self.kinetic_energy()]);
                    r.nx = 3;
                    r.ny = 1;
                    out.push(r);
                }
            }
        }
        out
    }

    fn grid_report(&self, name: String, data: Vec<f64>) -> GridReport {
        GridReport {
            name,
            step: self.step_index,
            nx: self.cfg.nx as u32,
            ny: self.cfg.ny as u32,
            dx: self.cfg.dx,
            dy: self.cfg.dy,
            time: self.time(),
            data,
        }
    }

    /// `Σ m·(γ − 1)` over all particles, in the same units as the field energy.
    pub fn kinetic_energy(&self) -> f64 {
        let area = self.cfg.dx * self.cfg.dy;
        self.species
            .iter()
            .map(|s| {
                let mass = s.q * s.spec.m_over_q;
                let sum: f64 = s.map.particles.par_iter().map(|p| lorentz_gamma(p.u) - 1.0).sum();
                mass * sum * area
            })
            .sum()
    }

    /// Field energies `(electric, magnetic)`.
    pub fn field_energy(&self) -> (f64, f64) {
        field_energy(&self.emf)
    }
}

fn geometry(cfg: &SimConfig) -> TileGeometry {
    TileGeometry::new(cfg.nx, cfg.ny, cfg.tile_nx, cfg.tile_ny)
}

/// Bilinear charge density of `particles`, guards folded into the interior.
pub fn charge_density(particles: &[Particle], q: f64, cfg: &SimConfig, boundary: Boundary) -> Grid2<f64> {
    let mut rho: Grid2<f64> = Grid2::new(cfg.nx, cfg.ny, 1);
    for p in particles {
        let (i, j) = (p.ix as isize, p.iy as isize);
        let (wx, wy) = (p.x, p.y);
        rho[(i, j)] += q * (1.0 - wx) * (1.0 - wy);
        rho[(i + 1, j)] += q * wx * (1.0 - wy);
        rho[(i, j + 1)] += q * (1.0 - wx) * wy;
        rho[(i + 1, j + 1)] += q * wx * wy;
    }
    fold_guards(&mut rho, boundary);
    rho
}

/// Advances every particle of one tile and deposits its current into `buf`.
///
/// `buf` is the tile's private buffer: interior `tile_nx × tile_ny` with the
/// tile's first cell at `(0, 0)`. Particles are left at their new position,
/// wrapped into the grid along periodic axes.
pub fn advance_tile(
    origin: (i32, i32),
    particles: &mut [Particle],
    emf: &YeeGrid,
    buf: &mut Grid2<Vec3>,
    params: &PushParams,
) -> Result<()> {
    let (ox, oy) = origin;
    for p in particles.iter_mut() {
        let f = interpolate_emf(p, &emf.e, &emf.b);
        p.u = advance_momentum(p.u, &f, params.q_over_m, params.dt);
        let push = push_position(p, params.dt, params.dx, params.dy)?;
        let old = CellPos::new(p.ix - ox, p.iy - oy, p.x, p.y);
        let new = CellPos::new(push.pos.ix - ox, push.pos.iy - oy, push.pos.x, push.pos.y);
        deposit_current(old, new, p.u, params.q, params.dt, (params.dx, params.dy), buf)?;

        let mut pos = push.pos;
        if params.boundary == Boundary::Periodic {
            pos.ix = pos.ix.rem_euclid(params.nx);
        }
        pos.iy = pos.iy.rem_euclid(params.ny);
        p.set_position(pos);
    }
    Ok(())
}

/// Adds a tile buffer, guard ring included, into the global current.
pub fn merge_tile(global: &mut CurrentGrid, origin: (i32, i32), buf: &Grid2<Vec3>) {
    let (ox, oy) = (origin.0 as isize, origin.1 as isize);
    let g = buf.guard() as isize;
    let w = buf.stride();
    let gstride = global.j.stride();
    let dst = global.j.as_mut_slice();
    let src = buf.as_slice();
    for (row, line) in src.chunks_exact(w).enumerate() {
        let start = global_index(ox - g, oy - g + row as isize, &global_dims(gstride, g));
        for (d, s) in dst[start..start + w].iter_mut().zip(line) {
            *d += *s;
        }
    }
}

struct Dims {
    stride: usize,
    guard: isize,
}

fn global_dims(stride: usize, guard: isize) -> Dims {
    Dims { stride, guard }
}

#[inline(always)]
fn global_index(i: isize, j: isize, d: &Dims) -> usize {
    ((j + d.guard) as usize) * d.stride + (i + d.guard) as usize
}

/// Merges per-tile buffers (indexed by tile) into the global current in
/// ascending tile order.
pub fn merge_currents(global: &mut CurrentGrid, geometry: &TileGeometry, buffers: &[Grid2<Vec3>]) {
    for (t, buf) in buffers.iter().enumerate() {
        merge_tile(global, geometry.tile_origin(t), buf);
    }
}

fn tile_buffer(geometry: &TileGeometry, guard: usize) -> Grid2<Vec3> {
    Grid2::new(geometry.tile_nx, geometry.tile_ny, guard)
}

fn advance_deterministic(
    map: &mut TileMap,
    emf: &YeeGrid,
    current: &mut CurrentGrid,
    params: &PushParams,
    workers: usize,
) -> Result<()> {
    let geometry = map.geometry;
    let guard = current.j.guard();
    let mut pool: Vec<Grid2<Vec3>> = (0..workers).map(|_| tile_buffer(&geometry, guard)).collect();
    let mut sections: Vec<(usize, &mut [Particle])> = map.sections_mut().into_iter().enumerate().collect();
    for chunk in sections.chunks_mut(workers) {
        chunk
            .par_iter_mut()
            .zip(pool.par_iter_mut())
            .try_for_each(|((t, section), buf)| {
                buf.fill(Vec3::ZERO);
                advance_tile(geometry.tile_origin(*t), section, emf, buf, params)
            })?;
        for ((t, _), buf) in chunk.iter().zip(&pool) {
            merge_tile(current, geometry.tile_origin(*t), buf);
        }
    }
    Ok(())
}

#[inline(always)]
fn atomic_add(cell: &AtomicU64, v: f64) {
    if v == 0.0 {
        return;
    }
    let mut old = cell.load(Ordering::Relaxed);
    loop {
        let new = (f64::from_bits(old) + v).to_bits();
        match cell.compare_exchange_weak(old, new, Ordering::Relaxed, Ordering::Relaxed) {
            Ok(_) => return,
            Err(cur) => old = cur,
        }
    }
}

fn advance_fast(map: &mut TileMap, emf: &YeeGrid, current: &mut CurrentGrid, params: &PushParams) -> Result<()> {
    let geometry = map.geometry;
    let guard = current.j.guard();
    let gstride = current.j.stride();
    let shared: Vec<AtomicU64> =
        current.j.as_slice().iter().flat_map(|v| [v.x, v.y, v.z]).map(|x| AtomicU64::new(x.to_bits())).collect();
    let dims = global_dims(gstride, guard as isize);
    map.sections_mut().into_par_iter().enumerate().with_max_len(1).try_for_each_init(
        || tile_buffer(&geometry, guard),
        |buf, (t, section)| -> Result<()> {
            if section.is_empty() {
                return Ok(());
            }
            buf.fill(Vec3::ZERO);
            let origin = geometry.tile_origin(t);
            advance_tile(origin, section, emf, buf, params)?;
            let (ox, oy) = (origin.0 as isize, origin.1 as isize);
            let g = guard as isize;
            let w = buf.stride();
            for (row, line) in buf.as_slice().chunks_exact(w).enumerate() {
                let start = global_index(ox - g, oy - g + row as isize, &dims);
                for (k, v) in line.iter().enumerate() {
                    let base = 3 * (start + k);
                    atomic_add(&shared[base], v.x);
                    atomic_add(&shared[base + 1], v.y);
                    atomic_add(&shared[base + 2], v.z);
                }
            }
            Ok(())
        },
    )?;
    for (v, a) in current.j.as_mut_slice().iter_mut().zip(shared.chunks_exact(3)) {
        *v = Vec3::new(
            f64::from_bits(a[0].load(Ordering::Relaxed)),
            f64::from_bits(a[1].load(Ordering::Relaxed)),
            f64::from_bits(a[2].load(Ordering::Relaxed)),
        );
    }
    Ok(())
}

/// Runs `n_steps` steps, emitting reports every `report_every` steps (and at
/// the final step) to each sink. `n_steps == 0` does nothing.
pub fn run(state: &mut SimState, n_steps: u64, sinks: &mut [&mut dyn ReportSink]) -> Result<()> {
    if n_steps == 0 {
        return Ok(());
    }
    let every = state.cfg.report_every;
    let on_cadence = |s: u64| every > 0 && s % every == 0;
    let emit = |state: &SimState, sinks: &mut [&mut dyn ReportSink]| -> Result<()> {
        let reports = state.build_reports();
        for sink in sinks.iter_mut() {
            for r in &reports {
                sink.emit(r)?;
            }
        }
        Ok(())
    };
    if on_cadence(state.step_index) {
        emit(state, sinks)?;
    }
    let end = state.step_index + n_steps;
    while state.step_index < end {
        state.step()?;
        if on_cadence(state.step_index) || state.step_index == end {
            emit(state, sinks)?;
        }
    }
    Ok(())
}
