//! Simulation parameters in normalized units and their validation.
//!
//! Lengths are in units of c/ω_n, times in 1/ω_n and velocities in c, so
//! `c = 1` throughout and no unit conversion happens anywhere in the crate.

use crate::error::{ConfigErrors, ConfigViolation, Error, Result};
use crate::vec3::Vec3;

/// Largest stable time step of the 2D Yee scheme for cell sizes `dx`, `dy`.
pub fn courant_limit(dx: f64, dy: f64) -> Result<f64> {
    if !(dx > 0.0 && dy > 0.0) || !dx.is_finite() || !dy.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "cell sizes must be positive, got dx = {dx}, dy = {dy}"
        )));
    }
    Ok((1.0 / (1.0 / (dx * dx) + 1.0 / (dy * dy))).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesSpec {
    pub name: String,
    /// Signed mass-to-charge ratio; electrons are -1.
    pub m_over_q: f64,
    /// Particles per cell along x and y.
    pub ppc: (usize, usize),
    /// Fluid (drift) generalized velocity.
    pub u_fl: Vec3,
    /// Thermal spread per component (Gaussian standard deviation).
    pub u_th: Vec3,
    pub density: f64,
}

impl SpeciesSpec {
    pub fn new(name: impl Into<String>, m_over_q: f64, ppc: (usize, usize)) -> Self {
        SpeciesSpec {
            name: name.into(),
            m_over_q,
            ppc,
            u_fl: Vec3::ZERO,
            u_th: Vec3::ZERO,
            density: 1.0,
        }
    }

    pub fn with_fluid(mut self, u_fl: Vec3) -> Self {
        self.u_fl = u_fl;
        self
    }

    pub fn with_thermal(mut self, u_th: Vec3) -> Self {
        self.u_th = u_th;
        self
    }

    /// Charge carried by one macro-particle, as a density weight: the
    /// charge density of a cell is the sum of its particles' weighted `q`.
    pub fn particle_charge(&self) -> f64 {
        (self.density / (self.ppc.0 * self.ppc.1) as f64).copysign(self.m_over_q)
    }

    pub fn q_over_m(&self) -> f64 {
        1.0 / self.m_over_q
    }

    fn violations(&self) -> Vec<ConfigViolation> {
        let mut out = Vec::new();
        let mut bad = |reason: String| {
            out.push(ConfigViolation::Species { name: self.name.clone(), reason })
        };
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-') {
            bad(format!("name `{}` must be a non-empty identifier", self.name));
        }
        if self.m_over_q == 0.0 || !self.m_over_q.is_finite() {
            bad(format!("m_over_q must be finite and non-zero, got {}", self.m_over_q));
        }
        if self.ppc.0 < 1 || self.ppc.1 < 1 {
            bad(format!("ppc must be at least 1 per axis, got {:?}", self.ppc));
        }
        if !self.u_fl.is_finite() {
            bad("fluid velocity must be finite".into());
        }
        if !self.u_th.is_finite() || self.u_th.x < 0.0 || self.u_th.y < 0.0 || self.u_th.z < 0.0 {
            bad("thermal spread must be finite and non-negative".into());
        }
        if !(self.density > 0.0) || !self.density.is_finite() {
            bad(format!("density must be positive, got {}", self.density));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub dt: f64,
    pub n_steps: u64,
    pub tile_nx: usize,
    pub tile_ny: usize,
    pub guard: usize,
    pub species: Vec<SpeciesSpec>,
    pub filter_passes: usize,
    pub moving_window: bool,
    pub seed: u64,
    pub report_every: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            nx: 64,
            ny: 64,
            dx: 0.1,
            dy: 0.1,
            dt: 0.07,
            n_steps: 100,
            tile_nx: 16,
            tile_ny: 16,
            guard: 3,
            species: Vec::new(),
            filter_passes: 0,
            moving_window: false,
            seed: 0,
            report_every: 0,
        }
    }
}

impl SimConfig {
    pub fn tiles_x(&self) -> usize {
        self.nx / self.tile_nx
    }

    pub fn tiles_y(&self) -> usize {
        self.ny / self.tile_ny
    }

    /// Every violated invariant; empty iff the configuration is valid.
    pub fn violations(&self) -> Vec<ConfigViolation> {
        let mut out = Vec::new();
        if self.nx == 0 || self.ny == 0 {
            out.push(ConfigViolation::EmptyGrid { nx: self.nx, ny: self.ny });
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !(positive(self.dx) && positive(self.dy) && positive(self.dt)) {
            out.push(ConfigViolation::NonPositive { dx: self.dx, dy: self.dy, dt: self.dt });
        } else {
            let limit = courant_limit(self.dx, self.dy).expect("cell sizes checked above");
            if self.dt >= limit {
                out.push(ConfigViolation::Courant { dt: self.dt, limit, dx: self.dx, dy: self.dy });
            }
        }
        for (axis, cells, tile) in [('x', self.nx, self.tile_nx), ('y', self.ny, self.tile_ny)] {
            if tile < 2 {
                out.push(ConfigViolation::TileTooSmall { axis, tile });
            } else if cells % tile != 0 {
                out.push(ConfigViolation::TilingMismatch { axis, cells, tile });
            }
        }
        if self.guard < 2 {
            out.push(ConfigViolation::GuardTooSmall { guard: self.guard });
        }
        let mut names: Vec<&str> = Vec::new();
        for s in &self.species {
            out.extend(s.violations());
            if names.contains(&s.name.as_str()) {
                out.push(ConfigViolation::Species {
                    name: s.name.clone(),
                    reason: "duplicate species name".into(),
                });
            }
            names.push(&s.name);
        }
        out
    }
}

/// Returns the configuration unchanged iff every invariant holds.
pub fn validate_config(cfg: SimConfig) -> Result<SimConfig, ConfigErrors> {
    let v = cfg.violations();
    if v.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(v))
    }
}
