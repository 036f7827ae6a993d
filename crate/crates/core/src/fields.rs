//! Staggered electromagnetic fields and the Yee update.
//!
//! Component placement, in cell units relative to cell `(i, j)`:
//!
//! | component | position        |
//! |-----------|-----------------|
//! | Ex, Jx    | (i+½, j)        |
//! | Ey, Jy    | (i, j+½)        |
//! | Ez, Jz, ρ | (i, j)          |
//! | Bx        | (i, j+½)        |
//! | By        | (i+½, j)        |
//! | Bz        | (i+½, j+½)      |
//!
//! Every component of cell `(i, j)` is stored at array index `(i, j)`.

use crate::error::{Error, Result};
use crate::grid::Grid2;
use crate::vec3::Vec3;

/// Boundary handling along x. y is always periodic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Periodic,
    /// Open in x: guards read as zero and deposits outside the box are lost.
    MovingWindow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct YeeGrid {
    pub e: Grid2<Vec3>,
    pub b: Grid2<Vec3>,
    pub dx: f64,
    pub dy: f64,
    pub boundary: Boundary,
}

impl YeeGrid {
    pub fn new(nx: usize, ny: usize, guard: usize, dx: f64, dy: f64) -> Self {
        YeeGrid {
            e: Grid2::new(nx, ny, guard),
            b: Grid2::new(nx, ny, guard),
            dx,
            dy,
            boundary: Boundary::Periodic,
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn nx(&self) -> usize {
        self.e.nx()
    }

    pub fn ny(&self) -> usize {
        self.e.ny()
    }

    pub fn guard(&self) -> usize {
        self.e.guard()
    }

    /// Refreshes E and B guards.
    pub fn refresh_guards(&mut self) {
        update_gc_copy_with(&mut self.e, self.boundary);
        update_gc_copy_with(&mut self.b, self.boundary);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurrentGrid {
    pub j: Grid2<Vec3>,
    pub boundary: Boundary,
}

impl CurrentGrid {
    pub fn new(nx: usize, ny: usize, guard: usize) -> Self {
        CurrentGrid { j: Grid2::new(nx, ny, guard), boundary: Boundary::Periodic }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn zero(&mut self) {
        self.j.fill(Vec3::ZERO);
    }
}

#[inline(always)]
fn wrap(i: isize, n: usize) -> isize {
    i.rem_euclid(n as isize)
}

/// Periodic guard refresh: every guard cell takes its wrapped interior image.
pub fn update_gc_copy<T: Copy + Default>(field: &mut Grid2<T>) {
    update_gc_copy_with(field, Boundary::Periodic);
}

pub fn update_gc_copy_with<T: Copy + Default>(field: &mut Grid2<T>, boundary: Boundary) {
    let (nx, ny) = (field.nx(), field.ny());
    let g = field.guard() as isize;
    let (nxi, nyi) = (nx as isize, ny as isize);
    for j in -g..nyi + g {
        let inside_y = (0..nyi).contains(&j);
        for i in -g..nxi + g {
            let inside_x = (0..nxi).contains(&i);
            if inside_x && inside_y {
                continue;
            }
            field[(i, j)] = match boundary {
                Boundary::Periodic => field[(wrap(i, nx), wrap(j, ny))],
                Boundary::MovingWindow if inside_x => field[(i, wrap(j, ny))],
                Boundary::MovingWindow => T::default(),
            };
        }
    }
}

/// Folds guard deposits into their interior images, then refreshes guards.
pub fn update_gc_add(current: &mut CurrentGrid) {
    fold_guards(&mut current.j, current.boundary);
}

/// Adds every guard cell into its interior image and refreshes the guards.
/// Under [`Boundary::MovingWindow`] guard cells beyond the x edges are discarded.
pub fn fold_guards<T: Copy + Default + std::ops::AddAssign>(field: &mut Grid2<T>, boundary: Boundary) {
    let (nx, ny) = (field.nx(), field.ny());
    let g = field.guard() as isize;
    let (nxi, nyi) = (nx as isize, ny as isize);
    for cj in -g..nyi + g {
        for ci in -g..nxi + g {
            if field.is_interior(ci, cj) {
                continue;
            }
            let v = field[(ci, cj)];
            let inside_x = (0..nxi).contains(&ci);
            match boundary {
                Boundary::Periodic => field[(wrap(ci, nx), wrap(cj, ny))] += v,
                Boundary::MovingWindow if inside_x => field[(ci, wrap(cj, ny))] += v,
                Boundary::MovingWindow => {}
            }
        }
    }
    update_gc_copy_with(field, boundary);
}

/// Faraday half of the Yee scheme: `B -= dt_frac · ∇×E`.
pub fn yee_b(grid: &mut YeeGrid, dt_frac: f64) {
    let (rdx, rdy) = (dt_frac / grid.dx, dt_frac / grid.dy);
    let (nx, ny) = (grid.nx() as isize, grid.ny() as isize);
    let e = &grid.e;
    let b = &mut grid.b;
    for j in 0..ny {
        for i in 0..nx {
            let e00 = e[(i, j)];
            let e10 = e[(i + 1, j)];
            let e01 = e[(i, j + 1)];
            let cell = &mut b[(i, j)];
            cell.x -= rdy * (e01.z - e00.z);
            cell.y += rdx * (e10.z - e00.z);
            cell.z += rdy * (e01.x - e00.x) - rdx * (e10.y - e00.y);
        }
    }
}

/// Ampère half of the Yee scheme: `E += dt · (∇×B − J)`.
pub fn yee_e(grid: &mut YeeGrid, current: &CurrentGrid, dt: f64) {
    let (rdx, rdy) = (dt / grid.dx, dt / grid.dy);
    let (nx, ny) = (grid.nx() as isize, grid.ny() as isize);
    let b = &grid.b;
    let e = &mut grid.e;
    let jc = &current.j;
    for j in 0..ny {
        for i in 0..nx {
            let b00 = b[(i, j)];
            let bm0 = b[(i - 1, j)];
            let b0m = b[(i, j - 1)];
            let cur = jc[(i, j)];
            let cell = &mut e[(i, j)];
            cell.x += rdy * (b00.z - b0m.z) - dt * cur.x;
            cell.y += -rdx * (b00.z - bm0.z) - dt * cur.y;
            cell.z += rdx * (b00.y - bm0.y) - rdy * (b00.x - b0m.x) - dt * cur.z;
        }
    }
}

/// Three-stage field advance: B half step, E full step, B half step, with
/// guard refreshes between stages.
pub fn advance_emf(grid: &mut YeeGrid, current: &CurrentGrid, dt: f64) {
    yee_b(grid, 0.5 * dt);
    update_gc_copy_with(&mut grid.b, grid.boundary);
    yee_e(grid, current, dt);
    update_gc_copy_with(&mut grid.e, grid.boundary);
    yee_b(grid, 0.5 * dt);
    update_gc_copy_with(&mut grid.b, grid.boundary);
}

/// `passes` rounds of the [¼, ½, ¼] kernel along x then y on every J component.
pub fn binomial_filter(current: &mut CurrentGrid, passes: usize) {
    let (nx, ny) = (current.j.nx() as isize, current.j.ny() as isize);
    let mut tmp = vec![Vec3::ZERO; (nx * ny) as usize];
    let boundary = current.boundary;
    let j = &mut current.j;
    for _ in 0..passes {
        for (dx, dy) in [(1, 0), (0, 1)] {
            for cj in 0..ny {
                for ci in 0..nx {
                    let l = j[(ci - dx, cj - dy)];
                    let c = j[(ci, cj)];
                    let r = j[(ci + dx, cj + dy)];
                    tmp[(cj * nx + ci) as usize] = (l + r) * 0.25 + c * 0.5;
                }
            }
            j.set_interior(&tmp);
            update_gc_copy_with(j, boundary);
        }
    }
}

/// Shifts E and B one cell toward −x, zero-filling the rightmost column.
pub fn shift_window(grid: &mut YeeGrid) -> Result<()> {
    if grid.boundary != Boundary::MovingWindow {
        return Err(Error::Usage("shift_window requires the moving window to be enabled".into()));
    }
    let (nx, ny) = (grid.nx() as isize, grid.ny() as isize);
    for f in [&mut grid.e, &mut grid.b] {
        for j in 0..ny {
            for i in 0..nx - 1 {
                f[(i, j)] = f[(i + 1, j)];
            }
            f[(nx - 1, j)] = Vec3::ZERO;
        }
    }
    grid.refresh_guards();
    Ok(())
}

/// `(Σ|E|², Σ|B|²) · dx·dy / 2` over interior cells.
pub fn field_energy(grid: &YeeGrid) -> (f64, f64) {
    let area = 0.5 * grid.dx * grid.dy;
    let sum = |f: &Grid2<Vec3>| -> f64 {
        let mut s = 0.0;
        for j in 0..f.ny() as isize {
            for i in 0..f.nx() as isize {
                s += f[(i, j)].norm_sq();
            }
        }
        s
    };
    (sum(&grid.e) * area, sum(&grid.b) * area)
}
