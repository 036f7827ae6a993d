//! Field interpolation, Boris momentum update and position push.

use crate::error::{Error, Result};
use crate::grid::Grid2;
use crate::particle::{CellPos, Particle};
use crate::vec3::{lorentz_gamma, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InterpolatedField {
    pub e: Vec3,
    pub b: Vec3,
}

/// Base index and upper weight for a sample staggered by `half` (0 or ½)
/// along one axis: the point `cell + frac` lies between samples `base` and
/// `base + 1` of that component.
#[inline(always)]
fn stagger(cell: i32, frac: f64, half: bool) -> (isize, f64) {
    if !half {
        (cell as isize, frac)
    } else if frac >= 0.5 {
        (cell as isize, frac - 0.5)
    } else {
        (cell as isize - 1, frac + 0.5)
    }
}

/// The 3×3 block of samples around cell `(i, j)`, rows bottom to top.
#[inline(always)]
fn neighbourhood(f: &Grid2<Vec3>, i: isize, j: isize) -> [[Vec3; 3]; 3] {
    debug_assert!(f.contains(i - 1, j - 1) && f.contains(i + 1, j + 1), "interpolation stencil outside the field view");
    let s = f.stride();
    let k = f.index(i - 1, j - 1);
    let data = f.as_slice();
    let row = |r: usize| -> [Vec3; 3] { data[k + r * s..k + r * s + 3].try_into().expect("row of 3") };
    [row(0), row(1), row(2)]
}

/// Bilinear sample of component `c` with lower-left sample at offset
/// `(bi, bj)` in `{-1, 0}` from the particle's cell.
#[inline(always)]
fn bilinear(n: &[[Vec3; 3]; 3], c: usize, (bi, wx): (usize, f64), (bj, wy): (usize, f64)) -> f64 {
    let v00 = n[bj][bi].get(c);
    let v10 = n[bj][bi + 1].get(c);
    let v01 = n[bj + 1][bi].get(c);
    let v11 = n[bj + 1][bi + 1].get(c);
    (1.0 - wy) * ((1.0 - wx) * v00 + wx * v10) + wy * ((1.0 - wx) * v01 + wx * v11)
}

/// Linear interpolation of the staggered E and B fields at the particle.
///
/// `e` and `b` must cover the particle's cell and its ±1 neighbours; cell
/// indices of `p` are in the frame of the grids.
#[inline]
pub fn interpolate_emf(p: &Particle, e: &Grid2<Vec3>, b: &Grid2<Vec3>) -> InterpolatedField {
    let local = |(base, w): (isize, f64), cell: i32| ((base - cell as isize + 1) as usize, w);
    let x0 = local(stagger(p.ix, p.x, false), p.ix);
    let xh = local(stagger(p.ix, p.x, true), p.ix);
    let y0 = local(stagger(p.iy, p.y, false), p.iy);
    let yh = local(stagger(p.iy, p.y, true), p.iy);
    let (i, j) = (p.ix as isize, p.iy as isize);
    let ne = neighbourhood(e, i, j);
    let nb = neighbourhood(b, i, j);
    InterpolatedField {
        e: Vec3::new(bilinear(&ne, 0, xh, y0), bilinear(&ne, 1, x0, yh), bilinear(&ne, 2, x0, y0)),
        b: Vec3::new(bilinear(&nb, 0, x0, yh), bilinear(&nb, 1, xh, y0), bilinear(&nb, 2, xh, yh)),
    }
}

/// Relativistic Boris update of the generalized velocity over one step.
#[inline]
pub fn advance_momentum(u: Vec3, f: &InterpolatedField, q_over_m: f64, dt: f64) -> Vec3 {
    let kick = 0.5 * q_over_m * dt;
    let u_minus = u + f.e * kick;
    let gamma = lorentz_gamma(u_minus);
    let n = f.b * (kick / gamma);
    let u_prime = u_minus + u_minus.cross(n);
    let s = 2.0 / (1.0 + n.norm_sq());
    let u_plus = u_minus + u_prime.cross(n * s);
    u_plus + f.e * kick
}

/// Result of a position push.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Push {
    /// New position; cell indices are not wrapped into the grid.
    pub pos: CellPos,
    /// Signed number of cells crossed along x and y (each in -1..=1).
    pub crossing: (i32, i32),
}

/// Moves `frac + delta` back into `[0, 1)`, returning the new offset and carry.
#[inline(always)]
fn renormalize(frac: f64, delta: f64) -> (f64, i64) {
    let s = frac + delta;
    let carry = s.floor();
    let mut f = s - carry;
    let mut carry = carry as i64;
    // s slightly below an integer can round to exactly 1.0
    if f >= 1.0 {
        f = 0.0;
        carry += 1;
    }
    (f, carry)
}

/// Leapfrog position advance in cell units: `x += u/γ · dt / dx`.
#[inline]
pub fn push_position(p: &Particle, dt: f64, dx: f64, dy: f64) -> Result<Push> {
    let rg = 1.0 / lorentz_gamma(p.u);
    let (x, cx) = renormalize(p.x, p.u.x * rg * dt / dx);
    let (y, cy) = renormalize(p.y, p.u.y * rg * dt / dy);
    if cx.abs() > 1 {
        return Err(Error::CourantBreach { axis: 'x', carry: cx });
    }
    if cy.abs() > 1 {
        return Err(Error::CourantBreach { axis: 'y', carry: cy });
    }
    Ok(Push {
        pos: CellPos { ix: p.ix + cx as i32, iy: p.iy + cy as i32, x, y },
        crossing: (cx as i32, cy as i32),
    })
}
