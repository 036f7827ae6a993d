//! Charge-conserving current deposition (Villasenor–Buneman).
//!
//! A particle is a uniform square of charge one cell wide. While its centre
//! stays inside one cell the square overlaps the same four charge nodes, and
//! the charge crossing the four boundaries between them has a closed form.
//! A step that leaves the cell is cut at every cell face it crosses, giving
//! up to three such sub-moves.
//!
//! Charge density and current use density-weighted particle charges `q`
//! (see [`SpeciesSpec::particle_charge`](crate::config::SpeciesSpec::particle_charge)):
//! `ρ = Σ q·w`, so the in-plane fluxes become `Jx = q·F·dx/dt` and
//! `Jy = q·G·dy/dt`, which satisfies `∇·J + ∂ρ/∂t = 0` on the staggered mesh.

use arrayvec::ArrayVec;

use crate::error::{Error, Result};
use crate::grid::Grid2;
use crate::particle::CellPos;
use crate::vec3::Vec3;

/// A straight sub-move that stays inside one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub ix: i32,
    pub iy: i32,
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    /// Fraction of the full step spent on this segment.
    pub fraction: f64,
}

impl Segment {
    pub fn dx(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn dy(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// Up to three segments, stack allocated.
pub type Segments = ArrayVec<Segment, 3>;

/// Cuts the straight path `old → new` at every cell face it crosses.
///
/// Face crossings are read off the cell indices (the half-open convention of
/// the pusher decides membership), so a path ending exactly on a face is one
/// segment. Each segment is expressed in its own cell's frame; the last one
/// ends exactly at `new`.
pub fn split_trajectory(old: CellPos, new: CellPos) -> Result<Segments> {
    let sx = new.ix - old.ix;
    let sy = new.iy - old.iy;
    if sx.abs() > 1 {
        return Err(Error::CourantBreach { axis: 'x', carry: sx as i64 });
    }
    if sy.abs() > 1 {
        return Err(Error::CourantBreach { axis: 'y', carry: sy as i64 });
    }
    // end point in the frame of the starting cell
    let xe = sx as f64 + new.x;
    let ye = sy as f64 + new.y;
    let (ddx, ddy) = (xe - old.x, ye - old.y);

    let face = |s: i32| if s > 0 { 1.0 } else { 0.0 };
    let tx = if sx != 0 { Some((face(sx) - old.x) / ddx) } else { None };
    let ty = if sy != 0 { Some((face(sy) - old.y) / ddy) } else { None };

    // crossings as (t, axis), sorted by t; x first on ties
    let mut cuts: [(f64, u8); 2] = [(f64::INFINITY, 0); 2];
    let mut n = 0;
    if let Some(t) = tx {
        cuts[n] = (t, 0);
        n += 1;
    }
    if let Some(t) = ty {
        cuts[n] = (t, 1);
        n += 1;
    }
    if n == 2 && cuts[1].0 < cuts[0].0 {
        cuts.swap(0, 1);
    }

    let mut out = Segments::new();
    let (mut ix, mut iy) = (old.ix, old.iy);
    let (mut x, mut y) = (old.x, old.y);
    let mut t_prev = 0.0;
    for &(t, axis) in &cuts[..n] {
        let t = t.clamp(t_prev, 1.0);
        // cut point in the current cell's frame
        let (cx, cy) = if axis == 0 {
            (face(sx), old.y + t * ddy - (iy - old.iy) as f64)
        } else {
            (old.x + t * ddx - (ix - old.ix) as f64, face(sy))
        };
        out.push(Segment { ix, iy, x0: x, y0: y, x1: cx, y1: cy, fraction: t - t_prev });
        // step into the neighbour: the crossed coordinate flips to the
        // opposite face of the new cell
        if axis == 0 {
            ix += sx;
            x = 1.0 - face(sx);
            y = cy;
        } else {
            iy += sy;
            y = 1.0 - face(sy);
            x = cx;
        }
        t_prev = t;
    }
    debug_assert_eq!((ix, iy), (new.ix, new.iy));
    out.push(Segment { ix, iy, x0: x, y0: y, x1: new.x, y1: new.y, fraction: 1.0 - t_prev });
    Ok(out)
}

/// Dimensionless boundary fluxes of one segment.
///
/// `jx[0]`, `jx[1]`: charge fraction crossing the x-boundary of the cell in
/// rows `iy` and `iy + 1`; `jy[0]`, `jy[1]`: crossing the y-boundary in
/// columns `ix` and `ix + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fluxes {
    pub jx: [f64; 2],
    pub jy: [f64; 2],
}

/// Boundary fluxes for a unit charge, measured from the local origin at the
/// cell centre.
#[inline(always)]
pub fn segment_fluxes(seg: &Segment) -> Fluxes {
    let (ddx, ddy) = (seg.dx(), seg.dy());
    // start relative to the local origin
    let (lx, ly) = (seg.x0 - 0.5, seg.y0 - 0.5);
    Fluxes {
        jx: [ddx * (0.5 - ly - 0.5 * ddy), ddx * (0.5 + ly + 0.5 * ddy)],
        jy: [ddy * (0.5 - lx - 0.5 * ddx), ddy * (0.5 + lx + 0.5 * ddx)],
    }
}

/// Scale factors turning dimensionless fluxes into current density.
#[derive(Debug, Clone, Copy)]
pub struct DepositScale {
    /// `q·dx/dt`
    pub jx: f64,
    /// `q·dy/dt`
    pub jy: f64,
    /// `q·vz`
    pub jz: f64,
}

impl DepositScale {
    pub fn new(q: f64, vz: f64, dt: f64, dx: f64, dy: f64) -> Self {
        DepositScale { jx: q * dx / dt, jy: q * dy / dt, jz: q * vz }
    }
}

/// Accumulates one segment into `j` (indices in the frame of `j`).
#[inline(always)]
pub fn deposit_segment(seg: &Segment, scale: &DepositScale, j: &mut Grid2<Vec3>) {
    let (i, k) = (seg.ix as isize, seg.iy as isize);
    let f = segment_fluxes(seg);
    j[(i, k)].x += scale.jx * f.jx[0];
    j[(i, k + 1)].x += scale.jx * f.jx[1];
    j[(i, k)].y += scale.jy * f.jy[0];
    j[(i + 1, k)].y += scale.jy * f.jy[1];

    let wz = scale.jz * seg.fraction;
    if wz != 0.0 {
        let xm = 0.5 * (seg.x0 + seg.x1);
        let ym = 0.5 * (seg.y0 + seg.y1);
        j[(i, k)].z += wz * (1.0 - xm) * (1.0 - ym);
        j[(i + 1, k)].z += wz * xm * (1.0 - ym);
        j[(i, k + 1)].z += wz * (1.0 - xm) * ym;
        j[(i + 1, k + 1)].z += wz * xm * ym;
    }
}

/// Splits `old → new` and deposits every segment.
///
/// `u` is the generalized velocity used for the step (its z component feeds
/// the out-of-plane current).
#[inline]
pub fn deposit_current(
    old: CellPos,
    new: CellPos,
    u: Vec3,
    q: f64,
    dt: f64,
    (dx, dy): (f64, f64),
    j: &mut Grid2<Vec3>,
) -> Result<()> {
    let vz = u.z / crate::vec3::lorentz_gamma(u);
    let scale = DepositScale::new(q, vz, dt, dx, dy);
    for seg in split_trajectory(old, new)?.iter() {
        deposit_segment(seg, &scale, j);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn global(ix: i32, x: f64) -> f64 {
        ix as f64 + x
    }

    /// Bisection for the parameter where the coordinate crosses `face`.
    fn bisect(a: f64, b: f64, face: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let f = |t: f64| a + t * (b - a) - face;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(lo) < 0.0) == (f(mid) < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn in_cell_motion_is_one_segment() {
        let old = CellPos::new(2, 3, 0.2, 0.3);
        let new = CellPos::new(2, 3, 0.6, 0.1);
        let s = split_trajectory(old, new).unwrap().to_vec();
        assert_eq!(s, vec![Segment { ix: 2, iy: 3, x0: 0.2, y0: 0.3, x1: 0.6, y1: 0.1, fraction: 1.0 }]);
    }

    #[test]
    fn x_face_crossing_matches_bisection() {
        let old = CellPos::new(2, 3, 0.8, 0.3);
        let new = CellPos::new(3, 3, 0.1, 0.5);
        let s = split_trajectory(old, new).unwrap().to_vec();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].x1, 1.0);
        assert_eq!(s[1].x0, 0.0);
        let t = bisect(global(2, 0.8), global(3, 0.1), 3.0);
        assert!((s[0].fraction - t).abs() < 1e-14);
        let y_cut = 0.3 + t * 0.2;
        assert!((s[0].y1 - y_cut).abs() < 1e-14);
        assert_eq!(s[1].y0, s[0].y1);
    }

    #[test]
    fn two_face_crossing_reproduces_path() {
        let old = CellPos::new(5, 5, 0.9, 0.85);
        let new = CellPos::new(6, 6, 0.2, 0.05);
        let s = split_trajectory(old, new).unwrap().to_vec();
        assert_eq!(s.len(), 3);
        let (ax, ay) = (global(5, 0.9), global(5, 0.85));
        let (bx, by) = (global(6, 0.2), global(6, 0.05));
        let tx = bisect(ax, bx, 6.0);
        let ty = bisect(ay, by, 6.0);
        let (t1, t2) = (tx.min(ty), tx.max(ty));
        assert!((s[0].fraction - t1).abs() < 1e-14);
        assert!((s[1].fraction - (t2 - t1)).abs() < 1e-14);
        // concatenated global endpoints lie on the straight path
        let mut t = 0.0;
        for seg in &s {
            let (gx0, gy0) = (global(seg.ix, seg.x0), global(seg.iy, seg.y0));
            assert!((gx0 - (ax + t * (bx - ax))).abs() < 1e-14);
            assert!((gy0 - (ay + t * (by - ay))).abs() < 1e-14);
            t += seg.fraction;
            let (gx1, gy1) = (global(seg.ix, seg.x1), global(seg.iy, seg.y1));
            assert!((gx1 - (ax + t * (bx - ax))).abs() < 1e-14);
            assert!((gy1 - (ay + t * (by - ay))).abs() < 1e-14);
        }
        assert!((t - 1.0).abs() < 1e-15);
        assert_eq!((s[2].ix, s[2].iy, s[2].x1, s[2].y1), (6, 6, 0.2, 0.05));
    }

    #[test]
    fn rejects_multi_cell_moves() {
        let r = split_trajectory(CellPos::new(0, 0, 0.5, 0.5), CellPos::new(2, 0, 0.5, 0.5));
        assert!(matches!(r, Err(Error::CourantBreach { axis: 'x', .. })));
    }

    #[test]
    fn flux_examples() {
        let seg = Segment { ix: 0, iy: 0, x0: 0.5, y0: 0.5, x1: 0.6, y1: 0.5, fraction: 1.0 };
        let f = segment_fluxes(&seg);
        assert!((f.jx[0] - 0.05).abs() < 1e-16 && (f.jx[1] - 0.05).abs() < 1e-16);
        assert_eq!(f.jy, [0.0, 0.0]);

        let seg = Segment { ix: 0, iy: 0, x0: 0.5, y0: 0.5, x1: 0.6, y1: 0.6, fraction: 1.0 };
        let f = segment_fluxes(&seg);
        assert!((f.jx[0] - 0.045).abs() < 1e-15);
        assert!((f.jx[1] - 0.055).abs() < 1e-15);
        assert!((f.jy[0] - 0.045).abs() < 1e-15);
        assert!((f.jy[1] - 0.055).abs() < 1e-15);
    }

    #[test]
    fn stationary_particle_deposits_nothing() {
        let mut j = Grid2::new(6, 6, 2);
        let p = CellPos::new(2, 2, 0.3, 0.4);
        deposit_current(p, p, Vec3::ZERO, 1.0, 0.07, (0.1, 0.1), &mut j).unwrap();
        assert!(j.as_slice().iter().all(|v| *v == Vec3::ZERO));
    }

    #[test]
    fn reversed_motion_negates_deposit() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            let a = CellPos::new(3, 3, rng.gen(), rng.gen());
            let b = CellPos::new(3 + rng.gen_range(-1..=1), 3 + rng.gen_range(-1..=1), rng.gen(), rng.gen());
            let mut fwd = Grid2::new(8, 8, 2);
            let mut bwd = Grid2::new(8, 8, 2);
            deposit_current(a, b, Vec3::ZERO, 0.7, 0.05, (0.1, 0.2), &mut fwd).unwrap();
            deposit_current(b, a, Vec3::ZERO, 0.7, 0.05, (0.1, 0.2), &mut bwd).unwrap();
            for (f, r) in fwd.as_slice().iter().zip(bwd.as_slice()) {
                let s = *f + *r;
                assert!(s.x.abs() < 1e-14 && s.y.abs() < 1e-14, "{a:?} -> {b:?}");
            }
        }
    }

    #[test]
    fn seven_boundary_motion_is_sum_of_segments() {
        let old = CellPos::new(2, 2, 0.7, 0.4);
        let new = CellPos::new(3, 2, 0.2, 0.6);
        let segs = split_trajectory(old, new).unwrap();
        assert_eq!(segs.len(), 2);
        let scale = DepositScale::new(1.0, 0.0, 1.0, 1.0, 1.0);
        let mut total = Grid2::new(6, 6, 2);
        deposit_current(old, new, Vec3::ZERO, 1.0, 1.0, (1.0, 1.0), &mut total).unwrap();
        let mut by_parts = Grid2::new(6, 6, 2);
        for s in segs.iter() {
            let mut one = Grid2::new(6, 6, 2);
            deposit_segment(s, &scale, &mut one);
            for (acc, v) in by_parts.as_mut_slice().iter_mut().zip(one.as_slice()) {
                *acc += *v;
            }
        }
        assert_eq!(total, by_parts);
        let touched = total.as_slice().iter().flat_map(|v| [v.x, v.y]).filter(|v| *v != 0.0).count();
        assert_eq!(touched, 7);
    }

    #[test]
    fn segment_count_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..2000 {
            let a = CellPos::new(4, 4, rng.gen(), rng.gen());
            let b = CellPos::new(4 + rng.gen_range(-1..=1), 4 + rng.gen_range(-1..=1), rng.gen(), rng.gen());
            let n = split_trajectory(a, b).unwrap().len();
            assert_eq!(n, 1 + (a.ix != b.ix) as usize + (a.iy != b.iy) as usize);
        }
    }
}
