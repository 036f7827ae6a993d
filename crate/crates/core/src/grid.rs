//! Row-major 2D arrays with a guard ring.

/// An `nx × ny` array surrounded by `guard` cells on every side.
///
/// Cells are addressed with signed interior coordinates: `(0, 0)` is the
/// first interior cell and `(-guard, -guard)` the first stored cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2<T> {
    nx: usize,
    ny: usize,
    guard: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> Grid2<T> {
    pub fn new(nx: usize, ny: usize, guard: usize) -> Self {
        let len = (nx + 2 * guard) * (ny + 2 * guard);
        Grid2 { nx, ny, guard, data: vec![T::default(); len] }
    }

    pub fn fill(&mut self, v: T) {
        self.data.fill(v);
    }

    /// Interior values in row-major order (x fastest).
    pub fn interior(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny as isize {
            for i in 0..self.nx as isize {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    /// Sets interior values from a row-major slice of length `nx·ny`.
    pub fn set_interior(&mut self, values: &[T]) {
        assert_eq!(values.len(), self.nx * self.ny);
        for j in 0..self.ny {
            for i in 0..self.nx {
                self[(i as isize, j as isize)] = values[j * self.nx + i];
            }
        }
    }
}

impl<T> Grid2<T> {
    #[inline(always)]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline(always)]
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline(always)]
    pub fn guard(&self) -> usize {
        self.guard
    }

    /// Row length including guards.
    #[inline(always)]
    pub fn stride(&self) -> usize {
        self.nx + 2 * self.guard
    }

    #[inline(always)]
    pub fn contains(&self, i: isize, j: isize) -> bool {
        let g = self.guard as isize;
        i >= -g && j >= -g && i < self.nx as isize + g && j < self.ny as isize + g
    }

    #[inline(always)]
    pub fn is_interior(&self, i: isize, j: isize) -> bool {
        i >= 0 && j >= 0 && i < self.nx as isize && j < self.ny as isize
    }

    #[inline(always)]
    pub fn index(&self, i: isize, j: isize) -> usize {
        debug_assert!(self.contains(i, j), "({i}, {j}) outside grid with guard {}", self.guard);
        let g = self.guard as isize;
        ((j + g) as usize) * self.stride() + (i + g) as usize
    }

    /// Raw storage including guards.
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Iterates over every stored coordinate, guards included.
    pub fn coords(&self) -> impl Iterator<Item = (isize, isize)> {
        let g = self.guard as isize;
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        (-g..ny + g).flat_map(move |j| (-g..nx + g).map(move |i| (i, j)))
    }
}

impl<T> std::ops::Index<(isize, isize)> for Grid2<T> {
    type Output = T;
    #[inline(always)]
    fn index(&self, (i, j): (isize, isize)) -> &T {
        &self.data[Grid2::index(self, i, j)]
    }
}

impl<T> std::ops::IndexMut<(isize, isize)> for Grid2<T> {
    #[inline(always)]
    fn index_mut(&mut self, (i, j): (isize, isize)) -> &mut T {
        let k = Grid2::index(self, i, j);
        &mut self.data[k]
    }
}
