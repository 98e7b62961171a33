//! Rectangular cell grids used as histogram support.

use num_complex::Complex64;

/// Uniform grid over `[x_min, x_max] x [y_min, y_max]` with `nx * ny` cells.
/// Cell `(i, j)` is column `i`, row `j`; values are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl Grid2D {
    /// # Panics
    /// If a range is empty or a bin count is zero.
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize) -> Self {
        assert!(x_range.1 > x_range.0 && y_range.1 > y_range.0, "empty grid range");
        assert!(nx > 0 && ny > 0, "grid needs at least one cell per axis");
        Self {
            x_min: x_range.0,
            x_max: x_range.1,
            y_min: y_range.0,
            y_max: y_range.1,
            nx,
            ny,
            values: vec![0.0; nx * ny],
        }
    }

    /// Square grid of `bins x bins` cells covering the disk `|z| <= radius`.
    pub fn covering_disk(radius: f64, bins: usize) -> Self {
        Self::new((-radius, radius), (-radius, radius), bins, bins)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.y_min, self.y_max)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Cell containing `z`; points on the upper/right edge belong to the last
    /// cell, points outside the grid map to `None`.
    pub fn cell_of(&self, z: Complex64) -> Option<(usize, usize)> {
        if !(self.x_min..=self.x_max).contains(&z.re) || !(self.y_min..=self.y_max).contains(&z.im) {
            return None;
        }
        let i = (((z.re - self.x_min) / self.dx()) as usize).min(self.nx - 1);
        let j = (((z.im - self.y_min) / self.dy()) as usize).min(self.ny - 1);
        Some((i, j))
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn center(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(
            self.x_min + (i as f64 + 0.5) * self.dx(),
            self.y_min + (j as f64 + 0.5) * self.dy(),
        )
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.index(i, j);
        self.values[k] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Same geometry, all values zero.
    pub fn zeroed(&self) -> Self {
        Self {
            values: vec![0.0; self.values.len()],
            ..self.clone()
        }
    }

    /// Iterates `(i, j, center, value)` row by row.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, Complex64, f64)> + '_ {
        (0..self.ny).flat_map(move |j| {
            (0..self.nx).map(move |i| (i, j, self.center(i, j), self.get(i, j)))
        })
    }

    /// `sum(values) * cell_area`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    pub fn covers_disk(&self, radius: f64) -> bool {
        self.x_min <= -radius && self.x_max >= radius && self.y_min <= -radius && self.y_max >= radius
    }
}
