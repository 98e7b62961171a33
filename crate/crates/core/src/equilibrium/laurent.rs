use std::f64::consts::PI;

use num_complex::Complex64;

use super::EquilibriumError;

/// Exterior conformal map `z(w) = r w + sum_{k=0}^{m} u_k w^{-k}` from
/// `|w| > 1` onto the complement of a droplet.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentMap {
    r: f64,
    u: Vec<Complex64>,
}

/// Node `w_j = exp(2 pi i j / m)` on the unit circle.
pub fn unit_node(j: usize, m: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64)
}

impl LaurentMap {
    /// # Panics
    /// If `r` is not positive and finite.
    pub fn new(r: f64, u: Vec<Complex64>) -> Self {
        assert!(r.is_finite() && r > 0.0, "conformal radius must be positive, got {r}");
        Self { r, u }
    }

    /// Disk of radius `r` centered at the origin, with `m + 1` zero
    /// coefficients.
    pub fn circle(r: f64, m: usize) -> Self {
        Self::new(r, vec![Complex64::new(0.0, 0.0); m + 1])
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `u_0 .. u_m`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.u
    }

    /// Truncation order `m` (highest inverse power).
    pub fn order(&self) -> usize {
        self.u.len().saturating_sub(1)
    }

    /// Coefficient of `w^{-k}`; zero beyond the truncation.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.u.get(k).copied().unwrap_or_default()
    }

    /// Real parameter vector `[r, Re u_0, Im u_0, ...]`.
    pub(crate) fn to_params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(1 + 2 * self.u.len());
        p.push(self.r);
        for c in &self.u {
            p.push(c.re);
            p.push(c.im);
        }
        p
    }

    pub(crate) fn from_params(p: &[f64]) -> Option<Self> {
        let r = p[0];
        if !(r.is_finite() && r > 0.0) || p.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let u = p[1..].chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        Some(Self { r, u })
    }

    /// `z(w)`.
    pub fn eval(&self, w: Complex64) -> Complex64 {
        let inv = w.inv();
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.u.iter().rev() {
            acc = acc * inv + c;
        }
        self.r * w + acc
    }

    /// `z'(w) = r - sum_k k u_k w^{-k-1}`.
    pub fn deriv(&self, w: Complex64) -> Complex64 {
        let inv = w.inv();
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in self.u.iter().enumerate().skip(1).rev() {
            acc = acc * inv + c * k as f64;
        }
        // acc = sum_k k u_k w^{-(k-1)}
        self.r - acc * inv * inv
    }

    /// Boundary points `z(w_j)` at `m` uniform nodes.
    pub fn boundary(&self, m: usize) -> Vec<Complex64> {
        (0..m).map(|j| self.eval(unit_node(j, m))).collect()
    }

    /// `pi (r^2 - sum_{k>=1} k |u_k|^2)`.
    pub fn area(&self) -> f64 {
        let tail: f64 = self
            .u
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| k as f64 * c.norm_sqr())
            .sum();
        PI * (self.r * self.r - tail)
    }

    /// Default quadrature size for moments up to `k_max`.
    pub fn quadrature_nodes(&self, k_max: usize) -> usize {
        (64 * (self.order() + k_max)).max(256)
    }

    /// Minimum of `|z'(w)|` over `m` uniform nodes of the unit circle.
    pub fn min_boundary_dz(&self, m: usize) -> f64 {
        (0..m)
            .map(|j| self.deriv(unit_node(j, m)).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest distance between two boundary points (sampled).
    pub fn diameter(&self) -> f64 {
        let pts = self.boundary(512);
        let mut best: f64 = 0.0;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                best = best.max((a - b).norm());
            }
        }
        best
    }

    /// Univalence on `|w| >= 1`: `z'` nonzero on a dense circle grid and a
    /// simple boundary polyline.
    pub fn check_univalent(&self) -> Result<(), EquilibriumError> {
        let m = (64 * (self.order() + 1)).max(1024);
        let min_dz = self.min_boundary_dz(m);
        if !(min_dz > 0.0) {
            return Err(EquilibriumError::NonPhysicalMap(format!(
                "z'(w) vanishes on the unit circle (min |z'| = {min_dz:e})"
            )));
        }
        if let Some((a, b)) = self_intersection(&self.boundary(m)) {
            return Err(EquilibriumError::NonPhysicalMap(format!(
                "boundary segments {a} and {b} intersect"
            )));
        }
        Ok(())
    }

    /// `z'` has no zeros on or outside the unit circle (argument principle
    /// on 512 nodes). Maps that passed a cusp fail this even when `z'` is
    /// nonzero on the circle itself.
    pub fn regular_exterior(&self) -> bool {
        let m = 512;
        let dz: Vec<Complex64> = (0..m).map(|j| self.deriv(unit_node(j, m))).collect();
        if dz.iter().any(|d| !(d.norm() > 0.0)) {
            return false;
        }
        let turn: f64 = (0..m).map(|j| (dz[(j + 1) % m] / dz[j]).arg()).sum();
        turn.abs() < PI
    }

    /// Winding number of the boundary curve around `z`.
    pub fn winding_number(&self, z: Complex64) -> i64 {
        let m = (64 * (self.order() + 1)).max(1024);
        let pts = self.boundary(m);
        let mut total = 0.0;
        for j in 0..m {
            let a = pts[j] - z;
            let b = pts[(j + 1) % m] - z;
            total += (b / a).arg();
        }
        (total / (2.0 * PI)).round() as i64
    }

    /// Preimage `w(z)` with `|w| >= 1`, or `NotInExterior` for points inside
    /// the droplet.
    ///
    /// Newton from `z / r` first; if that does not land on the exterior
    /// branch, the root is tracked along rays coming in from far away.
    pub fn invert(&self, z: Complex64) -> Result<Complex64, EquilibriumError> {
        const TOL: f64 = 1e-10;
        if let Some(w) = self.newton_invert(z, z / self.r, 50) {
            if w.norm() >= 1.0 - TOL {
                return Ok(w);
            }
        }
        let scale = self.r + self.u.iter().map(|c| c.norm()).sum::<f64>();
        let far = 4.0 * (scale + z.norm());
        for dir in 0..16 {
            let d = Complex64::from_polar(1.0, 2.0 * PI * dir as f64 / 16.0 + 0.1);
            if let Some(w) = self.track_ray(z, d, far) {
                return Ok(w);
            }
        }
        Err(EquilibriumError::NotInExterior(z))
    }

    fn newton_invert(&self, z: Complex64, mut w: Complex64, iters: usize) -> Option<Complex64> {
        let tol = 1e-14 * (1.0 + z.norm());
        for _ in 0..iters {
            let f = self.eval(w) - z;
            if f.norm() <= tol {
                return Some(w);
            }
            let d = self.deriv(w);
            if d.norm() == 0.0 {
                return None;
            }
            w -= f / d;
            if !w.re.is_finite() || !w.im.is_finite() || w.norm() < 1e-8 {
                return None;
            }
        }
        ((self.eval(w) - z).norm() <= 1e-11 * (1.0 + z.norm())).then_some(w)
    }

    /// Follows the exterior root from `z + far d` back to `z`; gives up if
    /// the path enters the unit disk in the `w` plane.
    fn track_ray(&self, z: Complex64, d: Complex64, far: f64) -> Option<Complex64> {
        let start = z + d * far;
        let mut w = self.newton_invert(start, start / self.r, 100)?;
        let steps = 400;
        for s in 1..=steps {
            let frac = 1.0 - s as f64 / steps as f64;
            let target = z + d * (far * frac * frac);
            w = self.newton_invert(target, w, 30)?;
            if w.norm() < 1.0 - 1e-10 {
                return None;
            }
        }
        Some(w)
    }
}

/// First pair of non-adjacent intersecting segments of a closed polyline.
pub(crate) fn self_intersection(pts: &[Complex64]) -> Option<(usize, usize)> {
    let m = pts.len();
    let seg = |k: usize| (pts[k], pts[(k + 1) % m]);
    for a in 0..m {
        let (p1, p2) = seg(a);
        let (ax0, ax1) = (p1.re.min(p2.re), p1.re.max(p2.re));
        let (ay0, ay1) = (p1.im.min(p2.im), p1.im.max(p2.im));
        for b in a + 2..m {
            if a == 0 && b == m - 1 {
                continue;
            }
            let (q1, q2) = seg(b);
            if q1.re.max(q2.re) < ax0
                || q1.re.min(q2.re) > ax1
                || q1.im.max(q2.im) < ay0
                || q1.im.min(q2.im) > ay1
            {
                continue;
            }
            if segments_cross(p1, p2, q1, q2) {
                return Some((a, b));
            }
        }
    }
    None
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_cross(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> bool {
    let d1 = cross(p2 - p1, q1 - p1);
    let d2 = cross(p2 - p1, q2 - p1);
    let d3 = cross(q2 - q1, p1 - q1);
    let d4 = cross(q2 - q1, p2 - q1);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}
