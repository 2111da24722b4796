use super::profile::Profile;
use super::Scaling;

/// Uniform working grid on [0, 1), either periodic (torus) or treated as a
/// plain interval for path-valued data.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkingGrid {
    len: usize,
    periodic: bool,
}

impl WorkingGrid {
    pub fn torus(len: usize) -> Self {
        assert!(len >= 2 && len.is_power_of_two());
        WorkingGrid {
            len,
            periodic: true,
        }
    }

    pub fn interval(len: usize) -> Self {
        assert!(len >= 2 && len.is_power_of_two());
        WorkingGrid {
            len,
            periodic: false,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.len as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.point(i))
    }

    pub fn index_nearest(&self, x: f64) -> usize {
        let i = (x * self.len as f64).round() as i64;
        self.wrap(i)
    }

    fn wrap(&self, i: i64) -> usize {
        let n = self.len as i64;
        (((i % n) + n) % n) as usize
    }

    /// Signed displacement from x to y, shortest way round on the torus.
    pub fn displacement(&self, x: f64, y: f64) -> f64 {
        let mut d = y - x;
        if self.periodic {
            if d > 0.5 {
                d -= 1.0;
            }
            if d < -0.5 {
                d += 1.0;
            }
        }
        d
    }

    pub fn distance(&self, x: f64, y: f64) -> f64 {
        self.displacement(x, y).abs()
    }

    /// Sample a closure on all grid points.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.points().map(f).collect()
    }

    /// Indices within |y - x| ≤ radius; wraps on the torus, clips otherwise.
    pub fn window(&self, center: f64, radius: f64) -> Vec<usize> {
        let c = (center * self.len as f64).round() as i64;
        let w = (radius * self.len as f64).ceil() as i64;
        let mut out = Vec::with_capacity((2 * w + 1) as usize);
        for o in -w..=w {
            let i = c + o;
            if self.periodic {
                out.push(self.wrap(i));
            } else if i >= 0 && (i as usize) < self.len {
                out.push(i as usize);
            }
        }
        out
    }

    /// Quadrature pairing ⟨g, η^δ_x⟩ = ∫ g(y) δ^{-1} η((y-x)/δ) dy on the grid.
    /// Returns None when the test function does not fit inside a non-periodic
    /// domain.
    pub fn pair(
        &self,
        g: impl Fn(usize, f64) -> f64,
        profile: &Profile,
        center: f64,
        delta: f64,
    ) -> Option<f64> {
        let (lo, hi) = profile.support();
        if !self.periodic && (center + delta * lo < 0.0 || center + delta * hi > 1.0) {
            return None;
        }
        let radius = delta * lo.abs().max(hi.abs());
        let mut acc = 0.0;
        for i in self.window(center, radius) {
            let y = self.point(i);
            let u = self.displacement(center, y) / delta;
            let w = profile.eval(u);
            if w != 0.0 {
                acc += w * g(i, y);
            }
        }
        Some(acc * self.spacing() / delta)
    }

    /// Discrete convolution with a sampled kernel; periodic wrap or clipped
    /// window depending on the grid flavor.
    pub fn convolve(&self, f: &[f64], kernel: &Kernel) -> Vec<f64> {
        assert_eq!(f.len(), self.len);
        let n = self.len as i64;
        let w = kernel.half_width as i64;
        let mut out = vec![0.0; self.len];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for o in -w..=w {
                let j = i as i64 - o;
                let weight = kernel.weights[(o + w) as usize];
                if weight == 0.0 {
                    continue;
                }
                let value = if self.periodic {
                    f[(((j % n) + n) % n) as usize]
                } else if j >= 0 && j < n {
                    f[j as usize]
                } else {
                    continue;
                };
                acc += weight * value;
            }
            *slot = acc;
        }
        out
    }
}

/// A sampled convolution kernel with quadrature weights folded in:
/// `(k * f)[i] = Σ_o weights[o] f[i-o]`.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub half_width: usize,
    pub weights: Vec<f64>,
}

impl Kernel {
    /// Samples `D^m φ^λ` on the grid: weight at offset o is
    /// `λ^{-1-m} p^{(m)}(oΔ/λ) Δ`. With `normalize` the zeroth-order kernel
    /// is rescaled so its weights sum to exactly 1, making the discrete
    /// convolution reproduce constants bit-for-bit.
    pub fn from_profile(
        profile: &Profile,
        order: u32,
        lambda: f64,
        grid: &WorkingGrid,
        normalize: bool,
    ) -> Self {
        let spacing = grid.spacing();
        let (lo, hi) = profile.support();
        let radius = lambda * lo.abs().max(hi.abs());
        let half_width = (radius / spacing).ceil() as usize;
        let mut weights = Vec::with_capacity(2 * half_width + 1);
        for o in -(half_width as i64)..=(half_width as i64) {
            let v = o as f64 * spacing / lambda;
            weights.push(profile.deriv_eval(order, v) / lambda.powi(1 + order as i32) * spacing);
        }
        if normalize {
            let total: f64 = weights.iter().sum();
            assert!(total.abs() > 0.0, "kernel must have nonzero mass");
            for w in &mut weights {
                *w /= total;
            }
        }
        Kernel {
            half_width,
            weights,
        }
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// The rescaled dyadic grid Λ_n with per-axis spacing 2^{-n s_i}, restricted
/// to the unit box.
#[derive(Clone, Debug)]
pub struct DyadicGrid {
    level: u32,
    scaling: Scaling,
}

impl DyadicGrid {
    pub fn new(level: u32, scaling: Scaling) -> Self {
        DyadicGrid { level, scaling }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        0.5f64.powi((self.level * self.scaling.exponent(axis)) as i32)
    }

    /// Number of points per axis inside [0, 1).
    pub fn points_per_axis(&self, axis: usize) -> usize {
        (1.0 / self.spacing(axis)).round() as usize
    }

    /// All grid points in the unit box, in lexicographic order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let d = self.scaling.dim();
        let mut out: Vec<Vec<f64>> = vec![Vec::new()];
        for axis in 0..d {
            let spacing = self.spacing(axis);
            let count = self.points_per_axis(axis);
            let mut next = Vec::with_capacity(out.len() * count);
            for p in &out {
                for k in 0..count {
                    let mut q = p.clone();
                    q.push(k as f64 * spacing);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    pub fn refine(&self) -> DyadicGrid {
        DyadicGrid {
            level: self.level + 1,
            scaling: self.scaling.clone(),
        }
    }

    /// Offsets h ∈ Λ_n with ‖h‖ ≤ C 2^{-n} (one-dimensional localized grid).
    pub fn localized_offsets_1d(&self, c: f64) -> Vec<f64> {
        let spacing = self.spacing(0);
        let bound = c * 0.5f64.powi(self.level as i32);
        let jmax = (bound / spacing).floor() as i64;
        (-jmax..=jmax).map(|j| j as f64 * spacing).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::profile::make_bump;

    #[test]
    fn torus_displacement_wraps() {
        let g = WorkingGrid::torus(16);
        assert!((g.displacement(0.9, 0.1) - 0.2).abs() < 1e-12);
        assert!((g.displacement(0.1, 0.9) + 0.2).abs() < 1e-12);
        let gi = WorkingGrid::interval(16);
        assert!((gi.displacement(0.9, 0.1) + 0.8).abs() < 1e-12);
    }

    #[test]
    fn normalized_kernel_reproduces_constants() {
        let g = WorkingGrid::torus(1 << 10);
        let bump = make_bump(2).normalized_integral();
        let k = Kernel::from_profile(&bump, 0, 0.05, &g, true);
        assert!((k.sum() - 1.0).abs() < 1e-15);
        let ones = vec![1.0; g.len()];
        let out = g.convolve(&ones, &k);
        for v in out {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn pairing_of_constant_gives_profile_integral() {
        let g = WorkingGrid::torus(1 << 12);
        let bump = make_bump(2);
        for delta in [0.5, 0.25, 0.03125] {
            let value = g.pair(|_, _| 1.0, &bump, 0.375, delta).unwrap();
            assert!((value - bump.integral()).abs() < 1e-6, "delta {delta}");
        }
    }

    #[test]
    fn interval_pairing_rejects_overhang() {
        let g = WorkingGrid::interval(1 << 8);
        let bump = make_bump(2);
        assert!(g.pair(|_, _| 1.0, &bump, 0.05, 0.25).is_none());
        assert!(g.pair(|_, _| 1.0, &bump, 0.5, 0.25).is_some());
    }

    #[test]
    fn dyadic_grid_nesting() {
        let g = DyadicGrid::new(3, Scaling::isotropic(1));
        let fine = g.refine();
        let fine_points = fine.points();
        for p in g.points() {
            assert!(fine_points
                .iter()
                .any(|q| (q[0] - p[0]).abs() < 1e-12));
        }
        assert_eq!(g.points().len(), 8);
        assert_eq!(fine.points().len(), 16);
    }

    #[test]
    fn localized_offsets_stay_in_ball() {
        let g = DyadicGrid::new(4, Scaling::isotropic(1));
        let offsets = g.localized_offsets_1d(2.0);
        assert!(offsets.contains(&0.0));
        for h in offsets {
            assert!(h.abs() <= 2.0 * 0.0625 + 1e-12);
        }
    }
}
