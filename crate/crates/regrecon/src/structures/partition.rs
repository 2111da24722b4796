use super::poly::Poly1;
use super::profile::Profile;
use super::Scaling;

/// A smooth partition of unity adapted to the dyadic cells of Λ_n on the unit
/// box, built by normalizing overlapping bumps: 𝟙^n_k = B^n_k / Σ_{k'} B^n_{k'}.
/// Each bump is supported in one cell-width around its center, so derivatives
/// of order m grow like 2^{n |m|_s} with a level-independent constant. The
/// normalization makes the family sum to 1 on the torus and on the plain
/// interval alike.
#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    level: u32,
    scaling: Scaling,
    profile: Profile,
    periodic: bool,
}

impl PartitionOfUnity {
    pub fn new(level: u32, scaling: Scaling, periodic: bool) -> Self {
        // Fixed overlapping bump; the normalizing denominator stays bounded
        // away from zero because the support radius equals the cell spacing.
        let profile = Profile::new(Poly1::one_minus_square_pow(3), 0.0, 1.0, 1.0, 2);
        PartitionOfUnity {
            level,
            scaling,
            profile,
            periodic,
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.scaling.dim()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        0.5f64.powi((self.level * self.scaling.exponent(axis)) as i32)
    }

    pub fn cells_per_axis(&self, axis: usize) -> usize {
        (1.0 / self.spacing(axis)).round() as usize
    }

    pub fn center(&self, axis: usize, k: usize) -> f64 {
        k as f64 * self.spacing(axis)
    }

    fn wrap(&self, d: f64) -> f64 {
        if !self.periodic {
            return d;
        }
        let mut d = d;
        if d > 0.5 {
            d -= 1.0;
        }
        if d < -0.5 {
            d += 1.0;
        }
        d
    }

    fn axis_bump(&self, axis: usize, k: usize, x: f64) -> f64 {
        let h = self.spacing(axis);
        let u = self.wrap(x - self.center(axis, k)) / h;
        self.profile.eval(u)
    }

    fn axis_bump_d1(&self, axis: usize, k: usize, x: f64) -> f64 {
        let h = self.spacing(axis);
        let u = self.wrap(x - self.center(axis, k)) / h;
        self.profile.deriv_eval(1, u) / h
    }

    fn axis_neighbors(&self, axis: usize, x: f64) -> Vec<usize> {
        let h = self.spacing(axis);
        let count = self.cells_per_axis(axis) as i64;
        let base = (x / h).round() as i64;
        let mut out = Vec::with_capacity(3);
        for o in -1..=1 {
            let k = base + o;
            let k = if self.periodic {
                ((k % count) + count) % count
            } else if k < 0 || k >= count {
                continue;
            } else {
                k
            };
            let k = k as usize;
            if !out.contains(&k) {
                out.push(k);
            }
        }
        out
    }

    fn axis_value_d1(&self, axis: usize, k: usize, x: f64) -> (f64, f64) {
        let b = self.axis_bump(axis, k, x);
        let db = self.axis_bump_d1(axis, k, x);
        let mut s = 0.0;
        let mut ds = 0.0;
        for j in self.axis_neighbors(axis, x) {
            s += self.axis_bump(axis, j, x);
            ds += self.axis_bump_d1(axis, j, x);
        }
        debug_assert!(s > 0.0, "partition denominator vanished");
        ((b / s), (db * s - b * ds) / (s * s))
    }

    /// 𝟙^n_k(x) for a lattice index k (one entry per axis).
    pub fn value(&self, k: &[usize], x: &[f64]) -> f64 {
        debug_assert_eq!(k.len(), self.dim());
        let mut out = 1.0;
        for axis in 0..self.dim() {
            out *= self.axis_value_d1(axis, k[axis], x[axis]).0;
            if out == 0.0 {
                return 0.0;
            }
        }
        out
    }

    /// First partial derivative along `axis`.
    pub fn deriv1(&self, k: &[usize], x: &[f64], axis: usize) -> f64 {
        let mut out = 1.0;
        for a in 0..self.dim() {
            let (v, dv) = self.axis_value_d1(a, k[a], x[a]);
            out *= if a == axis { dv } else { v };
        }
        out
    }

    /// Lattice indices whose bump can be nonzero at x.
    pub fn supporting_cells(&self, x: &[f64]) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = vec![Vec::new()];
        for axis in 0..self.dim() {
            let neighbors = self.axis_neighbors(axis, x[axis]);
            let mut next = Vec::with_capacity(out.len() * neighbors.len());
            for prefix in &out {
                for &k in &neighbors {
                    let mut p = prefix.clone();
                    p.push(k);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }

    /// Σ_k 𝟙^n_k(x); equals 1 by construction, exposed for the tests.
    pub fn sum_at(&self, x: &[f64]) -> f64 {
        self.supporting_cells(x)
            .iter()
            .map(|k| self.value(k, x))
            .sum()
    }
}
