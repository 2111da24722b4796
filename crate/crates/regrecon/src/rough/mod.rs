//! Branched rough paths as character-group-valued paths: canonical lifts of
//! piecewise-linear interpolations, the inhomogeneous rough path metric,
//! controlled paths, the compensated-Riemann-sum integral, the model
//! correspondence, and the mollified approximations.

mod controlled;
mod integral;
mod model;
mod smoothing;

pub use controlled::{controlled_norm, transport_matrix, ControlledNorm, ControlledPath};
pub use integral::{cumulative_rough_integral, rough_integral, rough_integral_table};
pub use model::{branched_structure, rp_to_model, RoughPathModel};
pub use smoothing::{
    mollify_controlled_path, mollify_rough_path, mollified_integral_sweep, MollifiedIntegralRow,
};

use std::io::Write;

use thiserror::Error;

use crate::hopf::{enumerate_forests, enumerate_trees, Character, Forest, HopfError, Tree};
use crate::structures::WorkingGrid;

#[derive(Debug, Error)]
pub enum RoughPathError {
    #[error("level count N={n} with alpha={alpha} violates N·alpha < 1")]
    LevelCountOutOfRange { n: usize, alpha: f64 },
    #[error("paths live on different grids or truncations")]
    Mismatch,
    #[error("partition of [{s}, {t}] at level {level} does not sit on the grid")]
    PartitionOffGrid { s: f64, t: f64, level: u32 },
    #[error("smoothing width {width} spans under {min} grid cells")]
    UnderResolved { width: f64, min: usize },
    #[error("mollification needs a periodic time grid")]
    NeedsPeriodicGrid,
    #[error(transparent)]
    Hopf(#[from] HopfError),
}

/// A normalized branched rough path: a character path X: grid → G_N with
/// X_{t_0} = ε, increments X_{s,t} = X_s^{-1} ⋆ X_t multiplicative by
/// construction.
pub struct BranchedRoughPath {
    alpha: f64,
    n_max: usize,
    d: u32,
    grid: WorkingGrid,
    chars: Vec<Character<f64>>,
    inverses: Vec<Character<f64>>,
    trees: Vec<Tree>,
    forests: Vec<Forest>,
}

impl BranchedRoughPath {
    /// Lifts sampled path components by exact iterated integration of the
    /// piecewise-linear interpolation: on a linear segment with component
    /// increments Δ_j the character value on a tree τ is (Π_nodes Δ)/τ!.
    pub fn lift(
        grid: WorkingGrid,
        components: &[Vec<f64>],
        alpha: f64,
        n_max: usize,
    ) -> Result<Self, RoughPathError> {
        assert!(!components.is_empty());
        let d = components.len() as u32;
        if n_max < 1 || n_max > 3 || n_max as f64 * alpha >= 1.0 {
            return Err(RoughPathError::LevelCountOutOfRange { n: n_max, alpha });
        }
        for c in components {
            assert_eq!(c.len(), grid.len());
        }
        let trees = enumerate_trees(d, n_max);
        let forests = enumerate_forests(d, n_max);
        let mut chars = Vec::with_capacity(grid.len());
        let mut current = Character::counit(d, n_max);
        chars.push(current.clone());
        for m in 1..grid.len() {
            let deltas: Vec<f64> = components.iter().map(|c| c[m] - c[m - 1]).collect();
            let step = segment_character(&trees, &deltas, d, n_max);
            current = current.product(&step)?;
            chars.push(current.clone());
        }
        let inverses = chars.iter().map(Character::inverse).collect();
        Ok(BranchedRoughPath {
            alpha,
            n_max,
            d,
            grid,
            chars,
            inverses,
            trees,
            forests,
        })
    }

    /// Builds a path directly from per-time characters (already normalized).
    pub fn from_characters(
        grid: WorkingGrid,
        chars: Vec<Character<f64>>,
        alpha: f64,
    ) -> Result<Self, RoughPathError> {
        assert_eq!(chars.len(), grid.len());
        let d = chars[0].d();
        let n_max = chars[0].max_nodes();
        if n_max as f64 * alpha >= 1.0 {
            return Err(RoughPathError::LevelCountOutOfRange { n: n_max, alpha });
        }
        let trees = enumerate_trees(d, n_max);
        let forests = enumerate_forests(d, n_max);
        let inverses = chars.iter().map(Character::inverse).collect();
        Ok(BranchedRoughPath {
            alpha,
            n_max,
            d,
            grid,
            chars,
            inverses,
            trees,
            forests,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn level_count(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> u32 {
        self.d
    }

    pub fn grid(&self) -> &WorkingGrid {
        &self.grid
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// All basis forests with ≤ N nodes including the unit, sorted by
    /// (node count, canonical order).
    pub fn forests(&self) -> &[Forest] {
        &self.forests
    }

    pub fn character_at(&self, index: usize) -> &Character<f64> {
        &self.chars[index]
    }

    pub fn inverse_at(&self, index: usize) -> &Character<f64> {
        &self.inverses[index]
    }

    /// The increment character X_{s,t} = X_s^{-1} ⋆ X_t.
    pub fn increment(&self, s_index: usize, t_index: usize) -> Character<f64> {
        self.inverses[s_index]
            .product(&self.chars[t_index])
            .expect("same truncation")
    }

    /// ⟨X_{s,t}, τ⟩ for a basis forest; the single evaluation route shared by
    /// the metric, the norms and the model correspondence.
    pub fn pair_increment(&self, s_index: usize, t_index: usize, forest: &Forest) -> f64 {
        self.increment(s_index, t_index).value(forest)
    }

    /// The Hölder statistic sup |⟨X_{s,t},τ⟩| / |t-s|^{α|τ|} over sampled
    /// pairs, maximized over the nonempty basis forests.
    pub fn holder_statistic(&self, pair_samples: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for (s, t) in self.sample_pairs(pair_samples) {
            let dist = self.grid.distance(self.grid.point(s), self.grid.point(t));
            if dist <= 0.0 || dist >= 1.0 {
                continue;
            }
            let inc = self.increment(s, t);
            for forest in self.forests.iter().filter(|f| !f.is_empty()) {
                let v = inc.value(forest).abs() / dist.powf(self.alpha * forest.node_count() as f64);
                worst = worst.max(v);
            }
        }
        worst
    }

    fn sample_pairs(&self, per_gap: usize) -> Vec<(usize, usize)> {
        let n = self.grid.len();
        let mut out = Vec::new();
        let mut gap = 1usize;
        while gap < n {
            let stride = (n / per_gap.max(1)).max(1);
            for s in (0..n).step_by(stride) {
                let t = s + gap;
                if t < n {
                    out.push((s, t));
                } else if self.grid.periodic() {
                    out.push((s, t - n));
                }
            }
            gap *= 2;
        }
        out
    }

    /// Re-verifies forest multiplicativity of the stored characters.
    pub fn multiplicativity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let stride = (self.grid.len() / 64).max(1);
        for idx in (0..self.grid.len()).step_by(stride) {
            let c = &self.chars[idx];
            for f in &self.forests {
                if f.trees().len() < 2 {
                    continue;
                }
                let direct = c.value(f);
                let product: f64 = f.trees().iter().map(|t| c.tree_value(t)).product();
                worst = worst.max((direct - product).abs());
            }
        }
        worst
    }

    /// Chen re-verified independently: a fresh product chain over [s, t]
    /// against the inverse-product increment.
    pub fn chen_residual_from_scratch(
        &self,
        components: &[Vec<f64>],
        triples: &[(usize, usize, usize)],
    ) -> f64 {
        let mut worst: f64 = 0.0;
        for &(s, u, t) in triples {
            assert!(s <= u && u <= t);
            let fresh = self.scratch_increment(components, s, t);
            let left = self.scratch_increment(components, s, u);
            let right = self.scratch_increment(components, u, t);
            let composed = left.product(&right).expect("same truncation");
            let algebra = self.increment(s, t);
            for forest in &self.forests {
                let a = fresh.value(forest);
                worst = worst.max((composed.value(forest) - a).abs());
                worst = worst.max((algebra.value(forest) - a).abs());
            }
        }
        worst
    }

    fn scratch_increment(
        &self,
        components: &[Vec<f64>],
        s: usize,
        t: usize,
    ) -> Character<f64> {
        let mut acc = Character::counit(self.d, self.n_max);
        for m in s..t {
            let deltas: Vec<f64> = components.iter().map(|c| c[m + 1] - c[m]).collect();
            let step = segment_character(&self.trees, &deltas, self.d, self.n_max);
            acc = acc.product(&step).expect("same truncation");
        }
        acc
    }

    /// Character dump as CSV rows (t, forest, value).
    pub fn dump_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "t,forest,value")?;
        let stride = (self.grid.len() / 256).max(1);
        for idx in (0..self.grid.len()).step_by(stride) {
            for forest in &self.forests {
                writeln!(
                    out,
                    "{:.17e},{},{:.17e}",
                    self.grid.point(idx),
                    forest,
                    self.chars[idx].value(forest)
                )?;
            }
        }
        Ok(())
    }
}

/// The one-step character of a linear segment.
fn segment_character(trees: &[Tree], deltas: &[f64], d: u32, n_max: usize) -> Character<f64> {
    fn label_product(tree: &Tree, deltas: &[f64]) -> f64 {
        let mut acc = deltas[(tree.label() - 1) as usize];
        for child in tree.children() {
            acc *= label_product(child, deltas);
        }
        acc
    }
    let values = trees
        .iter()
        .map(|t| (t.clone(), label_product(t, deltas) / t.factorial()));
    Character::from_tree_values(d, n_max, values).expect("basis trees within truncation")
}

/// The inhomogeneous metric sup_τ sup |⟨X_{s,t} − Y_{s,t}, τ⟩| / |t-s|^{α|τ|}
/// over sampled grid pairs; `eps_weak` relaxes the exponent on every tree
/// level like the weakened model topology.
pub fn rough_path_distance(
    x: &BranchedRoughPath,
    y: &BranchedRoughPath,
    eps_weak: f64,
    pair_samples: usize,
) -> Result<f64, RoughPathError> {
    if x.d != y.d || x.n_max != y.n_max || x.grid != y.grid || (x.alpha - y.alpha).abs() > 1e-12 {
        return Err(RoughPathError::Mismatch);
    }
    let mut worst: f64 = 0.0;
    for (s, t) in x.sample_pairs(pair_samples) {
        let dist = x.grid.distance(x.grid.point(s), x.grid.point(t));
        if dist <= 0.0 || dist >= 1.0 {
            continue;
        }
        let inc_x = x.increment(s, t);
        let inc_y = y.increment(s, t);
        for forest in x.forests.iter().filter(|f| !f.is_empty()) {
            let exponent = x.alpha * forest.node_count() as f64 - eps_weak;
            let v = (inc_x.value(forest) - inc_y.value(forest)).abs() / dist.powf(exponent);
            worst = worst.max(v);
        }
    }
    Ok(worst)
}
