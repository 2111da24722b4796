//! Modelled distributions: grid-sampled coefficient fields in T_{<γ}, the
//! canonical polynomial lift, the product with polynomial symbols, localized
//! constants, and the partition-of-unity density approximants.

mod density;
mod norm;

pub use density::density_approximant;
pub use norm::{dgamma_distance, dgamma_norm, DGammaNorm, DGammaOptions, LevelNorm};

use std::io::Write;

use crate::models::{Model, ModelError};
use crate::structures::{
    MultiIndex, PartitionOfUnity, Poly1, Profile, RegStructure, SymbolKind, WorkingGrid,
};

/// A scalar function with exact derivatives up to some order; the inputs the
/// canonical lift accepts.
pub trait SmoothFn {
    fn eval(&self, x: f64) -> f64;
    fn deriv(&self, order: u32, x: f64) -> f64;
    fn max_order(&self) -> u32;
}

impl SmoothFn for Poly1 {
    fn eval(&self, x: f64) -> f64 {
        Poly1::eval(self, x)
    }

    fn deriv(&self, order: u32, x: f64) -> f64 {
        let mut p = self.clone();
        for _ in 0..order {
            p = p.derivative();
        }
        p.eval(x)
    }

    fn max_order(&self) -> u32 {
        u32::MAX
    }
}

/// A bump profile placed in the domain: φ(x) = profile((x - center)/width).
#[derive(Clone, Debug)]
pub struct SmoothBump {
    pub profile: Profile,
    pub center: f64,
    pub width: f64,
}

impl SmoothFn for SmoothBump {
    fn eval(&self, x: f64) -> f64 {
        self.profile.eval((x - self.center) / self.width)
    }

    fn deriv(&self, order: u32, x: f64) -> f64 {
        self.profile.deriv_eval(order, (x - self.center) / self.width)
            / self.width.powi(order as i32)
    }

    fn max_order(&self) -> u32 {
        self.profile.max_order()
    }
}

/// One cell of a partition of unity viewed as a smooth function (exact value
/// and first derivative via the quotient rule).
pub struct PartitionCell<'a> {
    pub partition: &'a PartitionOfUnity,
    pub cell: usize,
}

impl SmoothFn for PartitionCell<'_> {
    fn eval(&self, x: f64) -> f64 {
        self.partition.value(&[self.cell], &[x])
    }

    fn deriv(&self, order: u32, x: f64) -> f64 {
        match order {
            0 => self.eval(x),
            1 => self.partition.deriv1(&[self.cell], &[x], 0),
            _ => panic!("partition cells expose one derivative"),
        }
    }

    fn max_order(&self) -> u32 {
        1
    }
}

/// A coefficient field x ↦ f(x) ∈ T_{<γ} sampled on the working grid.
#[derive(Clone, Debug)]
pub struct ModelledDistribution {
    coeffs: Vec<Vec<f64>>,
    gamma: f64,
}

impl ModelledDistribution {
    /// Builds the field from a closure and projects away every level ≥ γ.
    pub fn from_fn(
        grid: &WorkingGrid,
        structure: &RegStructure,
        gamma: f64,
        f: impl Fn(f64) -> Vec<f64>,
    ) -> Self {
        let keep = structure.indices_below(gamma);
        let coeffs = grid
            .points()
            .map(|x| {
                let full = f(x);
                let mut v = vec![0.0; structure.len()];
                for &i in &keep {
                    v[i] = full[i];
                }
                v
            })
            .collect();
        ModelledDistribution { coeffs, gamma }
    }

    pub fn zero(grid: &WorkingGrid, structure: &RegStructure, gamma: f64) -> Self {
        ModelledDistribution {
            coeffs: vec![vec![0.0; structure.len()]; grid.len()],
            gamma,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn at(&self, index: usize) -> &[f64] {
        &self.coeffs[index]
    }

    pub fn at_mut(&mut self, index: usize) -> &mut Vec<f64> {
        &mut self.coeffs[index]
    }

    /// |f(x)|_ζ: the largest coefficient magnitude in the level-ζ sector.
    pub fn level_magnitude(&self, structure: &RegStructure, index: usize, level: f64) -> f64 {
        structure
            .indices_at_level(level)
            .into_iter()
            .map(|i| self.coeffs[index][i].abs())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: f64) -> Self {
        ModelledDistribution {
            coeffs: self
                .coeffs
                .iter()
                .map(|v| v.iter().map(|c| factor * c).collect())
                .collect(),
            gamma: self.gamma,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        ModelledDistribution {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
            gamma: self.gamma,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// CSV rows (x, level, basis index, coefficient), zeros skipped.
    pub fn dump_csv(
        &self,
        grid: &WorkingGrid,
        structure: &RegStructure,
        out: &mut dyn Write,
    ) -> std::io::Result<()> {
        writeln!(out, "x,level,basis,coefficient")?;
        for (i, v) in self.coeffs.iter().enumerate() {
            for (tau, c) in v.iter().enumerate() {
                if *c != 0.0 {
                    writeln!(
                        out,
                        "{:.17e},{},{},{:.17e}",
                        grid.point(i),
                        structure.level_of(tau),
                        structure.symbol(tau).name,
                        c
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// The canonical lift Φ(x) = Σ_k X^k/k! D^kφ(x) truncated below γ.
pub fn canonical_lift(
    phi: &dyn SmoothFn,
    model: &dyn Model,
    gamma: f64,
) -> Result<ModelledDistribution, ModelError> {
    let structure = model.structure();
    let lift_indices: Vec<(usize, MultiIndex)> = structure
        .indices_below(gamma)
        .into_iter()
        .filter_map(|i| match &structure.symbol(i).kind {
            SymbolKind::Monomial(k) => Some((i, k.clone())),
            SymbolKind::Abstract => None,
        })
        .collect();
    let needed = lift_indices.iter().map(|(_, k)| k.order()).max().unwrap_or(0);
    if needed > phi.max_order() {
        return Err(ModelError::InsufficientSmoothness {
            r: phi.max_order(),
            required: needed as f64,
        });
    }
    Ok(ModelledDistribution::from_fn(
        model.grid(),
        structure,
        gamma,
        |x| {
            let mut v = vec![0.0; structure.len()];
            for (i, k) in &lift_indices {
                v[*i] = phi.deriv(k.order(), x) / k.factorial();
            }
            v
        },
    ))
}

/// The product of a polynomial-sector vector with a general vector:
/// X^k ⋆ X^l = X^{k+l}, X^0 ⋆ τ = τ, and grading-additive products that land
/// above the structure's span are truncated away.
pub fn star_product(structure: &RegStructure, poly: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; structure.len()];
    for (pi, pc) in poly.iter().enumerate() {
        if *pc == 0.0 {
            continue;
        }
        let SymbolKind::Monomial(k) = &structure.symbol(pi).kind else {
            continue; // only the polynomial sector multiplies
        };
        for (ti, tc) in v.iter().enumerate() {
            if *tc == 0.0 {
                continue;
            }
            let target = match &structure.symbol(ti).kind {
                SymbolKind::Monomial(l) => {
                    let sum = MultiIndex(
                        k.0.iter().zip(&l.0).map(|(a, b)| a + b).collect(),
                    );
                    structure.monomial_index(&sum)
                }
                SymbolKind::Abstract => {
                    if k.order() == 0 {
                        Some(ti)
                    } else {
                        let name =
                            format!("{}*{}", structure.symbol(pi).name, structure.symbol(ti).name);
                        structure.index_of(&name).ok()
                    }
                }
            };
            if let Some(t) = target {
                out[t] += pc * tc;
            }
        }
    }
    out
}

/// The polynomial-sector vector of the canonical lift at a point.
pub(crate) fn lift_at(
    phi: &dyn SmoothFn,
    structure: &RegStructure,
    gamma: f64,
    x: f64,
) -> Result<Vec<f64>, ModelError> {
    let mut v = vec![0.0; structure.len()];
    for i in structure.indices_below(gamma) {
        if let SymbolKind::Monomial(k) = &structure.symbol(i).kind {
            if k.order() > phi.max_order() {
                return Err(ModelError::InsufficientSmoothness {
                    r: phi.max_order(),
                    required: k.order() as f64,
                });
            }
            v[i] = phi.deriv(k.order(), x) / k.factorial();
        }
    }
    Ok(v)
}

/// The localized constant f_{z,φ,τ}(x) = Φ(x) ⋆ Γ_{x,z}τ, projected to T_{<γ}.
pub fn elementary_md(
    z: f64,
    phi: &dyn SmoothFn,
    tau: usize,
    model: &dyn Model,
    gamma: f64,
) -> Result<ModelledDistribution, ModelError> {
    let structure = model.structure();
    let grid = model.grid();
    let keep = structure.indices_below(gamma);
    let mut coeffs = Vec::with_capacity(grid.len());
    for x in grid.points() {
        let phi_vec = lift_at(phi, structure, gamma, x)?;
        let g = model.gamma_map(x, z);
        let transported: Vec<f64> = (0..structure.len()).map(|r| g.get(r, tau)).collect();
        let product = star_product(structure, &phi_vec, &transported);
        let mut v = vec![0.0; structure.len()];
        for &i in &keep {
            v[i] = product[i];
        }
        coeffs.push(v);
    }
    Ok(ModelledDistribution { coeffs, gamma })
}

/// The constant f_{z,τ}(x) = Γ_{x,z}τ, projected to T_{<γ}.
pub fn constant_md(z: f64, tau: usize, model: &dyn Model, gamma: f64) -> ModelledDistribution {
    let structure = model.structure();
    let keep = structure.indices_below(gamma);
    let coeffs = model
        .grid()
        .points()
        .map(|x| {
            let g = model.gamma_map(x, z);
            let mut v = vec![0.0; structure.len()];
            for &i in &keep {
                v[i] = g.get(i, tau);
            }
            v
        })
        .collect();
    ModelledDistribution { coeffs, gamma }
}
