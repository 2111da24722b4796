use std::rc::Rc;

use super::{BranchedRoughPath, ControlledPath};
use crate::hopf::coproduct;
use crate::modelled::ModelledDistribution;
use crate::models::{Model, SeparableTerm};
use crate::structures::{
    GradedMap, MultiIndex, RegStructure, Scaling, Symbol, SymbolKind, WorkingGrid,
};

/// The branched regularity structure: homogeneities α·{0, ..., N}, one basis
/// symbol per forest with ≤ N nodes, the empty forest playing X^0. With
/// γ = Nα the coefficient sectors below γ are exactly the forests with at
/// most N-1 nodes, so controlled paths are the modelled distributions.
pub fn branched_structure(path: &BranchedRoughPath) -> RegStructure {
    let alpha = path.alpha();
    let symbols = path
        .forests()
        .iter()
        .map(|f| Symbol {
            name: f.to_string(),
            level: alpha * f.node_count() as f64,
            kind: if f.is_empty() {
                SymbolKind::Monomial(MultiIndex::zero(1))
            } else {
                SymbolKind::Abstract
            },
        })
        .collect();
    RegStructure::new(
        Scaling::isotropic(1),
        symbols,
        alpha * path.level_count() as f64,
        1,
    )
    .expect("nonempty basis")
}

/// The model of a branched rough path: Π_s(τ)(t) = ⟨X_{s,t}, τ⟩ and
/// Γ_{s,t} = (X_{t,s} ⊗ id)Δ.
pub struct RoughPathModel {
    path: Rc<BranchedRoughPath>,
    structure: RegStructure,
}

pub fn rp_to_model(path: Rc<BranchedRoughPath>) -> RoughPathModel {
    let structure = branched_structure(&path);
    RoughPathModel { path, structure }
}

impl RoughPathModel {
    pub fn path(&self) -> &BranchedRoughPath {
        &self.path
    }

    /// A controlled path is the coefficient field of a modelled distribution
    /// over the branched structure; the identification is the identity map
    /// on coefficients.
    pub fn controlled_to_modelled(&self, z: &ControlledPath) -> ModelledDistribution {
        let grid = self.path.grid();
        let gamma = self.structure.gamma();
        let positions: Vec<Option<usize>> = self
            .structure
            .symbols()
            .iter()
            .map(|s| z.forests().iter().position(|f| f.to_string() == s.name))
            .collect();
        let mut out = ModelledDistribution::zero(grid, &self.structure, gamma);
        for i in 0..grid.len() {
            let target = out.at_mut(i);
            for (sym, pos) in positions.iter().enumerate() {
                if let Some(p) = pos {
                    target[sym] = z.at(i)[*p];
                }
            }
        }
        out
    }
}

impl Model for RoughPathModel {
    fn structure(&self) -> &RegStructure {
        &self.structure
    }

    fn grid(&self) -> &WorkingGrid {
        self.path.grid()
    }

    fn pi(&self, x: f64, tau: usize, y: f64) -> f64 {
        let grid = self.path.grid();
        let s = grid.index_nearest(x);
        let t = grid.index_nearest(y);
        self.path
            .pair_increment(s, t, &self.path.forests()[tau])
    }

    fn gamma_map(&self, x: f64, y: f64) -> GradedMap {
        let grid = self.path.grid();
        let s = grid.index_nearest(x);
        let t = grid.index_nearest(y);
        // Γ_{s,t} τ = (X_{t,s} ⊗ id) Δτ
        let g = self.path.increment(t, s);
        let forests = self.path.forests();
        let mut out = GradedMap::zeros(forests.len());
        for (col, tau) in forests.iter().enumerate() {
            let cp = coproduct(tau, g.max_nodes()).expect("basis forest within truncation");
            for (left, right, coeff) in cp.terms() {
                if let Some(row) = forests.iter().position(|f| f == right) {
                    out.add_to(row, col, coeff as f64 * g.value(left));
                }
            }
        }
        out
    }

    fn pi_separable(&self, tau: usize) -> Option<Vec<SeparableTerm>> {
        let forests = self.path.forests();
        let cp = coproduct(&forests[tau].clone(), self.path.level_count()).ok()?;
        let grid = self.path.grid();
        let mut terms = Vec::new();
        for (left, right, coeff) in cp.terms() {
            let factor: Vec<f64> = (0..grid.len())
                .map(|m| self.path.character_at(m).value(right))
                .collect();
            let left = left.clone();
            let path = Rc::clone(&self.path);
            let grid_clone = grid.clone();
            let c = coeff as f64;
            terms.push(SeparableTerm {
                coeff: Box::new(move |x: f64| {
                    c * path.inverse_at(grid_clone.index_nearest(x)).value(&left)
                }),
                factor,
            });
        }
        Some(terms)
    }
}
