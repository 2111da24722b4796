//! The explicit reconstruction operator for continuous models, dyadic
//! local-average machinery, and estimators for the reconstruction and
//! two-model continuity bounds.

mod bounds;

pub use bounds::{
    average_consistency, recon_bound, recon_two_model_bound, AverageOptions, ReconBoundReport,
    ReconOptions,
};

use crate::modelled::ModelledDistribution;
use crate::models::{Model, ModelError};

/// R f (y) = (Π_y f(y))(y), sampled on the working grid. Well defined
/// because every model here carries pointwise-evaluable realizations.
pub fn reconstruct(model: &dyn Model, f: &ModelledDistribution) -> Vec<f64> {
    let grid = model.grid();
    (0..grid.len())
        .map(|yi| {
            let y = grid.point(yi);
            model.pi_vector(y, f.at(yi), y)
        })
        .collect()
}

/// The cell averages f̄^n: Λ_n → T, f̄^n(x) = |Q^n_x|^{-1} ∫_{Q^n_x} Γ_{x,y} f(y) dy,
/// computed as the mean over the grid points of the centered cell.
#[derive(Clone, Debug)]
pub struct LocalAverages {
    pub level: u32,
    pub points: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl LocalAverages {
    pub fn value_at_index(&self, k: usize) -> &[f64] {
        &self.values[k]
    }
}

pub fn local_averages(
    f: &ModelledDistribution,
    model: &dyn Model,
    level: u32,
) -> Result<LocalAverages, ModelError> {
    let grid = model.grid();
    let cells = 1usize << level;
    let per_cell = grid.len() / cells;
    if per_cell < 4 {
        return Err(ModelError::UnderResolved(format!(
            "level {level} leaves {per_cell} grid points per cell"
        )));
    }
    let half = per_cell as i64 / 2;
    let mut points = Vec::with_capacity(cells);
    let mut values = Vec::with_capacity(cells);
    for k in 0..cells {
        let center = k as f64 / cells as f64;
        let ci = (k * per_cell) as i64;
        let mut acc = vec![0.0; model.structure().len()];
        let mut count = 0usize;
        for o in -half..half {
            let yi = ci + o;
            let yi = if grid.periodic() {
                yi.rem_euclid(grid.len() as i64) as usize
            } else if yi >= 0 && (yi as usize) < grid.len() {
                yi as usize
            } else {
                continue;
            };
            let transported = model.gamma_map(center, grid.point(yi)).apply(f.at(yi));
            for (a, t) in acc.iter_mut().zip(&transported) {
                *a += t;
            }
            count += 1;
        }
        for a in &mut acc {
            *a /= count as f64;
        }
        points.push(center);
        values.push(acc);
    }
    Ok(LocalAverages {
        level,
        points,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelled::{canonical_lift, constant_md, elementary_md, SmoothBump, SmoothFn};
    use crate::models::{HolderModel, PolynomialModel};
    use crate::structures::{make_bump, MultiIndex, Poly1, RegStructure, Scaling, WorkingGrid};
    use crate::weierstrass::Weierstrass;

    fn holder_model(log2: u32) -> HolderModel {
        let st = RegStructure::two_level(0.6, 0.9, 1);
        let grid = WorkingGrid::torus(1 << log2);
        let w = Weierstrass::new(0.6, 10, 1);
        HolderModel::new(st, grid, |_| 1.0, move |t| w.eval(t)).unwrap()
    }

    fn poly_model(gamma: f64, log2: u32) -> PolynomialModel {
        let st = RegStructure::polynomial(Scaling::isotropic(1), gamma, 3);
        PolynomialModel::new(st, WorkingGrid::interval(1 << log2)).unwrap()
    }

    #[test]
    fn constant_md_reconstructs_to_its_realization() {
        let model = holder_model(9);
        let gamma = 0.9;
        let tau = model.tau_index();
        let z = 0.25;
        let f = constant_md(z, tau, &model, gamma);
        let rf = reconstruct(&model, &f);
        let grid = model.grid().clone();
        for (yi, value) in rf.iter().enumerate() {
            let target = model.pi(z, tau, grid.point(yi));
            assert!((value - target).abs() < 1e-12, "y index {yi}");
        }
    }

    #[test]
    fn localized_constant_reconstructs_to_cutoff_times_realization() {
        let model = holder_model(9);
        let gamma = 0.9;
        let tau = model.tau_index();
        let z = 0.5;
        let bump = SmoothBump {
            profile: make_bump(2),
            center: 0.5,
            width: 0.3,
        };
        let f = elementary_md(z, &bump, tau, &model, gamma).unwrap();
        let rf = reconstruct(&model, &f);
        let grid = model.grid().clone();
        for (yi, value) in rf.iter().enumerate() {
            let y = grid.point(yi);
            let target = bump.eval(y) * model.pi(z, tau, y);
            assert!((value - target).abs() < 1e-10, "y={y}");
        }
    }

    #[test]
    fn polynomial_lift_reconstructs_to_the_function() {
        let model = poly_model(2.0, 9);
        let psi = Poly1::new(vec![0.3, -1.0, 2.0]);
        let f = canonical_lift(&psi, &model, 2.0).unwrap();
        let rf = reconstruct(&model, &f);
        let grid = model.grid().clone();
        for (yi, value) in rf.iter().enumerate() {
            assert!((value - psi.eval(grid.point(yi))).abs() < 1e-10);
        }
    }

    #[test]
    fn reconstruction_is_linear() {
        let model = holder_model(8);
        let gamma = 0.9;
        let bump = SmoothBump {
            profile: make_bump(2),
            center: 0.3,
            width: 0.2,
        };
        let f = elementary_md(0.3, &bump, model.tau_index(), &model, gamma).unwrap();
        let g = constant_md(0.7, model.tau_index(), &model, gamma);
        let combo = f.scale(2.0).add(&g.scale(-3.0));
        let lhs = reconstruct(&model, &combo);
        let rf = reconstruct(&model, &f);
        let rg = reconstruct(&model, &g);
        for i in 0..lhs.len() {
            assert!((lhs[i] - (2.0 * rf[i] - 3.0 * rg[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn averages_of_gamma_flat_input_are_exact() {
        let model = holder_model(8);
        let st = model.structure().clone();
        let grid = model.grid().clone();
        let f = ModelledDistribution::from_fn(&grid, &st, 0.9, |_| vec![1.0, 0.0]);
        let avg = local_averages(&f, &model, 3).unwrap();
        for v in &avg.values {
            assert_eq!(v[0], 1.0);
            assert_eq!(v[1], 0.0);
        }
    }

    #[test]
    fn averages_match_closed_form_cell_means() {
        // canonically lifted identity is Γ-flat: averages reproduce f(x)
        let model = poly_model(2.0, 9);
        let st = model.structure().clone();
        let grid = model.grid().clone();
        let lift = canonical_lift(&Poly1::new(vec![0.0, 1.0]), &model, 2.0).unwrap();
        let avg = local_averages(&lift, &model, 3).unwrap();
        let unit = st.unit_index().unwrap();
        let x1 = st.monomial_index(&MultiIndex(vec![1])).unwrap();
        for (k, v) in avg.values.iter().enumerate() {
            // skip boundary cells, their grid windows are clipped
            if k == 0 || k + 1 == avg.values.len() {
                continue;
            }
            assert!((v[unit] - avg.points[k]).abs() < 1e-12);
            assert!((v[x1] - 1.0).abs() < 1e-12);
        }
        // without the X coefficient the mean picks up the discrete cell-center
        // offset: mean(y over cell) - x = -Δ/2 for centered half-open cells
        let bare = ModelledDistribution::from_fn(&grid, &st, 2.0, |x| {
            let mut v = vec![0.0; st.len()];
            v[unit] = x;
            v
        });
        let avg = local_averages(&bare, &model, 3).unwrap();
        let offset = -0.5 * grid.spacing();
        for (k, v) in avg.values.iter().enumerate() {
            if k == 0 || k + 1 == avg.values.len() {
                continue;
            }
            assert!(
                (v[unit] - (avg.points[k] + offset)).abs() < 1e-12,
                "cell {k}: {} vs {}",
                v[unit],
                avg.points[k] + offset
            );
        }
    }

    #[test]
    fn averages_are_linear() {
        let model = holder_model(8);
        let gamma = 0.9;
        let bump = SmoothBump {
            profile: make_bump(2),
            center: 0.6,
            width: 0.25,
        };
        let f = elementary_md(0.6, &bump, model.tau_index(), &model, gamma).unwrap();
        let a = local_averages(&f.scale(3.0), &model, 2).unwrap();
        let b = local_averages(&f, &model, 2).unwrap();
        for (va, vb) in a.values.iter().zip(&b.values) {
            for (x, y) in va.iter().zip(vb) {
                assert!((x - 3.0 * y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn under_resolved_cells_rejected() {
        let model = holder_model(6);
        let f = ModelledDistribution::zero(model.grid(), model.structure(), 0.9);
        assert!(local_averages(&f, &model, 5).is_err());
    }
}
