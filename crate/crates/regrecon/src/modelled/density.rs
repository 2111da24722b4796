use super::{lift_at, star_product, ModelledDistribution, PartitionCell};
use crate::models::{Model, ModelError};
use crate::structures::{PartitionOfUnity, Scaling};

/// The level-n localization of f: the partition sum
/// f^n(x) = Σ_{k ∈ Λ_n} Lift(𝟙^n_k)(x) ⋆ Γ_{x,k} f(k),
/// a locally finite combination of localized constants. With Γ-flat constant
/// input the partition summing to 1 gives back f exactly.
pub fn density_approximant(
    f: &ModelledDistribution,
    level: u32,
    model: &dyn Model,
    gamma: f64,
) -> Result<ModelledDistribution, ModelError> {
    let grid = model.grid();
    let structure = model.structure();
    // each partition bump must be resolved by several grid cells
    let cells = 1usize << level;
    if grid.len() / cells < 8 {
        return Err(ModelError::UnderResolved(format!(
            "partition level {level} leaves under 8 grid cells per bump"
        )));
    }
    let partition = PartitionOfUnity::new(level, Scaling::isotropic(1), grid.periodic());
    let keep = structure.indices_below(gamma);
    let mut out = ModelledDistribution::zero(grid, structure, gamma);
    for (xi, x) in grid.points().enumerate() {
        let mut acc = vec![0.0; structure.len()];
        for cell in partition.supporting_cells(&[x]) {
            let k = cell[0];
            let center = partition.center(0, k);
            let ki = grid.index_nearest(center);
            let cell_fn = PartitionCell {
                partition: &partition,
                cell: k,
            };
            let phi_vec = lift_at(&cell_fn, structure, gamma, x)?;
            let transported = model.gamma_map(x, center).apply(f.at(ki));
            let product = star_product(structure, &phi_vec, &transported);
            for &i in &keep {
                acc[i] += product[i];
            }
        }
        out.at_mut(xi).copy_from_slice(&acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::HolderModel;
    use crate::modelled::{dgamma_norm, elementary_md, DGammaOptions, SmoothBump};
    use crate::report::fit_level_log2;
    use crate::structures::{make_bump, RegStructure, WorkingGrid};
    use crate::weierstrass::Weierstrass;

    const INF: f64 = f64::INFINITY;

    fn holder_model(log2: u32) -> HolderModel {
        let st = RegStructure::two_level(0.6, 0.9, 1);
        let grid = WorkingGrid::torus(1 << log2);
        let w = Weierstrass::new(0.6, 10, 1);
        HolderModel::new(st, grid, |_| 1.0, move |t| w.eval(t)).unwrap()
    }

    #[test]
    fn constant_input_reproduced_exactly() {
        let model = holder_model(9);
        let grid = model.grid().clone();
        let st = model.structure().clone();
        // Γ-flat constant: only the unit coefficient, independent of x
        let f = ModelledDistribution::from_fn(&grid, &st, 0.9, |_| vec![1.0, 0.0]);
        let fn3 = density_approximant(&f, 3, &model, 0.9).unwrap();
        for i in (0..grid.len()).step_by(13) {
            assert!((fn3.at(i)[0] - 1.0).abs() < 1e-12);
            assert_eq!(fn3.at(i)[1], 0.0);
        }
    }

    #[test]
    fn rejects_under_resolved_level() {
        let model = holder_model(6);
        let f = ModelledDistribution::zero(model.grid(), model.structure(), 0.9);
        assert!(density_approximant(&f, 5, &model, 0.9).is_err());
    }

    #[test]
    fn linear_in_the_input() {
        let model = holder_model(8);
        let grid = model.grid().clone();
        let st = model.structure().clone();
        let f = ModelledDistribution::from_fn(&grid, &st, 0.9, |x| {
            vec![(x * 7.0).sin(), (x * 3.0).cos()]
        });
        let a = density_approximant(&f.scale(2.5), 2, &model, 0.9).unwrap();
        let b = density_approximant(&f, 2, &model, 0.9).unwrap().scale(2.5);
        for i in (0..grid.len()).step_by(29) {
            for t in 0..st.len() {
                assert!((a.at(i)[t] - b.at(i)[t]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn per_level_error_decays_at_the_predicted_rate() {
        let model = holder_model(11);
        let gamma = 0.9;
        let bump = SmoothBump {
            profile: make_bump(2),
            center: 0.5,
            width: 0.3,
        };
        let f = elementary_md(0.5, &bump, model.tau_index(), &model, gamma).unwrap();
        let st = model.structure().clone();
        let grid = model.grid().clone();
        let mut sup_errors: Vec<Vec<f64>> = vec![Vec::new(); 2];
        let mut transl_errors = Vec::new();
        let levels: Vec<f64> = st.levels();
        let opts = DGammaOptions {
            x_stride: 4,
            max_offsets_per_shell: 16,
        };
        for n in 1..=5u32 {
            let approx = density_approximant(&f, n, &model, gamma).unwrap();
            let diff = approx.sub(&f);
            for (li, &level) in levels.iter().enumerate() {
                let sup = (0..grid.len())
                    .map(|i| diff.level_magnitude(&st, i, level))
                    .fold(0.0, f64::max);
                sup_errors[li].push(sup);
            }
            let norm = dgamma_norm(&diff, &model, gamma, INF, INF, &opts).unwrap();
            transl_errors.push(norm.translation_total());
        }
        let ns: Vec<f64> = (1..=5).map(|n| n as f64).collect();
        for (li, &level) in levels.iter().enumerate() {
            let fit = fit_level_log2(&ns, &sup_errors[li]).unwrap();
            let rate = -fit.slope;
            assert!(
                rate >= (gamma - level) - 0.1,
                "level {level}: rate {rate}, errors {:?}",
                sup_errors[li]
            );
        }
        // the translation-seminorm error trends down with n
        assert!(
            transl_errors.last().unwrap() < &transl_errors[0],
            "{transl_errors:?}"
        );
    }
}
