//! Mollification of models: the polynomial-correction map J, the mollified
//! pair (Π̃, Γ̃), and the convergence study in the weakened topology.
//!
//! For a symbol τ of non-integer homogeneity ζ the mollified realization is
//! `Π̃_xτ = φ^λ * Π_xτ − Π_x J(x)τ` with
//! `J(x)τ = Σ_{|k|_s < ζ} X^k/k! · D^k(φ^λ * Π_xτ)(x)`,
//! J extended by zero on the polynomial sector. On polynomials Π̃ agrees with
//! Π verbatim. The re-expansion maps become `Γ̃ = (1 + J(x)) Γ (1 − J(y))`,
//! which is exactly `Γ + J(x)Γ − ΓJ(y)` because J is nilpotent.

mod convergence;

pub use convergence::{mollification_convergence, mollification_norm_bound};

use std::rc::Rc;

use crate::models::{Model, ModelError, SeparableTerm};
use crate::structures::{
    make_bump, GradedMap, Kernel, MultiIndex, Profile, RegStructure, SymbolKind, WorkingGrid,
};

/// A compactly supported unit-mass kernel at a fixed width λ ∈ (0, 1).
#[derive(Clone, Debug)]
pub struct Mollifier {
    profile: Profile,
    width: f64,
    order: u32,
}

impl Mollifier {
    pub fn new(profile: Profile, width: f64, order: u32) -> Self {
        assert!(width > 0.0 && width < 1.0);
        Mollifier {
            profile: profile.normalized_integral(),
            width,
            order,
        }
    }

    /// The reference bump of smoothness order r, normalized to unit integral.
    pub fn standard(order: u32, width: f64) -> Self {
        Mollifier::new(make_bump(order), width, order)
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// Kernel of D^k φ^λ sampled on the grid. The zeroth-order kernel is
    /// renormalized to unit discrete mass so constants convolve to
    /// themselves exactly.
    pub fn kernel(&self, order: u32, grid: &WorkingGrid) -> Result<Kernel, ModelError> {
        if order > self.order {
            return Err(ModelError::InsufficientSmoothness {
                r: self.order,
                required: order as f64,
            });
        }
        let kernel = Kernel::from_profile(&self.profile, order, self.width, grid, order == 0);
        if kernel.half_width < 2 {
            return Err(ModelError::UnderResolved(format!(
                "mollifier width {} spans under two grid cells",
                self.width
            )));
        }
        Ok(kernel)
    }
}

/// `D^k (φ^λ * Π_xτ)(x)`, the derivative moved onto the kernel analytically.
pub fn convolve_with_derivatives(
    model: &dyn Model,
    mollifier: &Mollifier,
    tau: usize,
    x: f64,
    order: u32,
) -> Result<f64, ModelError> {
    let grid = model.grid();
    let kernel = mollifier.kernel(order, grid)?;
    let xi = grid.index_nearest(x) as i64;
    let n = grid.len() as i64;
    let w = kernel.half_width as i64;
    let mut acc = 0.0;
    for o in -w..=w {
        let j = xi - o;
        let j = if grid.periodic() {
            (((j % n) + n) % n) as usize
        } else if j >= 0 && j < n {
            j as usize
        } else {
            continue;
        };
        acc += kernel.weights[(o + w) as usize] * model.pi(x, tau, grid.point(j));
    }
    if !acc.is_finite() {
        return Err(ModelError::NonFiniteSample { tau, x });
    }
    Ok(acc)
}

struct MollifiedSymbol {
    /// coefficient closures of the separable decomposition of Π_·τ
    coeffs: Vec<Box<dyn Fn(f64) -> f64>>,
    /// `convolved[k][m]` = D^k φ^λ ⊛ factor_m on the grid; k = 0 is Π̃'s
    /// smooth part, higher k feed the J coefficients.
    convolved: Vec<Vec<Vec<f64>>>,
    /// monomial orders k with |k|_s < level, paired with the basis row of X^k
    correction_monomials: Vec<(usize, MultiIndex)>,
}

/// The mollified model. J coefficients are read from the same convolved
/// tables that define Π̃, which keeps the algebraic identities exact at the
/// discrete level.
pub struct MollifiedModel {
    base: Rc<dyn Model>,
    structure: RegStructure,
    grid: WorkingGrid,
    mollifier: Mollifier,
    symbols: Vec<Option<MollifiedSymbol>>,
    skip_correction: bool,
}

/// Builds the mollified model `Z^λ` from a model satisfying the polynomial
/// assumption. Fails when the mollifier is too rough (the uniformity
/// condition needs r > |min A| ∨ γ) or too narrow for the working grid.
pub fn mollify_model(base: Rc<dyn Model>, mollifier: Mollifier) -> Result<MollifiedModel, ModelError> {
    MollifiedModel::build(base, mollifier, false)
}

/// Negative control: the convolved realizations without the polynomial
/// correction. Not a model; the seminorm sweep is expected to blow up on it.
pub fn mollify_model_uncorrected(
    base: Rc<dyn Model>,
    mollifier: Mollifier,
) -> Result<MollifiedModel, ModelError> {
    MollifiedModel::build(base, mollifier, true)
}

impl MollifiedModel {
    fn build(
        base: Rc<dyn Model>,
        mollifier: Mollifier,
        skip_correction: bool,
    ) -> Result<Self, ModelError> {
        let structure = base.structure().clone();
        let grid = base.grid().clone();
        if !structure.satisfies_polynomial_assumption() {
            return Err(ModelError::MissingMonomials(
                structure.gamma().floor().max(0.0) as u32,
            ));
        }
        let required = structure.min_level().abs().max(structure.gamma());
        if (mollifier.order() as f64) <= required {
            return Err(ModelError::InsufficientSmoothness {
                r: mollifier.order(),
                required,
            });
        }
        let mut symbols = Vec::with_capacity(structure.len());
        for idx in 0..structure.len() {
            let symbol = structure.symbol(idx);
            if matches!(symbol.kind, SymbolKind::Monomial(_)) {
                symbols.push(None);
                continue;
            }
            let terms: Vec<SeparableTerm> =
                base.pi_separable(idx).ok_or(ModelError::NotPointwise)?;
            let level = symbol.level;
            // every monomial below the homogeneity must exist for J(x)τ
            let needed: Vec<MultiIndex> =
                MultiIndex::up_to(structure.scaling(), level.ceil() as u32)
                    .into_iter()
                    .filter(|k| (structure.scaling().scaled_degree(k) as f64) < level)
                    .collect();
            let mut correction_monomials = Vec::with_capacity(needed.len());
            for k in needed {
                let row = structure
                    .monomial_index(&k)
                    .ok_or_else(|| ModelError::MissingMonomials(level.ceil() as u32))?;
                correction_monomials.push((row, k));
            }
            let max_k = correction_monomials
                .iter()
                .map(|(_, k)| k.order())
                .max()
                .unwrap_or(0);
            let mut convolved = Vec::with_capacity(max_k as usize + 1);
            for order in 0..=max_k {
                let kernel = mollifier.kernel(order, &grid)?;
                let per_factor: Vec<Vec<f64>> = terms
                    .iter()
                    .map(|t| grid.convolve(&t.factor, &kernel))
                    .collect();
                convolved.push(per_factor);
            }
            let coeffs = terms.into_iter().map(|t| t.coeff).collect();
            symbols.push(Some(MollifiedSymbol {
                coeffs,
                convolved,
                correction_monomials,
            }));
        }
        Ok(MollifiedModel {
            base,
            structure,
            grid,
            mollifier,
            symbols,
            skip_correction,
        })
    }

    pub fn width(&self) -> f64 {
        self.mollifier.width()
    }

    /// The J coefficient `D^k(φ^λ * Π_xτ)(x) / k!` shared by Π̃ and Γ̃.
    fn j_coefficient(&self, x: f64, tau: usize, k: &MultiIndex) -> f64 {
        let Some(sym) = &self.symbols[tau] else {
            return 0.0;
        };
        let xi = self.grid.index_nearest(x);
        let order = k.order() as usize;
        let mut acc = 0.0;
        for (m, coeff) in sym.coeffs.iter().enumerate() {
            acc += coeff(x) * sym.convolved[order][m][xi];
        }
        acc / k.factorial()
    }

    /// J(z) as a matrix on the basis: abstract columns map into the
    /// polynomial rows below their homogeneity, monomial columns to zero.
    pub fn j_matrix(&self, z: f64) -> GradedMap {
        let mut j = GradedMap::zeros(self.structure.len());
        for tau in 0..self.structure.len() {
            if let Some(sym) = &self.symbols[tau] {
                for (row, k) in &sym.correction_monomials {
                    j.set(*row, tau, self.j_coefficient(z, tau, k));
                }
            }
        }
        j
    }
}

impl Model for MollifiedModel {
    fn structure(&self) -> &RegStructure {
        &self.structure
    }

    fn grid(&self) -> &WorkingGrid {
        &self.grid
    }

    fn pi(&self, x: f64, tau: usize, y: f64) -> f64 {
        let Some(sym) = &self.symbols[tau] else {
            // polynomial sector copied verbatim
            return self.base.pi(x, tau, y);
        };
        let yi = self.grid.index_nearest(y);
        let mut smooth = 0.0;
        for (m, coeff) in sym.coeffs.iter().enumerate() {
            smooth += coeff(x) * sym.convolved[0][m][yi];
        }
        if self.skip_correction {
            return smooth;
        }
        let mut correction = 0.0;
        for (_, k) in &sym.correction_monomials {
            correction += self.j_coefficient(x, tau, k) * k.pow(&[self.grid.displacement(x, y)]);
        }
        smooth - correction
    }

    fn gamma_map(&self, x: f64, y: f64) -> GradedMap {
        let gamma = self.base.gamma_map(x, y);
        if self.skip_correction {
            return gamma;
        }
        let dim = self.structure.len();
        let mut left = GradedMap::identity(dim);
        let jx = self.j_matrix(x);
        for r in 0..dim {
            for c in 0..dim {
                left.add_to(r, c, jx.get(r, c));
            }
        }
        let mut right = GradedMap::identity(dim);
        let jy = self.j_matrix(y);
        for r in 0..dim {
            for c in 0..dim {
                right.add_to(r, c, -jy.get(r, c));
            }
        }
        left.compose(&gamma).compose(&right)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{check_algebraic, HolderModel, PolynomialModel};
    use crate::structures::Scaling;
    use crate::weierstrass::Weierstrass;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn holder(grid_log2: u32) -> Rc<dyn Model> {
        let st = RegStructure::two_level(0.6, 0.9, 1);
        let grid = WorkingGrid::torus(1 << grid_log2);
        let w = Weierstrass::new(0.6, 10, 1);
        Rc::new(HolderModel::new(st, grid, |_| 1.0, move |t| w.eval(t)).unwrap())
    }

    #[test]
    fn constant_convolution_is_exact() {
        let st = RegStructure::polynomial(Scaling::isotropic(1), 2.0, 3);
        let model = PolynomialModel::new(st, WorkingGrid::interval(1 << 12)).unwrap();
        let unit = model.structure().unit_index().unwrap();
        for lambda in [0.25, 0.0625, 0.015625] {
            let m = Mollifier::standard(3, lambda);
            let v = convolve_with_derivatives(&model, &m, unit, 0.5, 0).unwrap();
            assert!((v - 1.0).abs() < 1e-13, "lambda {lambda}: {v}");
        }
    }

    #[test]
    fn first_derivative_of_linear_convolution() {
        let st = RegStructure::polynomial(Scaling::isotropic(1), 2.0, 3);
        let model = PolynomialModel::new(st, WorkingGrid::interval(1 << 12)).unwrap();
        let x1 = model
            .structure()
            .monomial_index(&MultiIndex(vec![1]))
            .unwrap();
        let m = Mollifier::standard(3, 0.0625);
        // D(φ^λ * (· - x))(x) = ∫ φ = 1 up to quadrature error
        let v = convolve_with_derivatives(&model, &m, x1, 0.5, 1).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "{v}");
        // order above the available smoothness is rejected
        assert!(convolve_with_derivatives(&model, &m, x1, 0.5, 4).is_err());
    }

    #[test]
    fn holder_convolution_stable_under_refinement() {
        let m = Mollifier::standard(2, 0.0625);
        let mut values = Vec::new();
        for g in [11u32, 12] {
            let model = holder(g);
            let tau = 1; // the abstract symbol sorts after the unit
            values.push(convolve_with_derivatives(model.as_ref(), &m, tau, 0.5, 0).unwrap());
        }
        assert!((values[0] - values[1]).abs() < 1e-6, "{values:?}");
    }

    #[test]
    fn rejects_rough_mollifier() {
        // gamma = 1.5 needs order > 1.5, so an order-1 bump is too rough
        let st = RegStructure::two_level(0.6, 1.5, 1);
        let grid = WorkingGrid::torus(1 << 8);
        let base: Rc<dyn Model> =
            Rc::new(HolderModel::new(st, grid, |_| 1.0, |t| t.sin()).unwrap());
        let err = mollify_model(base, Mollifier::standard(1, 0.125));
        assert!(matches!(
            err.err(),
            Some(ModelError::InsufficientSmoothness { .. })
        ));
    }

    #[test]
    fn polynomial_model_mollifies_to_itself() {
        let st = RegStructure::polynomial(Scaling::isotropic(1), 2.0, 3);
        let base: Rc<dyn Model> =
            Rc::new(PolynomialModel::new(st, WorkingGrid::interval(1 << 10)).unwrap());
        let mollified = mollify_model(Rc::clone(&base), Mollifier::standard(3, 0.0625)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = rng.gen::<f64>();
            let y = rng.gen::<f64>();
            for tau in 0..base.structure().len() {
                assert_eq!(mollified.pi(x, tau, y), base.pi(x, tau, y));
            }
            assert_eq!(
                mollified.gamma_map(x, y).max_abs_diff(&base.gamma_map(x, y)),
                0.0
            );
        }
    }

    #[test]
    fn mollified_vanishes_at_base_point() {
        let base = holder(10);
        let mollified = mollify_model(base, Mollifier::standard(2, 0.0625)).unwrap();
        for x in [0.03125, 0.25, 0.8125] {
            assert!(mollified.pi(x, 1, x).abs() < 1e-14);
        }
    }

    #[test]
    fn mollified_model_satisfies_algebraic_identities() {
        let base = holder(12);
        let mollified = mollify_model(base, Mollifier::standard(2, 0.0625)).unwrap();
        let report = check_algebraic(&mollified, 200, 31);
        assert!(report.pi_residual <= 1e-8, "{report:?}");
        assert!(report.gamma_residual <= 1e-10, "{report:?}");
    }

    #[test]
    fn uncorrected_variant_loses_the_small_scale_bound() {
        use crate::models::{estimate_pi_seminorm, SeminormOptions};
        use crate::structures::TestFamily;
        let base = holder(11);
        let corrected =
            mollify_model(Rc::clone(&base), Mollifier::standard(2, 0.25)).unwrap();
        let broken =
            mollify_model_uncorrected(Rc::clone(&base), Mollifier::standard(2, 0.25)).unwrap();
        // convolving alone commutes with Γ, so the algebra still holds ...
        let report = check_algebraic(&broken, 50, 37);
        assert!(report.max_residual() <= 1e-10, "{report:?}");
        // ... but the realization no longer vanishes at its base point
        assert!(broken.pi(0.25, 1, 0.25).abs() > 1e-3);
        assert!(corrected.pi(0.25, 1, 0.25).abs() < 1e-14);
        // and the level-α sup at scales below λ blows past the corrected one
        let family = TestFamily::standard(1);
        let opts = SeminormOptions {
            centers: 32,
            max_scale_log2: 9,
            pair_samples: 32,
        };
        let worst_small_scale = |m: &dyn Model| {
            estimate_pi_seminorm(m, 0.9, &family, &opts)
                .unwrap()
                .pi_entries
                .iter()
                .filter(|e| (e.level - 0.6).abs() < 1e-9 && e.scale_log2 == 9)
                .map(|e| e.worst)
                .fold(0.0, f64::max)
        };
        let good = worst_small_scale(&corrected);
        let bad = worst_small_scale(&broken);
        assert!(bad > 3.0 * good, "bad {bad} vs good {good}");
    }

    #[test]
    fn j_matrix_kills_polynomials_and_is_nilpotent() {
        let base = holder(10);
        let mollified = mollify_model(base, Mollifier::standard(2, 0.125)).unwrap();
        let j = mollified.j_matrix(0.375);
        let unit = mollified.structure().unit_index().unwrap();
        for row in 0..mollified.structure().len() {
            assert_eq!(j.get(row, unit), 0.0);
        }
        assert_eq!(j.compose(&j).max_abs_diff(&GradedMap::zeros(2)), 0.0);
    }
}
