//! Concrete continuous models (Π, Γ): the polynomial model, the two-level
//! Hölder example, and wrappers for corrupting a model in the negative
//! controls. Seminorm estimation lives in the `seminorm` submodule.

mod seminorm;

pub use seminorm::{
    estimate_gamma_seminorm, estimate_pi_seminorm, model_distance, model_norm, weakened_seminorm,
    ScaleEntry, SeminormOptions, SeminormReport,
};

use std::io::Write;
use std::rc::Rc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::structures::{
    poly_gamma, GradedMap, MultiIndex, RegStructure, SymbolKind, WorkingGrid,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("structure is missing monomials up to degree {0}")]
    MissingMonomials(u32),
    #[error("non-finite sample while pairing symbol {tau} at x={x}")]
    NonFiniteSample { tau: usize, x: f64 },
    #[error("models live on different structures")]
    StructureMismatch,
    #[error("epsilon {eps} is not admissible, needs eps < {bound}")]
    EpsilonTooLarge { eps: f64, bound: f64 },
    #[error("the model cannot be evaluated pointwise")]
    NotPointwise,
    #[error("profile smoothness r={r} insufficient, needs r > {required}")]
    InsufficientSmoothness { r: u32, required: f64 },
    #[error("under-resolved: {0}")]
    UnderResolved(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One separable term of a realization: Π_xτ(y) = Σ coeff(x) · factor[y].
pub struct SeparableTerm {
    pub coeff: Box<dyn Fn(f64) -> f64>,
    pub factor: Vec<f64>,
}

/// A model with pointwise-evaluable realizations on a working grid. `pi`
/// takes the base point, the basis index and a location that is expected to
/// lie on the grid (cached models round to the nearest grid point).
pub trait Model {
    fn structure(&self) -> &RegStructure;
    fn grid(&self) -> &WorkingGrid;
    fn pi(&self, x: f64, tau: usize, y: f64) -> f64;
    fn gamma_map(&self, x: f64, y: f64) -> GradedMap;

    /// Separable decomposition of Π_·τ when the model has one; mollification
    /// relies on it to precompute convolutions once per factor.
    fn pi_separable(&self, _tau: usize) -> Option<Vec<SeparableTerm>> {
        None
    }

    /// Π_x applied to a coefficient vector, evaluated at y.
    fn pi_vector(&self, x: f64, coeffs: &[f64], y: f64) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(tau, c)| c * self.pi(x, tau, y))
            .sum()
    }
}

/// The canonical polynomial model: Π_x X^k (y) = (y-x)^k with the binomial
/// re-expansion maps.
pub struct PolynomialModel {
    structure: RegStructure,
    grid: WorkingGrid,
}

impl PolynomialModel {
    /// Monomials are genuine Taylor monomials in the flat coordinate, so the
    /// model lives on the plain interval; a periodic grid would break the
    /// re-expansion identity across the wraparound.
    pub fn new(structure: RegStructure, grid: WorkingGrid) -> Result<Self, ModelError> {
        if grid.periodic() {
            return Err(ModelError::UnderResolved(
                "polynomial model needs a non-periodic grid".into(),
            ));
        }
        let degree = structure.gamma().floor().max(0.0) as u32;
        for k in MultiIndex::up_to(structure.scaling(), degree) {
            if structure.monomial_index(&k).is_none() {
                return Err(ModelError::MissingMonomials(degree));
            }
        }
        Ok(PolynomialModel { structure, grid })
    }
}

impl Model for PolynomialModel {
    fn structure(&self) -> &RegStructure {
        &self.structure
    }

    fn grid(&self) -> &WorkingGrid {
        &self.grid
    }

    fn pi(&self, x: f64, tau: usize, y: f64) -> f64 {
        match &self.structure.symbol(tau).kind {
            SymbolKind::Monomial(k) => k.pow(&[y - x]),
            SymbolKind::Abstract => 0.0,
        }
    }

    fn gamma_map(&self, x: f64, y: f64) -> GradedMap {
        poly_gamma(&self.structure, &[x], &[y])
    }

    fn pi_separable(&self, tau: usize) -> Option<Vec<SeparableTerm>> {
        let SymbolKind::Monomial(k) = &self.structure.symbol(tau).kind else {
            return None;
        };
        let k = k.0[0];
        let mut terms = Vec::new();
        for l in 0..=k {
            let binom = MultiIndex(vec![k]).binomial(&MultiIndex(vec![l]));
            let factor = self.grid.sample(|y| y.powi(l as i32));
            terms.push(SeparableTerm {
                coeff: Box::new(move |x: f64| binom * (-x).powi((k - l) as i32)),
                factor,
            });
        }
        Some(terms)
    }
}

/// The two-level Hölder example on the torus: Π_x 1 (y) = f(y),
/// Π_x τ (y) = (h(y) - h(x)) f(y), Γ_{x,y} τ = τ + (h(x) - h(y)) 1.
///
/// The sign of the Γ correction is pinned by the algebraic condition
/// Π_x Γ_{x,y} = Π_y.
pub struct HolderModel {
    structure: RegStructure,
    grid: WorkingGrid,
    f_samples: Rc<Vec<f64>>,
    h_samples: Rc<Vec<f64>>,
    tau_index: usize,
    unit_index: usize,
}

impl HolderModel {
    pub fn new(
        structure: RegStructure,
        grid: WorkingGrid,
        f: impl Fn(f64) -> f64,
        h: impl Fn(f64) -> f64,
    ) -> Result<Self, ModelError> {
        let unit_index = structure
            .unit_index()
            .ok_or(ModelError::MissingMonomials(0))?;
        let tau_index = structure
            .symbols()
            .iter()
            .position(|s| matches!(s.kind, SymbolKind::Abstract))
            .ok_or(ModelError::MissingMonomials(0))?;
        let h0 = h(0.0);
        let f_samples = Rc::new(grid.sample(&f));
        let h_samples = Rc::new(grid.sample(|t| h(t) - h0));
        Ok(HolderModel {
            structure,
            grid,
            f_samples,
            h_samples,
            tau_index,
            unit_index,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.structure.level_of(self.tau_index)
    }

    pub fn tau_index(&self) -> usize {
        self.tau_index
    }

    pub fn unit_index(&self) -> usize {
        self.unit_index
    }

    pub fn h_at(&self, x: f64) -> f64 {
        self.h_samples[self.grid.index_nearest(x)]
    }

    pub fn f_at(&self, x: f64) -> f64 {
        self.f_samples[self.grid.index_nearest(x)]
    }

    pub fn h_samples(&self) -> &[f64] {
        &self.h_samples
    }
}

impl Model for HolderModel {
    fn structure(&self) -> &RegStructure {
        &self.structure
    }

    fn grid(&self) -> &WorkingGrid {
        &self.grid
    }

    fn pi(&self, x: f64, tau: usize, y: f64) -> f64 {
        let yi = self.grid.index_nearest(y);
        if tau == self.unit_index {
            self.f_samples[yi]
        } else if tau == self.tau_index {
            (self.h_samples[yi] - self.h_at(x)) * self.f_samples[yi]
        } else {
            0.0
        }
    }

    fn gamma_map(&self, x: f64, y: f64) -> GradedMap {
        let mut g = GradedMap::identity(self.structure.len());
        g.set(self.unit_index, self.tau_index, self.h_at(x) - self.h_at(y));
        g
    }

    fn pi_separable(&self, tau: usize) -> Option<Vec<SeparableTerm>> {
        if tau == self.unit_index {
            Some(vec![SeparableTerm {
                coeff: Box::new(|_| 1.0),
                factor: self.f_samples.as_ref().clone(),
            }])
        } else if tau == self.tau_index {
            let hf: Vec<f64> = self
                .h_samples
                .iter()
                .zip(self.f_samples.iter())
                .map(|(h, f)| h * f)
                .collect();
            let h = Rc::clone(&self.h_samples);
            let grid = self.grid.clone();
            Some(vec![
                SeparableTerm {
                    coeff: Box::new(|_| 1.0),
                    factor: hf,
                },
                SeparableTerm {
                    coeff: Box::new(move |x: f64| -h[grid.index_nearest(x)]),
                    factor: self.f_samples.as_ref().clone(),
                },
            ])
        } else {
            None
        }
    }
}

/// Wraps a model and perturbs a single Γ entry; used to check that the
/// algebraic-identity residual really is sensitive to corruption.
pub struct PerturbedGammaModel<M: Model> {
    pub base: M,
    pub row: usize,
    pub col: usize,
    pub bump: f64,
}

impl<M: Model> Model for PerturbedGammaModel<M> {
    fn structure(&self) -> &RegStructure {
        self.base.structure()
    }

    fn grid(&self) -> &WorkingGrid {
        self.base.grid()
    }

    fn pi(&self, x: f64, tau: usize, y: f64) -> f64 {
        self.base.pi(x, tau, y)
    }

    fn gamma_map(&self, x: f64, y: f64) -> GradedMap {
        let mut g = self.base.gamma_map(x, y);
        g.add_to(self.row, self.col, self.bump);
        g
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct AlgebraicReport {
    pub pi_residual: f64,
    pub gamma_residual: f64,
}

impl AlgebraicReport {
    pub fn max_residual(&self) -> f64 {
        self.pi_residual.max(self.gamma_residual)
    }
}

/// Checks Π_x Γ_{x,y} = Π_y and Γ_{x,y} Γ_{y,z} = Γ_{x,z} on sampled triples,
/// evaluating the realizations on a grid subsample.
pub fn check_algebraic(model: &dyn Model, samples: usize, seed: u64) -> AlgebraicReport {
    let grid = model.grid();
    let structure = model.structure();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pi_residual: f64 = 0.0;
    let mut gamma_residual: f64 = 0.0;
    let eval_stride = (grid.len() / 64).max(1);
    for _ in 0..samples {
        let x = grid.point(rng.gen_range(0..grid.len()));
        let y = grid.point(rng.gen_range(0..grid.len()));
        let z = grid.point(rng.gen_range(0..grid.len()));
        let gxy = model.gamma_map(x, y);
        let gyz = model.gamma_map(y, z);
        let gxz = model.gamma_map(x, z);
        gamma_residual = gamma_residual.max(gxy.compose(&gyz).max_abs_diff(&gxz));
        for tau in 0..structure.len() {
            let transported: Vec<f64> = (0..structure.len()).map(|r| gxy.get(r, tau)).collect();
            for yi in (0..grid.len()).step_by(eval_stride) {
                let yp = grid.point(yi);
                let lhs = model.pi_vector(x, &transported, yp);
                let rhs = model.pi(y, tau, yp);
                pi_residual = pi_residual.max((lhs - rhs).abs());
            }
        }
    }
    AlgebraicReport {
        pi_residual,
        gamma_residual,
    }
}

/// Dumps Π_xτ samples as CSV rows (tau, x, y, value).
pub fn dump_model_samples(
    model: &dyn Model,
    xs: &[f64],
    out: &mut dyn Write,
) -> Result<(), ModelError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tau", "x", "y", "value"])
        .map_err(io_from_csv)?;
    let grid = model.grid();
    let stride = (grid.len() / 128).max(1);
    for tau in 0..model.structure().len() {
        let name = &model.structure().symbol(tau).name;
        for &x in xs {
            for yi in (0..grid.len()).step_by(stride) {
                let y = grid.point(yi);
                w.write_record([
                    name.clone(),
                    format!("{x:.12e}"),
                    format!("{y:.12e}"),
                    format!("{:.12e}", model.pi(x, tau, y)),
                ])
                .map_err(io_from_csv)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn io_from_csv(e: csv::Error) -> ModelError {
    ModelError::Io(std::io::Error::other(e))
}
