//! Regularity-structure metadata: scalings, graded bases, structure-group
//! matrices on the polynomial sector, test-function machinery, and the dyadic
//! grids shared by the analytic modules.

mod grid;
mod partition;
mod poly;
mod profile;

pub use grid::{DyadicGrid, Kernel, WorkingGrid};
pub use partition::PartitionOfUnity;
pub use poly::Poly1;
pub use profile::{make_bump, Profile, TestFamily, TestFunction};

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("structure needs at least one symbol")]
    EmptyBasis,
    #[error("symbol {0} not present in the structure")]
    UnknownSymbol(String),
    #[error("structure has no monomial X^{0:?}")]
    MissingMonomial(Vec<u32>),
    #[error("level {level} should carry {expected} monomials, descriptor says {given}")]
    SectorDimensionMismatch {
        level: f64,
        expected: usize,
        given: usize,
    },
    #[error("cannot parse structure descriptor: {0}")]
    Descriptor(String),
}

/// Anisotropic scaling exponents; the scaled norm is max_i |x_i|^{1/s_i}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scaling {
    s: Vec<u32>,
}

impl Scaling {
    pub fn new(s: Vec<u32>) -> Self {
        assert!(!s.is_empty() && s.iter().all(|&e| e >= 1));
        Scaling { s }
    }

    pub fn isotropic(d: usize) -> Self {
        Scaling::new(vec![1; d])
    }

    pub fn dim(&self) -> usize {
        self.s.len()
    }

    pub fn exponent(&self, axis: usize) -> u32 {
        self.s[axis]
    }

    pub fn exponents(&self) -> &[u32] {
        &self.s
    }

    /// |s| = Σ s_i, the effective dimension.
    pub fn total(&self) -> u32 {
        self.s.iter().sum()
    }

    pub fn scaled_norm(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.s)
            .map(|(xi, &si)| xi.abs().powf(1.0 / si as f64))
            .fold(0.0, f64::max)
    }

    /// (λ^s x)_i = λ^{s_i} x_i.
    pub fn dilate(&self, lambda: f64, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.s)
            .map(|(xi, &si)| lambda.powi(si as i32) * xi)
            .collect()
    }

    /// Scaled degree |k|_s = Σ s_i k_i of a monomial multi-index.
    pub fn scaled_degree(&self, k: &MultiIndex) -> u32 {
        k.0.iter().zip(&self.s).map(|(ki, si)| ki * si).sum()
    }
}

/// A monomial multi-index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&k| (1..=k as u64).product::<u64>() as f64)
            .product()
    }

    pub fn leq(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn sub(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// Π binom(k_i, l_i).
    pub fn binomial(&self, l: &MultiIndex) -> f64 {
        self.0
            .iter()
            .zip(&l.0)
            .map(|(&k, &l)| {
                let mut acc = 1.0;
                for j in 0..l {
                    acc = acc * (k - j) as f64 / (j + 1) as f64;
                }
                acc
            })
            .product()
    }

    /// x^k componentwise.
    pub fn pow(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&k, &xi)| xi.powi(k as i32))
            .product()
    }

    /// All multi-indices with scaled degree ≤ bound.
    pub fn up_to(scaling: &Scaling, bound: u32) -> Vec<MultiIndex> {
        let d = scaling.dim();
        let mut out = vec![MultiIndex::zero(d)];
        for axis in 0..d {
            let mut next = Vec::new();
            for k in out {
                let mut extended = k.clone();
                next.push(k.clone());
                loop {
                    extended.0[axis] += 1;
                    if scaling.scaled_degree(&extended) > bound {
                        break;
                    }
                    next.push(extended.clone());
                }
            }
            out = next;
        }
        out.sort();
        out.dedup();
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SymbolKind {
    /// A polynomial symbol X^k.
    Monomial(MultiIndex),
    Abstract,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Symbol {
    pub name: String,
    pub level: f64,
    pub kind: SymbolKind,
}

/// The graded basis of a regularity structure together with the scaling, the
/// working truncation level γ, and the smoothness order r of the test class.
#[derive(Clone, Debug, PartialEq)]
pub struct RegStructure {
    scaling: Scaling,
    symbols: Vec<Symbol>,
    gamma: f64,
    test_order: u32,
}

impl RegStructure {
    pub fn new(
        scaling: Scaling,
        mut symbols: Vec<Symbol>,
        gamma: f64,
        test_order: u32,
    ) -> Result<Self, StructureError> {
        if symbols.is_empty() {
            return Err(StructureError::EmptyBasis);
        }
        symbols.sort_by(|a, b| {
            a.level
                .partial_cmp(&b.level)
                .unwrap()
                .then_with(|| a.name.cmp(&b.name))
        });
        Ok(RegStructure {
            scaling,
            symbols,
            gamma,
            test_order,
        })
    }

    /// The polynomial structure of dimension d with monomials of scaled
    /// degree ≤ γ.
    pub fn polynomial(scaling: Scaling, gamma: f64, test_order: u32) -> Self {
        let symbols = MultiIndex::up_to(&scaling, gamma.floor() as u32)
            .into_iter()
            .map(|k| Symbol {
                name: monomial_name(&k),
                level: scaling.scaled_degree(&k) as f64,
                kind: SymbolKind::Monomial(k),
            })
            .collect();
        RegStructure::new(scaling, symbols, gamma, test_order).expect("nonempty basis")
    }

    /// The two-level structure A = {0, α} on the line: the unit X^0 and one
    /// abstract symbol at level α.
    pub fn two_level(alpha: f64, gamma: f64, test_order: u32) -> Self {
        assert!(alpha > 0.0 && alpha < 1.0);
        let symbols = vec![
            Symbol {
                name: "1".to_string(),
                level: 0.0,
                kind: SymbolKind::Monomial(MultiIndex::zero(1)),
            },
            Symbol {
                name: "tau".to_string(),
                level: alpha,
                kind: SymbolKind::Abstract,
            },
        ];
        RegStructure::new(Scaling::isotropic(1), symbols, gamma, test_order)
            .expect("nonempty basis")
    }

    pub fn scaling(&self) -> &Scaling {
        &self.scaling
    }

    pub fn dim(&self) -> usize {
        self.scaling.dim()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        let mut out = self.clone();
        out.gamma = gamma;
        out
    }

    pub fn test_order(&self) -> u32 {
        self.test_order
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbol(&self, idx: usize) -> &Symbol {
        &self.symbols[idx]
    }

    pub fn level_of(&self, idx: usize) -> f64 {
        self.symbols[idx].level
    }

    /// Distinct homogeneities, sorted.
    pub fn levels(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for s in &self.symbols {
            if !out.iter().any(|&l| (l - s.level).abs() < 1e-12) {
                out.push(s.level);
            }
        }
        out
    }

    pub fn min_level(&self) -> f64 {
        self.symbols
            .first()
            .map(|s| s.level)
            .unwrap_or(f64::INFINITY)
    }

    pub fn indices_at_level(&self, level: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| (self.symbols[i].level - level).abs() < 1e-12)
            .collect()
    }

    pub fn indices_below(&self, gamma: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.symbols[i].level < gamma - 1e-12)
            .collect()
    }

    pub fn monomial_index(&self, k: &MultiIndex) -> Option<usize> {
        self.symbols
            .iter()
            .position(|s| matches!(&s.kind, SymbolKind::Monomial(m) if m == k))
    }

    pub fn unit_index(&self) -> Option<usize> {
        self.monomial_index(&MultiIndex::zero(self.dim()))
    }

    pub fn index_of(&self, name: &str) -> Result<usize, StructureError> {
        self.symbols
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| StructureError::UnknownSymbol(name.to_string()))
    }

    /// Whether every integer level ≤ γ carries exactly the monomials of that
    /// scaled degree — the standing polynomial assumption behind the
    /// mollification construction.
    pub fn satisfies_polynomial_assumption(&self) -> bool {
        for level in self.levels() {
            if level > self.gamma + 1e-12 {
                continue;
            }
            let n = level.round();
            if (level - n).abs() < 1e-9 {
                let expected: Vec<MultiIndex> = MultiIndex::up_to(&self.scaling, n as u32)
                    .into_iter()
                    .filter(|k| self.scaling.scaled_degree(k) as f64 == n)
                    .collect();
                let at_level = self.indices_at_level(level);
                if at_level.len() != expected.len() {
                    return false;
                }
                for k in expected {
                    if self.monomial_index(&k).is_none() {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Serializes the structure to the key-value descriptor format.
    pub fn to_descriptor(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "d = {}", self.dim());
        let s: Vec<String> = self
            .scaling
            .exponents()
            .iter()
            .map(u32::to_string)
            .collect();
        let _ = writeln!(out, "s = {}", s.join(", "));
        let _ = writeln!(out, "gamma = {}", self.gamma);
        let _ = writeln!(out, "r = {}", self.test_order);
        let levels = self.levels();
        let level_strs: Vec<String> = levels.iter().map(|l| format!("{l}")).collect();
        let _ = writeln!(out, "levels = {}", level_strs.join(", "));
        let dims: Vec<String> = levels
            .iter()
            .map(|&l| self.indices_at_level(l).len().to_string())
            .collect();
        let _ = writeln!(out, "dims = {}", dims.join(", "));
        out
    }

    /// Parses the descriptor format written by `to_descriptor`. Integer
    /// levels are reconstructed as monomial sectors, everything else as
    /// abstract symbols.
    pub fn from_descriptor(text: &str) -> Result<Self, StructureError> {
        let mut d = None;
        let mut s: Option<Vec<u32>> = None;
        let mut gamma = None;
        let mut r = None;
        let mut levels: Option<Vec<f64>> = None;
        let mut dims: Option<Vec<usize>> = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| StructureError::Descriptor(format!("not key=value: {line:?}")))?;
            let key = key.trim();
            let value = value.trim();
            let parse_err =
                |e: String| StructureError::Descriptor(format!("key {key}: {e}"));
            match key {
                "d" => d = Some(value.parse::<usize>().map_err(|e| parse_err(e.to_string()))?),
                "s" => {
                    s = Some(
                        value
                            .split(',')
                            .map(|v| v.trim().parse::<u32>())
                            .collect::<Result<_, _>>()
                            .map_err(|e| parse_err(e.to_string()))?,
                    )
                }
                "gamma" => {
                    gamma = Some(value.parse::<f64>().map_err(|e| parse_err(e.to_string()))?)
                }
                "r" => r = Some(value.parse::<u32>().map_err(|e| parse_err(e.to_string()))?),
                "levels" => {
                    levels = Some(
                        value
                            .split(',')
                            .map(|v| v.trim().parse::<f64>())
                            .collect::<Result<_, _>>()
                            .map_err(|e| parse_err(e.to_string()))?,
                    )
                }
                "dims" => {
                    dims = Some(
                        value
                            .split(',')
                            .map(|v| v.trim().parse::<usize>())
                            .collect::<Result<_, _>>()
                            .map_err(|e| parse_err(e.to_string()))?,
                    )
                }
                other => {
                    return Err(StructureError::Descriptor(format!("unknown key {other:?}")))
                }
            }
        }
        let d = d.ok_or_else(|| StructureError::Descriptor("missing d".into()))?;
        let s = s.unwrap_or_else(|| vec![1; d]);
        let scaling = Scaling::new(s);
        let gamma = gamma.ok_or_else(|| StructureError::Descriptor("missing gamma".into()))?;
        let r = r.ok_or_else(|| StructureError::Descriptor("missing r".into()))?;
        let levels = levels.ok_or_else(|| StructureError::Descriptor("missing levels".into()))?;
        let dims = dims.ok_or_else(|| StructureError::Descriptor("missing dims".into()))?;
        if levels.len() != dims.len() {
            return Err(StructureError::Descriptor(
                "levels and dims have different lengths".into(),
            ));
        }
        let mut symbols = Vec::new();
        for (&level, &dim) in levels.iter().zip(&dims) {
            let n = level.round();
            if (level - n).abs() < 1e-9 && n >= 0.0 {
                let monomials: Vec<MultiIndex> = MultiIndex::up_to(&scaling, n as u32)
                    .into_iter()
                    .filter(|k| scaling.scaled_degree(k) as f64 == n)
                    .collect();
                if monomials.len() != dim {
                    return Err(StructureError::SectorDimensionMismatch {
                        level,
                        expected: monomials.len(),
                        given: dim,
                    });
                }
                for k in monomials {
                    symbols.push(Symbol {
                        name: monomial_name(&k),
                        level,
                        kind: SymbolKind::Monomial(k),
                    });
                }
            } else {
                for i in 0..dim {
                    symbols.push(Symbol {
                        name: format!("t{level}_{i}"),
                        level,
                        kind: SymbolKind::Abstract,
                    });
                }
            }
        }
        RegStructure::new(scaling, symbols, gamma, r)
    }
}

fn monomial_name(k: &MultiIndex) -> String {
    if k.order() == 0 {
        return "1".to_string();
    }
    let parts: Vec<String> = k.0.iter().map(u32::to_string).collect();
    format!("X^{}", parts.join(","))
}

/// A linear map on the graded basis, stored dense; entry (row, col) is the
/// coefficient of `symbol[row]` in the image of `symbol[col]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedMap {
    dim: usize,
    entries: Vec<f64>,
}

impl GradedMap {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        GradedMap { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        GradedMap {
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn add_to(&mut self, row: usize, col: usize, value: f64) {
        self.entries[row * self.dim + col] += value;
    }

    /// Composition (self ∘ other): apply `other` first.
    pub fn compose(&self, other: &GradedMap) -> GradedMap {
        assert_eq!(self.dim, other.dim);
        let mut out = GradedMap::zeros(self.dim);
        for i in 0..self.dim {
            for k in 0..self.dim {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..self.dim {
                    out.add_to(i, j, a * other.get(k, j));
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &GradedMap) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest violation of the structure-group triangularity: anything on or
    /// above the diagonal in the grading must look like the identity.
    pub fn triangularity_defect(&self, structure: &RegStructure) -> f64 {
        let mut worst: f64 = 0.0;
        for row in 0..self.dim {
            for col in 0..self.dim {
                let lr = structure.level_of(row);
                let lc = structure.level_of(col);
                if lr > lc + 1e-12 {
                    worst = worst.max(self.get(row, col).abs());
                } else if (lr - lc).abs() < 1e-12 {
                    let expected = if row == col { 1.0 } else { 0.0 };
                    worst = worst.max((self.get(row, col) - expected).abs());
                }
            }
        }
        worst
    }
}

/// The canonical action on the polynomial sector:
/// `Γ_{x,y} X^k = (X + (x-y))^k`, i.e. entries binom(k, l) (x-y)^{k-l}.
/// Abstract symbols are left untouched (identity columns).
pub fn poly_gamma(structure: &RegStructure, x: &[f64], y: &[f64]) -> GradedMap {
    let mut out = GradedMap::identity(structure.len());
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    for col in 0..structure.len() {
        if let SymbolKind::Monomial(k) = &structure.symbol(col).kind {
            for row in 0..structure.len() {
                if let SymbolKind::Monomial(l) = &structure.symbol(row).kind {
                    if l.leq(k) && l != k {
                        out.set(row, col, k.binomial(l) * k.sub(l).pow(&diff));
                    }
                }
            }
        }
    }
    out
}
