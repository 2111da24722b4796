/// Dense univariate polynomial used for bump profiles; derivatives and
/// integrals are exact coefficient operations.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly1 {
    coeffs: Vec<f64>,
}

impl Poly1 {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Poly1 { coeffs }
    }

    /// Expands (1 - u^2)^m with exact binomial coefficients.
    pub fn one_minus_square_pow(m: u32) -> Self {
        let mut coeffs = vec![0.0; 2 * m as usize + 1];
        let mut binom = 1.0f64;
        for j in 0..=m {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[2 * j as usize] = sign * binom;
            binom = binom * (m - j) as f64 / (j + 1) as f64;
        }
        Poly1 { coeffs }
    }

    pub fn eval(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * u + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly1 {
        if self.coeffs.len() <= 1 {
            return Poly1::new(vec![0.0]);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| i as f64 * c)
            .collect();
        Poly1 { coeffs }
    }

    /// Exact integral over [-1, 1] from the coefficients.
    pub fn integral_unit_interval(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i % 2 == 0 {
                    2.0 * c / (i as f64 + 1.0)
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Exact moment ∫_{-1}^{1} u^k p(u) du.
    pub fn moment_unit_interval(&self, k: u32) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let pow = i as u32 + k;
                if pow % 2 == 0 {
                    2.0 * c / (pow as f64 + 1.0)
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Numerical sup-norm over [-1, 1] by dense sampling.
    pub fn sup_unit_interval(&self) -> f64 {
        let samples = 1 << 14;
        let mut best = self.eval(-1.0).abs().max(self.eval(1.0).abs());
        for i in 0..=samples {
            let u = -1.0 + 2.0 * i as f64 / samples as f64;
            best = best.max(self.eval(u).abs());
        }
        best
    }
}
