//! Sweep tables, least-squares rate fitting, and the CSV/JSON report
//! plumbing shared by the convergence experiments.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<String>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Plain least squares y = slope·x + intercept. Returns None with fewer than
/// two usable points.
pub fn fit_linear(xs: &[f64], ys: &[f64]) -> Option<SlopeFit> {
    assert_eq!(xs.len(), ys.len());
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (x, y))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(SlopeFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Fit of log2(statistic) against log2(param); the slope is the decay rate of
/// a power law statistic ∝ param^rate. Non-positive statistics are dropped.
pub fn fit_log2_log2(params: &[f64], stats: &[f64]) -> Option<SlopeFit> {
    let xs: Vec<f64> = params.iter().map(|p| p.log2()).collect();
    let ys: Vec<f64> = stats
        .iter()
        .map(|s| if *s > 0.0 { s.log2() } else { f64::NAN })
        .collect();
    fit_linear(&xs, &ys)
}

/// Fit of log2(statistic) against an integer level n; a statistic ∝ 2^{-cn}
/// comes out with slope -c.
pub fn fit_level_log2(levels: &[f64], stats: &[f64]) -> Option<SlopeFit> {
    let ys: Vec<f64> = stats
        .iter()
        .map(|s| if *s > 0.0 { s.log2() } else { f64::NAN })
        .collect();
    fit_linear(levels, &ys)
}

/// A (parameter, statistic) table with an optional fitted rate and free-form
/// named scalars for the summary.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ConvergenceReport {
    pub parameter_name: String,
    pub statistic_name: String,
    pub rows: Vec<SweepRow>,
    pub fit: Option<SlopeFit>,
    pub extras: BTreeMap<String, f64>,
}

impl ConvergenceReport {
    pub fn new(parameter_name: &str, statistic_name: &str) -> Self {
        ConvergenceReport {
            parameter_name: parameter_name.to_string(),
            statistic_name: statistic_name.to_string(),
            rows: Vec::new(),
            fit: None,
            extras: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, param: f64, statistic: f64) {
        self.rows.push(SweepRow {
            param,
            statistic,
            level: None,
        });
    }

    pub fn push_level(&mut self, param: f64, statistic: f64, level: impl Into<String>) {
        self.rows.push(SweepRow {
            param,
            statistic,
            level: Some(level.into()),
        });
    }

    pub fn params(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.param).collect()
    }

    pub fn statistics(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.statistic).collect()
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(
            out,
            "{},{},level",
            self.parameter_name, self.statistic_name
        )?;
        for row in &self.rows {
            writeln!(
                out,
                "{:.17e},{:.17e},{}",
                row.param,
                row.statistic,
                row.level.as_deref().unwrap_or("")
            )?;
        }
        Ok(())
    }

    /// Fraction of consecutive steps on which the statistic fails to
    /// decrease; 0 means a strictly monotone decay along the sweep.
    pub fn inversion_fraction(&self) -> f64 {
        if self.rows.len() < 2 {
            return 0.0;
        }
        let inversions = self
            .rows
            .windows(2)
            .filter(|w| w[1].statistic > w[0].statistic)
            .count();
        inversions as f64 / (self.rows.len() - 1) as f64
    }
}
