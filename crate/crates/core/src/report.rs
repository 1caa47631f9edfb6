//! CSV-serializable study reports.
//!
//! Reports render to CSV with a `#`-prefixed metadata block (grid sizes,
//! seeds, norm conventions, the fitted slope) followed by a header row and
//! the data rows. Floats are written with 17 significant digits and UNIX
//! newlines, so a report is byte-identical across runs with the same inputs.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// One measured point of a rate study.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    /// The swept control parameter (mesh resolution, depth, sample count...).
    pub control: u64,
    /// Grid sup error measured at this control value (seed-averaged when the
    /// study averages seeds).
    pub sup_error: f64,
    /// Free parameters of the network built for this row (0 when the study
    /// does not build networks).
    pub param_count: u64,
    /// Base seed the row's randomness derived from.
    pub seed: u64,
    /// Number of grid points behind the sup estimate.
    pub grid_size: u64,
}

/// A rate study: rows sorted by control parameter, the fitted log-log slope,
/// and the metadata needed to audit every tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct RateStudyReport {
    rows: Vec<RateRow>,
    fitted_slope: f64,
    metadata: Vec<(String, String)>,
}

impl RateStudyReport {
    /// Sorts the rows by control parameter and fits the slope of
    /// `log(sup_error)` against `log(control)`.
    pub fn new(mut rows: Vec<RateRow>, metadata: Vec<(String, String)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("rate study rows"));
        }
        rows.sort_by_key(|r| r.control);
        let xs: Vec<f64> = rows.iter().map(|r| r.control as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.sup_error).collect();
        let fitted_slope = fit_loglog_slope(&xs, &ys);
        Ok(Self {
            rows,
            fitted_slope,
            metadata,
        })
    }

    pub fn rows(&self) -> &[RateRow] {
        &self.rows
    }

    pub fn fitted_slope(&self) -> f64 {
        self.fitted_slope
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    pub fn sup_errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.sup_error).collect()
    }

    /// Renders the report as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("# schema rate-study v1\n");
        for (key, value) in &self.metadata {
            let _ = writeln!(out, "# {key} = {value}");
        }
        let _ = writeln!(out, "# fitted_slope = {}", format_float(self.fitted_slope));
        out.push_str("control_param,sup_error,param_count,seed,grid_size\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                row.control,
                format_float(row.sup_error),
                row.param_count,
                row.seed,
                row.grid_size
            );
        }
        out
    }
}

/// One cell of the factorization benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorBenchRow {
    pub degree: u64,
    pub span: u64,
    pub max_rel_err: f64,
    pub max_factor_count: u64,
}

/// Factorization benchmark report: one row per `(M, S)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorBenchReport {
    rows: Vec<FactorBenchRow>,
    metadata: Vec<(String, String)>,
}

impl FactorBenchReport {
    pub fn new(rows: Vec<FactorBenchRow>, metadata: Vec<(String, String)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("factor bench rows"));
        }
        Ok(Self { rows, metadata })
    }

    pub fn rows(&self) -> &[FactorBenchRow] {
        &self.rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("# schema factor-bench v1\n");
        for (key, value) in &self.metadata {
            let _ = writeln!(out, "# {key} = {value}");
        }
        out.push_str("M,S,max_rel_err,max_factor_count\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                row.degree,
                row.span,
                format_float(row.max_rel_err),
                row.max_factor_count
            );
        }
        out
    }
}

/// Decimal float with 17 significant digits (round-trip exact for f64).
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Least-squares slope of `log(y)` against `log(x)`.
///
/// Values of `y` are floored at the smallest positive double so exact zeros
/// produce a large negative slope instead of a NaN; callers that assert slope
/// windows only do so for studies whose errors are provably positive.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|&x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|&y| y.max(f64::MIN_POSITIVE).ln()).collect();
    let mean_x = lx.iter().sum::<f64>() / n;
    let mean_y = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let xs: Vec<f64> = (1..=6).map(|k| (1 << k) as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-1.5)).collect();
        assert!((fit_loglog_slope(&xs, &ys) + 1.5).abs() < 1e-12);
    }

    #[test]
    fn csv_is_deterministic_and_sorted() {
        let rows = vec![
            RateRow {
                control: 16,
                sup_error: 0.25,
                param_count: 30,
                seed: 7,
                grid_size: 500,
            },
            RateRow {
                control: 8,
                sup_error: 0.5,
                param_count: 20,
                seed: 7,
                grid_size: 500,
            },
        ];
        let meta = vec![("d".to_string(), "3".to_string())];
        let a = RateStudyReport::new(rows.clone(), meta.clone()).unwrap();
        let b = RateStudyReport::new(rows, meta).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.rows()[0].control, 8);
        let csv = a.to_csv();
        assert!(csv.starts_with("# schema rate-study v1\n"));
        assert!(csv.contains("control_param,sup_error,param_count,seed,grid_size"));
        assert!(!csv.contains('\r'));
        // Doubling the control halves the error: slope -1.
        assert!((a.fitted_slope() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn float_formatting_has_17_significant_digits() {
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
        assert_eq!(format_float(-0.5), "-5.0000000000000000e-1");
        let v = 0.123_456_789_012_345_68;
        let formatted = format_float(v);
        assert_eq!(formatted.parse::<f64>().unwrap(), v);
    }

    #[test]
    fn empty_reports_are_rejected() {
        assert!(RateStudyReport::new(vec![], vec![]).is_err());
        assert!(FactorBenchReport::new(vec![], vec![]).is_err());
    }
}
