//! Report files: JSON with fixed 17-significant-digit floats and the CSV
//! emitters. All output is deterministic — identical config and seed produce
//! byte-identical files.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use crate::ensemble::EnsembleStats;
use crate::grid::Grid;
use crate::interferometer::{m_a, m_b};
use crate::stats::{ChiSquareResult, Comparison, XestHistogram};
use crate::trajectory::TrajectoryRecord;
use crate::Result;

/// Pretty JSON with every float printed as `{:.16e}` (17 significant
/// digits), so emitted values round-trip exactly through text.
struct SigFig17<'a> {
    inner: PrettyFormatter<'a>,
}

impl<'a> SigFig17<'a> {
    fn new() -> Self {
        Self {
            inner: PrettyFormatter::new(),
        }
    }
}

impl<'a> Formatter for SigFig17<'a> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_object_value(writer)
    }
}

/// Serialize as pretty JSON with 17-significant-digit floats.
pub fn to_json(value: &impl Serialize) -> Result<String> {
    let mut out = Vec::new();
    let mut serializer = Serializer::with_formatter(&mut out, SigFig17::new());
    value.serialize(&mut serializer)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits utf-8"))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    std::fs::write(path, to_json(value)?)?;
    Ok(())
}

/// Wire form of one trajectory:
/// `{seed, N, k, n_a, n_b, x_est, outcomes: "abba…", log_prob}`.
#[derive(Debug, Serialize)]
pub struct TrajectoryDto {
    pub seed: u64,
    #[serde(rename = "N")]
    pub n_photons: usize,
    pub k: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub x_est: f64,
    pub outcomes: String,
    pub log_prob: f64,
}

impl TrajectoryDto {
    pub fn new(record: &TrajectoryRecord, k: f64) -> Self {
        Self {
            seed: record.seed,
            n_photons: record.n_photons(),
            k,
            n_a: record.n_a,
            n_b: record.n_b,
            x_est: record.x_est,
            outcomes: record.outcomes_string(),
            log_prob: record.log_sequence_probability(),
        }
    }
}

/// Wire form of the ensemble report: summary moments plus the comparison
/// table; the histogram goes to its own CSV.
#[derive(Debug, Serialize)]
pub struct EnsembleDto {
    pub n_photons: usize,
    pub k: f64,
    pub hbar: f64,
    pub m_trajectories: usize,
    pub master_seed: u64,
    pub mean_xest: f64,
    pub var_xest: f64,
    pub mean_p_final: f64,
    pub var_of_mean_p_final: f64,
    pub mean_var_p_final: f64,
    pub var_p_final: f64,
    pub mean_sigma2_x_final: f64,
    pub mean_local_grad_sq_term: Option<f64>,
    pub mean_local_curvature_term: Option<f64>,
    pub born_fraction_positive: f64,
    pub born_fraction_predicted: f64,
    pub chi_square: Option<ChiSquareResult>,
    pub comparisons: Vec<Comparison>,
}

fn finite(value: f64) -> Option<f64> {
    value.is_finite().then_some(value)
}

impl EnsembleDto {
    pub fn new(stats: &EnsembleStats) -> Self {
        Self {
            n_photons: stats.n_photons,
            k: stats.k,
            hbar: stats.hbar,
            m_trajectories: stats.m_trajectories,
            master_seed: stats.master_seed,
            mean_xest: stats.mean_xest,
            var_xest: stats.var_xest,
            mean_p_final: stats.mean_p_final,
            var_of_mean_p_final: stats.var_of_mean_p_final,
            mean_var_p_final: stats.mean_var_p_final,
            var_p_final: stats.var_p_final,
            mean_sigma2_x_final: stats.mean_sigma2_x_final,
            mean_local_grad_sq_term: finite(stats.mean_local_grad_sq_term),
            mean_local_curvature_term: finite(stats.mean_local_curvature_term),
            born_fraction_positive: stats.born_fraction_positive,
            born_fraction_predicted: stats.born_fraction_predicted,
            chi_square: stats.chi_square,
            comparisons: stats.comparisons.clone(),
        }
    }
}

/// Histogram CSV: `bin_center,count,predicted_probability`.
pub fn histogram_csv(histogram: &XestHistogram) -> String {
    let mut out = String::with_capacity(histogram.bins.len() * 48 + 48);
    out.push_str("bin_center,count,predicted_probability\n");
    for bin in &histogram.bins {
        let _ = writeln!(
            out,
            "{:.16e},{},{:.16e}",
            bin.center, bin.count, bin.predicted_probability
        );
    }
    out
}

/// Operator tables over the grid:
/// `x,prob_a,prob_b,phase_a,phase_b`.
pub fn operators_csv(grid: &Grid, k: f64) -> String {
    let mut out = String::with_capacity(grid.len() * 96 + 40);
    out.push_str("x,prob_a,prob_b,phase_a,phase_b\n");
    for x in grid.points() {
        let a = m_a(x, k);
        let b = m_b(x, k);
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            x,
            a.norm_sqr(),
            b.norm_sqr(),
            a.arg(),
            b.arg()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        value: f64,
        count: u64,
        nested: Vec<f64>,
    }

    #[test]
    fn floats_carry_17_significant_digits() {
        let text = to_json(&Sample {
            value: 2.5e-5,
            count: 3,
            nested: vec![1.0, 0.1],
        })
        .unwrap();
        assert!(text.contains("2.5000000000000001e-5"), "{text}");
        assert!(text.contains("1.0000000000000000e0"), "{text}");
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        assert!(text.contains("\"count\": 3"), "{text}");
        // values round-trip exactly
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["value"].as_f64().unwrap(), 2.5e-5);
        assert_eq!(parsed["nested"][1].as_f64().unwrap(), 0.1);
    }

    #[test]
    fn operator_table_is_balanced_at_the_origin() {
        // odd point count puts a row exactly at x = 0 with probabilities .5/.5
        let grid = Grid::symmetric(std::f64::consts::FRAC_PI_8, 17).unwrap();
        let csv = operators_csv(&grid, 1.0);
        let center_row = csv.lines().nth(1 + 8).unwrap();
        let fields: Vec<&str> = center_row.split(',').collect();
        assert_eq!(fields[0].parse::<f64>().unwrap(), 0.0);
        assert_eq!(fields[1].parse::<f64>().unwrap(), 0.5);
        assert_eq!(fields[2].parse::<f64>().unwrap(), 0.5);
    }
}
