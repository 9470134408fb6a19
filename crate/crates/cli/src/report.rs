//! Serialized output records.

use serde::Serialize;

/// One CSV row: `family,dim,alpha,p,t,quantity,brute,closed_form,abs_err`.
/// Absent values serialize as empty fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub family: &'static str,
    pub dim: usize,
    pub alpha: f64,
    pub p: Option<f64>,
    pub t: Option<f64>,
    pub quantity: &'static str,
    pub brute: f64,
    pub closed_form: Option<f64>,
    pub abs_err: Option<f64>,
}

/// Agreement of one closed form with brute force over a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulaRecord {
    pub id: &'static str,
    pub grid_size: usize,
    pub max_abs_err: f64,
    pub tolerance: f64,
    /// Known mismatch between the formula as written and brute force; it is
    /// measured and reported but does not fail the run.
    pub known_discrepancy: bool,
    /// Mean of `brute / closed_form` over points where both are nonzero.
    pub measured_ratio: Option<f64>,
    pub ratio_min: Option<f64>,
    pub ratio_max: Option<f64>,
    pub pass: bool,
}

impl FormulaRecord {
    /// Builds a record from `(brute, closed_form)` pairs.
    pub fn from_pairs(id: &'static str, tolerance: f64, known_discrepancy: bool, pairs: &[(f64, f64)]) -> Self {
        let max_abs_err = pairs.iter().map(|(b, c)| (b - c).abs()).fold(0.0, f64::max);
        let ratios: Vec<f64> = pairs
            .iter()
            .filter(|(b, c)| b.abs() > 1e-12 && c.abs() > 1e-12)
            .map(|(b, c)| b / c)
            .collect();
        let (measured_ratio, ratio_min, ratio_max) = if ratios.is_empty() {
            (None, None, None)
        } else {
            (
                Some(ratios.iter().sum::<f64>() / ratios.len() as f64),
                ratios.iter().copied().reduce(f64::min),
                ratios.iter().copied().reduce(f64::max),
            )
        };
        Self {
            id,
            grid_size: pairs.len(),
            max_abs_err,
            tolerance,
            known_discrepancy,
            measured_ratio,
            ratio_min,
            ratio_max,
            pass: known_discrepancy || max_abs_err <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub seed: u64,
    pub formulas: Vec<FormulaRecord>,
}

impl VerificationReport {
    pub fn new(seed: u64, formulas: Vec<FormulaRecord>) -> Self {
        Self {
            pass: formulas.iter().all(|f| f.pass),
            seed,
            formulas,
        }
    }

    pub fn get(&self, id: &str) -> Option<&FormulaRecord> {
        self.formulas.iter().find(|f| f.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub state: String,
    pub alpha: f64,
    pub t: Option<f64>,
    pub source: ptsim::SourceModel,
    pub decode_plus_y: u8,
}

/// Key order is part of the output contract.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandampReport {
    pub rounds: usize,
    pub sifted: usize,
    pub success_rate: f64,
    pub agreement_rate: Option<f64>,
    pub output_bias: Option<f64>,
    pub min_entropy_per_bit: Option<f64>,
    pub equality_certified: bool,
    pub seed: u64,
    pub config_echo: ConfigEcho,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundLogRow {
    pub round: usize,
    pub input_bit: u8,
    pub alice_op: &'static str,
    pub success: bool,
    pub bob_outcome: Option<u8>,
    pub decoded_bit: Option<u8>,
    pub kept: bool,
}
