//! Per-iteration solver records.

use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

/// One accelerated-projection iteration.
#[derive(Debug, Clone, Serialize)]
pub struct IterRecord {
    pub start: usize,
    pub stage: usize,
    pub zeta: f64,
    pub t: usize,
    /// `f(V⁽ᵗ⁺¹⁾)`.
    pub f: f64,
    pub rho: f64,
    pub theta: f64,
    pub r_t: f64,
    pub searches: usize,
    /// The line search ran out of trials and kept the best `R_t/(θ²ρ)`.
    pub forced: bool,
    pub grad_maxnorm: f64,
    /// `‖Ξ⁽ᵗ⁾‖_F` before normalization.
    pub xi_norm: f64,
}

/// Iterates of one accelerated iteration, kept only on request.
#[derive(Debug, Clone)]
pub struct IterateRecord {
    pub v: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub w_next: DMatrix<f64>,
    pub v_next: DMatrix<f64>,
}

/// Records of one accelerated run (one ζ stage).
#[derive(Debug, Clone, Default)]
pub struct AccelTrace {
    pub records: Vec<IterRecord>,
    pub iterates: Vec<IterateRecord>,
    pub w0: Option<DMatrix<f64>>,
    pub converged: bool,
}

/// Records collected across starts and stages.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SolverTrace {
    pub records: Vec<IterRecord>,
}

impl SolverTrace {
    pub fn extend(&mut self, other: &AccelTrace) {
        self.records.extend(other.records.iter().cloned());
    }

    /// Line-delimited JSON, one record per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}
