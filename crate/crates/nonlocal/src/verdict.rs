//! Sampled-property verdicts.
//!
//! A checker either refutes a property with a concrete, replayable witness
//! or reports that the sampled evidence passed. Verdicts carry the seed and
//! sample budget so any run can be reproduced exactly.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictStatus {
    EvidencePassed,
    Refuted,
}

/// Concrete counterexample data, one variant per checker.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    Symmetry {
        x: Vec<f64>,
        y: Vec<f64>,
        w: Vec<f64>,
        z: Vec<f64>,
        forward: f64,
        swapped: f64,
    },
    /// Convexity violation in one slot: at `(x, y)` with the other argument
    /// fixed, `θ·f(a) + (1−θ)·f(b) < f(θa + (1−θ)b) − τ`.
    SeparateConvexity {
        slot: char,
        x: Vec<f64>,
        y: Vec<f64>,
        fixed: Vec<f64>,
        a: Vec<f64>,
        b: Vec<f64>,
        theta: f64,
        lhs: f64,
        rhs: f64,
    },
    PhiConvexity {
        psi_index: usize,
        x: Vec<f64>,
        a: Vec<f64>,
        b: Vec<f64>,
        theta: f64,
        lhs: f64,
        rhs: f64,
    },
    /// `|f(x,y,w,z)|` exceeds the certificate bound.
    PBound {
        x: Vec<f64>,
        y: Vec<f64>,
        w: Vec<f64>,
        z: Vec<f64>,
        value: f64,
        bound: f64,
    },
    /// Growth ratio trend over expanding boxes.
    HomogeneousGrowth {
        w: Vec<f64>,
        z: Vec<f64>,
        ratio: f64,
        trend: Vec<f64>,
    },
    /// A zero-mean or symmetry condition of the null-class definition fails.
    NullClass {
        condition: String,
        at: Vec<f64>,
        value: f64,
    },
}

/// Outcome of one sampled property check.
#[derive(Clone, Debug, Serialize)]
pub struct PropertyVerdict {
    pub status: VerdictStatus,
    pub witness: Option<Witness>,
    pub samples: usize,
    pub tolerance: f64,
    pub seed: u64,
    /// Checker-specific extras (best constant found, samples skipped, ...).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl PropertyVerdict {
    pub fn passed(samples: usize, tolerance: f64, seed: u64) -> Self {
        PropertyVerdict {
            status: VerdictStatus::EvidencePassed,
            witness: None,
            samples,
            tolerance,
            seed,
            detail: None,
        }
    }

    pub fn refuted(witness: Witness, samples: usize, tolerance: f64, seed: u64) -> Self {
        PropertyVerdict {
            status: VerdictStatus::Refuted,
            witness: Some(witness),
            samples,
            tolerance,
            seed,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn is_refuted(&self) -> bool {
        self.status == VerdictStatus::Refuted
    }
}

/// Default sampler seed used across the crate.
pub const DEFAULT_SEED: u64 = 0x5EED;
