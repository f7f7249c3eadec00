//! Energy-increment search for a regular subspace.
//!
//! Start from the whole space. While some `H` is not `eps`-regular, take a
//! worst character on each irregular coset and pass to `H ∩ (chars)^perp`.
//! The energy `E_x[(mean of f on x + H)^2]` is at most 1 and grows by more
//! than `eps^3` per round, so at most `ceil(1/eps^3)` rounds happen.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::exact::Epsilon;
use crate::fourier::{check_subspace_regularity, CosetLayout, FunctionTable, RegularityReport};
use crate::gf2::{check_dense, echelonize, F2Vector, Subspace, DEFAULT_DENSE_LIMIT};

/// `E_x [ (E_{y in x+H} f(y))^2 ]`.
pub fn energy(f: &FunctionTable, h: &Subspace) -> Result<f64> {
    if h.ambient_dim() != f.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            found: h.ambient_dim(),
        });
    }
    check_dense(h.codim(), DEFAULT_DENSE_LIMIT)?;
    let layout = CosetLayout::new(h)?;
    let size = 1usize << layout.dim();
    let squares = layout.map_cosets(|buf, m| {
        layout.gather(f, layout.representative(m), &mut buf[..size]);
        let mean = buf.iter().sum::<f64>() / size as f64;
        mean * mean
    });
    Ok(squares.iter().sum::<f64>() / squares.len() as f64)
}

/// How many characters each round adds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Schedule {
    /// One worst character per irregular coset.
    #[default]
    Batched,
    /// Only the largest witness over all cosets.
    SingleWitness,
}

impl Schedule {
    pub fn name(&self) -> &'static str {
        match self {
            Schedule::Batched => "batched",
            Schedule::SingleWitness => "single-witness",
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One refinement: the new subspace and the characters it annihilates.
#[derive(Clone, Debug, PartialEq)]
pub struct Refinement {
    pub subspace: Subspace,
    pub added: Vec<F2Vector>,
    /// The scan of the subspace that was refined.
    pub report: RegularityReport,
}

fn refine_from_report(h: &Subspace, report: RegularityReport, schedule: Schedule) -> Result<Refinement> {
    if report.is_regular() {
        return Err(Error::AlreadyRegular);
    }
    let added: Vec<F2Vector> = match schedule {
        Schedule::Batched => report
            .witnesses
            .iter()
            .map(|w| w.character.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
        Schedule::SingleWitness => {
            let best = report
                .witnesses
                .iter()
                .max_by(|a, b| {
                    a.value
                        .abs()
                        .total_cmp(&b.value.abs())
                        .then_with(|| b.character.cmp(&a.character))
                })
                .unwrap();
            vec![best.character.clone()]
        }
    };
    let chars = echelonize(h.ambient_dim(), &added)?;
    let subspace = h.intersect(&chars.orthogonal_complement())?;
    Ok(Refinement {
        subspace,
        added,
        report,
    })
}

/// One round of refinement; fails with [`Error::AlreadyRegular`] on a regular `H`.
pub fn refine_step(
    f: &FunctionTable,
    h: &Subspace,
    eps: Epsilon,
    schedule: Schedule,
) -> Result<Refinement> {
    let report = check_subspace_regularity(f, h, eps)?;
    refine_from_report(h, report, schedule)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Guards {
    /// Defaults to `ceil(1/eps^3)`.
    pub max_iterations: Option<u64>,
    pub max_index_log2: usize,
    pub schedule: Schedule,
}

impl Default for Guards {
    fn default() -> Self {
        Guards {
            max_iterations: None,
            max_index_log2: DEFAULT_DENSE_LIMIT as usize,
            schedule: Schedule::Batched,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Regular,
    IterationGuard,
    IndexGuard,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Regular => "regular",
            Status::IterationGuard => "iteration-guard",
            Status::IndexGuard => "index-guard",
        }
    }
}

/// State of one subspace visited by the search.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: u64,
    pub dim: usize,
    pub index_log2: usize,
    pub energy: f64,
    pub irregular_cosets: u64,
    /// Characters used to refine this subspace (empty for the last one).
    pub added: Vec<F2Vector>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionTrace {
    pub epsilon: Epsilon,
    pub schedule: Schedule,
    pub max_iterations: u64,
    pub max_index_log2: usize,
    pub iterations: Vec<IterationRecord>,
    pub final_subspace: Subspace,
    pub final_report: RegularityReport,
    pub status: Status,
}

impl DecompositionTrace {
    /// Number of refinements performed.
    pub fn refinements(&self) -> u64 {
        self.iterations.len() as u64 - 1
    }

    pub fn final_index_log2(&self) -> usize {
        self.final_subspace.codim()
    }

    /// `iteration,dim,index_log2,energy,irregular_cosets,added` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,dim,index_log2,energy,irregular_cosets,added\n");
        for r in &self.iterations {
            let added: Vec<String> = r
                .added
                .iter()
                .map(|c| c.to_index().map_or_else(|| c.to_string(), |i| i.to_string()))
                .collect();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.iteration,
                r.dim,
                r.index_log2,
                r.energy,
                r.irregular_cosets,
                added.join(" ")
            ));
        }
        out
    }
}

/// Refines from the whole space until the subspace is `eps`-regular or a guard trips.
pub fn find_regular_subspace(
    f: &FunctionTable,
    eps: Epsilon,
    guards: Guards,
) -> Result<DecompositionTrace> {
    if eps.numer() * 2 >= eps.denom() {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1/2), got {eps}"
        )));
    }
    let n = f.n();
    let max_iterations = guards.max_iterations.unwrap_or_else(|| eps.increment_budget());
    let gain_floor = eps.value().powi(3);
    let mut h = Subspace::full(n);
    let mut e = energy(f, &h)?;
    let mut iterations = Vec::new();
    loop {
        let report = check_subspace_regularity(f, &h, eps)?;
        let mut record = IterationRecord {
            iteration: iterations.len() as u64,
            dim: h.dim(),
            index_log2: h.codim(),
            energy: e,
            irregular_cosets: report.irregular_cosets(),
            added: Vec::new(),
        };
        let status = if report.is_regular() {
            Some(Status::Regular)
        } else if record.iteration >= max_iterations {
            Some(Status::IterationGuard)
        } else {
            None
        };
        if let Some(status) = status {
            iterations.push(record);
            return Ok(DecompositionTrace {
                epsilon: eps,
                schedule: guards.schedule,
                max_iterations,
                max_index_log2: guards.max_index_log2,
                iterations,
                final_subspace: h,
                final_report: report,
                status,
            });
        }
        let step = refine_from_report(&h, report, guards.schedule)?;
        if step.subspace.codim() > guards.max_index_log2 {
            record.added = step.added;
            iterations.push(record);
            return Ok(DecompositionTrace {
                epsilon: eps,
                schedule: guards.schedule,
                max_iterations,
                max_index_log2: guards.max_index_log2,
                iterations,
                final_subspace: h,
                final_report: step.report,
                status: Status::IndexGuard,
            });
        }
        let next = energy(f, &step.subspace)?;
        if next - e <= gain_floor {
            return Err(Error::ClaimViolation(format!(
                "energy grew by {} <= eps^3 when refining {h:?}",
                next - e
            )));
        }
        record.added = step.added;
        iterations.push(record);
        h = step.subspace;
        e = next;
    }
}
