//! JSON rendering. Objects are `serde_json` maps, which keep keys sorted, so
//! identical runs print identical bytes.

use f2reglab::decompose::DecompositionTrace;
use f2reglab::exact::{to_ratio, Fraction};
use f2reglab::fourier::RegularityReport;
use f2reglab::instance::{SpanningCheck, SpanningFamily};
use f2reglab::rounding::{DeviationRecord, RoundingReport};
use f2reglab::witness::{LowerBoundMode, LowerBoundSummary, WitnessCertificate};
use f2reglab::{Epsilon, F2Vector, Subspace};
use serde_json::{json, Value};

pub const SCHEMA: &str = "f2reglab/1";

/// Integer encoding up to 64 coordinates, bit string beyond.
pub fn vector(v: &F2Vector) -> Value {
    match v.to_index() {
        Some(i) => json!(i),
        None => json!(v.to_string()),
    }
}

pub fn subspace(h: &Subspace) -> Value {
    json!({
        "n": h.ambient_dim(),
        "dim": h.dim(),
        "basis": h.basis().iter().map(vector).collect::<Vec<_>>(),
    })
}

pub fn epsilon(e: Epsilon) -> Value {
    json!({ "exact": e.to_string(), "value": e.value() })
}

pub fn fraction(f: Fraction) -> Value {
    json!({ "exact": f.to_string(), "value": f.value() })
}

pub fn opt_fraction(f: Option<Fraction>) -> Value {
    f.map_or(Value::Null, fraction)
}

/// Coefficient as `"1/4"` when it sits on the grid `(1/scale) Z`, else `null`.
pub fn exact_value(value: f64, scale: Option<u64>) -> Value {
    to_ratio(value, scale).map_or(Value::Null, |r| json!(r.to_string()))
}

pub fn regularity(r: &RegularityReport, scale: Option<u64>) -> Value {
    json!({
        "subspace": subspace(&r.subspace),
        "epsilon": epsilon(r.epsilon),
        "regular": r.is_regular(),
        "fraction": r.regular_fraction(),
        "regular_cosets": r.regular_cosets,
        "total_cosets": r.total_cosets,
        "irregular_cosets": r.irregular_cosets(),
        "witnesses": r.witnesses.iter().map(|w| json!({
            "representative": vector(&w.representative),
            "character": vector(&w.character),
            "value": w.value,
            "exact": exact_value(w.value, scale),
        })).collect::<Vec<_>>(),
    })
}

pub fn certificate(c: &WitnessCertificate) -> Value {
    let coefficients: Vec<Value> = c
        .cosets
        .iter()
        .map(|r| r.exact.map_or(json!(r.coefficient), |x| json!(x.to_string())))
        .collect();
    let gammas: Vec<&F2Vector> = c.cosets.iter().map(|r| &r.gamma).collect();
    let common_gamma = gammas
        .first()
        .filter(|g| gammas.iter().all(|x| x == *g))
        .map_or(Value::Null, |g| vector(g));
    json!({
        "subspace": subspace(&c.subspace),
        "epsilon": epsilon(c.epsilon),
        "s": c.s,
        "block": c.block,
        "active_vector": vector(&c.active_vector),
        "bad": fraction(c.bad),
        "bad_bound_holds": c.bad_bound_holds(),
        "gamma": common_gamma,
        "coefficients": coefficients,
        "cosets": c.cosets.iter().map(|r| json!({
            "representative": vector(&r.representative),
            "gamma": vector(&r.gamma),
            "trivial": r.trivial,
            "coefficient": r.coefficient,
            "exact": r.exact.map_or(Value::Null, |x| json!(x.to_string())),
            "exceeds": r.exceeds,
        })).collect::<Vec<_>>(),
        "irregular": fraction(c.irregular),
        "certifies": c.certifies(),
        "w_classes": c.w_classes.iter().map(|w| json!({
            "representative": vector(&w.representative),
            "cosets": w.cosets,
            "average": w.average,
            "above": fraction(w.above_fraction()),
        })).collect::<Vec<_>>(),
        "max_w_average_error": c.max_w_average_error(),
        "corollary_holds": c.corollary_holds(),
    })
}

pub fn mode(m: LowerBoundMode) -> Value {
    match m {
        LowerBoundMode::Exhaustive => json!({ "kind": "exhaustive" }),
        LowerBoundMode::Structured {
            codim_max,
            random_per_dim,
            seed,
        } => json!({
            "kind": "structured",
            "codim_max": codim_max,
            "random_per_dim": random_per_dim,
            "seed": seed,
        }),
    }
}

const LIST_LIMIT: usize = 20;

fn subspace_list<'a>(hs: impl Iterator<Item = &'a Subspace>) -> Vec<Value> {
    hs.take(LIST_LIMIT).map(subspace).collect()
}

pub fn lowerbound(l: &LowerBoundSummary, tolerance: f64) -> Value {
    let nonzero = l.tested - l.zero_tested as u64;
    let irregular_nonzero = nonzero - l.regular.iter().filter(|h| !h.is_zero()).count() as u64;
    let claims = lowerbound_claims(l, tolerance);
    json!({
        "s": l.s,
        "n": l.n,
        "epsilon": epsilon(l.epsilon),
        "mode": mode(l.mode),
        "tested": l.tested,
        "zero_tested": l.zero_tested,
        "certified": l.certified,
        "summary": format!("{irregular_nonzero}/{nonzero} nonzero subspaces irregular"),
        "regular": subspace_list(l.regular.iter()),
        "regular_count": l.regular.len(),
        "uncertified": subspace_list(l.uncertified.iter()),
        "uncertified_count": l.uncertified.len(),
        "min_irregular": opt_fraction(l.min_irregular),
        "max_bad": fraction(l.max_bad),
        "bad_violation_count": l.bad_violations.len(),
        "bad_violations": l.bad_violations.iter().take(LIST_LIMIT).map(|(h, f)| json!({
            "subspace": subspace(h),
            "bad": fraction(*f),
        })).collect::<Vec<_>>(),
        "max_w_average_error": l.max_w_average_error,
        "min_corollary": opt_fraction(l.min_corollary),
        "corollary_violation_count": l.corollary_violations.len(),
        "corollary_violations": subspace_list(l.corollary_violations.iter()),
        "claims": claims,
    })
}

/// Per-claim verdicts for a lower-bound run.
pub fn lowerbound_claims(l: &LowerBoundSummary, tolerance: f64) -> Value {
    json!({
        "only_zero_regular": l.lemma_holds(),
        "bad_fraction_at_most_three_quarters": l.bad_violations.is_empty(),
        "w_average_identity": l.max_w_average_error <= tolerance,
        "corollary": l.corollary_violations.is_empty(),
    })
}

pub fn spanning_check(c: &SpanningCheck) -> Value {
    json!({
        "ok": c.ok,
        "incidence": c.incidence,
        "count": c.count,
        "worst_hyperplane": vector(&c.worst_hyperplane),
        "sampled_hyperplanes": c.sampled,
    })
}

pub fn spanning_family(f: &SpanningFamily) -> Value {
    json!({
        "attempt": f.attempt,
        "check": spanning_check(&f.check),
        "vectors": f.vectors.iter().map(vector).collect::<Vec<_>>(),
    })
}

pub fn trace(t: &DecompositionTrace, scale_of: impl Fn(usize) -> Option<u64>) -> Value {
    json!({
        "epsilon": epsilon(t.epsilon),
        "schedule": t.schedule.name(),
        "status": t.status.name(),
        "max_iterations": t.max_iterations,
        "max_index_log2": t.max_index_log2,
        "refinements": t.refinements(),
        "final_index_log2": t.final_index_log2(),
        "final_subspace": subspace(&t.final_subspace),
        "final_report": regularity(&t.final_report, scale_of(t.final_report.subspace.dim())),
        "iterations": t.iterations.iter().map(|r| json!({
            "iteration": r.iteration,
            "dim": r.dim,
            "index_log2": r.index_log2,
            "energy": r.energy,
            "irregular_cosets": r.irregular_cosets,
            "added": r.added.iter().map(vector).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

fn deviation(r: &DeviationRecord) -> Value {
    json!({
        "coset": {
            "subspace": subspace(r.coset.subspace()),
            "representative": vector(r.coset.representative()),
        },
        "eta": vector(&r.eta),
        "original": r.original,
        "rounded": r.rounded,
        "deviation": r.deviation,
        "sampled": r.sampled,
    })
}

pub fn rounding(r: &RoundingReport) -> Value {
    let mut worst: Vec<&DeviationRecord> = r.records.iter().collect();
    worst.sort_by(|a, b| b.deviation.total_cmp(&a.deviation));
    json!({
        "tau": epsilon(r.tau),
        "n": r.n,
        "size_threshold": r.size_threshold,
        "min_dim": r.min_dim,
        "tested": r.records.len(),
        "max_deviation": r.max_deviation,
        "mean_deviation": r.mean_deviation(),
        "exceedances": r.exceedances,
        "hoeffding_log10": r.hoeffding_log10,
        "union_bound_log2": r.union_bound_log2,
        "worst": worst.into_iter().take(LIST_LIMIT).map(deviation).collect::<Vec<_>>(),
    })
}

/// Pretty JSON with a trailing newline.
pub fn render(command: &str, mut body: Value) -> String {
    if let Value::Object(map) = &mut body {
        map.insert("schema".into(), json!(SCHEMA));
        map.insert("command".into(), json!(command));
    }
    let mut s = serde_json::to_string_pretty(&body).expect("values are finite");
    s.push('\n');
    s
}
