//! Irregularity certificates for the lower-bound construction.
//!
//! For a nonzero subspace `H`, let `i` be the first block on which some element
//! of `H` is nonzero. Every element of `H` vanishes on blocks `1..i`, so the
//! prefix `(g^1, ..., g^{i-1})` is constant on each coset `H + g`, and so is
//! the character `gamma_g` that carries `xi_i(prefix)` in block `i` and zeros
//! elsewhere. A coset is a witness when `gamma_g` is not in `H^perp` and the
//! coefficient of `f|_{H+g}` at `gamma_g` exceeds `eps`.
//!
//! `W` is the span of the coordinates in blocks `i+1..s`. Since `gamma` only
//! depends on the prefix, it is constant on each class `g + H + W`, and the
//! average coefficient over the `H`-cosets of such a class is exactly `1/(2s)`.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{self, Epsilon, Fraction};
use crate::fourier::{regularity_scan, restricted_coefficient, CosetLayout, FunctionTable};
use crate::gf2::{
    check_dense, echelonize, enumerate_all_subspaces, random_subspace, AffineSubspace,
    BlockStructure, F2Vector, Subspace, SubspacesOfDim,
};
use crate::instance::Instance;
use crate::rng::{self, Purpose};

/// Tolerance for the exact identity `E_w coefficient = 1/(2s)`.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// The first block touched by `H`, with a basis vector realizing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActiveBlock {
    pub block: usize,
    pub vector: F2Vector,
}

pub fn minimal_active_block(h: &Subspace, blocks: &BlockStructure) -> Result<ActiveBlock> {
    if h.ambient_dim() != blocks.n() {
        return Err(Error::DimensionMismatch {
            expected: blocks.n(),
            found: h.ambient_dim(),
        });
    }
    // Pivots are lowest set bits and increase down the basis, so the first row
    // reaches the earliest coordinate of any element of H.
    let first = h.basis().first().ok_or(Error::ZeroSubspace)?;
    let pos = first.lowest_set_bit().expect("basis rows are nonzero");
    Ok(ActiveBlock {
        block: blocks.block_of(pos),
        vector: first.clone(),
    })
}

/// `gamma_g`: `xi_i` of the prefix of `g` placed in block `i`, zero elsewhere.
pub fn gamma_character(inst: &Instance, g: &F2Vector, i: usize) -> Result<F2Vector> {
    if g.len() != inst.n() {
        return Err(Error::DimensionMismatch {
            expected: inst.n(),
            found: g.len(),
        });
    }
    let xi = inst.xi.xi(i, inst.prefix_index(i, g));
    let mut gamma = F2Vector::zero(inst.n());
    gamma.set_slice(inst.blocks.prefix_len(i - 1), xi);
    Ok(gamma)
}

/// `|B| / 2^n` with `B = { g : gamma_g in H^perp }`, by scanning prefixes.
pub fn bad_set_fraction(inst: &Instance, h: &Subspace) -> Result<Fraction> {
    let i = minimal_active_block(h, &inst.blocks)?.block;
    let start = inst.blocks.prefix_len(i - 1);
    let d = inst.blocks.dim(i);
    let restricted: Vec<F2Vector> = h.basis().iter().map(|b| b.slice(start, d)).collect();
    let entries = &inst.xi.blocks[i - 1].entries;
    let bad = entries
        .iter()
        .filter(|xi| restricted.iter().all(|b| !b.dot(xi)))
        .count();
    Ok(Fraction::new(bad as u64, entries.len() as u64))
}

/// As [`bad_set_fraction`], failing when the fraction exceeds 3/4.
pub fn bad_fraction(inst: &Instance, h: &Subspace) -> Result<Fraction> {
    let bad = bad_set_fraction(inst, h)?;
    if bad.exceeds(3, 4) {
        return Err(Error::ClaimViolation(format!(
            "bad set of {h:?} has density {bad} > 3/4"
        )));
    }
    Ok(bad)
}

/// Basis of `W` for active block `i`: unit vectors of blocks `i+1..s`.
fn w_basis(blocks: &BlockStructure, i: usize) -> Vec<F2Vector> {
    (blocks.prefix_len(i) + 1..=blocks.n())
        .map(|c| F2Vector::unit(blocks.n(), c))
        .collect()
}

/// `gamma_g` and the coefficient of `f|_{H+g+w}` at it, for every `w in W`.
fn w_translate_coefficients(inst: &Instance, h: &Subspace, g: &F2Vector) -> Result<Vec<f64>> {
    let f = inst.table()?;
    let i = minimal_active_block(h, &inst.blocks)?.block;
    let gamma = gamma_character(inst, g, i)?;
    if h.annihilated_by(&gamma) {
        return Err(Error::Precondition(format!(
            "gamma_g = {gamma} lies in H^perp"
        )));
    }
    let w = w_basis(&inst.blocks, i);
    check_dense(w.len(), 26)?;
    let w_space = echelonize(inst.n(), &w)?;
    let mut memo: HashMap<F2Vector, f64> = HashMap::new();
    w_space
        .elements(26)?
        .into_iter()
        .map(|w| {
            let coset = AffineSubspace::new(h.clone(), &(g ^ &w))?;
            if let Some(&v) = memo.get(coset.representative()) {
                return Ok(v);
            }
            let v = restricted_coefficient(f, &coset, &gamma)?;
            memo.insert(coset.representative().clone(), v);
            Ok(v)
        })
        .collect()
}

/// `E_{w in W} [ coefficient of f|_{H+g+w} at gamma_g ]`, which equals `1/(2s)`.
pub fn w_average_coefficient(inst: &Instance, h: &Subspace, g: &F2Vector) -> Result<f64> {
    let values = w_translate_coefficients(inst, h, g)?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Share of `w in W` whose coefficient exceeds `1/(4s)`; fails unless that
/// share itself exceeds `1/(4s)`.
pub fn corollary_fraction(inst: &Instance, h: &Subspace, g: &F2Vector) -> Result<Fraction> {
    let values = w_translate_coefficients(inst, h, g)?;
    let threshold = Epsilon::new(1, 4 * inst.s() as i64)?;
    let scale = inst.table()?.coefficient_scale(h.dim());
    let above = values
        .iter()
        .filter(|&&v| threshold.exceeded_by(v, scale))
        .count() as u64;
    let frac = Fraction::new(above, values.len() as u64);
    if !frac.exceeds(1, 4 * inst.s() as u64) {
        return Err(Error::ClaimViolation(format!(
            "only {frac} of the W-translates of H + {g} exceed 1/(4s)"
        )));
    }
    Ok(frac)
}

/// One coset of `H` in a certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct CosetRecord {
    pub representative: F2Vector,
    pub gamma: F2Vector,
    /// `gamma` lies in `H^perp` (the coset is in the bad set).
    pub trivial: bool,
    pub coefficient: f64,
    /// The coefficient as a rational, when the table has a known grid.
    pub exact: Option<Ratio<i128>>,
    /// Nontrivial and strictly above `eps`.
    pub exceeds: bool,
}

/// One class `g + H + W` with nontrivial `gamma`.
#[derive(Clone, Debug, PartialEq)]
pub struct WClass {
    pub representative: F2Vector,
    /// Number of `H`-cosets in the class.
    pub cosets: u64,
    pub average: f64,
    /// Cosets whose coefficient exceeds `1/(4s)`.
    pub above: u64,
}

impl WClass {
    pub fn above_fraction(&self) -> Fraction {
        Fraction::new(self.above, self.cosets)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessCertificate {
    pub subspace: Subspace,
    pub epsilon: Epsilon,
    pub s: usize,
    pub block: usize,
    pub active_vector: F2Vector,
    /// `|B| / 2^n` from the prefix scan.
    pub bad: Fraction,
    /// Every coset, in increasing representative order.
    pub cosets: Vec<CosetRecord>,
    /// Cosets with `exceeds`, over all cosets.
    pub irregular: Fraction,
    pub w_classes: Vec<WClass>,
}

impl WitnessCertificate {
    /// More than an `eps` share of cosets are witnesses, so `H` is not `eps`-regular.
    pub fn certifies(&self) -> bool {
        self.epsilon
            .fraction_exceeds(self.irregular.num, self.irregular.den)
    }

    pub fn bad_bound_holds(&self) -> bool {
        self.bad.at_most(3, 4)
    }

    /// Largest `|average - 1/(2s)|` over the nontrivial `W`-classes.
    pub fn max_w_average_error(&self) -> f64 {
        let target = 1.0 / (2 * self.s) as f64;
        self.w_classes
            .iter()
            .map(|c| (c.average - target).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_corollary_fraction(&self) -> Option<Fraction> {
        self.w_classes
            .iter()
            .map(WClass::above_fraction)
            .reduce(Fraction::min)
    }

    /// Every nontrivial class has more than `1/(4s)` of its cosets above `1/(4s)`.
    pub fn corollary_holds(&self) -> bool {
        self.w_classes
            .iter()
            .all(|c| c.above_fraction().exceeds(1, 4 * self.s as u64))
    }
}

/// Echelon rows over `u64`, for reducing modulo `H + W` in bulk.
struct DenseEchelon(Vec<(u32, u64)>);

impl DenseEchelon {
    fn new(s: &Subspace) -> Self {
        DenseEchelon(
            s.basis_indices()
                .unwrap()
                .into_iter()
                .map(|b| (b.trailing_zeros(), b))
                .collect(),
        )
    }

    fn reduce(&self, mut x: u64) -> u64 {
        for &(p, row) in &self.0 {
            if (x >> p) & 1 == 1 {
                x ^= row;
            }
        }
        x
    }
}

/// Builds the certificate without judging it.
pub fn scan_witnesses(inst: &Instance, h: &Subspace, eps: Epsilon) -> Result<WitnessCertificate> {
    let f = inst.table()?;
    let active = minimal_active_block(h, &inst.blocks)?;
    let i = active.block;
    let n = inst.n();
    let prefix_len = inst.blocks.prefix_len(i - 1);
    let prefix_mask = (1u64 << prefix_len) - 1;
    let layout = CosetLayout::new(h)?;
    if layout.basis.iter().any(|b| b & prefix_mask != 0) {
        return Err(Error::ClaimViolation(format!(
            "{h:?} has an element touching a block before {i}"
        )));
    }
    let xi: Vec<u64> = inst.xi.blocks[i - 1]
        .entries
        .iter()
        .map(|v| v.to_index().unwrap() << prefix_len)
        .collect();
    let scale = f.coefficient_scale(h.dim());
    let hw = DenseEchelon::new(&h.sum(&echelonize(n, &w_basis(&inst.blocks, i))?)?);
    let size = 1u64 << h.dim();

    let rows = layout.map_cosets(|_, m| {
        let r = layout.representative(m);
        let gamma = xi[(r & prefix_mask) as usize];
        let trivial = layout.basis.iter().all(|b| (b & gamma).count_ones() & 1 == 0);
        let mut x = r;
        let mut sum = 0.0;
        for c in 0..size {
            if c > 0 {
                x ^= layout.basis[c.trailing_zeros() as usize];
            }
            let v = f.get(x);
            sum += if (x & gamma).count_ones() & 1 == 1 { -v } else { v };
        }
        (r, gamma, trivial, sum / size as f64)
    });

    let threshold = Epsilon::new(1, 4 * inst.s() as i64)?;
    let mut classes: BTreeMap<u64, (u64, f64, u64)> = BTreeMap::new();
    let mut cosets = Vec::with_capacity(rows.len());
    let mut irregular = 0u64;
    let mut trivial_count = 0u64;
    for (r, gamma, trivial, coefficient) in rows {
        let exceeds = !trivial && eps.exceeded_by(coefficient, scale);
        irregular += exceeds as u64;
        if trivial {
            trivial_count += 1;
        } else {
            let entry = classes.entry(hw.reduce(r)).or_insert((0, 0.0, 0));
            entry.0 += 1;
            entry.1 += coefficient;
            entry.2 += threshold.exceeded_by(coefficient, scale) as u64;
        }
        cosets.push(CosetRecord {
            representative: F2Vector::from_index(n, r)?,
            gamma: F2Vector::from_index(n, gamma)?,
            trivial,
            coefficient,
            exact: exact::to_ratio(coefficient, scale),
            exceeds,
        });
    }
    let total = cosets.len() as u64;
    let bad = bad_set_fraction(inst, h)?;
    // B is a union of prefix classes, so both counts describe the same density.
    if trivial_count as u128 * bad.den as u128 != bad.num as u128 * total as u128 {
        return Err(Error::ClaimViolation(format!(
            "bad-set density {bad} disagrees with {trivial_count}/{total} trivial cosets"
        )));
    }
    let w_classes = classes
        .into_iter()
        .map(|(rep, (count, sum, above))| {
            Ok(WClass {
                representative: F2Vector::from_index(n, rep)?,
                cosets: count,
                average: sum / count as f64,
                above,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WitnessCertificate {
        subspace: h.clone(),
        epsilon: eps,
        s: inst.s(),
        block: i,
        active_vector: active.vector,
        bad,
        cosets,
        irregular: Fraction::new(irregular, total),
        w_classes,
    })
}

/// Certificate that `H` is not `eps`-regular; fails if the witnesses fall short.
pub fn witness_scan(inst: &Instance, h: &Subspace, eps: Epsilon) -> Result<WitnessCertificate> {
    let cert = scan_witnesses(inst, h, eps)?;
    if !cert.certifies() {
        return Err(Error::ClaimViolation(format!(
            "only {} of the cosets of {h:?} are witnesses at eps = {eps}",
            cert.irregular
        )));
    }
    Ok(cert)
}

/// What one subspace contributed to a lower-bound run.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceOutcome {
    pub subspace: Subspace,
    /// Verdict of the full spectral scan.
    pub regular: bool,
    pub irregular_cosets: u64,
    pub total_cosets: u64,
    /// `None` for the zero subspace.
    pub certificate: Option<CertificateSummary>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateSummary {
    pub block: usize,
    pub certified: bool,
    pub irregular: Fraction,
    pub bad: Fraction,
    pub max_w_average_error: f64,
    pub min_corollary: Option<Fraction>,
    pub corollary_holds: bool,
}

/// Full spectral scan plus witness scan, cross-checked against each other:
/// every witness coefficient must reappear, in absolute value, at the class of
/// `gamma` in the coset spectrum, and every witness coset must be irregular.
pub fn certify_subspace(inst: &Instance, h: &Subspace, eps: Epsilon) -> Result<SubspaceOutcome> {
    let f: &FunctionTable = inst.table()?;
    if h.is_zero() {
        let report = crate::fourier::check_subspace_regularity(f, h, eps)?;
        return Ok(SubspaceOutcome {
            subspace: h.clone(),
            regular: report.is_regular(),
            irregular_cosets: report.irregular_cosets(),
            total_cosets: report.total_cosets,
            certificate: None,
        });
    }
    let cert = scan_witnesses(inst, h, eps)?;
    let basis = h.basis_indices().unwrap();
    let gammas: Vec<u64> = cert
        .cosets
        .iter()
        .map(|c| c.gamma.to_index().unwrap())
        .collect();
    let (report, probes) = regularity_scan(f, h, eps, |r, spectrum| {
        let m = cert_index(&cert, r);
        let gamma = gammas[m];
        let t = basis
            .iter()
            .enumerate()
            .fold(0usize, |t, (j, &b)| t | ((((b & gamma).count_ones() & 1) as usize) << j));
        spectrum[t].abs()
    })?;
    for (record, from_spectrum) in cert.cosets.iter().zip(&probes) {
        if (record.coefficient.abs() - from_spectrum).abs() > IDENTITY_TOLERANCE {
            return Err(Error::ClaimViolation(format!(
                "coefficient at gamma for coset {} of {h:?}: direct {} vs spectrum {}",
                record.representative, record.coefficient, from_spectrum
            )));
        }
    }
    let irregular_reps: std::collections::HashSet<&F2Vector> =
        report.witnesses.iter().map(|w| &w.representative).collect();
    if let Some(missing) = cert
        .cosets
        .iter()
        .find(|c| c.exceeds && !irregular_reps.contains(&c.representative))
    {
        return Err(Error::ClaimViolation(format!(
            "witness coset {} of {h:?} is missing from the regularity report",
            missing.representative
        )));
    }
    Ok(SubspaceOutcome {
        subspace: h.clone(),
        regular: report.is_regular(),
        irregular_cosets: report.irregular_cosets(),
        total_cosets: report.total_cosets,
        certificate: Some(CertificateSummary {
            block: cert.block,
            certified: cert.certifies(),
            irregular: cert.irregular,
            bad: cert.bad,
            max_w_average_error: cert.max_w_average_error(),
            min_corollary: cert.min_corollary_fraction(),
            corollary_holds: cert.corollary_holds(),
        }),
    })
}

/// Position of the coset with representative `r` (cosets are listed by increasing representative).
fn cert_index(cert: &WitnessCertificate, r: u64) -> usize {
    cert.cosets
        .binary_search_by_key(&r, |c| c.representative.to_index().unwrap())
        .expect("representatives agree between scans")
}

/// Which subspaces a lower-bound run visits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowerBoundMode {
    /// Every subspace; needs `n <= 4`.
    Exhaustive,
    /// `{0}`, every subspace of codimension `<= codim_max`, and
    /// `random_per_dim` random subspaces of each dimension `1..n`.
    Structured {
        codim_max: usize,
        random_per_dim: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundSummary {
    pub s: usize,
    pub n: usize,
    pub epsilon: Epsilon,
    pub mode: LowerBoundMode,
    pub tested: u64,
    /// Subspaces whose full scan came out regular (only `{0}` when the lemma holds).
    pub regular: Vec<Subspace>,
    /// Nonzero subspaces whose witness scan fell short.
    pub uncertified: Vec<Subspace>,
    pub zero_tested: bool,
    pub certified: u64,
    pub min_irregular: Option<Fraction>,
    pub max_bad: Fraction,
    /// Distinct subspaces with bad-set density above 3/4.
    pub bad_violations: BTreeMap<Subspace, Fraction>,
    pub max_w_average_error: f64,
    pub min_corollary: Option<Fraction>,
    pub corollary_violations: Vec<Subspace>,
}

impl LowerBoundSummary {
    /// Only `{0}` is regular, and every nonzero subspace is certified.
    pub fn lemma_holds(&self) -> bool {
        self.uncertified.is_empty() && self.regular.iter().all(Subspace::is_zero)
    }

    fn absorb(&mut self, o: SubspaceOutcome) {
        self.tested += 1;
        if o.subspace.is_zero() {
            self.zero_tested = true;
        }
        if o.regular {
            self.regular.push(o.subspace.clone());
        }
        let Some(c) = o.certificate else {
            return;
        };
        if c.certified {
            self.certified += 1;
            self.min_irregular = Some(match self.min_irregular {
                Some(m) => m.min(c.irregular),
                None => c.irregular,
            });
        } else {
            self.uncertified.push(o.subspace.clone());
        }
        self.max_bad = self.max_bad.max(c.bad);
        if c.bad.exceeds(3, 4) {
            self.bad_violations.insert(o.subspace.clone(), c.bad);
        }
        self.max_w_average_error = self.max_w_average_error.max(c.max_w_average_error);
        if let Some(mc) = c.min_corollary {
            self.min_corollary = Some(match self.min_corollary {
                Some(m) => m.min(mc),
                None => mc,
            });
        }
        if !c.corollary_holds {
            self.corollary_violations.push(o.subspace);
        }
    }
}

fn structured_family(
    n: usize,
    codim_max: usize,
    random_per_dim: usize,
    seed: u64,
) -> Result<impl Iterator<Item = Result<Subspace>>> {
    let codim_max = codim_max.min(n);
    let duals = (0..=codim_max)
        .map(|c| SubspacesOfDim::new(n, c))
        .collect::<Result<Vec<_>>>()?;
    let by_codim = duals
        .into_iter()
        .flatten()
        .map(|dual| Ok(dual.orthogonal_complement()));
    let zero = (codim_max < n).then(|| Ok(Subspace::zero(n)));
    let random = (1..n).flat_map(move |dim| {
        let mut rng = rng::stream(seed, Purpose::RandomSubspaces, dim as u64);
        (0..random_per_dim).map(move |_| random_subspace(n, dim, &mut rng))
    });
    Ok(zero.into_iter().chain(by_codim).chain(random))
}

/// The subspaces of `F2^n` that `mode` visits, in a fixed order.
pub fn subspace_family(
    n: usize,
    mode: LowerBoundMode,
) -> Result<Box<dyn Iterator<Item = Result<Subspace>>>> {
    Ok(match mode {
        LowerBoundMode::Exhaustive => Box::new(enumerate_all_subspaces(n)?.map(Ok)),
        LowerBoundMode::Structured {
            codim_max,
            random_per_dim,
            seed,
        } => Box::new(structured_family(n, codim_max, random_per_dim, seed)?),
    })
}

/// Runs [`certify_subspace`] over the family chosen by `mode`.
///
/// When `eps <= 1/(16s)` any regular nonzero subspace or failed certificate is
/// an error naming it; for larger `eps` the summary just reports them.
pub fn exhaustive_lowerbound_check(
    inst: &Instance,
    eps: Epsilon,
    mode: LowerBoundMode,
) -> Result<LowerBoundSummary> {
    let n = inst.n();
    inst.table()?;
    let family = subspace_family(n, mode)?;
    let mut summary = LowerBoundSummary {
        s: inst.s(),
        n,
        epsilon: eps,
        mode,
        tested: 0,
        regular: Vec::new(),
        uncertified: Vec::new(),
        zero_tested: false,
        certified: 0,
        min_irregular: None,
        max_bad: Fraction::new(0, 1),
        bad_violations: BTreeMap::new(),
        max_w_average_error: 0.0,
        min_corollary: None,
        corollary_violations: Vec::new(),
    };
    const CHUNK: usize = 4096;
    let mut family = family.peekable();
    while family.peek().is_some() {
        let chunk = family.by_ref().take(CHUNK).collect::<Result<Vec<_>>>()?;
        let outcomes = chunk
            .par_iter()
            .map(|h| certify_subspace(inst, h, eps))
            .collect::<Result<Vec<_>>>()?;
        for o in outcomes {
            summary.absorb(o);
        }
    }
    let strict = eps.ratio() <= inst.epsilon_max().ratio();
    if strict && !summary.lemma_holds() {
        let culprit = summary
            .regular
            .iter()
            .find(|h| !h.is_zero())
            .or(summary.uncertified.first())
            .unwrap();
        return Err(Error::ClaimViolation(format!(
            "{culprit:?} escapes the lower bound at eps = {eps}"
        )));
    }
    Ok(summary)
}
