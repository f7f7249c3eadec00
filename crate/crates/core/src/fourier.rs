//! Fourier analysis of bounded functions on F2^n and on its affine subspaces.
//!
//! For a coset `A = H + r` with canonical basis `b_1, ..., b_k` of `H`, a point
//! of `A` is `x(c) = r + sum_j c_j b_j` for `c` in F2^k. A character `eta`
//! restricted to `A` only depends on `t_j = <b_j, eta>`, and
//!
//! ```text
//! E_{x in A} f(x) (-1)^<x, eta> = (-1)^<r, eta> * E_c f(x(c)) (-1)^<c, t>
//! ```
//!
//! so the whole coset spectrum is one size-`2^k` Walsh-Hadamard transform. The
//! pattern `t` labels the class `eta + H^perp`; its canonical representative is
//! `eta` reduced modulo `H^perp`.

use std::ops::{Add, Sub};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::Epsilon;
use crate::gf2::{check_dense, AffineSubspace, F2Vector, Subspace};

/// Below this many table entries per scan, coset work stays on one thread.
const PARALLEL_THRESHOLD: usize = 1 << 14;

/// Largest ambient dimension a dense table may have.
pub const MAX_TABLE_DIM: usize = 40;

/// In-place unnormalized Walsh-Hadamard butterfly. `data.len()` must be a power of two.
pub fn wht_in_place<T>(data: &mut [T])
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    let len = data.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for chunk in data.chunks_exact_mut(2 * h) {
            let (lo, hi) = chunk.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Dense table of a function `f: F2^n -> [0, 1]`, indexed by integer encoding.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionTable {
    n: usize,
    values: Vec<f64>,
    grid: Option<u64>,
}

impl FunctionTable {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > MAX_TABLE_DIM {
            return Err(Error::DenseLimit {
                requested: n,
                limit: MAX_TABLE_DIM as u32,
            });
        }
        if values.len() != 1usize << n {
            return Err(Error::InvalidParameter(format!(
                "table for n = {n} needs {} values, got {}",
                1u64 << n,
                values.len()
            )));
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::ValueOutOfRange { index, value });
        }
        Ok(FunctionTable {
            n,
            values,
            grid: None,
        })
    }

    pub fn from_fn(n: usize, limit: u32, f: impl Fn(u64) -> f64 + Sync + Send) -> Result<Self> {
        check_dense(n, limit)?;
        let values = (0..1u64 << n).into_par_iter().map(&f).collect();
        Self::new(n, values)
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(n, vec![c; 1 << n])
    }

    /// Declares every value to be a multiple of `1/grid`, enabling exact comparisons.
    pub fn with_grid(mut self, grid: u64) -> Result<Self> {
        if let Some((index, &value)) = self
            .values
            .iter()
            .enumerate()
            .find(|(_, &v)| crate::exact::snap(v, Some(grid)).is_none())
        {
            return Err(Error::InvalidParameter(format!(
                "value {value} at index {index} is not a multiple of 1/{grid}"
            )));
        }
        self.grid = Some(grid);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> Option<u64> {
        self.grid
    }

    pub fn get(&self, x: u64) -> f64 {
        self.values[x as usize]
    }

    pub fn at(&self, x: &F2Vector) -> Result<f64> {
        self.check_vector(x)?;
        Ok(self.values[x.to_index().unwrap() as usize])
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn mean_square(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64
    }

    /// Grid of coefficients over a coset of dimension `k`: `grid * 2^k`.
    pub fn coefficient_scale(&self, k: usize) -> Option<u64> {
        self.grid.and_then(|g| g.checked_mul(1u64 << k))
    }

    fn check_vector(&self, x: &F2Vector) -> Result<()> {
        if x.len() != self.n {
            Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            })
        } else {
            Ok(())
        }
    }

    fn check_subspace(&self, h: &Subspace) -> Result<()> {
        if h.ambient_dim() != self.n {
            Err(Error::DimensionMismatch {
                expected: self.n,
                found: h.ambient_dim(),
            })
        } else {
            Ok(())
        }
    }
}

/// Full spectrum: entry `eta` is `E_x f(x) (-1)^<x, eta>`.
pub fn wht_full(f: &FunctionTable) -> Vec<f64> {
    let mut out = f.values.clone();
    wht_in_place(&mut out);
    let norm = 1.0 / out.len() as f64;
    out.iter_mut().for_each(|v| *v *= norm);
    out
}

fn parity(x: u64) -> bool {
    x.count_ones() & 1 == 1
}

fn sign(odd: bool) -> f64 {
    if odd {
        -1.0
    } else {
        1.0
    }
}

/// `(1/|A|) sum_{x in A} f(x) (-1)^<x, eta>`, by direct summation.
pub fn restricted_coefficient(f: &FunctionTable, a: &AffineSubspace, eta: &F2Vector) -> Result<f64> {
    f.check_subspace(a.subspace())?;
    f.check_vector(eta)?;
    let e = eta.to_index().unwrap();
    let basis = a.subspace().basis_indices().unwrap();
    let r = a.representative().to_index().unwrap();
    let mut x = r;
    let mut sum = 0.0;
    // Gray-code walk over the coset.
    for c in 0..1u64 << basis.len() {
        if c > 0 {
            x ^= basis[c.trailing_zeros() as usize];
        }
        sum += sign(parity(x & e)) * f.get(x);
    }
    Ok(sum / (1u64 << basis.len()) as f64)
}

/// Precomputed layout for scanning all cosets of one subspace.
pub(crate) struct CosetLayout {
    pub(crate) n: usize,
    pub(crate) basis: Vec<u64>,
    free: Vec<usize>,
    /// `span[c] = sum_j c_j b_j`.
    span: Vec<u64>,
    /// Canonical representative of the dual class with pattern `t`.
    pub(crate) class_reps: Vec<u64>,
    /// Nontrivial patterns ordered by their canonical representative.
    order: Vec<usize>,
}

impl CosetLayout {
    pub(crate) fn new(h: &Subspace) -> Result<Self> {
        let n = h.ambient_dim();
        if n > MAX_TABLE_DIM {
            return Err(Error::DenseLimit {
                requested: n,
                limit: MAX_TABLE_DIM as u32,
            });
        }
        let basis = h.basis_indices().unwrap();
        let pivots = h.pivots();
        let k = basis.len();
        let mut span = vec![0u64; 1 << k];
        for c in 1..span.len() {
            span[c] = span[c & (c - 1)] ^ basis[c.trailing_zeros() as usize];
        }
        let perp = h.orthogonal_complement();
        let perp_rows: Vec<(usize, u64)> = perp
            .basis_indices()
            .unwrap()
            .into_iter()
            .zip(perp.pivots())
            .map(|(b, p)| (p, b))
            .collect();
        let class_reps: Vec<u64> = (0..1usize << k)
            .map(|t| {
                let mut eta = 0u64;
                for (j, &p) in pivots.iter().enumerate() {
                    if (t >> j) & 1 == 1 {
                        eta |= 1 << p;
                    }
                }
                for &(p, row) in &perp_rows {
                    if (eta >> p) & 1 == 1 {
                        eta ^= row;
                    }
                }
                eta
            })
            .collect();
        let mut order: Vec<usize> = (1..1usize << k).collect();
        order.sort_by_key(|&t| class_reps[t]);
        Ok(CosetLayout {
            n,
            basis,
            free: h.free_positions(),
            span,
            class_reps,
            order,
        })
    }

    pub(crate) fn dim(&self) -> usize {
        self.basis.len()
    }

    pub(crate) fn coset_count(&self) -> u64 {
        1u64 << self.free.len()
    }

    /// Canonical representative of the `m`-th coset (increasing encoding).
    pub(crate) fn representative(&self, m: u64) -> u64 {
        let mut r = 0u64;
        for (k, &q) in self.free.iter().enumerate() {
            r |= ((m >> k) & 1) << q;
        }
        r
    }

    pub(crate) fn gather(&self, f: &FunctionTable, r: u64, buf: &mut [f64]) {
        for (slot, &h) in buf.iter_mut().zip(&self.span) {
            *slot = f.get(r ^ h);
        }
    }

    /// Fills `buf` with the unsigned spectrum `t -> E_c f(x(c)) (-1)^<c, t>`.
    pub(crate) fn spectrum(&self, f: &FunctionTable, r: u64, buf: &mut [f64]) {
        self.gather(f, r, buf);
        wht_in_place(buf);
        let norm = 1.0 / buf.len() as f64;
        buf.iter_mut().for_each(|v| *v *= norm);
    }

    /// Coefficient at the canonical representative of class `t`, sign included.
    pub(crate) fn signed(&self, r: u64, t: usize, unsigned: f64) -> f64 {
        sign(parity(r & self.class_reps[t])) * unsigned
    }

    /// Largest nontrivial coefficient; ties go to the smallest class representative.
    pub(crate) fn worst(&self, spectrum: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for &t in &self.order {
            let v = spectrum[t].abs();
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((t, v));
            }
        }
        best
    }

    /// Runs `work` on every coset index, in parallel when the scan is large.
    pub(crate) fn map_cosets<T, F>(&self, work: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut [f64], u64) -> T + Sync,
    {
        let size = 1usize << self.dim();
        if (1usize << self.n) < PARALLEL_THRESHOLD {
            let mut buf = vec![0.0; size];
            (0..self.coset_count()).map(|m| work(&mut buf, m)).collect()
        } else {
            (0..self.coset_count())
                .into_par_iter()
                .map_init(|| vec![0.0; size], |buf, m| work(buf, m))
                .collect()
        }
    }
}

/// One class of `F2^n / H^perp` with its coefficient on a coset.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassCoefficient {
    /// Canonical representative (reduced modulo `H^perp`).
    pub character: F2Vector,
    pub value: f64,
}

/// Spectrum of `f` restricted to one coset: one coefficient per dual class.
#[derive(Clone, Debug, PartialEq)]
pub struct CosetSpectrum {
    pub coset: AffineSubspace,
    /// Indexed by the pattern `t_j = <b_j, eta>`; entry 0 is the trivial class.
    pub classes: Vec<ClassCoefficient>,
}

impl CosetSpectrum {
    /// Trivial coefficient, i.e. the mean of `f` over the coset.
    pub fn mean(&self) -> f64 {
        self.classes[0].value
    }

    /// Coefficient at an arbitrary character `eta`, sign included.
    pub fn coefficient(&self, eta: &F2Vector) -> f64 {
        let t = self
            .coset
            .subspace()
            .basis()
            .iter()
            .enumerate()
            .fold(0usize, |t, (j, b)| t | ((b.dot(eta) as usize) << j));
        let class = &self.classes[t];
        let shift = &class.character ^ eta;
        sign(self.coset.representative().dot(&shift)) * class.value
    }

    pub fn nontrivial(&self) -> &[ClassCoefficient] {
        &self.classes[1..]
    }
}

/// Every coefficient of `f|_A`, via one transform of size `|A|`.
pub fn restricted_spectrum(f: &FunctionTable, a: &AffineSubspace) -> Result<CosetSpectrum> {
    f.check_subspace(a.subspace())?;
    let layout = CosetLayout::new(a.subspace())?;
    let r = a.representative().to_index().unwrap();
    let mut buf = vec![0.0; 1 << layout.dim()];
    layout.spectrum(f, r, &mut buf);
    let classes = buf
        .iter()
        .enumerate()
        .map(|(t, &v)| ClassCoefficient {
            character: F2Vector::from_index(f.n, layout.class_reps[t]).unwrap(),
            value: layout.signed(r, t, v),
        })
        .collect();
    Ok(CosetSpectrum {
        coset: a.clone(),
        classes,
    })
}

/// Verdict for one coset.
#[derive(Clone, Debug, PartialEq)]
pub struct CosetRegularity {
    pub is_regular: bool,
    /// Largest nontrivial coefficient; `None` when the coset is a single point.
    pub worst: Option<ClassCoefficient>,
}

/// Regular iff every nontrivial class coefficient has `|value| <= eps`.
pub fn check_coset_regularity(
    f: &FunctionTable,
    a: &AffineSubspace,
    eps: Epsilon,
) -> Result<CosetRegularity> {
    f.check_subspace(a.subspace())?;
    let layout = CosetLayout::new(a.subspace())?;
    let r = a.representative().to_index().unwrap();
    let mut buf = vec![0.0; 1 << layout.dim()];
    layout.spectrum(f, r, &mut buf);
    let scale = f.coefficient_scale(layout.dim());
    let worst = layout.worst(&buf).map(|(t, _)| ClassCoefficient {
        character: F2Vector::from_index(f.n, layout.class_reps[t]).unwrap(),
        value: layout.signed(r, t, buf[t]),
    });
    let is_regular = worst
        .as_ref()
        .is_none_or(|w| !eps.exceeded_by(w.value.abs(), scale));
    Ok(CosetRegularity { is_regular, worst })
}

/// An irregular coset with its worst character.
#[derive(Clone, Debug, PartialEq)]
pub struct CosetWitness {
    pub representative: F2Vector,
    pub character: F2Vector,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    pub subspace: Subspace,
    pub epsilon: Epsilon,
    pub total_cosets: u64,
    pub regular_cosets: u64,
    /// One entry per irregular coset, in increasing representative order.
    pub witnesses: Vec<CosetWitness>,
}

impl RegularityReport {
    /// At least `(1 - eps)` of the cosets are regular.
    pub fn is_regular(&self) -> bool {
        self.epsilon.majority(self.regular_cosets, self.total_cosets)
    }

    pub fn irregular_cosets(&self) -> u64 {
        self.total_cosets - self.regular_cosets
    }

    pub fn regular_fraction(&self) -> f64 {
        self.regular_cosets as f64 / self.total_cosets as f64
    }
}

/// Scans every coset of `h`, also handing each unsigned spectrum to `probe`.
pub(crate) fn regularity_scan<P, F>(
    f: &FunctionTable,
    h: &Subspace,
    eps: Epsilon,
    probe: F,
) -> Result<(RegularityReport, Vec<P>)>
where
    P: Send,
    F: Fn(u64, &[f64]) -> P + Sync,
{
    f.check_subspace(h)?;
    let layout = CosetLayout::new(h)?;
    let scale = f.coefficient_scale(layout.dim());
    let rows = layout.map_cosets(|buf, m| {
        let r = layout.representative(m);
        layout.spectrum(f, r, buf);
        let witness = layout
            .worst(buf)
            .filter(|&(_, v)| eps.exceeded_by(v, scale))
            .map(|(t, _)| (r, t, layout.signed(r, t, buf[t])));
        (witness, probe(r, buf))
    });
    let total_cosets = layout.coset_count();
    let mut witnesses = Vec::new();
    let mut probes = Vec::with_capacity(rows.len());
    for (w, p) in rows {
        if let Some((r, t, value)) = w {
            witnesses.push(CosetWitness {
                representative: F2Vector::from_index(f.n, r).unwrap(),
                character: F2Vector::from_index(f.n, layout.class_reps[t]).unwrap(),
                value,
            });
        }
        probes.push(p);
    }
    let report = RegularityReport {
        subspace: h.clone(),
        epsilon: eps,
        total_cosets,
        regular_cosets: total_cosets - witnesses.len() as u64,
        witnesses,
    };
    Ok((report, probes))
}

/// Checks every coset of `h` for `eps`-regularity.
pub fn check_subspace_regularity(
    f: &FunctionTable,
    h: &Subspace,
    eps: Epsilon,
) -> Result<RegularityReport> {
    regularity_scan(f, h, eps, |_, _| ()).map(|(report, _)| report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// The s = 2 construction in index order (index = x1 + 2 x2 + 4 x3).
    fn s2() -> FunctionTable {
        FunctionTable::new(3, vec![1.0, 0.5, 0.5, 0.5, 1.0, 0.0, 0.5, 0.0])
            .unwrap()
            .with_grid(2)
            .unwrap()
    }

    fn e(n: usize, j: usize) -> F2Vector {
        F2Vector::unit(n, j)
    }

    fn coset(n: usize, gens: &[u64], g: &str) -> AffineSubspace {
        AffineSubspace::new(
            Subspace::from_indices(n, gens).unwrap(),
            &F2Vector::from_bit_string(g).unwrap(),
        )
        .unwrap()
    }

    /// Quadratic-cost defining sum.
    fn naive_spectrum(f: &FunctionTable) -> Vec<f64> {
        let size = 1u64 << f.n();
        (0..size)
            .map(|eta| {
                (0..size)
                    .map(|x| sign(parity(x & eta)) * f.get(x))
                    .sum::<f64>()
                    / size as f64
            })
            .collect()
    }

    fn random_table(n: usize, rng: &mut impl Rng) -> FunctionTable {
        FunctionTable::new(n, (0..1 << n).map(|_| rng.gen::<f64>()).collect()).unwrap()
    }

    #[test]
    fn wht_examples() {
        let c = wht_full(&FunctionTable::constant(4, 0.3).unwrap());
        assert!((c[0] - 0.3).abs() < 1e-15);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-15));

        let delta = FunctionTable::new(2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(wht_full(&delta), vec![0.25; 4]);

        let spec = wht_full(&s2());
        assert_eq!(spec[0], 0.5);
        assert_eq!(spec[1], 0.25);
    }

    #[test]
    fn wht_matches_defining_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 0..=8 {
            let f = random_table(n, &mut rng);
            let fast = wht_full(&f);
            for (a, b) in fast.iter().zip(naive_spectrum(&f)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn integer_butterfly() {
        let mut v = vec![1i64, 0, 0, 0];
        wht_in_place(&mut v);
        assert_eq!(v, vec![1, 1, 1, 1]);
        wht_in_place(&mut v);
        assert_eq!(v, vec![4, 0, 0, 0]);
    }

    #[test]
    fn restricted_coefficient_examples() {
        let f = s2();
        let a = coset(3, &[1], "000");
        assert_eq!(restricted_coefficient(&f, &a, &F2Vector::zero(3)).unwrap(), 0.75);
        assert_eq!(restricted_coefficient(&f, &a, &e(3, 1)).unwrap(), 0.25);
        let a = coset(3, &[1], "010");
        assert_eq!(restricted_coefficient(&f, &a, &e(3, 1)).unwrap(), 0.0);
    }

    #[test]
    fn restricted_spectrum_examples() {
        let f = s2();
        let point = AffineSubspace::new(Subspace::zero(3), &F2Vector::from_index(3, 5).unwrap())
            .unwrap();
        let sp = restricted_spectrum(&f, &point).unwrap();
        assert_eq!(sp.classes.len(), 1);
        assert_eq!(sp.mean(), 0.0);

        let full = AffineSubspace::new(Subspace::full(3), &F2Vector::zero(3)).unwrap();
        let sp = restricted_spectrum(&f, &full).unwrap();
        let direct = wht_full(&f);
        for c in &sp.classes {
            let idx = c.character.to_index().unwrap() as usize;
            assert!((c.value - direct[idx]).abs() < 1e-15);
        }

        let a = coset(3, &[1], "001");
        let sp = restricted_spectrum(&f, &a).unwrap();
        assert_eq!(sp.mean(), 0.5);
        assert_eq!(sp.classes[1].character, e(3, 1));
        assert_eq!(sp.classes[1].value, 0.5);
    }

    #[test]
    fn coset_regularity_examples() {
        let eps = Epsilon::new(1, 32).unwrap();
        let constant = FunctionTable::constant(3, 0.7).unwrap();
        let a = coset(3, &[1, 6], "000");
        assert!(check_coset_regularity(&constant, &a, eps).unwrap().is_regular);

        let verdict = check_coset_regularity(&s2(), &coset(3, &[1], "000"), eps).unwrap();
        assert!(!verdict.is_regular);
        let worst = verdict.worst.unwrap();
        assert_eq!(worst.character, e(3, 1));
        assert_eq!(worst.value, 0.25);

        let full = AffineSubspace::new(Subspace::full(3), &F2Vector::zero(3)).unwrap();
        let verdict = check_coset_regularity(&s2(), &full, eps).unwrap();
        assert!(!verdict.is_regular);
        assert!(verdict.worst.unwrap().value.abs() >= 0.25);
    }

    #[test]
    fn worst_ties_break_to_smallest_representative() {
        // equal coefficients 1/4 at e1 and e2
        let f = FunctionTable::from_fn(2, 26, |x| {
            0.5 + 0.25 * sign(x & 1 == 1) + 0.25 * sign(x & 2 == 2)
        })
        .unwrap();
        let full = AffineSubspace::new(Subspace::full(2), &F2Vector::zero(2)).unwrap();
        let verdict = check_coset_regularity(&f, &full, Epsilon::new(1, 10).unwrap()).unwrap();
        assert_eq!(verdict.worst.unwrap().character, e(2, 1));
    }

    #[test]
    fn subspace_regularity_examples() {
        let eps = Epsilon::new(1, 32).unwrap();
        let f = s2();

        let report = check_subspace_regularity(&f, &Subspace::zero(3), eps).unwrap();
        assert!(report.is_regular());
        assert_eq!(report.total_cosets, 8);
        assert!(report.witnesses.is_empty());

        let report = check_subspace_regularity(&f, &Subspace::from_indices(3, &[1]).unwrap(), eps)
            .unwrap();
        assert!(!report.is_regular());
        assert_eq!(report.irregular_cosets(), 3);
        let values: Vec<f64> = report.witnesses.iter().map(|w| w.value).collect();
        // representatives 000, 001(x3), 011 in increasing encoding: 0, 4, 6
        assert_eq!(values, vec![0.25, 0.5, 0.25]);
        for w in &report.witnesses {
            assert_eq!(w.character, e(3, 1));
        }

        let report = check_subspace_regularity(&f, &Subspace::from_indices(3, &[4]).unwrap(), eps)
            .unwrap();
        assert!(!report.is_regular());
        let reps: Vec<String> = report
            .witnesses
            .iter()
            .map(|w| w.representative.to_string())
            .collect();
        assert_eq!(reps, vec!["100", "110"]);
        assert!(report.witnesses.iter().all(|w| w.value.abs() == 0.25));
    }

    #[test]
    fn report_invariants_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(1..=8);
            let f = random_table(n, &mut rng);
            let dim = rng.gen_range(0..=n);
            let h = crate::gf2::random_subspace(n, dim, &mut rng).unwrap();
            let eps = Epsilon::new(1, rng.gen_range(2..40)).unwrap();
            let report = check_subspace_regularity(&f, &h, eps).unwrap();
            assert_eq!(
                report.regular_cosets + report.witnesses.len() as u64,
                report.total_cosets
            );
            let perp = h.orthogonal_complement();
            for w in &report.witnesses {
                assert!(w.value.abs() > eps.value());
                assert!(!perp.contains(&w.character).unwrap());
                let a = AffineSubspace::new(h.clone(), &w.representative).unwrap();
                let direct = restricted_coefficient(&f, &a, &w.character).unwrap();
                assert!((direct - w.value).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coset_spectrum_matches_direct_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..40 {
            let n = rng.gen_range(1..=8);
            let f = random_table(n, &mut rng);
            let h = crate::gf2::random_subspace(n, rng.gen_range(0..=n), &mut rng).unwrap();
            let a = AffineSubspace::new(h.clone(), &F2Vector::random(n, &mut rng)).unwrap();
            let sp = restricted_spectrum(&f, &a).unwrap();
            assert_eq!(sp.classes.len(), 1 << h.dim());
            let mut parseval = 0.0;
            for c in &sp.classes {
                let direct = restricted_coefficient(&f, &a, &c.character).unwrap();
                assert!((direct - c.value).abs() < 1e-12);
                parseval += c.value * c.value;
            }
            let elems = a.elements(26).unwrap();
            let mean_sq = elems
                .iter()
                .map(|x| f.at(x).unwrap().powi(2))
                .sum::<f64>()
                / elems.len() as f64;
            assert!((parseval - mean_sq).abs() < 1e-12);
            // arbitrary characters resolve through their class
            for _ in 0..5 {
                let eta = F2Vector::random(n, &mut rng);
                let direct = restricted_coefficient(&f, &a, &eta).unwrap();
                assert!((sp.coefficient(&eta) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(matches!(
            FunctionTable::new(2, vec![0.0, 1.5, 0.0, 0.0]),
            Err(Error::ValueOutOfRange { index: 1, .. })
        ));
        assert!(FunctionTable::new(2, vec![0.0; 3]).is_err());
        assert!(FunctionTable::new(1, vec![0.0, 0.3]).unwrap().with_grid(2).is_err());
        assert!(matches!(
            FunctionTable::from_fn(30, 26, |_| 0.0),
            Err(Error::DenseLimit { .. })
        ));
    }
}
