//! Exact linear algebra over F2.
//!
//! Vectors are packed little-endian into `u64` words: coordinate `j` (1-based)
//! lives in bit `j - 1`, so the integer encoding of a vector with `n <= 64`
//! is `x_1 + 2 x_2 + 4 x_3 + ...`.
//!
//! Subspaces are kept in a canonical reduced row-echelon form where the pivot
//! of each row is its lowest set bit, pivots strictly increase, and every
//! pivot column is zero in all other rows. Two subspaces are equal iff their
//! canonical bases are equal.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{BitXor, BitXorAssign, Range};

use rand::Rng;

use crate::error::{Error, Result};

/// Operations materializing `2^k` objects refuse `k` above this by default.
pub const DEFAULT_DENSE_LIMIT: u32 = 26;

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD).max(1)
}

/// Rejects `2^log2` materializations above `limit`.
pub fn check_dense(log2: usize, limit: u32) -> Result<()> {
    if log2 > limit as usize {
        Err(Error::DenseLimit {
            requested: log2,
            limit,
        })
    } else {
        Ok(())
    }
}

/// An element of F2^n, also used for characters.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct F2Vector {
    n: usize,
    words: Vec<u64>,
}

impl F2Vector {
    pub fn zero(n: usize) -> Self {
        F2Vector {
            n,
            words: vec![0; words_for(n)],
        }
    }

    /// Builds the vector whose integer encoding is `index`. Bits above `n` are an error.
    pub fn from_index(n: usize, index: u64) -> Result<Self> {
        if n < WORD && index >> n != 0 {
            return Err(Error::InvalidParameter(format!(
                "index {index} does not fit in {n} coordinates"
            )));
        }
        let mut v = Self::zero(n);
        v.words[0] = index;
        Ok(v)
    }

    /// Standard basis vector `e_coord` (1-based coordinate).
    pub fn unit(n: usize, coord: usize) -> Self {
        assert!(coord >= 1 && coord <= n, "coordinate {coord} out of range 1..={n}");
        let mut v = Self::zero(n);
        v.set(coord - 1, true);
        v
    }

    /// Parses a coordinate-order bit string `x_1 x_2 ... x_n`.
    pub fn from_bit_string(s: &str) -> Result<Self> {
        let mut v = Self::zero(s.len());
        for (j, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(j, true),
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "bit string contains {c:?}"
                    )))
                }
            }
        }
        Ok(v)
    }

    pub fn from_words(n: usize, words: &[u64]) -> Self {
        let mut v = Self::zero(n);
        for (dst, src) in v.words.iter_mut().zip(words) {
            *dst = *src;
        }
        v.mask_tail();
        v
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut v = Self::zero(n);
        for w in v.words.iter_mut() {
            *w = rng.gen();
        }
        v.mask_tail();
        v
    }

    /// Uniform over the nonzero vectors of F2^n.
    pub fn random_nonzero<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        assert!(n > 0);
        loop {
            let v = Self::random(n, rng);
            if !v.is_zero() {
                return v;
            }
        }
    }

    fn mask_tail(&mut self) {
        let rem = self.n % WORD;
        if rem != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << rem) - 1;
        }
        if self.n == 0 {
            self.words[0] = 0;
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Bit at 0-based position `j` (coordinate `j + 1`).
    pub fn get(&self, j: usize) -> bool {
        debug_assert!(j < self.n);
        (self.words[j / WORD] >> (j % WORD)) & 1 == 1
    }

    pub fn set(&mut self, j: usize, bit: bool) {
        debug_assert!(j < self.n);
        let mask = 1u64 << (j % WORD);
        if bit {
            self.words[j / WORD] |= mask;
        } else {
            self.words[j / WORD] &= !mask;
        }
    }

    /// Integer encoding, if it fits in 64 bits.
    pub fn to_index(&self) -> Option<u64> {
        if self.words[1..].iter().all(|&w| w == 0) {
            Some(self.words[0])
        } else {
            None
        }
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn lowest_set_bit(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
    }

    /// Inner product `<self, other>` over F2.
    pub fn dot(&self, other: &F2Vector) -> bool {
        debug_assert_eq!(self.n, other.n);
        let acc = self
            .words
            .iter()
            .zip(&other.words)
            .fold(0u64, |acc, (a, b)| acc ^ (a & b));
        acc.count_ones() & 1 == 1
    }

    /// Bits `start .. start + len` as a fresh vector of length `len`.
    pub fn slice(&self, start: usize, len: usize) -> F2Vector {
        debug_assert!(start + len <= self.n);
        let mut out = F2Vector::zero(len);
        for k in 0..len {
            if self.get(start + k) {
                out.set(k, true);
            }
        }
        out
    }

    /// Bits `start .. start + len` packed into an integer, `len <= 64`.
    pub fn bits_u64(&self, start: usize, len: usize) -> u64 {
        debug_assert!(len <= WORD && start + len <= self.n);
        if len == 0 {
            return 0;
        }
        let w = start / WORD;
        let off = start % WORD;
        let mut v = self.words[w] >> off;
        if off != 0 && w + 1 < self.words.len() {
            v |= self.words[w + 1] << (WORD - off);
        }
        if len < WORD {
            v &= (1u64 << len) - 1;
        }
        v
    }

    /// Overwrites bits `start .. start + block.len()` with `block`.
    pub fn set_slice(&mut self, start: usize, block: &F2Vector) {
        debug_assert!(start + block.n <= self.n);
        for k in 0..block.n {
            self.set(start + k, block.get(k));
        }
    }
}

impl BitXorAssign<&F2Vector> for F2Vector {
    fn bitxor_assign(&mut self, rhs: &F2Vector) {
        debug_assert_eq!(self.n, rhs.n);
        for (a, b) in self.words.iter_mut().zip(&rhs.words) {
            *a ^= b;
        }
    }
}

impl BitXor<&F2Vector> for &F2Vector {
    type Output = F2Vector;

    fn bitxor(self, rhs: &F2Vector) -> F2Vector {
        let mut out = self.clone();
        out ^= rhs;
        out
    }
}

/// Orders by ambient dimension, then by integer encoding.
impl Ord for F2Vector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for F2Vector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Coordinate order: `x_1 x_2 ... x_n`.
impl fmt::Display for F2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.n {
            f.write_str(if self.get(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for F2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F2Vector({self})")
    }
}

/// A linear subspace `H <= F2^n` held in canonical reduced row-echelon form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    n: usize,
    basis: Vec<F2Vector>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Subspace")
            .field("n", &self.n)
            .field("basis", &self.basis)
            .finish()
    }
}

/// Canonical basis of the span of `vectors` inside F2^n.
pub fn echelonize(n: usize, vectors: &[F2Vector]) -> Result<Subspace> {
    let mut rows: Vec<(usize, F2Vector)> = Vec::new();
    for v in vectors {
        if v.n != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.n,
            });
        }
        let mut v = v.clone();
        for (p, r) in &rows {
            if v.get(*p) {
                v ^= r;
            }
        }
        if let Some(p) = v.lowest_set_bit() {
            for (_, r) in rows.iter_mut() {
                if r.get(p) {
                    *r ^= &v;
                }
            }
            rows.push((p, v));
            if rows.len() == n {
                break;
            }
        }
    }
    rows.sort_by_key(|(p, _)| *p);
    Ok(Subspace {
        n,
        basis: rows.into_iter().map(|(_, r)| r).collect(),
    })
}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Subspace {
            n,
            basis: Vec::new(),
        }
    }

    pub fn full(n: usize) -> Self {
        Subspace {
            n,
            basis: (1..=n).map(|j| F2Vector::unit(n, j)).collect(),
        }
    }

    /// Builds a subspace from integer-encoded spanning vectors.
    pub fn from_indices(n: usize, indices: &[u64]) -> Result<Self> {
        let vs = indices
            .iter()
            .map(|&i| F2Vector::from_index(n, i))
            .collect::<Result<Vec<_>>>()?;
        echelonize(n, &vs)
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.n - self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[F2Vector] {
        &self.basis
    }

    /// Basis vectors as integer encodings; `None` when `n > 64`.
    pub fn basis_indices(&self) -> Option<Vec<u64>> {
        if self.n > WORD {
            return None;
        }
        Some(self.basis.iter().map(|b| b.words[0]).collect())
    }

    /// 0-based pivot positions, strictly increasing.
    pub fn pivots(&self) -> Vec<usize> {
        self.basis
            .iter()
            .map(|b| b.lowest_set_bit().expect("basis rows are nonzero"))
            .collect()
    }

    /// `log2` of the index `|F2^n / H|`.
    pub fn index_log2(&self) -> usize {
        self.codim()
    }

    fn check_vector(&self, v: &F2Vector) -> Result<()> {
        if v.n != self.n {
            Err(Error::DimensionMismatch {
                expected: self.n,
                found: v.n,
            })
        } else {
            Ok(())
        }
    }

    fn check_subspace(&self, other: &Subspace) -> Result<()> {
        if other.n != self.n {
            Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            })
        } else {
            Ok(())
        }
    }

    /// Reduces `v` modulo the subspace: the result has zeros at every pivot.
    pub fn reduce(&self, v: &F2Vector) -> F2Vector {
        let mut out = v.clone();
        for b in &self.basis {
            let p = b.lowest_set_bit().expect("nonzero row");
            if out.get(p) {
                out ^= b;
            }
        }
        out
    }

    pub fn contains(&self, v: &F2Vector) -> Result<bool> {
        self.check_vector(v)?;
        Ok(self.reduce(v).is_zero())
    }

    /// True iff `eta` lies in the annihilator of this subspace.
    pub fn annihilated_by(&self, eta: &F2Vector) -> bool {
        self.basis.iter().all(|b| !b.dot(eta))
    }

    /// `H^perp = { eta : <h, eta> = 0 for all h in H }`.
    pub fn orthogonal_complement(&self) -> Subspace {
        let pivots = self.pivots();
        let mut is_pivot = vec![false; self.n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        // For a free column q, e_q + sum_{rows j with bit q} e_{pivot_j} is
        // orthogonal to every row.
        let rows: Vec<F2Vector> = (0..self.n)
            .filter(|&q| !is_pivot[q])
            .map(|q| {
                let mut v = F2Vector::zero(self.n);
                v.set(q, true);
                for (b, &p) in self.basis.iter().zip(&pivots) {
                    if b.get(q) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect();
        echelonize(self.n, &rows).expect("dimensions agree")
    }

    /// `H1 + H2`.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_subspace(other)?;
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        echelonize(self.n, &all)
    }

    /// `H1 ∩ H2 = (H1^perp + H2^perp)^perp`.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_subspace(other)?;
        Ok(self
            .orthogonal_complement()
            .sum(&other.orthogonal_complement())?
            .orthogonal_complement())
    }

    /// `self <= other`.
    pub fn is_subspace_of(&self, other: &Subspace) -> Result<bool> {
        self.check_subspace(other)?;
        Ok(self.basis.iter().all(|b| other.reduce(b).is_zero()))
    }

    /// 0-based coordinates that are not pivots, increasing.
    pub fn free_positions(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.n];
        for p in self.pivots() {
            is_pivot[p] = true;
        }
        (0..self.n).filter(|&q| !is_pivot[q]).collect()
    }

    /// Canonical representatives of `F2^n / H`, in increasing integer encoding.
    pub fn coset_representatives(&self, limit: u32) -> Result<Vec<F2Vector>> {
        check_dense(self.codim(), limit)?;
        let free = self.free_positions();
        Ok((0..1u64 << free.len())
            .map(|m| {
                let mut v = F2Vector::zero(self.n);
                for (k, &q) in free.iter().enumerate() {
                    if (m >> k) & 1 == 1 {
                        v.set(q, true);
                    }
                }
                v
            })
            .collect())
    }

    /// Every element of the subspace, indexed by the coefficient pattern over the basis.
    pub fn elements(&self, limit: u32) -> Result<Vec<F2Vector>> {
        check_dense(self.dim(), limit)?;
        let mut out = Vec::with_capacity(1 << self.dim());
        out.push(F2Vector::zero(self.n));
        for c in 1..1usize << self.dim() {
            let prev = &out[c & (c - 1)];
            out.push(prev ^ &self.basis[c.trailing_zeros() as usize]);
        }
        Ok(out)
    }
}

/// The coset `H + g`, with `g` reduced so equal cosets compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineSubspace {
    subspace: Subspace,
    representative: F2Vector,
}

impl AffineSubspace {
    pub fn new(subspace: Subspace, g: &F2Vector) -> Result<Self> {
        subspace.check_vector(g)?;
        let representative = subspace.reduce(g);
        Ok(AffineSubspace {
            subspace,
            representative,
        })
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn representative(&self) -> &F2Vector {
        &self.representative
    }

    pub fn ambient_dim(&self) -> usize {
        self.subspace.n
    }

    /// `log2 |A|`.
    pub fn size_log2(&self) -> usize {
        self.subspace.dim()
    }

    pub fn contains(&self, x: &F2Vector) -> Result<bool> {
        self.subspace.check_vector(x)?;
        Ok(self.subspace.reduce(x) == self.representative)
    }

    pub fn elements(&self, limit: u32) -> Result<Vec<F2Vector>> {
        Ok(self
            .subspace
            .elements(limit)?
            .into_iter()
            .map(|h| &h ^ &self.representative)
            .collect())
    }
}

/// Partition of the coordinates `1..=n` into consecutive blocks of sizes `d_1, ..., d_s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockStructure {
    dims: Vec<usize>,
    prefix: Vec<usize>,
}

impl BlockStructure {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidParameter(
                "block dimensions must be a nonempty list of positive integers".into(),
            ));
        }
        let mut prefix = Vec::with_capacity(dims.len() + 1);
        prefix.push(0usize);
        for &d in &dims {
            let last = *prefix.last().unwrap();
            prefix.push(last.checked_add(d).ok_or_else(|| {
                Error::Overflow("sum of block dimensions".into())
            })?);
        }
        Ok(BlockStructure { dims, prefix })
    }

    /// Number of blocks `s`.
    pub fn blocks(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// `d_i`, 1-based.
    pub fn dim(&self, i: usize) -> usize {
        self.dims[i - 1]
    }

    /// `D_i = d_1 + ... + d_i`, with `D_0 = 0`.
    pub fn prefix_len(&self, i: usize) -> usize {
        self.prefix[i]
    }

    pub fn n(&self) -> usize {
        *self.prefix.last().unwrap()
    }

    /// 0-based bit range occupied by block `i` (1-based).
    pub fn range(&self, i: usize) -> Range<usize> {
        self.prefix[i - 1]..self.prefix[i]
    }

    /// Block (1-based) containing the 0-based bit position `pos`.
    pub fn block_of(&self, pos: usize) -> usize {
        debug_assert!(pos < self.n());
        self.prefix.partition_point(|&p| p <= pos)
    }
}

/// Lazily enumerates the `k`-dimensional subspaces of F2^n through their
/// canonical echelon forms.
pub struct SubspacesOfDim {
    n: usize,
    pivots: Option<Vec<usize>>,
    free: Vec<(usize, usize)>,
    counter: u64,
}

impl SubspacesOfDim {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::InvalidParameter(format!(
                "no {k}-dimensional subspaces of F2^{n}"
            )));
        }
        if k * (n - k) >= WORD {
            return Err(Error::Overflow(format!(
                "enumerating {k}-dimensional subspaces of F2^{n}"
            )));
        }
        let pivots: Vec<usize> = (0..k).collect();
        let mut it = SubspacesOfDim {
            n,
            pivots: Some(pivots),
            free: Vec::new(),
            counter: 0,
        };
        it.refresh_free();
        Ok(it)
    }

    fn refresh_free(&mut self) {
        self.free.clear();
        if let Some(p) = &self.pivots {
            for (row, &pj) in p.iter().enumerate() {
                for q in pj + 1..self.n {
                    if !p.contains(&q) {
                        self.free.push((row, q));
                    }
                }
            }
        }
    }

    fn advance_pivots(&mut self) {
        let Some(p) = self.pivots.as_mut() else {
            return;
        };
        let k = p.len();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if p[i] < self.n - k + i {
                p[i] += 1;
                for j in i + 1..k {
                    p[j] = p[j - 1] + 1;
                }
                return;
            }
        }
        self.pivots = None;
    }
}

impl Iterator for SubspacesOfDim {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        loop {
            let pivots = self.pivots.as_ref()?;
            if self.counter < 1u64 << self.free.len() {
                let mut rows: Vec<F2Vector> = pivots
                    .iter()
                    .map(|&p| {
                        let mut v = F2Vector::zero(self.n);
                        v.set(p, true);
                        v
                    })
                    .collect();
                for (bit, &(row, q)) in self.free.iter().enumerate() {
                    if (self.counter >> bit) & 1 == 1 {
                        rows[row].set(q, true);
                    }
                }
                self.counter += 1;
                return Some(Subspace {
                    n: self.n,
                    basis: rows,
                });
            }
            self.counter = 0;
            self.advance_pivots();
            self.refresh_free();
        }
    }
}

/// Every subspace of F2^n exactly once, by increasing dimension. Refuses `n > 4`.
pub fn enumerate_all_subspaces(n: usize) -> Result<impl Iterator<Item = Subspace>> {
    if n > 4 {
        return Err(Error::EnumerationTooLarge(n));
    }
    let parts = (0..=n)
        .map(|k| SubspacesOfDim::new(n, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().flatten())
}

/// Uniform random basis vectors, echelonized, redrawn until the span has dimension `dim`.
pub fn random_subspace<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Result<Subspace> {
    if dim > n {
        return Err(Error::InvalidParameter(format!(
            "cannot draw a {dim}-dimensional subspace of F2^{n}"
        )));
    }
    loop {
        let vs: Vec<F2Vector> = (0..dim).map(|_| F2Vector::random(n, rng)).collect();
        let h = echelonize(n, &vs)?;
        if h.dim() == dim {
            return Ok(h);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn v(n: usize, i: u64) -> F2Vector {
        F2Vector::from_index(n, i).unwrap()
    }

    fn span_brute(n: usize, gens: &[u64]) -> BTreeSet<u64> {
        let mut out = BTreeSet::new();
        for mask in 0..1u64 << gens.len() {
            let mut x = 0;
            for (k, g) in gens.iter().enumerate() {
                if (mask >> k) & 1 == 1 {
                    x ^= g;
                }
            }
            out.insert(x & ((1 << n) - 1));
        }
        out
    }

    #[test]
    fn echelonize_examples() {
        assert_eq!(echelonize(3, &[]).unwrap().dim(), 0);
        let h = Subspace::from_indices(3, &[6, 5, 3]).unwrap();
        assert_eq!(h.dim(), 2);
        assert_eq!(span_brute(3, &[6, 5, 3]).len(), 4);
        let full = echelonize(5, &(1..=5).map(|j| F2Vector::unit(5, j)).collect::<Vec<_>>())
            .unwrap();
        assert_eq!(full, Subspace::full(5));
    }

    #[test]
    fn echelonize_rejects_mixed_dimensions() {
        let err = echelonize(3, &[v(3, 1), v(4, 1)]).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 3,
                found: 4
            }
        );
    }

    #[test]
    fn contains_examples() {
        assert!(Subspace::zero(3).contains(&v(3, 0)).unwrap());
        // span{110} = {000, 110}; 011 in coordinate order is index 6.
        let line = echelonize(3, &[F2Vector::from_bit_string("110").unwrap()]).unwrap();
        assert!(!line
            .contains(&F2Vector::from_bit_string("011").unwrap())
            .unwrap());
        for i in 0..8 {
            assert!(Subspace::full(3).contains(&v(3, i)).unwrap());
        }
        assert!(Subspace::full(3).contains(&v(4, 0)).is_err());
    }

    #[test]
    fn orthogonal_complement_examples() {
        assert_eq!(Subspace::zero(4).orthogonal_complement(), Subspace::full(4));
        assert_eq!(Subspace::full(4).orthogonal_complement(), Subspace::zero(4));
        let h = echelonize(3, &[F2Vector::from_bit_string("110").unwrap()]).unwrap();
        let expected = echelonize(
            3,
            &[
                F2Vector::from_bit_string("001").unwrap(),
                F2Vector::from_bit_string("110").unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(h.orthogonal_complement(), expected);
        // brute force over all eight vectors
        let brute: Vec<F2Vector> = (0..8)
            .map(|i| v(3, i))
            .filter(|eta| h.annihilated_by(eta))
            .collect();
        assert_eq!(echelonize(3, &brute).unwrap(), expected);
    }

    #[test]
    fn intersect_examples() {
        let h = Subspace::from_indices(4, &[3, 12]).unwrap();
        assert_eq!(h.intersect(&Subspace::full(4)).unwrap(), h);
        let a = echelonize(3, &[F2Vector::from_bit_string("100").unwrap()]).unwrap();
        let b = echelonize(3, &[F2Vector::from_bit_string("010").unwrap()]).unwrap();
        assert!(a.intersect(&b).unwrap().is_zero());
        let a = echelonize(
            3,
            &[
                F2Vector::from_bit_string("100").unwrap(),
                F2Vector::from_bit_string("010").unwrap(),
            ],
        )
        .unwrap();
        let b = echelonize(
            3,
            &[
                F2Vector::from_bit_string("010").unwrap(),
                F2Vector::from_bit_string("001").unwrap(),
            ],
        )
        .unwrap();
        let expected = echelonize(3, &[F2Vector::from_bit_string("010").unwrap()]).unwrap();
        assert_eq!(a.intersect(&b).unwrap(), expected);
    }

    #[test]
    fn coset_representative_examples() {
        assert_eq!(
            Subspace::full(3).coset_representatives(26).unwrap(),
            vec![v(3, 0)]
        );
        let reps: Vec<u64> = Subspace::zero(2)
            .coset_representatives(26)
            .unwrap()
            .iter()
            .map(|r| r.to_index().unwrap())
            .collect();
        assert_eq!(reps, vec![0, 1, 2, 3]);

        let h = echelonize(3, &[F2Vector::from_bit_string("100").unwrap()]).unwrap();
        let cosets: BTreeSet<BTreeSet<String>> = h
            .coset_representatives(26)
            .unwrap()
            .into_iter()
            .map(|r| {
                AffineSubspace::new(h.clone(), &r)
                    .unwrap()
                    .elements(26)
                    .unwrap()
                    .iter()
                    .map(|x| x.to_string())
                    .collect()
            })
            .collect();
        let expected: BTreeSet<BTreeSet<String>> = [
            ["000", "100"],
            ["001", "101"],
            ["010", "110"],
            ["011", "111"],
        ]
        .iter()
        .map(|pair| pair.iter().map(|s| s.to_string()).collect())
        .collect();
        assert_eq!(cosets, expected);
    }

    #[test]
    fn coset_representatives_respect_guard() {
        let err = Subspace::zero(30).coset_representatives(26).unwrap_err();
        assert!(matches!(err, Error::DenseLimit { requested: 30, .. }));
    }

    #[test]
    fn subspace_counts() {
        assert_eq!(enumerate_all_subspaces(1).unwrap().count(), 2);
        assert_eq!(enumerate_all_subspaces(2).unwrap().count(), 5);
        let by_dim: Vec<usize> = (0..=3)
            .map(|k| SubspacesOfDim::new(3, k).unwrap().count())
            .collect();
        assert_eq!(by_dim, vec![1, 7, 7, 1]);
        // Gaussian binomials for n = 4: 1, 15, 35, 15, 1
        assert_eq!(enumerate_all_subspaces(4).unwrap().count(), 67);
        assert!(matches!(
            enumerate_all_subspaces(5),
            Err(Error::EnumerationTooLarge(5))
        ));
    }

    #[test]
    fn enumeration_yields_each_subspace_once() {
        // Brute force: canonical span of every set of up to 3 vectors in F2^3.
        let mut brute = BTreeSet::new();
        for a in 0..8 {
            for b in 0..8 {
                for c in 0..8 {
                    brute.insert(Subspace::from_indices(3, &[a, b, c]).unwrap());
                }
            }
        }
        let listed: Vec<Subspace> = enumerate_all_subspaces(3).unwrap().collect();
        let set: BTreeSet<Subspace> = listed.iter().cloned().collect();
        assert_eq!(set.len(), listed.len());
        assert_eq!(set, brute);
        for h in &listed {
            assert_eq!(&echelonize(3, h.basis()).unwrap(), h);
        }
    }

    #[test]
    fn hyperplane_count_at_eleven() {
        assert_eq!(SubspacesOfDim::new(11, 10).unwrap().count(), 2047);
        assert_eq!(SubspacesOfDim::new(11, 1).unwrap().count(), 2047);
    }

    #[test]
    fn duality_exhaustive_small() {
        for n in 1..=4 {
            for h in enumerate_all_subspaces(n).unwrap() {
                let perp = h.orthogonal_complement();
                assert_eq!(perp.dim() + h.dim(), n);
                assert_eq!(perp.orthogonal_complement(), h);
            }
        }
    }

    #[test]
    fn duality_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=20);
            let dim = rng.gen_range(0..=n);
            let h = random_subspace(n, dim, &mut rng).unwrap();
            let perp = h.orthogonal_complement();
            assert_eq!(perp.dim() + h.dim(), n);
            assert_eq!(perp.orthogonal_complement(), h);
            for b in perp.basis() {
                assert!(h.annihilated_by(b));
            }
        }
    }

    #[test]
    fn cosets_partition_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=12 {
            for _ in 0..4 {
                let dim = rng.gen_range(0..=n);
                let h = random_subspace(n, dim, &mut rng).unwrap();
                let mut seen = vec![false; 1 << n];
                for r in h.coset_representatives(26).unwrap() {
                    for x in AffineSubspace::new(h.clone(), &r)
                        .unwrap()
                        .elements(26)
                        .unwrap()
                    {
                        let i = x.to_index().unwrap() as usize;
                        assert!(!seen[i], "cosets overlap at {i}");
                        seen[i] = true;
                    }
                }
                assert!(seen.iter().all(|&b| b));
            }
        }
    }

    #[test]
    fn affine_equality_is_canonical() {
        let h = Subspace::from_indices(4, &[3]).unwrap();
        let a = AffineSubspace::new(h.clone(), &v(4, 1)).unwrap();
        let b = AffineSubspace::new(h.clone(), &v(4, 2)).unwrap();
        assert_eq!(a, b);
        assert!(a.contains(&v(4, 2)).unwrap());
        assert!(!a.contains(&v(4, 4)).unwrap());
    }

    #[test]
    fn multiword_vectors() {
        let mut x = F2Vector::zero(267);
        x.set(266, true);
        x.set(63, true);
        x.set(64, true);
        assert_eq!(x.weight(), 3);
        assert_eq!(x.bits_u64(60, 8), 0b11000);
        assert_eq!(x.to_index(), None);
        assert_eq!(x.slice(63, 2).to_index(), Some(3));
        let h = echelonize(267, &[x.clone(), F2Vector::unit(267, 64)]).unwrap();
        assert_eq!(h.dim(), 2);
        assert_eq!(h.orthogonal_complement().dim(), 265);
    }

    #[test]
    fn block_structure_layout() {
        let b = BlockStructure::new(vec![1, 2, 8]).unwrap();
        assert_eq!(b.n(), 11);
        assert_eq!(b.prefix_len(2), 3);
        assert_eq!(b.range(3), 3..11);
        assert_eq!(b.block_of(0), 1);
        assert_eq!(b.block_of(2), 2);
        assert_eq!(b.block_of(3), 3);
        assert!(BlockStructure::new(vec![1, 0]).is_err());
    }
}
