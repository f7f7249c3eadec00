//! The tower-type construction with no nonzero regular subspace.
//!
//! Coordinates are split into blocks of sizes `d_1, d_2, ...` with
//! `d_i = 2^{D_{i-1}}` for `i <= 3` and `d_i = 2^{D_{i-1} - 3}` afterwards, so
//! the first dimensions are `1, 2, 8, 2^8, 2^264`. Block `i` carries a family
//! `xi_i` indexed by the prefix `(x^1, ..., x^{i-1})`, and
//!
//! ```text
//! f(x) = #{ i : <x^i, xi_i(x^1, ..., x^{i-1})> = 0 } / s.
//! ```

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::Epsilon;
use crate::fourier::{wht_in_place, FunctionTable};
use crate::gf2::{check_dense, BlockStructure, F2Vector, DEFAULT_DENSE_LIMIT};
use crate::rng::{self, Purpose};

/// Exponents up to this many bits are materialized as exact integers.
const MATERIALIZE_BITS: u64 = 1 << 16;

/// Random families are redrawn at most this many times by default.
pub const DEFAULT_MAX_ATTEMPTS: u32 = 100;

/// Hyperplanes sampled when a family is too wide for an exhaustive scan.
pub const DEFAULT_HYPERPLANE_SAMPLES: u64 = 1_000_000;

/// `twr(h)`, either as an integer or as `2^exponent`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TowerValue {
    Exact(BigUint),
    PowerOfTwo(BigUint),
}

/// `twr(0) = 1`, `twr(h) = 2^twr(h - 1)`. Heights above 6 are refused.
pub fn tower_value(h: u32) -> Result<TowerValue> {
    match h {
        0 => Ok(TowerValue::Exact(BigUint::one())),
        1..=4 => match tower_value(h - 1)? {
            TowerValue::Exact(prev) => {
                let e = prev.to_u64().expect("small exponent");
                Ok(TowerValue::Exact(BigUint::one() << e))
            }
            TowerValue::PowerOfTwo(_) => unreachable!(),
        },
        5 | 6 => match tower_value(h - 1)? {
            TowerValue::Exact(prev) => Ok(TowerValue::PowerOfTwo(prev)),
            TowerValue::PowerOfTwo(e) => {
                let e = e.to_u64().expect("twr(4) fits");
                Ok(TowerValue::PowerOfTwo(BigUint::one() << e))
            }
        },
        _ => Err(Error::Overflow(format!(
            "twr({h}) has a tower of exponents taller than two"
        ))),
    }
}

/// A possibly astronomically large block dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Magnitude {
    Exact(BigUint),
    /// `2^exponent + plus`.
    PowerOfTwo { exponent: BigUint, plus: BigUint },
    /// Only known to be at least `twr(height)`.
    Tower { height: usize },
}

impl Magnitude {
    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            Magnitude::Exact(v) => Some(v),
            _ => None,
        }
    }

    pub fn to_usize(&self) -> Option<usize> {
        self.exact().and_then(|v| v.to_usize())
    }

    fn pow2_minus(&self, shift: u64) -> Magnitude {
        match self {
            Magnitude::Exact(e) => {
                let e = e - BigUint::from(shift);
                if e.bits() <= 64 && e.to_u64().unwrap() <= MATERIALIZE_BITS {
                    Magnitude::Exact(BigUint::one() << e.to_u64().unwrap())
                } else {
                    Magnitude::PowerOfTwo {
                        exponent: e,
                        plus: BigUint::zero(),
                    }
                }
            }
            Magnitude::PowerOfTwo { .. } | Magnitude::Tower { .. } => Magnitude::Tower {
                height: self.height_floor() + 1,
            },
        }
    }

    /// Largest `h` with `self >= twr(h)` that is cheap to certify.
    fn height_floor(&self) -> usize {
        match self {
            Magnitude::Exact(v) => {
                let mut h = 0;
                let mut t = BigUint::one();
                while h < 4 && *v >= (BigUint::one() << t.to_u64().unwrap()) {
                    t = BigUint::one() << t.to_u64().unwrap();
                    h += 1;
                }
                h
            }
            Magnitude::PowerOfTwo { exponent, .. } => {
                Magnitude::Exact(exponent.clone()).height_floor() + 1
            }
            Magnitude::Tower { height } => *height,
        }
    }

    fn add(&self, other: &Magnitude) -> Magnitude {
        match (self, other) {
            (Magnitude::Exact(a), Magnitude::Exact(b)) => Magnitude::Exact(a + b),
            (Magnitude::PowerOfTwo { exponent, plus }, Magnitude::Exact(b))
            | (Magnitude::Exact(b), Magnitude::PowerOfTwo { exponent, plus }) => {
                Magnitude::PowerOfTwo {
                    exponent: exponent.clone(),
                    plus: plus + b,
                }
            }
            (a, b) => Magnitude::Tower {
                height: a.height_floor().max(b.height_floor()),
            },
        }
    }
}

impl std::fmt::Display for Magnitude {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Magnitude::Exact(v) if v.bits() <= 64 => write!(f, "{v}"),
            Magnitude::Exact(v) if (v & (v - 1u32)).is_zero() => write!(f, "2^{}", v.bits() - 1),
            Magnitude::Exact(v) => write!(f, "{v}"),
            Magnitude::PowerOfTwo { exponent, plus } if plus.is_zero() => write!(f, "2^{exponent}"),
            Magnitude::PowerOfTwo { exponent, plus } => write!(f, "2^{exponent} + {plus}"),
            Magnitude::Tower { height } => write!(f, ">= twr({height})"),
        }
    }
}

/// Parameters of the `s`-block construction.
#[derive(Clone, Debug, PartialEq)]
pub struct TowerParams {
    pub s: usize,
    /// `d_1, ..., d_s`.
    pub dims: Vec<Magnitude>,
    /// `D_1, ..., D_s`; `D_s = n`.
    pub prefix_sums: Vec<Magnitude>,
    /// `1 / (16 s)`.
    pub epsilon_max: Epsilon,
}

impl TowerParams {
    pub fn n(&self) -> &Magnitude {
        self.prefix_sums.last().unwrap()
    }

    /// Concrete block layout, when every dimension fits in memory.
    pub fn blocks(&self) -> Result<BlockStructure> {
        let dims = self
            .dims
            .iter()
            .map(|d| {
                d.to_usize()
                    .filter(|&d| d <= 1 << 20)
                    .ok_or_else(|| Error::Overflow(format!("block dimension {d}")))
            })
            .collect::<Result<Vec<_>>>()?;
        BlockStructure::new(dims)
    }

    /// Whether the full table `2^n` fits under `limit`.
    pub fn dense_possible(&self, limit: u32) -> bool {
        self.n().to_usize().is_some_and(|n| n <= limit as usize)
    }
}

/// Dimensions from the tower recurrence.
pub fn block_dims(s: usize) -> Result<TowerParams> {
    if s == 0 {
        return Err(Error::InvalidParameter("s must be at least 1".into()));
    }
    let mut dims = Vec::with_capacity(s);
    let mut prefix_sums: Vec<Magnitude> = Vec::with_capacity(s);
    let mut prev = Magnitude::Exact(BigUint::zero());
    for i in 1..=s {
        let shift = if i <= 3 { 0 } else { 3 };
        let d = prev.pow2_minus(shift);
        prev = prev.add(&d);
        dims.push(d);
        prefix_sums.push(prev.clone());
    }
    Ok(TowerParams {
        s,
        dims,
        prefix_sums,
        epsilon_max: Epsilon::for_blocks(s)?,
    })
}

/// Outcome of a hyperplane-incidence scan.
#[derive(Clone, Debug, PartialEq)]
pub struct SpanningCheck {
    pub ok: bool,
    /// Nonzero `eta` maximizing `#{ j : <v_j, eta> = 0 }`, smallest on ties.
    pub worst_hyperplane: F2Vector,
    pub incidence: u64,
    pub count: u64,
    /// `None` for an exhaustive scan, otherwise the number of hyperplanes sampled.
    pub sampled: Option<u64>,
}

fn check_rho(rho: Epsilon) -> Result<()> {
    if rho.numer() > rho.denom() || 2 * rho.numer() <= rho.denom() {
        Err(Error::InvalidParameter(format!(
            "rho must lie in (1/2, 1], got {rho}"
        )))
    } else {
        Ok(())
    }
}

fn within_rho(rho: Epsilon, incidence: u64, count: u64) -> bool {
    incidence as i128 * rho.denom() as i128 <= rho.numer() as i128 * count as i128
}

fn check_family(d: usize, vectors: &[F2Vector]) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    if let Some(v) = vectors.iter().find(|v| v.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: v.len(),
        });
    }
    Ok(())
}

/// Exhaustive scan of all `2^d - 1` hyperplanes through one transform of the
/// multiset frequency vector: `#{j : <v_j, eta> = 0} = (count + sum_j (-1)^<v_j, eta>) / 2`.
pub fn verify_spanning_family(
    d: usize,
    vectors: &[F2Vector],
    rho: Epsilon,
    limit: u32,
) -> Result<SpanningCheck> {
    check_family(d, vectors)?;
    check_dense(d, limit)?;
    let mut freq = vec![0i64; 1 << d];
    for v in vectors {
        freq[v.to_index().unwrap() as usize] += 1;
    }
    wht_in_place(&mut freq);
    let count = vectors.len() as i64;
    let (eta, incidence) = freq
        .iter()
        .enumerate()
        .skip(1)
        .map(|(eta, &w)| (eta, ((count + w) / 2) as u64))
        .fold((1usize, 0u64), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(SpanningCheck {
        ok: within_rho(rho, incidence, count as u64),
        worst_hyperplane: F2Vector::from_index(d, eta as u64)?,
        incidence,
        count: count as u64,
        sampled: None,
    })
}

/// Incidence of `samples` uniformly random nonzero hyperplanes.
///
/// The family is stored transposed (one bitmask per coordinate) and combined
/// eight coordinates at a time from lookup tables, so each sample costs about
/// `d/8 * count/64` word operations.
pub fn verify_spanning_sampled(
    d: usize,
    vectors: &[F2Vector],
    rho: Epsilon,
    samples: u64,
    seed: u64,
) -> Result<SpanningCheck> {
    check_family(d, vectors)?;
    let count = vectors.len();
    let words = count.div_ceil(64).max(1);
    let groups = d.div_ceil(8);
    let mut tables = vec![0u64; groups * 256 * words];
    for g in 0..groups {
        let base = g * 256 * words;
        for (j, v) in vectors.iter().enumerate() {
            for bit in 0..8.min(d - 8 * g) {
                if v.get(8 * g + bit) {
                    tables[base + (1 << bit) * words + j / 64] |= 1 << (j % 64);
                }
            }
        }
        for byte in 1..256usize {
            let low = byte & byte.wrapping_neg();
            if low != byte {
                for w in 0..words {
                    tables[base + byte * words + w] =
                        tables[base + low * words + w] ^ tables[base + (byte ^ low) * words + w];
                }
            }
        }
    }
    const CHUNK: u64 = 4096;
    let chunks = samples.div_ceil(CHUNK);
    let best = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(seed, Purpose::SampledHyperplanes, c);
            let mut acc = vec![0u64; words];
            let mut best: Option<(u64, F2Vector)> = None;
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                let eta = F2Vector::random_nonzero(d, &mut rng);
                acc.iter_mut().for_each(|a| *a = 0);
                for g in 0..groups {
                    let byte = eta.bits_u64(8 * g, 8.min(d - 8 * g)) as usize;
                    let row = &tables[(g * 256 + byte) * words..(g * 256 + byte + 1) * words];
                    for (a, r) in acc.iter_mut().zip(row) {
                        *a ^= r;
                    }
                }
                let odd: u64 = acc.iter().map(|a| a.count_ones() as u64).sum();
                let incidence = count as u64 - odd;
                let better = match &best {
                    None => true,
                    Some((b, e)) => incidence > *b || (incidence == *b && eta < *e),
                };
                if better {
                    best = Some((incidence, eta));
                }
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (None, x) | (x, None) => x,
                (Some(a), Some(b)) => Some(if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }),
            },
        );
    let (incidence, eta) = best.unwrap_or((0, F2Vector::unit(d, 1)));
    Ok(SpanningCheck {
        ok: within_rho(rho, incidence, count as u64),
        worst_hyperplane: eta,
        incidence,
        count: count as u64,
        sampled: Some(samples),
    })
}

/// Knobs for family generation and instance building.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenerationOptions {
    pub dense_limit: u32,
    pub max_attempts: u32,
    pub hyperplane_samples: u64,
}

impl Default for GenerationOptions {
    fn default() -> Self {
        GenerationOptions {
            dense_limit: DEFAULT_DENSE_LIMIT,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            hyperplane_samples: DEFAULT_HYPERPLANE_SAMPLES,
        }
    }
}

/// Exhaustive when `d` is under the dense limit, sampled otherwise.
pub fn verify_spanning(
    d: usize,
    vectors: &[F2Vector],
    rho: Epsilon,
    seed: u64,
    opts: &GenerationOptions,
) -> Result<SpanningCheck> {
    if d <= opts.dense_limit as usize {
        verify_spanning_family(d, vectors, rho, opts.dense_limit)
    } else {
        verify_spanning_sampled(d, vectors, rho, opts.hyperplane_samples, seed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpanningFamily {
    pub vectors: Vec<F2Vector>,
    /// 1-based attempt that produced the family.
    pub attempt: u32,
    pub check: SpanningCheck,
}

/// Rejection sampling: `count` uniform draws from `F2^d \ {0}`, redrawn until
/// every hyperplane holds at most `rho * count` of them.
pub fn generate_spanning_family(
    d: usize,
    count: usize,
    rho: Epsilon,
    seed: u64,
    opts: &GenerationOptions,
) -> Result<SpanningFamily> {
    check_rho(rho)?;
    if d == 0 || count < d {
        return Err(Error::InvalidParameter(format!(
            "need count >= d >= 1, got d = {d}, count = {count}"
        )));
    }
    for attempt in 1..=opts.max_attempts {
        let mut rng = rng::stream(seed, Purpose::SpanningFamily, attempt as u64);
        let vectors: Vec<F2Vector> = (0..count)
            .map(|_| F2Vector::random_nonzero(d, &mut rng))
            .collect();
        let check = verify_spanning(d, &vectors, rho, rng.gen(), opts)?;
        if check.ok {
            return Ok(SpanningFamily {
                vectors,
                attempt,
                check,
            });
        }
    }
    Err(Error::RetryCapExceeded(opts.max_attempts))
}

#[derive(Clone, Debug, PartialEq)]
pub enum XiKind {
    /// Prefix index `p` maps to the standard basis vector `e_{p+1}`.
    Basis,
    Random(SpanningFamily),
}

/// `xi_i`, indexed by the integer encoding of the prefix `(x^1, ..., x^{i-1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct XiBlock {
    pub dim: usize,
    pub entries: Vec<F2Vector>,
    pub kind: XiKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct XiFamily {
    pub seed: u64,
    pub blocks: Vec<XiBlock>,
}

impl XiFamily {
    /// `xi_i(prefix)` for 1-based block `i`.
    pub fn xi(&self, i: usize, prefix: u64) -> &F2Vector {
        &self.blocks[i - 1].entries[prefix as usize]
    }
}

/// The spanning fraction every random block must meet.
pub fn three_quarters() -> Epsilon {
    Epsilon::new(3, 4).unwrap()
}

/// Families for every block: standard basis vectors when `2^{D_{i-1}} <= d_i`
/// (a full basis in the recurrence), otherwise a random 3/4-spanning family.
pub fn build_xi(blocks: &BlockStructure, seed: u64, opts: &GenerationOptions) -> Result<XiFamily> {
    let mut out = Vec::with_capacity(blocks.blocks());
    for i in 1..=blocks.blocks() {
        let d = blocks.dim(i);
        let prefix = blocks.prefix_len(i - 1);
        check_dense(prefix, opts.dense_limit)?;
        let count = 1usize << prefix;
        if d < 64 && count as u64 > (1u64 << d) - 1 {
            return Err(Error::InvalidParameter(format!(
                "block {i}: 2^{prefix} prefixes exceed the {} nonzero vectors of F2^{d}",
                (1u64 << d) - 1
            )));
        }
        let block = if count <= d {
            XiBlock {
                dim: d,
                entries: (1..=count).map(|j| F2Vector::unit(d, j)).collect(),
                kind: XiKind::Basis,
            }
        } else {
            let child = rng::derive(seed, Purpose::XiBlock, i as u64);
            let family = generate_spanning_family(d, count, three_quarters(), child, opts)?;
            XiBlock {
                dim: d,
                entries: family.vectors.clone(),
                kind: XiKind::Random(family),
            }
        };
        out.push(block);
    }
    Ok(XiFamily { seed, blocks: out })
}

/// A generated construction, with its dense table when `n` is small.
#[derive(Clone, Debug)]
pub struct Instance {
    pub blocks: BlockStructure,
    pub xi: XiFamily,
    /// Present iff `n` is within the dense limit.
    pub table: Option<FunctionTable>,
    /// Dimensions came from the recurrence rather than a custom list.
    pub recurrence: bool,
}

impl Instance {
    /// The paper-default construction with `s` blocks.
    pub fn generate(s: usize, seed: u64, opts: &GenerationOptions) -> Result<Self> {
        let blocks = block_dims(s)?.blocks()?;
        let mut inst = Self::with_blocks(blocks, seed, opts)?;
        inst.recurrence = true;
        Ok(inst)
    }

    /// Arbitrary block sizes with `2^{D_{i-1}} <= 2^{d_i} - 1`.
    pub fn with_blocks(blocks: BlockStructure, seed: u64, opts: &GenerationOptions) -> Result<Self> {
        let xi = build_xi(&blocks, seed, opts)?;
        let mut inst = Instance {
            blocks,
            xi,
            table: None,
            recurrence: false,
        };
        if inst.n() <= opts.dense_limit as usize {
            inst.table = Some(build_function_table(&inst, opts.dense_limit)?);
        }
        Ok(inst)
    }

    pub fn s(&self) -> usize {
        self.blocks.blocks()
    }

    pub fn n(&self) -> usize {
        self.blocks.n()
    }

    pub fn epsilon_max(&self) -> Epsilon {
        Epsilon::for_blocks(self.s()).unwrap()
    }

    pub fn table(&self) -> Result<&FunctionTable> {
        self.table.as_ref().ok_or(Error::DenseLimit {
            requested: self.n(),
            limit: DEFAULT_DENSE_LIMIT,
        })
    }

    /// Prefix `(x^1, ..., x^{i-1})` as an integer.
    pub fn prefix_index(&self, i: usize, x: &F2Vector) -> u64 {
        x.bits_u64(0, self.blocks.prefix_len(i - 1))
    }

    /// `B_j(x)`: whether `<x^j, xi_j(x)> = 0`.
    pub fn term(&self, j: usize, x: &F2Vector) -> Result<bool> {
        self.check_point(x)?;
        let xi = self.xi.xi(j, self.prefix_index(j, x));
        let block = x.slice(self.blocks.prefix_len(j - 1), self.blocks.dim(j));
        Ok(!block.dot(xi))
    }

    fn check_point(&self, x: &F2Vector) -> Result<()> {
        if x.len() != self.n() {
            Err(Error::DimensionMismatch {
                expected: self.n(),
                found: x.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Table of `B_j` (values 0 or 1).
    pub fn term_table(&self, j: usize, limit: u32) -> Result<FunctionTable> {
        let dense = DenseBlocks::new(self)?;
        FunctionTable::from_fn(self.n(), limit, |x| dense.term(j, x) as u8 as f64)?.with_grid(1)
    }
}

/// `f(x)` from the families alone; works where no table exists.
pub fn eval_pointwise(inst: &Instance, x: &F2Vector) -> Result<f64> {
    let mut hits = 0usize;
    for j in 1..=inst.s() {
        hits += inst.term(j, x)? as usize;
    }
    Ok(hits as f64 / inst.s() as f64)
}

/// Integer-encoded layout for `n < 64`.
struct DenseBlocks {
    offsets: Vec<u32>,
    masks: Vec<u64>,
    prefix_masks: Vec<u64>,
    xi: Vec<Vec<u64>>,
}

impl DenseBlocks {
    fn new(inst: &Instance) -> Result<Self> {
        if inst.n() >= 64 {
            return Err(Error::DenseLimit {
                requested: inst.n(),
                limit: 63,
            });
        }
        let b = &inst.blocks;
        Ok(DenseBlocks {
            offsets: (1..=b.blocks()).map(|i| b.prefix_len(i - 1) as u32).collect(),
            masks: (1..=b.blocks()).map(|i| (1u64 << b.dim(i)) - 1).collect(),
            prefix_masks: (1..=b.blocks())
                .map(|i| (1u64 << b.prefix_len(i - 1)) - 1)
                .collect(),
            xi: inst
                .xi
                .blocks
                .iter()
                .map(|blk| blk.entries.iter().map(|v| v.to_index().unwrap()).collect())
                .collect(),
        })
    }

    fn term(&self, j: usize, x: u64) -> bool {
        let k = j - 1;
        let block = (x >> self.offsets[k]) & self.masks[k];
        let xi = self.xi[k][(x & self.prefix_masks[k]) as usize];
        (block & xi).count_ones() & 1 == 0
    }

    fn value(&self, x: u64) -> f64 {
        let s = self.xi.len();
        (1..=s).filter(|&j| self.term(j, x)).count() as f64 / s as f64
    }
}

/// Dense table of `f`; values are multiples of `1/s` and the table says so.
pub fn build_function_table(inst: &Instance, limit: u32) -> Result<FunctionTable> {
    check_dense(inst.n(), limit)?;
    let dense = DenseBlocks::new(inst)?;
    FunctionTable::from_fn(inst.n(), limit, |x| dense.value(x))?.with_grid(inst.s() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn exact(v: u64) -> Magnitude {
        Magnitude::Exact(BigUint::from(v))
    }

    /// Incidences by brute force over every nonzero hyperplane.
    fn brute_incidence(d: usize, vectors: &[F2Vector]) -> (u64, u64) {
        let mut best = (0u64, 0u64);
        for eta in 1..1u64 << d {
            let e = F2Vector::from_index(d, eta).unwrap();
            let inc = vectors.iter().filter(|v| !v.dot(&e)).count() as u64;
            if eta == 1 || inc > best.1 {
                best = (eta, inc);
            }
        }
        best
    }

    #[test]
    fn tower_values() {
        assert_eq!(tower_value(0).unwrap(), TowerValue::Exact(BigUint::one()));
        assert_eq!(tower_value(3).unwrap(), TowerValue::Exact(BigUint::from(16u32)));
        assert_eq!(tower_value(4).unwrap(), TowerValue::Exact(BigUint::from(65536u32)));
        assert_eq!(
            tower_value(5).unwrap(),
            TowerValue::PowerOfTwo(BigUint::from(65536u32))
        );
        match tower_value(6).unwrap() {
            TowerValue::PowerOfTwo(e) => assert_eq!(e, BigUint::one() << 65536u32),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(tower_value(7), Err(Error::Overflow(_))));
    }

    #[test]
    fn dims_follow_recurrence() {
        let p = block_dims(1).unwrap();
        assert_eq!(p.dims, vec![exact(1)]);
        assert_eq!(p.n(), &exact(1));

        let p = block_dims(3).unwrap();
        assert_eq!(p.dims, vec![exact(1), exact(2), exact(8)]);
        assert_eq!(p.n(), &exact(11));
        assert_eq!(p.epsilon_max, Epsilon::new(1, 48).unwrap());
        assert!(p.dense_possible(26));

        let p = block_dims(5).unwrap();
        assert_eq!(p.dims[3], exact(256));
        assert_eq!(p.dims[4], Magnitude::Exact(BigUint::one() << 264u32));
        assert_eq!(p.dims[4].to_string(), "2^264");
        assert_eq!(p.prefix_sums[3], exact(267));
        assert!(!p.dense_possible(26));
        assert!(p.blocks().is_err());

        let p = block_dims(7).unwrap();
        match &p.dims[5] {
            Magnitude::PowerOfTwo { exponent, .. } => {
                assert_eq!(exponent, &((BigUint::one() << 264u32) + 264u32))
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(p.dims[6], Magnitude::Tower { .. }));
        assert!(block_dims(0).is_err());
    }

    #[test]
    fn dims_dominate_tower() {
        let p = block_dims(5).unwrap();
        for i in 1..=5 {
            let d = p.dims[i - 1].exact().unwrap();
            let t = match tower_value(i as u32 - 1).unwrap() {
                TowerValue::Exact(t) => t,
                TowerValue::PowerOfTwo(e) => BigUint::one() << e.to_u64().unwrap(),
            };
            assert!(d >= &t, "d_{i} < twr({})", i - 1);
        }
        // 2^{D_{i-1}} = 8 d_i past the third block
        let b = block_dims(4).unwrap().blocks().unwrap();
        assert_eq!(1usize << b.prefix_len(3), 8 * b.dim(4));
    }

    #[test]
    fn verify_examples() {
        let rho1 = Epsilon::new(1, 1).unwrap();
        let basis: Vec<F2Vector> = (1..=8).map(|j| F2Vector::unit(8, j)).collect();
        let check = verify_spanning_family(8, &basis, rho1, 26).unwrap();
        assert!(check.ok);
        assert_eq!(check.incidence, 7);
        assert!(!verify_spanning_family(8, &basis, three_quarters(), 26).unwrap().ok);

        let copies = vec![F2Vector::unit(4, 1); 32];
        let check = verify_spanning_family(4, &copies, three_quarters(), 26).unwrap();
        assert!(!check.ok);
        assert_eq!(check.incidence, 32);
        assert!(!check.worst_hyperplane.get(0));
    }

    #[test]
    fn transform_scan_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in 1..=8 {
            for _ in 0..5 {
                let count = rng.gen_range(1..40);
                let vs: Vec<F2Vector> =
                    (0..count).map(|_| F2Vector::random_nonzero(d, &mut rng)).collect();
                let check = verify_spanning_family(d, &vs, three_quarters(), 26).unwrap();
                let (eta, inc) = brute_incidence(d, &vs);
                assert_eq!(check.incidence, inc);
                assert_eq!(check.worst_hyperplane.to_index().unwrap(), eta);
            }
        }
    }

    #[test]
    fn sampled_scan_agrees_when_it_sees_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let vs: Vec<F2Vector> = (0..48).map(|_| F2Vector::random_nonzero(6, &mut rng)).collect();
        let full = verify_spanning_family(6, &vs, three_quarters(), 26).unwrap();
        // 20000 samples over 63 hyperplanes hit the maximum with overwhelming probability
        let sampled = verify_spanning_sampled(6, &vs, three_quarters(), 20_000, 3).unwrap();
        assert_eq!(sampled.incidence, full.incidence);
        assert_eq!(sampled.worst_hyperplane, full.worst_hyperplane);
        assert_eq!(sampled.sampled, Some(20_000));
    }

    #[test]
    fn generate_examples() {
        let opts = GenerationOptions::default();
        let one = generate_spanning_family(1, 1, Epsilon::new(1, 1).unwrap(), 0, &opts).unwrap();
        assert_eq!(one.vectors, vec![F2Vector::unit(1, 1)]);

        let fam = generate_spanning_family(8, 64, three_quarters(), 42, &opts).unwrap();
        assert_eq!(fam.vectors.len(), 64);
        assert!(fam.vectors.iter().all(|v| !v.is_zero()));
        let (_, inc) = brute_incidence(8, &fam.vectors);
        assert!(inc <= 48);
        assert_eq!(fam.check.incidence, inc);

        assert!(generate_spanning_family(8, 4, three_quarters(), 0, &opts).is_err());
        assert!(generate_spanning_family(8, 64, Epsilon::new(1, 2).unwrap(), 0, &opts).is_err());
    }

    #[test]
    fn retry_cap_is_reported() {
        // three vectors of F2^3 always leave two of them in some hyperplane
        let opts = GenerationOptions {
            max_attempts: 3,
            ..Default::default()
        };
        let err = generate_spanning_family(3, 3, Epsilon::new(51, 100).unwrap(), 1, &opts)
            .unwrap_err();
        assert_eq!(err, Error::RetryCapExceeded(3));
    }

    fn s2() -> Instance {
        Instance::generate(2, 1, &GenerationOptions::default()).unwrap()
    }

    #[test]
    fn canonical_xi_small() {
        let inst = s2();
        assert_eq!(inst.xi.xi(1, 0), &F2Vector::unit(1, 1));
        assert_eq!(inst.xi.xi(2, 0), &F2Vector::unit(2, 1));
        assert_eq!(inst.xi.xi(2, 1), &F2Vector::unit(2, 2));

        let s3 = Instance::generate(3, 1, &GenerationOptions::default()).unwrap();
        let block = &s3.xi.blocks[2];
        assert_eq!(block.kind, XiKind::Basis);
        let mut seen: Vec<u64> = block.entries.iter().map(|v| v.to_index().unwrap()).collect();
        seen.sort();
        assert_eq!(seen, (0..8).map(|j| 1u64 << j).collect::<Vec<_>>());
    }

    #[test]
    fn s2_table_by_hand() {
        let inst = s2();
        let t = inst.table.as_ref().unwrap();
        // coordinate strings x1x2x3 000..111 -> 1, 1, 1/2, 1/2, 1/2, 0, 1/2, 0
        let by_coords: Vec<f64> = ["000", "001", "010", "011", "100", "101", "110", "111"]
            .iter()
            .map(|s| t.at(&F2Vector::from_bit_string(s).unwrap()).unwrap())
            .collect();
        assert_eq!(by_coords, vec![1.0, 1.0, 0.5, 0.5, 0.5, 0.0, 0.5, 0.0]);
        assert_eq!(t.values(), &[1.0, 0.5, 0.5, 0.5, 1.0, 0.0, 0.5, 0.0]);
        assert_eq!(t.mean(), 0.5);
        assert_eq!(t.grid(), Some(2));
    }

    #[test]
    fn pointwise_examples() {
        let inst = s2();
        let x = F2Vector::from_bit_string("101").unwrap();
        assert_eq!(eval_pointwise(&inst, &x).unwrap(), 0.0);
        assert_eq!(eval_pointwise(&inst, &F2Vector::zero(3)).unwrap(), 1.0);
        assert!(eval_pointwise(&inst, &F2Vector::zero(4)).is_err());
    }

    #[test]
    fn table_matches_pointwise_everywhere() {
        for s in 1..=3 {
            let inst = Instance::generate(s, 5, &GenerationOptions::default()).unwrap();
            let t = inst.table.as_ref().unwrap();
            for x in 0..1u64 << inst.n() {
                let v = F2Vector::from_index(inst.n(), x).unwrap();
                assert_eq!(eval_pointwise(&inst, &v).unwrap(), t.get(x));
                let scaled = t.get(x) * s as f64;
                assert_eq!(scaled, scaled.round());
            }
            // B_j tables average back to f
            let terms: Vec<FunctionTable> =
                (1..=s).map(|j| inst.term_table(j, 26).unwrap()).collect();
            for x in 0..1u64 << inst.n() {
                let sum: f64 = terms.iter().map(|b| b.get(x)).sum();
                assert_eq!(sum / s as f64, t.get(x));
            }
        }
    }

    #[test]
    fn custom_dims() {
        let opts = GenerationOptions::default();
        let blocks = BlockStructure::new(vec![2, 4]).unwrap();
        let inst = Instance::with_blocks(blocks, 0, &opts).unwrap();
        assert_eq!(inst.xi.blocks[0].entries, vec![F2Vector::unit(2, 1)]);
        assert_eq!(inst.xi.blocks[1].kind, XiKind::Basis);
        assert!(!inst.recurrence);

        // 2^{D_1} = 4 prefixes into F2^3 needs a random family
        let blocks = BlockStructure::new(vec![2, 3]).unwrap();
        let inst = Instance::with_blocks(blocks, 0, &opts).unwrap();
        match &inst.xi.blocks[1].kind {
            XiKind::Random(fam) => assert!(fam.check.incidence <= 3),
            other => panic!("unexpected {other:?}"),
        }

        let blocks = BlockStructure::new(vec![1, 1]).unwrap();
        assert!(Instance::with_blocks(blocks, 0, &opts).is_err());
    }
}
