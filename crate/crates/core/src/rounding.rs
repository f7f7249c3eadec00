//! Randomized rounding to `{0,1}`-valued functions.
//!
//! `S(x) = 1` with probability `f(x)`, independently. For a fixed affine `A`
//! and character `eta`, Hoeffding gives
//! `P(|S|_A^(eta) - f|_A^(eta)| > tau) <= 2 exp(-tau^2 |A| / 2)`.

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::Epsilon;
use crate::fourier::{restricted_coefficient, CosetLayout, FunctionTable};
use crate::gf2::{random_subspace, AffineSubspace, F2Vector, Subspace, SubspacesOfDim};
use crate::rng::{self, Purpose};

const CHUNK: u64 = 1 << 14;

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Rounds each value independently. Point `x` always uses the `x`-th draw of
/// the rounding stream, so the result does not depend on evaluation order.
pub fn round_to_binary(f: &FunctionTable, seed: u64) -> Result<FunctionTable> {
    let base = rng::stream(seed, Purpose::Rounding, 0);
    let len = f.values().len() as u64;
    let chunks: Vec<Vec<f64>> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = base.clone();
            // each u64 draw consumes two 32-bit words
            rng.set_word_pos(2 * (c * CHUNK) as u128);
            (c * CHUNK..((c + 1) * CHUNK).min(len))
                .map(|x| if uniform(&mut rng) < f.get(x) { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    FunctionTable::new(f.n(), chunks.concat())?.with_grid(1)
}

/// Which `(A, eta)` pairs a deviation report visits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeviationFamilies {
    /// Every coset of every subspace of codimension `<= codim_max`, at its
    /// worst character.
    pub codim_max: Option<usize>,
    /// Random cosets of codimension `<= random_codim_max` with random characters.
    pub random_pairs: usize,
    pub random_codim_max: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviationRecord {
    pub coset: AffineSubspace,
    pub eta: F2Vector,
    pub original: f64,
    pub rounded: f64,
    pub deviation: f64,
    /// Sampled rather than taken from the structured family.
    pub sampled: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundingReport {
    pub tau: Epsilon,
    pub n: usize,
    /// `4 n^2 / tau^2`.
    pub size_threshold: f64,
    /// Smallest `log2 |A|` meeting the threshold.
    pub min_dim: usize,
    pub records: Vec<DeviationRecord>,
    pub max_deviation: f64,
    pub exceedances: u64,
    /// `log10 (2 exp(-tau^2 |A| / 2))` for the smallest tested `A`.
    pub hoeffding_log10: Option<f64>,
    /// `log2` of the union-bound pair count `2^(n^2 + n)`; never enumerated.
    pub union_bound_log2: u64,
}

impl RoundingReport {
    pub fn mean_deviation(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(|r| r.deviation).sum::<f64>() / self.records.len() as f64
    }
}

/// `4 n^2 / tau^2` and the least dimension reaching it.
pub fn size_threshold(n: usize, tau: Epsilon) -> (f64, usize) {
    let t = 4.0 * (n * n) as f64 / (tau.value() * tau.value());
    (t, t.log2().ceil().max(0.0) as usize)
}

pub fn hoeffding_log10(tau: f64, size_log2: usize) -> f64 {
    let size = (size_log2 as f64).exp2();
    (2.0f64).log10() - tau * tau * size / 2.0 * std::f64::consts::LOG10_E
}

/// Worst deviation over all characters, for each coset of `h`.
fn coset_scan(f: &FunctionTable, s: &FunctionTable, h: &Subspace) -> Result<Vec<DeviationRecord>> {
    let layout = CosetLayout::new(h)?;
    let size = 1usize << layout.dim();
    let rows = layout.map_cosets(|buf, m| {
        let r = layout.representative(m);
        let mut other = vec![0.0; size];
        layout.spectrum(f, r, buf);
        layout.spectrum(s, r, &mut other);
        // the sign relating the two spectra to signed coefficients is shared
        let mut worst = (0usize, -1.0f64);
        for t in 0..size {
            let d = (buf[t] - other[t]).abs();
            if d > worst.1 {
                worst = (t, d);
            }
        }
        let t = worst.0;
        (r, t, layout.signed(r, t, buf[t]), layout.signed(r, t, other[t]), worst.1)
    });
    rows.into_iter()
        .map(|(r, t, original, rounded, deviation)| {
            Ok(DeviationRecord {
                coset: AffineSubspace::new(h.clone(), &F2Vector::from_index(f.n(), r)?)?,
                eta: F2Vector::from_index(f.n(), layout.class_reps[t])?,
                original,
                rounded,
                deviation,
                sampled: false,
            })
        })
        .collect()
}

/// Compares restricted coefficients of `f` and its rounding `s` on the chosen family,
/// keeping only cosets with `|A| >= 4 n^2 / tau^2`.
pub fn deviation_report(
    f: &FunctionTable,
    s: &FunctionTable,
    tau: Epsilon,
    families: DeviationFamilies,
) -> Result<RoundingReport> {
    let n = f.n();
    if s.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: s.n(),
        });
    }
    let (threshold, min_dim) = size_threshold(n, tau);
    let mut records = Vec::new();
    if let Some(c) = families.codim_max {
        for codim in 0..=c.min(n) {
            if n - codim < min_dim {
                break;
            }
            for dual in SubspacesOfDim::new(n, codim)? {
                records.extend(coset_scan(f, s, &dual.orthogonal_complement())?);
            }
        }
    }
    if families.random_pairs > 0 {
        let max_codim = families.random_codim_max.min(n.saturating_sub(min_dim));
        if n < min_dim {
            return Err(Error::InvalidParameter(format!(
                "no subspace of F2^{n} has 2^{min_dim} >= {threshold} elements"
            )));
        }
        let mut rng = rng::stream(families.seed, Purpose::RoundingFamilies, 0);
        let pairs = (0..families.random_pairs)
            .map(|_| {
                use rand::Rng;
                let codim = rng.gen_range(0..=max_codim);
                let h = random_subspace(n, n - codim, &mut rng)?;
                let g = F2Vector::random(n, &mut rng);
                let eta = F2Vector::random(n, &mut rng);
                Ok((AffineSubspace::new(h, &g)?, eta))
            })
            .collect::<Result<Vec<_>>>()?;
        let sampled = pairs
            .into_par_iter()
            .map(|(coset, eta)| {
                let original = restricted_coefficient(f, &coset, &eta)?;
                let rounded = restricted_coefficient(s, &coset, &eta)?;
                Ok(DeviationRecord {
                    coset,
                    eta,
                    original,
                    rounded,
                    deviation: (original - rounded).abs(),
                    sampled: true,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        records.extend(sampled);
    }
    let max_deviation = records.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let exceedances = records.iter().filter(|r| r.deviation > tau.value()).count() as u64;
    let hoeffding = records
        .iter()
        .map(|r| r.coset.size_log2())
        .min()
        .map(|k| hoeffding_log10(tau.value(), k));
    Ok(RoundingReport {
        tau,
        n,
        size_threshold: threshold,
        min_dim,
        records,
        max_deviation,
        exceedances,
        hoeffding_log10: hoeffding,
        union_bound_log2: (n * n + n) as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::check_subspace_regularity;
    use crate::gf2::enumerate_all_subspaces;
    use crate::instance::{GenerationOptions, Instance};
    use rand::{Rng, SeedableRng};

    fn smooth(n: usize, seed: u64) -> FunctionTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let etas: Vec<(u64, f64)> = (0..4)
            .map(|_| (rng.gen_range(1..1u64 << n), rng.gen_range(-0.1..0.1)))
            .collect();
        FunctionTable::from_fn(n, 26, move |x| {
            0.5 + etas
                .iter()
                .map(|&(e, a)| if (x & e).count_ones() % 2 == 0 { a } else { -a })
                .sum::<f64>()
        })
        .unwrap()
    }

    #[test]
    fn constants_round_to_themselves() {
        let one = round_to_binary(&FunctionTable::constant(10, 1.0).unwrap(), 3).unwrap();
        assert!(one.values().iter().all(|&v| v == 1.0));
        let zero = round_to_binary(&FunctionTable::constant(10, 0.0).unwrap(), 3).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn half_rounds_to_half_on_average() {
        let s = round_to_binary(&FunctionTable::constant(16, 0.5).unwrap(), 7).unwrap();
        assert!(s.values().iter().all(|&v| v == 0.0 || v == 1.0));
        assert!((s.mean() - 0.5).abs() < 0.02);
        assert_eq!(s, round_to_binary(&FunctionTable::constant(16, 0.5).unwrap(), 7).unwrap());
    }

    #[test]
    fn per_point_unbiased() {
        let f = smooth(4, 2);
        let mut sums = [0.0; 16];
        for seed in 0..1000 {
            let s = round_to_binary(&f, seed).unwrap();
            for (acc, v) in sums.iter_mut().zip(s.values()) {
                *acc += v;
            }
        }
        for (x, acc) in sums.iter().enumerate() {
            assert!((acc / 1000.0 - f.get(x as u64)).abs() < 0.05);
        }
    }

    #[test]
    fn chunking_does_not_change_draws() {
        // 2^15 points span two chunks; the second must continue the first stream
        let f = FunctionTable::constant(15, 0.5).unwrap();
        let s = round_to_binary(&f, 11).unwrap();
        let mut rng = rng::stream(11, Purpose::Rounding, 0);
        for x in 0..1u64 << 15 {
            let expect = if uniform(&mut rng) < 0.5 { 1.0 } else { 0.0 };
            assert_eq!(s.get(x), expect);
        }
    }

    #[test]
    fn binary_input_has_zero_deviation() {
        let s = round_to_binary(&smooth(10, 4), 9).unwrap();
        let fams = DeviationFamilies {
            codim_max: Some(1),
            random_pairs: 20,
            random_codim_max: 1,
            seed: 1,
        };
        let report = deviation_report(&s, &s, Epsilon::new(1, 1).unwrap(), fams).unwrap();
        assert!(!report.records.is_empty());
        assert_eq!(report.max_deviation, 0.0);
        assert_eq!(report.exceedances, 0);
    }

    #[test]
    fn threshold_filters_small_cosets() {
        let (t, k) = size_threshold(11, Epsilon::new(1, 2).unwrap());
        assert_eq!((t, k), (1936.0, 11));
        let (_, k) = size_threshold(20, "0.16".parse().unwrap());
        assert_eq!(k, 16);
    }

    #[test]
    fn s3_full_space() {
        let inst = Instance::generate(3, 1, &GenerationOptions::default()).unwrap();
        let f = inst.table().unwrap();
        let s = round_to_binary(f, 1).unwrap();
        let fams = DeviationFamilies {
            codim_max: Some(3),
            random_pairs: 0,
            random_codim_max: 0,
            seed: 0,
        };
        let report = deviation_report(f, &s, Epsilon::new(1, 2).unwrap(), fams).unwrap();
        // only the whole space meets 2048 >= 1936
        assert_eq!(report.records.len(), 1);
        assert!(report.max_deviation <= 0.5);
    }

    #[test]
    fn structured_records_match_direct_coefficients() {
        let f = smooth(10, 6);
        let s = round_to_binary(&f, 2).unwrap();
        let fams = DeviationFamilies {
            codim_max: Some(1),
            random_pairs: 0,
            random_codim_max: 0,
            seed: 0,
        };
        let report = deviation_report(&f, &s, Epsilon::new(1, 1).unwrap(), fams).unwrap();
        assert_eq!(report.records.len(), 1 + 1023 * 2);
        for r in report.records.iter().step_by(17) {
            let a = restricted_coefficient(&f, &r.coset, &r.eta).unwrap();
            let b = restricted_coefficient(&s, &r.coset, &r.eta).unwrap();
            assert!((a - r.original).abs() < 1e-12);
            assert!((b - r.rounded).abs() < 1e-12);
        }
    }

    #[test]
    fn s2_rounding_spot_check() {
        // at n = 3 the size threshold is vacuous; this only checks that some
        // rounding of the s = 2 instance stays irregular on every nonzero H at eps/2
        let inst = Instance::generate(2, 1, &GenerationOptions::default()).unwrap();
        let f = inst.table().unwrap();
        let half = Epsilon::new(1, 64).unwrap();
        let found = (0..64).any(|seed| {
            let s = round_to_binary(f, seed).unwrap();
            enumerate_all_subspaces(3).unwrap().all(|h| {
                let regular = check_subspace_regularity(&s, &h, half).unwrap().is_regular();
                regular == h.is_zero()
            })
        });
        assert!(found);
    }
}
