//! Occurrence sets: the levels of the stage-`M` tower that belong to the
//! stage-`K₀` base. Their overlap counts are the exact Fourier coefficients
//! of the partial Riesz product over stages `K₀..M`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::construction::RankOneConstruction;
use crate::error::{Error, Result};
use crate::math::{self, Ratio};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccurrenceSet {
    pub base_stage: usize,
    pub ambient_stage: usize,
    /// `h_M`.
    pub height: u128,
    /// Sorted, distinct, all in `[0, h_M − h_{K₀}]`.
    pub levels: Vec<u128>,
}

impl OccurrenceSet {
    /// `S_{K₀,K₀} = {0}`, `S_{K₀,M+1} = ⋃_j (j·h_M + s(M,j) + S_{K₀,M})`.
    pub fn build(construction: &RankOneConstruction, base: usize, ambient: usize, cap: u128) -> Result<Self> {
        if ambient < base {
            return Err(Error::InvalidArgument(alloc::format!(
                "ambient stage {ambient} below base stage {base}"
            )));
        }
        let table = construction.heights_strict(ambient)?;
        let cuts = construction.cut_counts(ambient)?;
        let count = cuts[base..ambient]
            .iter()
            .try_fold(1u128, |acc, &m| acc.checked_mul(m as u128))
            .unwrap_or(u128::MAX);
        if count > cap {
            return Err(Error::CombinatorialCap { count, cap });
        }
        let mut levels = vec![0u128];
        for k in base..ambient {
            let h = table.heights[k];
            let shifts = construction.cumulative_spacers(k)?;
            let mut next = Vec::with_capacity(levels.len() * shifts.len());
            for (j, s) in shifts.into_iter().enumerate() {
                // j·h + s ≤ h_{k+1} − h; no overflow once heights are strict.
                let offset = j as u128 * h + s;
                next.extend(levels.iter().map(|&t| offset + t));
            }
            levels = next;
        }
        debug_assert!(levels.windows(2).all(|w| w[0] < w[1]));
        Ok(OccurrenceSet {
            base_stage: base,
            ambient_stage: ambient,
            height: table.heights[ambient],
            levels,
        })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    fn check_lag(&self, n: i128) -> Result<u128> {
        let a = n.unsigned_abs();
        if a >= self.height {
            return Err(Error::LagOutOfRange {
                lag: n,
                limit: self.height,
            });
        }
        Ok(a)
    }

    /// `|S ∩ (S + n)|` by a linear merge.
    pub fn overlap(&self, n: i128) -> Result<u128> {
        let lag = self.check_lag(n)?;
        Ok(overlap_count(&self.levels, lag))
    }

    /// `|S ∩ (S + n)| / |S|`.
    pub fn autocorrelation(&self, n: i128) -> Result<Autocorrelation> {
        let overlap = self.overlap(n)?;
        let ratio = Ratio::new(overlap, self.len() as u128);
        Ok(Autocorrelation {
            lag: n,
            overlap,
            ratio,
            value: ratio.to_f64(),
        })
    }

    /// Overlap over the levels that still have room for the shift:
    /// `|S ∩ (S + n)| / #{ℓ ∈ S : ℓ + |n| < h_M}`.
    pub fn corrected_autocorrelation(&self, n: i128) -> Result<Autocorrelation> {
        let lag = self.check_lag(n)?;
        let overlap = overlap_count(&self.levels, lag);
        let room = self.levels.partition_point(|&l| l + lag < self.height) as u128;
        let ratio = Ratio::new(overlap, room);
        Ok(Autocorrelation {
            lag: n,
            overlap,
            ratio,
            value: ratio.to_f64(),
        })
    }
}

fn overlap_count(levels: &[u128], lag: u128) -> u128 {
    let (mut i, mut j, mut count) = (0usize, 0usize, 0u128);
    while i < levels.len() && j < levels.len() {
        let shifted = levels[j] + lag;
        match levels[i].cmp(&shifted) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

pub fn occurrence_set(construction: &RankOneConstruction, base: usize, ambient: usize, cap: u128) -> Result<OccurrenceSet> {
    OccurrenceSet::build(construction, base, ambient, cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Autocorrelation {
    pub lag: i128,
    pub overlap: u128,
    pub ratio: Ratio,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomMass {
    pub base_stage: usize,
    pub ambient_stage: usize,
    pub lags: u128,
    /// Cesàro mean of the corrected autocorrelations.
    pub mass: f64,
    /// Cesàro mean of the plain `|S ∩ (S+n)|/|S|` values.
    pub raw_mass: f64,
}

/// `(1/L) Σ_{n<L}` of the autocorrelations of `S_{K₀,M}`: a Wiener estimate
/// of the spectral mass at `z = 1` for the base vector. The corrected form
/// divides each overlap by the levels that can still be shifted inside the
/// finite tower, which removes the edge loss of the plain form.
pub fn wiener_atom_mass(
    construction: &RankOneConstruction,
    base: usize,
    ambient: usize,
    lags: u128,
    cap: u128,
) -> Result<AtomMass> {
    let set = occurrence_set(construction, base, ambient, cap)?;
    if lags == 0 || lags > set.height {
        return Err(Error::InvalidArgument(alloc::format!(
            "lag count {lags} must lie in 1..={}",
            set.height
        )));
    }
    let mut corrected = Vec::with_capacity(lags as usize);
    let mut raw = Vec::with_capacity(lags as usize);
    for n in 0..lags {
        corrected.push(set.corrected_autocorrelation(n as i128)?.value);
        raw.push(set.autocorrelation(n as i128)?.value);
    }
    Ok(AtomMass {
        base_stage: base,
        ambient_stage: ambient,
        lags,
        mass: math::mean(&corrected),
        raw_mass: math::mean(&raw),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circlepoly::{
        fourier_coefficient, partial_product_density_range, sumset_exponents, UnitCircleGrid,
        DEFAULT_COMBINATORIAL_CAP,
    };
    use crate::construction::{MeasureTrendConfig, StageSpec};
    use proptest::prelude::*;

    const CAP: u128 = DEFAULT_COMBINATORIAL_CAP;

    #[test]
    fn chacon_sets() {
        let c = RankOneConstruction::chacon();
        assert_eq!(occurrence_set(&c, 0, 1, CAP).unwrap().levels, vec![0, 1, 3]);
        assert_eq!(
            occurrence_set(&c, 0, 2, CAP).unwrap().levels,
            vec![0, 1, 3, 4, 5, 7, 9, 10, 12]
        );
        for k in 0..4 {
            let s = occurrence_set(&c, k, k, CAP).unwrap();
            assert_eq!(s.levels, vec![0]);
        }
    }

    #[test]
    fn chacon_autocorrelations() {
        let c = RankOneConstruction::chacon();
        let s = occurrence_set(&c, 0, 1, CAP).unwrap();
        assert_eq!(s.autocorrelation(0).unwrap().ratio, Ratio::one());
        assert_eq!(s.autocorrelation(2).unwrap().ratio, Ratio::new(1, 3));
        assert_eq!(s.autocorrelation(-2).unwrap().ratio, Ratio::new(1, 3));
        assert!(s.autocorrelation(4).is_err());

        // brute force for S_{0,2} at lag 4: {4,5,7,9} ∪ … shifted pairs
        let s = occurrence_set(&c, 0, 2, CAP).unwrap();
        let brute = s
            .levels
            .iter()
            .filter(|&&x| s.levels.contains(&(x + 4)))
            .count() as u128;
        assert_eq!(s.overlap(4).unwrap(), brute);
        let density =
            partial_product_density_range(&c, 0, 2, UnitCircleGrid::aligned(64).unwrap()).unwrap();
        let dft = fourier_coefficient(&density, 4).unwrap();
        assert!((dft - s.autocorrelation(4).unwrap().value).abs() < 1e-12);
    }

    #[test]
    fn cap_enforced() {
        let c = RankOneConstruction::chacon();
        assert!(matches!(
            occurrence_set(&c, 0, 5, 100),
            Err(Error::CombinatorialCap { count: 243, cap: 100 })
        ));
    }

    #[test]
    fn cardinality_matches_total_measure() {
        let c = RankOneConstruction::chacon();
        let tm = c.total_measure(6, &MeasureTrendConfig::default()).unwrap();
        let h = c.heights(6).unwrap();
        for m in 0..=6 {
            let s = occurrence_set(&c, 0, m, CAP).unwrap();
            assert_eq!(s.len() as u128, h.cut_products[m]);
            assert_eq!(Ratio::new(s.height, s.len() as u128), tm.partials[m]);
        }
    }

    #[test]
    fn chacon_atom_mass() {
        let c = RankOneConstruction::chacon();
        let h5 = c.heights(5).unwrap().heights[5];
        let a = wiener_atom_mass(&c, 0, 6, h5, CAP).unwrap();
        assert!((a.mass - 2.0 / 3.0).abs() < 0.05 * 2.0 / 3.0, "{a:?}");
        assert!(a.raw_mass < a.mass);
        let one = wiener_atom_mass(&c, 0, 6, 1, CAP).unwrap();
        assert_eq!((one.mass, one.raw_mass), (1.0, 1.0));
    }

    #[test]
    fn zero_spacer_atom_mass_is_one() {
        let c = RankOneConstruction::explicit("flat", vec![StageSpec::plain(3); 6]);
        let h5 = c.heights(5).unwrap().heights[5];
        let a = wiener_atom_mass(&c, 0, 6, h5, CAP).unwrap();
        assert_eq!(a.mass, 1.0);
    }

    fn small_construction() -> impl Strategy<Value = RankOneConstruction> {
        proptest::collection::vec((2i64..=4, proptest::collection::vec(0i64..=5, 4)), 1..5).prop_map(
            |raw| {
                let stages = raw
                    .into_iter()
                    .map(|(m, sp)| StageSpec::new(m, sp[..m as usize].to_vec()))
                    .collect();
                RankOneConstruction::explicit("random", stages)
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn oracle_identity(c in small_construction()) {
            let m = c.stages.len();
            let s = occurrence_set(&c, 0, m, CAP).unwrap();
            let grid = UnitCircleGrid::exact_for(s.height, 8).unwrap();
            let d = partial_product_density_range(&c, 0, m, grid).unwrap();
            prop_assert!(d.exact);
            for n in 0..s.height.min(200) {
                let a = s.autocorrelation(n as i128).unwrap().value;
                let f = fourier_coefficient(&d, n as i64).unwrap();
                prop_assert!((a - f).abs() < 1e-9, "lag {} set {} dft {}", n, a, f);
            }
        }

        #[test]
        fn levels_equal_sumset(c in small_construction()) {
            let m = c.stages.len();
            let s = occurrence_set(&c, 0, m, CAP).unwrap();
            let stages: Vec<usize> = (0..m).collect();
            let sums = sumset_exponents(&c, &stages, CAP).unwrap();
            prop_assert!(sums.distinct);
            prop_assert_eq!(&s.levels, &sums.sums);
            let h0 = c.heights(0).unwrap().heights[0];
            prop_assert!(*s.levels.last().unwrap() <= s.height - h0);
        }

        #[test]
        fn translation_structure(c in small_construction()) {
            let m = c.stages.len();
            prop_assume!(m >= 2);
            let big = occurrence_set(&c, 0, m, CAP).unwrap();
            let small = occurrence_set(&c, 0, m - 1, CAP).unwrap();
            let head: Vec<u128> = big.levels.iter().copied().filter(|&l| l < small.height).collect();
            prop_assert_eq!(head, small.levels);
        }
    }
}
