//! Affinity and Hellinger distance of grid densities, and the finite-stage
//! inequalities built on them: the McGehee-type bound, the fractional-mean
//! bound over residue classes of stages, the `Q`-sequence profile and the
//! Kilmer–Saeki witness.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::circlepoly::{GridDensity, StageGridTable};
use crate::diagnostics::Verdict;
use crate::error::{Error, Result};
use crate::math;

/// Slack allowed in every asserted inequality.
pub const INEQUALITY_TOL: f64 = 1e-9;
/// Samples of `Q_n` below this make `1/Q_n` unusable.
pub const DIVISION_FLOOR: f64 = 1e-150;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffinityResult {
    /// `G = mean √(f g)`.
    pub affinity: f64,
    /// `H = √(2(1 − G))`.
    pub hellinger: f64,
}

impl AffinityResult {
    fn from_affinity(g: f64) -> Self {
        AffinityResult {
            affinity: g,
            hellinger: math::sqrt((2.0 * (1.0 - g)).max(0.0)),
        }
    }
}

pub fn affinity_hellinger(f: &GridDensity, g: &GridDensity) -> Result<AffinityResult> {
    if f.grid != g.grid || f.values.len() != g.values.len() {
        return Err(Error::GridMismatch);
    }
    let prod: Vec<f64> = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| math::sqrt(a * b))
        .collect();
    Ok(AffinityResult::from_affinity(math::mean(&prod)))
}

/// Affinity with the uniform density: `mean √f`.
pub fn affinity_to_uniform(f: &GridDensity) -> AffinityResult {
    AffinityResult::from_affinity(math::mean_by(&f.values, math::sqrt))
}

/// One side-by-side comparison `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `rhs − lhs`.
    pub margin: f64,
    /// Grid means were exact; otherwise the check is an estimate only.
    pub exact: bool,
}

impl InequalityCheck {
    fn new(lhs: f64, rhs: f64, exact: bool) -> Self {
        InequalityCheck {
            lhs,
            rhs,
            holds: lhs <= rhs + INEQUALITY_TOL,
            margin: rhs - lhs,
            exact,
        }
    }
}

/// `(∫ ∏_{k∈stages} |P_k|)² ≤ ∫|P_{k₀}|` for a stage `k₀` among `stages`.
pub fn mcgehee_check(table: &StageGridTable, stages: &[usize], k0: usize) -> Result<InequalityCheck> {
    if !stages.contains(&k0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "stage {k0} is not among the product stages"
        )));
    }
    let q = math::mean(&table.product_modulus(stages)?);
    let rhs = math::mean(table.modulus(k0)?);
    Ok(InequalityCheck::new(q * q, rhs, table.exact_for(stages)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalMeanCheck {
    pub classes: usize,
    /// `∫ Q_K^{1/k}` against `∏_{i<k} (∫|P_i|)^{1/(2k)}`.
    pub check: InequalityCheck,
    /// `∏_r (∫Q^{(r)})^{1/k}`, the Hölder step between the two sides.
    pub holder_middle: f64,
}

/// Splits stages `0..count` by residue mod `classes` and bounds
/// `∫ Q^{1/k}` by Hölder and the McGehee bound inside each class.
pub fn fractional_mean_check(table: &StageGridTable, count: usize, classes: usize) -> Result<FractionalMeanCheck> {
    if classes == 0 || classes > count {
        return Err(Error::InvalidArgument(alloc::format!(
            "class count {classes} must lie in 1..={count}"
        )));
    }
    let stages: Vec<usize> = (0..count).collect();
    let k = classes as f64;
    let q = table.product_modulus(&stages)?;
    let lhs = math::mean_by(&q, |v| math::powf(v, 1.0 / k));
    let mut middle = 1.0;
    let mut rhs = 1.0;
    for r in 0..classes {
        let class: Vec<usize> = (r..count).step_by(classes).collect();
        middle *= math::powf(math::mean(&table.product_modulus(&class)?), 1.0 / k);
        rhs *= math::powf(math::mean(table.modulus(r)?), 1.0 / (2.0 * k));
    }
    Ok(FractionalMeanCheck {
        classes,
        check: InequalityCheck::new(lhs, rhs, table.exact_for(&stages)?),
        holder_middle: middle,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseMassCheck {
    pub n: usize,
    pub m: usize,
    /// `∫ (1/Q_n) Q_M² dλ`; `None` when `Q_n` nearly vanishes somewhere.
    pub value: Option<f64>,
    pub skipped: bool,
    /// `value ≤ 1 + tol`.
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QSequenceProfile {
    pub ks: Vec<usize>,
    /// `∫ Q_K dλ` with `Q_K = ∏_{k<K} |P_k|`.
    pub q_integrals: Vec<f64>,
    /// `(∫|P_0|)^{1/2}`.
    pub mcgehee_bound: f64,
    pub inverse_mass_checks: Vec<InverseMassCheck>,
    /// Whether the `q_integrals` keep falling.
    pub singularity: Verdict,
    pub exact: bool,
}

impl QSequenceProfile {
    pub fn within_bound(&self) -> bool {
        self.q_integrals
            .iter()
            .zip(&self.ks)
            .all(|(&q, &k)| k == 0 || q <= self.mcgehee_bound + INEQUALITY_TOL)
    }
}

/// Relative drop of the last `q_integral` below which the trend is not
/// called decreasing.
pub const Q_TREND_MIN_DROP: f64 = 1e-3;

pub fn q_sequence(table: &StageGridTable, ks: &[usize], pairs: &[(usize, usize)]) -> Result<QSequenceProfile> {
    let mut q_integrals = Vec::with_capacity(ks.len());
    let mut exact = true;
    for &k in ks {
        let stages: Vec<usize> = (0..k).collect();
        q_integrals.push(math::mean(&table.product_modulus(&stages)?));
        exact &= table.exact_for(&stages)?;
    }
    let mcgehee_bound = math::sqrt(math::mean(table.modulus(0)?));
    let mut checks = Vec::with_capacity(pairs.len());
    for &(n, m) in pairs {
        if m < n {
            return Err(Error::InvalidArgument(alloc::format!("pair ({n}, {m}) needs M ≥ n")));
        }
        let qn = table.product_modulus(&(0..n).collect::<Vec<_>>())?;
        let qm2 = table.product_power(&(0..m).collect::<Vec<_>>(), 2)?;
        let skipped = qn.iter().any(|&v| v < DIVISION_FLOOR);
        let value = (!skipped).then(|| {
            let ratio: Vec<f64> = qn.iter().zip(&qm2).map(|(a, b)| b / a).collect();
            math::mean(&ratio)
        });
        checks.push(InverseMassCheck {
            n,
            m,
            value,
            skipped,
            bounded: value.is_some_and(|v| v <= 1.0 + INEQUALITY_TOL),
        });
    }
    let singularity = q_trend(&q_integrals);
    Ok(QSequenceProfile {
        ks: ks.to_vec(),
        q_integrals,
        mcgehee_bound,
        inverse_mass_checks: checks,
        singularity,
        exact,
    })
}

fn q_trend(q: &[f64]) -> Verdict {
    if q.len() < 2 {
        return Verdict::Undetermined;
    }
    let [a, b] = [q[q.len() - 2], q[q.len() - 1]];
    if b > a + INEQUALITY_TOL {
        return Verdict::Inconsistent;
    }
    let decreasing = q.windows(2).all(|w| w[1] < w[0]);
    if decreasing && (a - b) >= Q_TREND_MIN_DROP * a {
        Verdict::Consistent
    } else {
        Verdict::Undetermined
    }
}

/// `(∫ f dρ)(∫ (1/f) dτ)` on the grid; points where `τ` vanishes are skipped
/// in the second factor.
pub fn kilmer_saeki_witness(f: &[f64], rho: &GridDensity, tau: &GridDensity) -> Result<f64> {
    let n = rho.values.len();
    if f.len() != n || tau.values.len() != n || rho.grid != tau.grid {
        return Err(Error::GridMismatch);
    }
    let mut inv = Vec::with_capacity(n);
    for (i, (&fi, &ti)) in f.iter().zip(&tau.values).enumerate() {
        if ti > 0.0 {
            if !(fi > 0.0) {
                return Err(Error::WitnessUndefined { index: i });
            }
            inv.push(ti / fi);
        } else {
            inv.push(0.0);
        }
    }
    let first: Vec<f64> = f.iter().zip(&rho.values).map(|(a, b)| a * b).collect();
    Ok(math::mean(&first) * math::mean(&inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circlepoly::{SparseCirclePolynomial, UnitCircleGrid, DEFAULT_COMBINATORIAL_CAP};
    use crate::construction::{RankOneConstruction, StageSpec};
    use alloc::vec;
    use proptest::prelude::*;

    const CAP: u128 = DEFAULT_COMBINATORIAL_CAP;

    fn halves(n: usize) -> (GridDensity, GridDensity) {
        let grid = UnitCircleGrid::half_step(n).unwrap();
        let left = (0..n).map(|i| if i < n / 2 { 2.0 } else { 0.0 }).collect();
        let right = (0..n).map(|i| if i < n / 2 { 0.0 } else { 2.0 }).collect();
        (
            GridDensity::from_samples(grid, left).unwrap(),
            GridDensity::from_samples(grid, right).unwrap(),
        )
    }

    fn chacon_table(count: usize, n: usize) -> StageGridTable {
        StageGridTable::build_range(
            &RankOneConstruction::chacon(),
            count,
            UnitCircleGrid::half_step(n).unwrap(),
            CAP,
        )
        .unwrap()
    }

    #[test]
    fn affinity_examples() {
        let grid = UnitCircleGrid::half_step(1 << 16).unwrap();
        let p = SparseCirclePolynomial::new(vec![0, 1]).unwrap();
        let h = GridDensity::from_polynomial(&p, grid);
        let same = affinity_hellinger(&h, &h).unwrap();
        assert!((same.affinity - 1.0).abs() < 1e-12 && same.hellinger < 1e-5);

        let (l, r) = halves(64);
        let apart = affinity_hellinger(&l, &r).unwrap();
        assert_eq!(apart.affinity, 0.0);
        assert!((apart.hellinger - core::f64::consts::SQRT_2).abs() < 1e-15);

        let flat = GridDensity::constant(grid, 1.0);
        let g = affinity_hellinger(&flat, &h).unwrap();
        assert!((g.affinity - 2.0 * core::f64::consts::SQRT_2 / core::f64::consts::PI).abs() < 1e-4);
        assert_eq!(affinity_to_uniform(&h).affinity, g.affinity);

        let other = GridDensity::constant(UnitCircleGrid::aligned(1 << 16).unwrap(), 1.0);
        assert_eq!(affinity_hellinger(&flat, &other).unwrap_err(), Error::GridMismatch);
    }

    #[test]
    fn mcgehee_examples() {
        let t = chacon_table(5, 1 << 12);
        let single = mcgehee_check(&t, &[0], 0).unwrap();
        assert!(single.holds && single.margin > 0.0);
        let three = mcgehee_check(&t, &[0, 1, 2], 0).unwrap();
        assert!(three.holds && three.margin > 0.0 && three.exact);
        let sub = mcgehee_check(&t, &[0, 2, 4], 0).unwrap();
        assert!(sub.holds && sub.exact);
        assert!(mcgehee_check(&t, &[1, 2], 0).is_err());
    }

    #[test]
    fn fractional_mean_examples() {
        let t = chacon_table(6, 1 << 13);
        let one = fractional_mean_check(&t, 6, 1).unwrap();
        let mc = mcgehee_check(&t, &[0, 1, 2, 3, 4, 5], 0).unwrap();
        assert!((one.check.lhs - mc.lhs.sqrt()).abs() < 1e-12);
        assert!((one.check.rhs - mc.rhs.sqrt()).abs() < 1e-12);
        for k in [2, 3] {
            let r = fractional_mean_check(&t, 6, k).unwrap();
            assert!(r.check.holds && r.check.exact, "k={k} {r:?}");
            assert!(r.check.lhs <= r.holder_middle + 1e-12);
            assert!(r.holder_middle <= r.check.rhs + 1e-12);
        }
        assert!(fractional_mean_check(&t, 6, 7).is_err());
    }

    #[test]
    fn q_sequence_examples() {
        let t = chacon_table(8, 1 << 15);
        let ks: Vec<usize> = (1..=8).collect();
        let prof = q_sequence(&t, &ks, &[(1, 3)]).unwrap();
        assert!(prof.within_bound());
        assert!(prof.exact);
        let chk = &prof.inverse_mass_checks[0];
        assert!(!chk.skipped && chk.bounded);
        // ∫(1/Q_1) Q_3² = ∫|P_0| |P_1 P_2|², computed without division
        let direct: Vec<f64> = t
            .modulus(0)
            .unwrap()
            .iter()
            .zip(t.product_power(&[1, 2], 2).unwrap())
            .map(|(a, b)| a * b)
            .collect();
        assert!((chk.value.unwrap() - math::mean(&direct)).abs() < 1e-12);
        assert_eq!(prof.singularity, Verdict::Consistent);

        let empty = q_sequence(&t, &[0], &[]).unwrap();
        assert_eq!(empty.q_integrals, vec![1.0]);
    }

    #[test]
    fn kilmer_saeki_examples() {
        let (rho, tau) = halves(64);
        let eps = 0.1;
        let f: Vec<f64> = (0..64).map(|i| if i < 32 { eps } else { 1.0 / eps }).collect();
        let w = kilmer_saeki_witness(&f, &rho, &tau).unwrap();
        assert!((w - eps * eps).abs() < 1e-15);

        let grid = UnitCircleGrid::half_step(64).unwrap();
        let flat = GridDensity::constant(grid, 1.0);
        assert_eq!(kilmer_saeki_witness(&vec![1.0; 64], &flat, &flat).unwrap(), 1.0);

        let mut bad = vec![1.0; 64];
        bad[40] = 0.0;
        assert_eq!(
            kilmer_saeki_witness(&bad, &rho, &tau).unwrap_err(),
            Error::WitnessUndefined { index: 40 }
        );
        // zero on the support of rho only is fine
        bad[40] = 1.0;
        bad[3] = 0.0;
        assert!(kilmer_saeki_witness(&bad, &rho, &tau).is_ok());
    }

    fn positive_density(seed: &[f64], grid: UnitCircleGrid) -> GridDensity {
        let n = grid.len();
        let values: Vec<f64> = (0..n).map(|i| seed[i * seed.len() / n] + 0.01).collect();
        let mean = math::mean(&values);
        GridDensity::from_samples(grid, values.iter().map(|v| v / mean).collect()).unwrap()
    }

    fn random_construction() -> impl Strategy<Value = RankOneConstruction> {
        proptest::collection::vec((2i64..=5, proptest::collection::vec(0i64..=6, 5)), 1..=5).prop_map(
            |raw| {
                RankOneConstruction::explicit(
                    "random",
                    raw.into_iter()
                        .map(|(m, sp)| StageSpec::new(m, sp[..m as usize].to_vec()))
                        .collect(),
                )
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn affinity_range_symmetry_metric(
            a in proptest::collection::vec(0.0f64..4.0, 16),
            b in proptest::collection::vec(0.0f64..4.0, 16),
            c in proptest::collection::vec(0.0f64..4.0, 16),
        ) {
            let grid = UnitCircleGrid::half_step(64).unwrap();
            let (f, g, h) = (positive_density(&a, grid), positive_density(&b, grid), positive_density(&c, grid));
            let fg = affinity_hellinger(&f, &g).unwrap();
            let gf = affinity_hellinger(&g, &f).unwrap();
            prop_assert_eq!(fg.affinity, gf.affinity);
            prop_assert!(fg.affinity >= 0.0 && fg.affinity <= 1.0 + 1e-12);
            prop_assert!((fg.hellinger - (2.0 * (1.0 - fg.affinity)).max(0.0).sqrt()).abs() < 1e-12);
            let gh = affinity_hellinger(&g, &h).unwrap();
            let fh = affinity_hellinger(&f, &h).unwrap();
            prop_assert!(fh.hellinger <= fg.hellinger + gh.hellinger + 1e-9);
            prop_assert!(affinity_to_uniform(&f).affinity <= math::sqrt(f.mean()) + 1e-12);
        }

        #[test]
        fn witness_scale_invariant(
            f in proptest::collection::vec(0.1f64..10.0, 64),
            scale in 0.01f64..100.0,
        ) {
            let (rho, tau) = halves(64);
            let scaled: Vec<f64> = f.iter().map(|v| v * scale).collect();
            let a = kilmer_saeki_witness(&f, &rho, &tau).unwrap();
            let b = kilmer_saeki_witness(&scaled, &rho, &tau).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }

        #[test]
        fn inequalities_hold_on_random_constructions(c in random_construction()) {
            let count = c.stages.len();
            let h = c.heights(count).unwrap().heights[count];
            let grid = UnitCircleGrid::exact_for(h, 1 << 10).unwrap();
            let t = StageGridTable::build_range(&c, count, grid, CAP).unwrap();
            for k in 1..=count {
                let stages: Vec<usize> = (0..k).collect();
                let chk = mcgehee_check(&t, &stages, 0).unwrap();
                prop_assert!(chk.exact && chk.holds && chk.margin >= -INEQUALITY_TOL);
            }
            for classes in 1..=count.min(3) {
                prop_assert!(fractional_mean_check(&t, count, classes).unwrap().check.holds);
            }
        }
    }
}
