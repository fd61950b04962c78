//! Data-parallel batch work under a bounded rayon pool.

use std::collections::BTreeSet;
use std::ops::Range;

use rayon::prelude::*;
use riesz_one_core::circlepoly::{fourier_coefficient, partial_product_density_range};
use riesz_one_core::diagnostics::{bourgain_gap, BourgainGap};
use riesz_one_core::rng::{stage_counter, uniform_inclusive, word};
use riesz_one_core::{OccurrenceSet, RankOneConstruction, UnitCircleGrid};
use serde::Serialize;

use crate::error::{AppError, AppResult};

/// Runs `job` on a pool of `threads` workers (`None` = available cores).
pub fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> AppResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(AppError::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| AppError::Pool(e.to_string()))?;
    Ok(pool.install(job))
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub lag: i64,
    pub autocorrelation: f64,
    pub fourier: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheck {
    pub base_stage: usize,
    pub ambient_stage: usize,
    pub grid_n: usize,
    pub rows: Vec<OracleRow>,
    pub max_abs_deviation: f64,
}

/// Compares the occurrence-set autocorrelation with the DFT coefficient of
/// `∏_{base ≤ k < ambient} |P_k|²` at every lag in `lags`.
pub fn oracle_check(
    construction: &RankOneConstruction,
    base: usize,
    ambient: usize,
    grid: UnitCircleGrid,
    lags: Range<i64>,
    cap: u128,
) -> AppResult<OracleCheck> {
    let set = OccurrenceSet::build(construction, base, ambient, cap)?;
    let density = partial_product_density_range(construction, base, ambient, grid)?;
    let rows = lags
        .into_par_iter()
        .map(|n| {
            let auto = set.autocorrelation(n as i128)?.value;
            let fourier = fourier_coefficient(&density, n)?;
            Ok(OracleRow {
                lag: n,
                autocorrelation: auto,
                fourier,
                deviation: (auto - fourier).abs(),
            })
        })
        .collect::<riesz_one_core::Result<Vec<_>>>()?;
    let max_abs_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(OracleCheck {
        base_stage: base,
        ambient_stage: ambient,
        grid_n: grid.len(),
        rows,
        max_abs_deviation,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BourgainStudy {
    pub seed: u64,
    pub gaps: Vec<BourgainGap>,
    pub min_gap: f64,
    pub all_strict: bool,
}

/// Set `index`: size `n` uniform in `sizes`, then `n` distinct exponents
/// uniform in `[0, span·n)`, all drawn from the counter stream of `seed`.
pub fn random_exponent_set(seed: u64, index: usize, sizes: &Range<usize>, span: u128) -> Vec<u128> {
    let mut draw = 0usize;
    let mut next = |bound: u128| {
        let x = word(seed, stage_counter(index, draw));
        draw += 1;
        uniform_inclusive(x, bound).expect("bounds stay below 2^64")
    };
    let n = sizes.start + next((sizes.end - sizes.start - 1) as u128) as usize;
    let top = span * n as u128 - 1;
    let mut set = BTreeSet::new();
    while set.len() < n {
        set.insert(next(top));
    }
    set.into_iter().collect()
}

pub fn bourgain_study(seed: u64, sets: usize, sizes: Range<usize>, span: u128, min_grid: usize) -> AppResult<BourgainStudy> {
    if sizes.start < 2 || sizes.is_empty() {
        return Err(AppError::Usage(format!(
            "set sizes {}..{} must be a nonempty range starting at 2 or more",
            sizes.start, sizes.end
        )));
    }
    if span == 0 {
        return Err(AppError::Usage("span must be positive".into()));
    }
    let gaps = (0..sets)
        .into_par_iter()
        .map(|i| bourgain_gap(&random_exponent_set(seed, i, &sizes, span), min_grid))
        .collect::<riesz_one_core::Result<Vec<_>>>()?;
    let min_gap = gaps.iter().map(|g| g.gap).fold(f64::INFINITY, f64::min);
    let all_strict = gaps.iter().all(|g| g.l1 < 1.0 && g.gap > 0.0);
    Ok(BourgainStudy {
        seed,
        gaps,
        min_gap,
        all_strict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chacon_oracle_small() {
        let c = RankOneConstruction::chacon();
        let grid = UnitCircleGrid::aligned(128).unwrap();
        let check = oracle_check(&c, 0, 3, grid, 0..40, 1 << 20).unwrap();
        assert_eq!(check.rows.len(), 40);
        assert!(check.max_abs_deviation < 1e-12, "{}", check.max_abs_deviation);
    }

    #[test]
    fn random_sets_are_deterministic() {
        let a = random_exponent_set(9, 3, &(2..257), 4);
        let b = random_exponent_set(9, 3, &(2..257), 4);
        assert_eq!(a, b);
        assert!(a.len() >= 2 && a.len() <= 256);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(*a.last().unwrap() < 4 * a.len() as u128);
        assert_ne!(a, random_exponent_set(9, 4, &(2..257), 4));
    }

    #[test]
    fn study_ignores_thread_count() {
        let one = with_threads(Some(1), || bourgain_study(1, 12, 2..40, 3, 64)).unwrap().unwrap();
        let four = with_threads(Some(4), || bourgain_study(1, 12, 2..40, 3, 64)).unwrap().unwrap();
        assert_eq!(one.gaps, four.gaps);
        assert!(one.all_strict);
        assert!(with_threads(Some(0), || ()).is_err());
    }
}
