//! Sparse polynomials on the unit circle and partial Riesz products.
//!
//! Stage polynomials have few terms but huge exponents, so grid evaluation
//! folds every exponent modulo `N` into a length-`N` coefficient vector and
//! runs one inverse DFT: `O(m + N log N)` per polynomial instead of `O(mN)`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::construction::RankOneConstruction;
use crate::error::{Error, Result};
use crate::fft;
use crate::math::{self, cis_turns};

/// Default bound on `∏ m_k` for anything that enumerates exponent sums.
pub const DEFAULT_COMBINATORIAL_CAP: u128 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridOffset {
    /// Points `e^{2πi i/N}`.
    Aligned,
    /// Points `e^{2πi (i + 1/2)/N}`; never hits a root of unity of order `N`.
    HalfStep,
}

/// `N` equally spaced points on the circle, optionally shifted by half a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitCircleGrid {
    n: usize,
    offset: GridOffset,
}

impl UnitCircleGrid {
    pub fn new(n: usize, offset: GridOffset) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidGrid { n });
        }
        Ok(UnitCircleGrid { n, offset })
    }

    pub fn aligned(n: usize) -> Result<Self> {
        Self::new(n, GridOffset::Aligned)
    }

    pub fn half_step(n: usize) -> Result<Self> {
        Self::new(n, GridOffset::HalfStep)
    }

    /// Smallest power-of-two half-step grid with `N > 2·max_exponent`
    /// (and at least `min_n` points).
    pub fn exact_for(max_exponent: u128, min_n: usize) -> Result<Self> {
        let need = max_exponent
            .checked_mul(2)
            .and_then(|x| x.checked_add(1))
            .filter(|&x| x <= (1u128 << 40))
            .ok_or(Error::InvalidArgument(alloc::format!(
                "exponent {max_exponent} too large for a grid"
            )))?;
        let n = (need as usize).max(min_n).max(2).next_power_of_two();
        Self::half_step(n)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn offset(&self) -> GridOffset {
        self.offset
    }

    /// Offset in grid steps: 0 or 1/2.
    pub fn delta(&self) -> f64 {
        match self.offset {
            GridOffset::Aligned => 0.0,
            GridOffset::HalfStep => 0.5,
        }
    }

    /// Position of point `i` in turns, in `[0, 1)`.
    pub fn turns(&self, i: usize) -> f64 {
        (i as f64 + self.delta()) / self.n as f64
    }

    pub fn point(&self, i: usize) -> Complex64 {
        let (c, s) = cis_turns(self.turns(i));
        Complex64::new(c, s)
    }

    /// Same offset, twice the points.
    pub fn refined(&self) -> Self {
        UnitCircleGrid {
            n: self.n * 2,
            offset: self.offset,
        }
    }

    /// `N > 2·max_exponent`, the condition under which grid means of
    /// `|P|²`-type trigonometric polynomials are exact.
    pub fn resolves(&self, max_exponent: u128) -> bool {
        (self.n as u128) > max_exponent.saturating_mul(2)
    }
}

/// `normalization · Σ_d z^d` over a strictly increasing exponent set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseCirclePolynomial {
    pub stage: Option<usize>,
    exponents: Vec<u128>,
    normalization: f64,
}

impl SparseCirclePolynomial {
    /// General sparse polynomial with the `1/√len` normalization.
    pub fn new(exponents: Vec<u128>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::InvalidArgument("empty exponent set".into()));
        }
        if exponents.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "exponents must be strictly increasing".into(),
            ));
        }
        let normalization = 1.0 / math::sqrt(exponents.len() as f64);
        Ok(SparseCirclePolynomial {
            stage: None,
            exponents,
            normalization,
        })
    }

    pub fn exponents(&self) -> &[u128] {
        &self.exponents
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn max_exponent(&self) -> u128 {
        *self.exponents.last().expect("nonempty")
    }

    /// Smallest difference between consecutive exponents (`u128::MAX` for a
    /// single term).
    pub fn min_gap(&self) -> u128 {
        self.exponents
            .windows(2)
            .map(|w| w[1] - w[0])
            .min()
            .unwrap_or(u128::MAX)
    }

    /// Direct summation at grid point `i`, with the phase `d(i+δ)/N` reduced
    /// exactly in integers.
    pub fn evaluate_direct_grid(&self, grid: &UnitCircleGrid, i: usize) -> Complex64 {
        let n = grid.len() as u128;
        let mut acc = Complex64::new(0.0, 0.0);
        for &d in &self.exponents {
            let turns = match grid.offset() {
                // d·i mod N
                GridOffset::Aligned => ((d % n) * i as u128 % n) as f64 / n as f64,
                // d·(2i+1) mod 2N over 2N
                GridOffset::HalfStep => {
                    let two_n = 2 * n;
                    ((d % two_n) * (2 * i as u128 + 1) % two_n) as f64 / two_n as f64
                }
            };
            let (c, s) = cis_turns(turns);
            acc += Complex64::new(c, s);
        }
        acc * self.normalization
    }

    /// Dense coefficient vector (index = exponent), for root finding.
    pub fn dense_coefficients(&self) -> Vec<f64> {
        let deg = self.max_exponent() as usize;
        let mut out = vec![0.0; deg + 1];
        for &d in &self.exponents {
            out[d as usize] = 1.0;
        }
        out
    }
}

/// `P_k(z) = m_k^{-1/2} Σ_{j<m_k} z^{j h_k + s(k,j)}`.
pub fn stage_polynomial(construction: &RankOneConstruction, k: usize) -> Result<SparseCirclePolynomial> {
    let table = construction.heights_strict(k + 1)?;
    let h = table.heights[k];
    let stage = construction.stage(k)?;
    let exponents = stage
        .cumulative_spacers()
        .into_iter()
        .enumerate()
        .map(|(j, s)| {
            (j as u128)
                .checked_mul(h)
                .and_then(|x| x.checked_add(s))
                .ok_or(Error::Overflow { stage: k })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut poly = SparseCirclePolynomial::new(exponents)?;
    poly.stage = Some(k);
    Ok(poly)
}

/// Stage polynomials for an arbitrary (sorted, deduplicated) stage list.
pub fn stage_polynomials(
    construction: &RankOneConstruction,
    stages: &[usize],
) -> Result<Vec<SparseCirclePolynomial>> {
    stages.iter().map(|&k| stage_polynomial(construction, k)).collect()
}

/// Values `P(z_i)` on the grid via exponent folding and one inverse DFT.
pub fn evaluate_on_grid(poly: &SparseCirclePolynomial, grid: &UnitCircleGrid) -> Vec<Complex64> {
    let n = grid.len();
    let n128 = n as u128;
    let mut folded = vec![Complex64::new(0.0, 0.0); n];
    for &d in poly.exponents() {
        let r = (d % n128) as usize;
        match grid.offset() {
            GridOffset::Aligned => folded[r] += 1.0,
            GridOffset::HalfStep => {
                // e^{πi d/N} depends on d mod 2N.
                let (c, s) = cis_turns((d % (2 * n128)) as f64 / (2 * n) as f64);
                folded[r] += Complex64::new(c, s);
            }
        }
    }
    fft::backward(&mut folded);
    let norm = poly.normalization();
    for v in &mut folded {
        *v *= norm;
    }
    folded
}

/// `|P(z_i)|` on the grid.
pub fn modulus_on_grid(poly: &SparseCirclePolynomial, grid: &UnitCircleGrid) -> Vec<f64> {
    evaluate_on_grid(poly, grid).into_iter().map(|v| v.norm()).collect()
}

/// Multiset of exponent sums of a product of sparse polynomials.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sumset {
    /// Sorted, with multiplicity.
    pub sums: Vec<u128>,
    pub distinct: bool,
}

/// All sums picking one exponent from each polynomial.
pub fn sumset_of(polys: &[SparseCirclePolynomial], cap: u128) -> Result<Sumset> {
    let count = polys
        .iter()
        .try_fold(1u128, |acc, p| acc.checked_mul(p.len() as u128))
        .unwrap_or(u128::MAX);
    if count > cap {
        return Err(Error::CombinatorialCap { count, cap });
    }
    let mut sums = vec![0u128];
    for (idx, p) in polys.iter().enumerate() {
        let mut next = Vec::with_capacity(sums.len() * p.len());
        for &d in p.exponents() {
            for &s in &sums {
                next.push(s.checked_add(d).ok_or(Error::Overflow {
                    stage: p.stage.unwrap_or(idx),
                })?);
            }
        }
        sums = next;
    }
    sums.sort_unstable();
    let distinct = sums.windows(2).all(|w| w[0] != w[1]);
    Ok(Sumset { sums, distinct })
}

/// Exponent sums of `∏_{k ∈ stages} P_k`.
pub fn sumset_exponents(
    construction: &RankOneConstruction,
    stages: &[usize],
    cap: u128,
) -> Result<Sumset> {
    sumset_of(&stage_polynomials(construction, stages)?, cap)
}

/// Cheap sufficient test for distinct sums: with the polynomials in the
/// given order, each one's smallest exponent gap exceeds the largest sum of
/// the ones before it (a mixed-radix argument). Stage polynomials of a
/// rank-one construction always pass in increasing stage order.
pub fn sums_dominated(polys: &[SparseCirclePolynomial]) -> bool {
    let mut below = 0u128;
    for p in polys {
        if p.exponents()[0] != 0 || (p.len() > 1 && p.min_gap() <= below) {
            return false;
        }
        below = match below.checked_add(p.max_exponent()) {
            Some(b) => b,
            None => return false,
        };
    }
    true
}

/// Whether all exponent sums differ: the dominance test, else enumeration
/// within `cap`, else `false` (unknown counts as not distinct).
pub fn sums_distinct(polys: &[SparseCirclePolynomial], cap: u128) -> bool {
    if sums_dominated(polys) {
        return true;
    }
    match sumset_of(polys, cap) {
        Ok(s) => s.distinct,
        Err(_) => false,
    }
}

pub fn max_total_exponent(polys: &[SparseCirclePolynomial]) -> u128 {
    polys
        .iter()
        .fold(0u128, |acc, p| acc.saturating_add(p.max_exponent()))
}

/// Samples of a partial Riesz product `∏_{k ∈ stages} |P_k|²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    pub grid: UnitCircleGrid,
    pub values: Vec<f64>,
    /// Stages included in the product.
    pub stages: Vec<usize>,
    /// `N > 2·max total exponent` and distinct sums: grid means are exact.
    pub exact: bool,
}

impl GridDensity {
    /// Density from raw samples (no stage bookkeeping, never marked exact).
    pub fn from_samples(grid: UnitCircleGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(GridDensity {
            grid,
            values,
            stages: Vec::new(),
            exact: false,
        })
    }

    pub fn constant(grid: UnitCircleGrid, value: f64) -> Self {
        GridDensity {
            values: vec![value; grid.len()],
            grid,
            stages: Vec::new(),
            exact: true,
        }
    }

    /// `|P|²` of a single polynomial.
    pub fn from_polynomial(poly: &SparseCirclePolynomial, grid: UnitCircleGrid) -> Self {
        let values = evaluate_on_grid(poly, &grid)
            .into_iter()
            .map(|v| v.norm_sqr())
            .collect();
        GridDensity {
            grid,
            values,
            stages: poly.stage.into_iter().collect(),
            exact: grid.resolves(poly.max_exponent()),
        }
    }

    pub fn mean(&self) -> f64 {
        math::mean(&self.values)
    }
}

/// Per-stage moduli `|P_k(z_i)|` on one grid, from which any sub-product is
/// assembled without re-evaluating.
#[derive(Debug, Clone, PartialEq)]
pub struct StageGridTable {
    pub grid: UnitCircleGrid,
    pub polys: Vec<SparseCirclePolynomial>,
    moduli: Vec<Vec<f64>>,
    distinct: bool,
}

impl StageGridTable {
    /// Evaluates `P_k` for every `k` in `stages` (sorted ascending).
    pub fn build(
        construction: &RankOneConstruction,
        stages: &[usize],
        grid: UnitCircleGrid,
        cap: u128,
    ) -> Result<Self> {
        let mut sorted = stages.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let polys = stage_polynomials(construction, &sorted)?;
        Ok(Self::from_polynomials(polys, grid, cap))
    }

    /// Stages `0..count`.
    pub fn build_range(
        construction: &RankOneConstruction,
        count: usize,
        grid: UnitCircleGrid,
        cap: u128,
    ) -> Result<Self> {
        let stages: Vec<usize> = (0..count).collect();
        Self::build(construction, &stages, grid, cap)
    }

    pub fn from_polynomials(polys: Vec<SparseCirclePolynomial>, grid: UnitCircleGrid, cap: u128) -> Self {
        let moduli = polys.iter().map(|p| modulus_on_grid(p, &grid)).collect();
        let distinct = sums_distinct(&polys, cap);
        StageGridTable {
            grid,
            polys,
            moduli,
            distinct,
        }
    }

    pub fn stages(&self) -> Vec<usize> {
        self.polys
            .iter()
            .enumerate()
            .map(|(i, p)| p.stage.unwrap_or(i))
            .collect()
    }

    fn index_of(&self, stage: usize) -> Result<usize> {
        self.polys
            .iter()
            .enumerate()
            .position(|(i, p)| p.stage.unwrap_or(i) == stage)
            .ok_or(Error::StageOutOfRange {
                stage,
                available: self.polys.len(),
            })
    }

    pub fn polynomial(&self, stage: usize) -> Result<&SparseCirclePolynomial> {
        Ok(&self.polys[self.index_of(stage)?])
    }

    /// `|P_k|` samples.
    pub fn modulus(&self, stage: usize) -> Result<&[f64]> {
        Ok(&self.moduli[self.index_of(stage)?])
    }

    /// Exactness of grid means for products over `stages`; subsets of a
    /// distinct family stay distinct because every stage exponent set
    /// contains 0.
    pub fn exact_for(&self, stages: &[usize]) -> Result<bool> {
        let mut max = 0u128;
        for &k in stages {
            max = max.saturating_add(self.polynomial(k)?.max_exponent());
        }
        Ok(self.distinct && self.grid.resolves(max))
    }

    /// `∏_{k ∈ stages} |P_k(z_i)|^power` (empty product = 1).
    pub fn product_power(&self, stages: &[usize], power: i32) -> Result<Vec<f64>> {
        let mut out = vec![1.0; self.grid.len()];
        for &k in stages {
            let m = self.modulus(k)?;
            for (o, &v) in out.iter_mut().zip(m) {
                *o *= match power {
                    1 => v,
                    2 => v * v,
                    p => libm::pow(v, p as f64),
                };
            }
        }
        Ok(out)
    }

    /// `Q = ∏_{k ∈ stages} |P_k|`.
    pub fn product_modulus(&self, stages: &[usize]) -> Result<Vec<f64>> {
        self.product_power(stages, 1)
    }

    /// The partial Riesz product over `stages` as a density.
    pub fn density(&self, stages: &[usize]) -> Result<GridDensity> {
        let values = self.product_power(stages, 2)?;
        let mut sorted = stages.to_vec();
        sorted.sort_unstable();
        Ok(GridDensity {
            grid: self.grid,
            values,
            exact: self.exact_for(stages)?,
            stages: sorted,
        })
    }
}

/// `∏_{k ∈ stages} |P_k|²` on `grid`. Inexact grids are flagged through
/// `GridDensity::exact`, not rejected.
pub fn partial_product_density(
    construction: &RankOneConstruction,
    stages: &[usize],
    grid: UnitCircleGrid,
) -> Result<GridDensity> {
    let table = StageGridTable::build(construction, stages, grid, DEFAULT_COMBINATORIAL_CAP)?;
    table.density(&table.stages())
}

/// Stages `k0..k`.
pub fn partial_product_density_range(
    construction: &RankOneConstruction,
    k0: usize,
    k: usize,
    grid: UnitCircleGrid,
) -> Result<GridDensity> {
    let stages: Vec<usize> = (k0..k).collect();
    partial_product_density(construction, &stages, grid)
}

/// `(1/N) Σ v_i^p`.
pub fn mean_power(values: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        math::mean(values)
    } else {
        math::mean_by(values, |v| libm::pow(v, p))
    }
}

/// Coefficient of `z^n` of the density, `(1/N) Σ_i v_i e^{-2πi n(i+δ)/N}`.
/// Only the real part is returned (partial Riesz products are even).
pub fn fourier_coefficient(density: &GridDensity, n: i64) -> Result<f64> {
    let len = density.grid.len();
    let limit = (len / 2) as u128;
    if n.unsigned_abs() as u128 >= limit {
        return Err(Error::LagOutOfRange {
            lag: n as i128,
            limit,
        });
    }
    // Phase in units of 1/(2N): n·(2i + 2δ), with 2δ ∈ {0, 1}.
    let two_delta: i128 = match density.grid.offset() {
        GridOffset::Aligned => 0,
        GridOffset::HalfStep => 1,
    };
    let two_n = 2 * len as i128;
    let parts: Vec<f64> = density
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let k = (n as i128 * (2 * i as i128 + two_delta)).rem_euclid(two_n);
            v * cis_turns(k as f64 / two_n as f64).0
        })
        .collect();
    Ok(math::pairwise_sum(&parts) / len as f64)
}

/// Coefficients `c_0..c_max_lag` from one forward DFT.
pub fn fourier_coefficients(values: &[f64], grid: &UnitCircleGrid, max_lag: usize) -> Result<Vec<Complex64>> {
    let n = grid.len();
    if values.len() != n {
        return Err(Error::GridMismatch);
    }
    if max_lag >= n / 2 {
        return Err(Error::LagOutOfRange {
            lag: max_lag as i128,
            limit: (n / 2) as u128,
        });
    }
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::forward(&mut buf);
    let delta = grid.delta();
    Ok((0..=max_lag)
        .map(|k| {
            let (c, s) = cis_turns(k as f64 * delta / n as f64);
            buf[k] * Complex64::new(c, -s) / n as f64
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{PresetParams, StageSpec};
    use proptest::prelude::*;

    fn chacon() -> RankOneConstruction {
        RankOneConstruction::chacon()
    }

    #[test]
    fn stage_polynomial_examples() {
        let p0 = stage_polynomial(&chacon(), 0).unwrap();
        assert_eq!(p0.exponents(), &[0, 1, 3]);
        assert!((p0.normalization() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(stage_polynomial(&chacon(), 1).unwrap().exponents(), &[0, 4, 9]);
        let dyadic = RankOneConstruction::explicit("d", vec![StageSpec::plain(2); 3]);
        assert_eq!(stage_polynomial(&dyadic, 2).unwrap().exponents(), &[0, 4]);
    }

    #[test]
    fn sumset_examples() {
        let s = sumset_exponents(&chacon(), &[0, 1], DEFAULT_COMBINATORIAL_CAP).unwrap();
        assert_eq!(s.sums, vec![0, 1, 3, 4, 5, 7, 9, 10, 12]);
        assert!(s.distinct);
        let dyadic = RankOneConstruction::explicit("d", vec![StageSpec::plain(2); 3]);
        let s = sumset_exponents(&dyadic, &[0, 1, 2], DEFAULT_COMBINATORIAL_CAP).unwrap();
        assert_eq!(s.sums, (0..8).collect::<Vec<u128>>());
        assert!(s.distinct);
        let s = sumset_exponents(&chacon(), &[2], DEFAULT_COMBINATORIAL_CAP).unwrap();
        assert_eq!(s.sums, vec![0, 13, 27]);
        assert!(matches!(
            sumset_exponents(&chacon(), &[0, 1, 2, 3], 10),
            Err(Error::CombinatorialCap { count: 81, cap: 10 })
        ));
    }

    #[test]
    fn non_distinct_sums_are_detected() {
        let a = SparseCirclePolynomial::new(vec![0, 1]).unwrap();
        let b = SparseCirclePolynomial::new(vec![0, 1]).unwrap();
        assert!(!sums_dominated(&[a.clone(), b.clone()]));
        assert!(!sums_distinct(&[a, b], 100));
    }

    #[test]
    fn evaluation_examples() {
        let p = SparseCirclePolynomial::new(vec![0, 1]).unwrap();
        let grid = UnitCircleGrid::aligned(4).unwrap();
        let v = evaluate_on_grid(&p, &grid);
        assert!((v[0].re - 2f64.sqrt()).abs() < 1e-15 && v[0].im.abs() < 1e-15);
        assert!(v[2].norm() < 1e-15);
        let p0 = stage_polynomial(&chacon(), 0).unwrap();
        for grid in [UnitCircleGrid::aligned(64).unwrap(), UnitCircleGrid::half_step(50).unwrap()] {
            let max = modulus_on_grid(&p0, &grid).into_iter().fold(0.0, f64::max);
            assert!(max <= 3f64.sqrt() + 1e-12);
        }
    }

    #[test]
    fn chacon_single_stage_density() {
        let grid = UnitCircleGrid::aligned(8).unwrap();
        let d = partial_product_density_range(&chacon(), 0, 1, grid).unwrap();
        for (i, &v) in d.values.iter().enumerate() {
            let z = grid.point(i);
            let direct = (Complex64::new(1.0, 0.0) + z + z * z * z).norm_sqr() / 3.0;
            assert!((v - direct).abs() < 1e-12);
        }
        assert!(d.exact);
        assert!((d.mean() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_range_is_constant_one() {
        let grid = UnitCircleGrid::half_step(16).unwrap();
        let d = partial_product_density_range(&chacon(), 3, 3, grid).unwrap();
        assert!(d.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn chacon_unit_mass_at_three_stages() {
        let grid = UnitCircleGrid::aligned(1 << 12).unwrap();
        let d = partial_product_density_range(&chacon(), 0, 3, grid).unwrap();
        assert!(d.exact);
        assert!((d.mean() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn coarse_grid_is_flagged() {
        let grid = UnitCircleGrid::aligned(16).unwrap();
        let d = partial_product_density_range(&chacon(), 0, 3, grid).unwrap();
        assert!(!d.exact);
    }

    #[test]
    fn mean_power_examples() {
        let p = SparseCirclePolynomial::new(vec![0, 1]).unwrap();
        let grid = UnitCircleGrid::half_step(1 << 16).unwrap();
        let m = modulus_on_grid(&p, &grid);
        let expected = 2.0 * 2f64.sqrt() / core::f64::consts::PI;
        assert!((mean_power(&m, 1.0) - expected).abs() < 1e-6);
        let sq: Vec<f64> = m.iter().map(|v| v * v).collect();
        assert!((mean_power(&sq, 1.0) - 1.0).abs() < 1e-12);
        assert_eq!(mean_power(&[1.0; 10], 0.3), 1.0);
    }

    #[test]
    fn fourier_coefficient_examples() {
        for grid in [UnitCircleGrid::aligned(64).unwrap(), UnitCircleGrid::half_step(64).unwrap()] {
            let d = partial_product_density_range(&chacon(), 0, 1, grid).unwrap();
            assert!((fourier_coefficient(&d, 0).unwrap() - 1.0).abs() < 1e-12);
            assert!((fourier_coefficient(&d, 2).unwrap() - 1.0 / 3.0).abs() < 1e-12);
            assert!((fourier_coefficient(&d, -2).unwrap() - 1.0 / 3.0).abs() < 1e-12);
            assert!(fourier_coefficient(&d, 5).unwrap().abs() < 1e-12);
            assert!(matches!(
                fourier_coefficient(&d, 32),
                Err(Error::LagOutOfRange { .. })
            ));
            let all = fourier_coefficients(&d.values, &grid, 10).unwrap();
            for (n, c) in all.iter().enumerate() {
                let direct = fourier_coefficient(&d, n as i64).unwrap();
                assert!((c.re - direct).abs() < 1e-12 && c.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn splitting_identity() {
        let c = RankOneConstruction::preset("staircase", PresetParams::default(), 0).unwrap();
        let grid = UnitCircleGrid::half_step(1 << 10).unwrap();
        let table = StageGridTable::build_range(&c, 5, grid, DEFAULT_COMBINATORIAL_CAP).unwrap();
        let a = table.product_modulus(&[0, 2, 4]).unwrap();
        let b = table.product_modulus(&[1, 3]).unwrap();
        let ab = table.product_modulus(&[0, 1, 2, 3, 4]).unwrap();
        for i in 0..grid.len() {
            assert!((a[i] * b[i] - ab[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn large_exponents_fold_correctly() {
        let p = SparseCirclePolynomial::new(vec![0, 1_000_003, 5_000_000_011, 1 << 70]).unwrap();
        for grid in [UnitCircleGrid::aligned(256).unwrap(), UnitCircleGrid::half_step(256).unwrap()] {
            let v = evaluate_on_grid(&p, &grid);
            for i in (0..256).step_by(17) {
                assert!((v[i] - p.evaluate_direct_grid(&grid, i)).norm() < 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn folding_matches_direct_summation(
            raw in proptest::collection::btree_set(0u64..1_000_000, 1..64),
            log_n in 1u32..12,
            half in any::<bool>(),
        ) {
            let poly = SparseCirclePolynomial::new(raw.into_iter().map(u128::from).collect()).unwrap();
            let n = 1usize << log_n;
            let grid = if half { UnitCircleGrid::half_step(n) } else { UnitCircleGrid::aligned(n) }.unwrap();
            let folded = evaluate_on_grid(&poly, &grid);
            let scale = poly.len() as f64 * poly.normalization();
            for i in 0..n {
                let direct = poly.evaluate_direct_grid(&grid, i);
                prop_assert!((folded[i] - direct).norm() <= 1e-12 * scale.max(1.0));
            }
        }

        #[test]
        fn exact_partial_products_have_unit_mass(
            cuts in proptest::collection::vec(2i64..5, 1..5),
            seed in any::<u64>(),
        ) {
            let mut stages = Vec::new();
            let mut h: i64 = 1;
            for (k, &m) in cuts.iter().enumerate() {
                let spacers: Vec<i64> = (0..m)
                    .map(|j| (crate::rng::word(seed, (k * 8 + j as usize) as u64) % (h as u64 + 1)) as i64)
                    .collect();
                h = m * h + spacers.iter().sum::<i64>();
                stages.push(StageSpec::new(m, spacers));
            }
            let c = RankOneConstruction::explicit("random", stages);
            let grid = UnitCircleGrid::exact_for(h as u128, 16).unwrap();
            let d = partial_product_density_range(&c, 0, cuts.len(), grid).unwrap();
            prop_assert!(d.exact);
            prop_assert!((d.mean() - 1.0).abs() < 1e-10);
        }
    }
}
