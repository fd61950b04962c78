//! Mahler measure by four independent routes: log-mean on a half-step grid,
//! Jensen's root product, the Szegő prediction error (Levinson recursion on
//! Toeplitz moments) and the Kolmogorov harmonic mean, which is only a lower
//! bound. Outer-function coefficients give the Nakazi–Takahashi errors.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circlepoly::{
    fourier_coefficients, mean_power, modulus_on_grid, GridDensity, GridOffset, SparseCirclePolynomial,
    UnitCircleGrid,
};
use crate::error::{Error, Result};
use crate::math;
use crate::roots::polynomial_roots;

/// Samples below this are treated as zeros of the density.
pub const ZERO_SAMPLE_FLOOR: f64 = 1e-300;
/// Root moduli within this distance of 1 count as on the circle.
pub const UNIT_CIRCLE_BAND: f64 = 1e-8;
pub const DEFAULT_DEGREE_CAP: usize = 4096;
pub const DEFAULT_INVERSE_CEILING: f64 = 1e12;
/// Per-doubling growth of `mean(1/h)` taken as a sign of divergence.
pub const DEFAULT_GROWTH_RATIO: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MahlerEngine {
    Grid,
    Jensen,
    Szego,
    KolmogorovLower,
}

impl MahlerEngine {
    pub const ALL: [MahlerEngine; 4] = [
        MahlerEngine::Grid,
        MahlerEngine::Jensen,
        MahlerEngine::Szego,
        MahlerEngine::KolmogorovLower,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MahlerEngine::Grid => "grid",
            MahlerEngine::Jensen => "jensen",
            MahlerEngine::Szego => "szego",
            MahlerEngine::KolmogorovLower => "kolmogorov-lower",
        }
    }
}

impl fmt::Display for MahlerEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MahlerEngine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(MahlerEngine::Grid),
            "jensen" => Ok(MahlerEngine::Jensen),
            "szego" => Ok(MahlerEngine::Szego),
            "kolmogorov" | "kolmogorov-lower" => Ok(MahlerEngine::KolmogorovLower),
            other => Err(Error::InvalidArgument(alloc::format!("unknown engine `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateStatus {
    /// Root product, or a zero-free grid that resolves the polynomial.
    ExactClass,
    Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MahlerEstimate {
    pub value: f64,
    pub engine: MahlerEngine,
    /// `|estimate(N) − estimate(2N)|` or `|E_n − E_{2n}|`-type gap.
    pub refinement_gap: f64,
    pub status: EstimateStatus,
    /// Samples dropped under [`ZERO_SAMPLE_FLOOR`].
    pub excluded_samples: usize,
}

/// Mean of `ln v` over samples above the floor, with the number dropped.
fn log_mean(values: &[f64]) -> (f64, usize) {
    let mut logs = Vec::with_capacity(values.len());
    let mut excluded = 0;
    for &v in values {
        if v > ZERO_SAMPLE_FLOOR && v.is_finite() {
            logs.push(math::ln(v));
        } else {
            excluded += 1;
        }
    }
    if logs.is_empty() {
        return (f64::NEG_INFINITY, excluded);
    }
    (math::mean(&logs), excluded)
}

/// `exp(mean log v)` on one grid, no refinement.
pub fn mahler_of_samples(values: &[f64]) -> MahlerEstimate {
    let (lm, excluded) = log_mean(values);
    MahlerEstimate {
        value: math::exp(lm),
        engine: MahlerEngine::Grid,
        refinement_gap: 0.0,
        status: if excluded == 0 {
            EstimateStatus::ExactClass
        } else {
            EstimateStatus::Estimate
        },
        excluded_samples: excluded,
    }
}

fn require_half_step(grid: &UnitCircleGrid) -> Result<()> {
    if grid.offset() != GridOffset::HalfStep {
        return Err(Error::InvalidArgument("log-integration needs a half-step grid".into()));
    }
    Ok(())
}

/// Grid Mahler measure of whatever `sample` produces on `grid`, with the
/// refinement gap taken against `2N`. The reported value is the `N` one.
pub fn mahler_grid_with<F>(grid: UnitCircleGrid, sample: F) -> Result<MahlerEstimate>
where
    F: Fn(&UnitCircleGrid) -> Result<Vec<f64>>,
{
    require_half_step(&grid)?;
    let coarse = mahler_of_samples(&sample(&grid)?);
    let fine = mahler_of_samples(&sample(&grid.refined())?);
    let mut est = coarse;
    est.refinement_gap = (est.value - fine.value).abs();
    if fine.excluded_samples > 0 {
        est.status = EstimateStatus::Estimate;
    }
    Ok(est)
}

/// `M(P)` from `|P|` samples on a half-step grid.
pub fn mahler_grid(poly: &SparseCirclePolynomial, grid: UnitCircleGrid) -> Result<MahlerEstimate> {
    let mut est = mahler_grid_with(grid, |g| Ok(modulus_on_grid(poly, g)))?;
    if !grid.resolves(poly.max_exponent()) {
        est.status = EstimateStatus::Estimate;
    }
    Ok(est)
}

fn dense_roots(poly: &SparseCirclePolynomial, degree_cap: usize) -> Result<Vec<Complex64>> {
    let degree = poly.max_exponent();
    if degree > degree_cap as u128 {
        return Err(Error::DegreeTooLarge { degree, cap: degree_cap });
    }
    let coeffs = poly.dense_coefficients();
    polynomial_roots(&coeffs)
}

/// Roots of the unnormalized `Σ z^d` with modulus above `1 + 1e-8`.
pub fn roots_outside(poly: &SparseCirclePolynomial, degree_cap: usize) -> Result<Vec<Complex64>> {
    Ok(dense_roots(poly, degree_cap)?
        .into_iter()
        .filter(|z| z.norm() > 1.0 + UNIT_CIRCLE_BAND)
        .collect())
}

/// `normalization · ∏_{|α|>1} |α|`.
pub fn mahler_jensen(poly: &SparseCirclePolynomial, degree_cap: usize) -> Result<MahlerEstimate> {
    let outside = roots_outside(poly, degree_cap)?;
    let log_prod: f64 = outside.iter().map(|z| math::ln(z.norm())).sum();
    Ok(MahlerEstimate {
        value: poly.normalization() * math::exp(log_prod),
        engine: MahlerEngine::Jensen,
        refinement_gap: 0.0,
        status: EstimateStatus::ExactClass,
        excluded_samples: 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaNormProfile {
    pub deltas: Vec<f64>,
    /// `‖f‖_δ = (mean f^δ)^{1/δ}`.
    pub norms: Vec<f64>,
    /// `mean f^{δ_min}`, which tends to the mass of `{f > 0}`.
    pub support_mass: f64,
}

pub fn delta_norm_profile(values: &[f64], deltas: &[f64]) -> Result<DeltaNormProfile> {
    if deltas.is_empty() {
        return Err(Error::InvalidArgument("no deltas".into()));
    }
    if deltas.iter().any(|&d| !(d > 0.0 && d <= 1.0)) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "deltas must lie in (0, 1] and strictly decrease".into(),
        ));
    }
    let means: Vec<f64> = deltas.iter().map(|&d| mean_power(values, d)).collect();
    let norms = deltas
        .iter()
        .zip(&means)
        .map(|(&d, &m)| math::powf(m, 1.0 / d))
        .collect();
    Ok(DeltaNormProfile {
        deltas: deltas.to_vec(),
        norms,
        support_mass: *means.last().expect("nonempty"),
    })
}

/// `1/2, 1/4, …, 1/2^count`.
pub fn dyadic_deltas(count: u32) -> Vec<f64> {
    (1..=count).map(|j| 1.0 / (1u64 << j) as f64).collect()
}

/// Prediction errors `E_0, E_1, …` of the Levinson recursion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SzegoSequence {
    /// `errors[n] = E_n`; `E_0` is the mean of the density.
    pub errors: Vec<f64>,
    /// Order at which the recursion lost positive definiteness, if it did.
    pub singular_at: Option<usize>,
}

impl SzegoSequence {
    pub fn last(&self) -> f64 {
        *self.errors.last().expect("E_0 always present")
    }

    pub fn order(&self) -> usize {
        self.errors.len() - 1
    }

    /// `|E_n − E_{n/2}|` at the last order.
    pub fn refinement_gap(&self) -> f64 {
        let n = self.order();
        (self.errors[n] - self.errors[n / 2]).abs()
    }

    pub fn estimate(&self) -> MahlerEstimate {
        MahlerEstimate {
            value: self.last(),
            engine: MahlerEngine::Szego,
            refinement_gap: self.refinement_gap(),
            status: EstimateStatus::Estimate,
            excluded_samples: 0,
        }
    }
}

/// `E_n = min ∫|1 − P|² h dλ` over analytic `P` of degree `≤ n` with `P(0) = 0`,
/// for `n = 0..=n_max`.
pub fn szego_error_sequence(density: &GridDensity, n_max: usize) -> Result<SzegoSequence> {
    let r = fourier_coefficients(&density.values, &density.grid, n_max)?;
    levinson(&r)
}

/// Levinson–Durbin on Hermitian Toeplitz moments `r_0..r_n`.
pub fn levinson(r: &[Complex64]) -> Result<SzegoSequence> {
    let e0 = r[0].re;
    if !(e0 > 0.0) {
        return Err(Error::ToeplitzSingular { order: 0 });
    }
    let n_max = r.len() - 1;
    let mut a: Vec<Complex64> = Vec::with_capacity(n_max + 1);
    a.push(Complex64::new(1.0, 0.0));
    let mut errors = Vec::with_capacity(n_max + 1);
    errors.push(e0);
    let mut e = e0;
    for n in 1..=n_max {
        let mut acc = r[n];
        for j in 1..n {
            acc += a[j] * r[n - j];
        }
        let kappa = -acc / e;
        let k2 = kappa.norm_sqr();
        if !(k2 < 1.0) || !k2.is_finite() {
            if n == 1 {
                return Err(Error::ToeplitzSingular { order: n });
            }
            return Ok(SzegoSequence {
                errors,
                singular_at: Some(n),
            });
        }
        let prev = a.clone();
        a.push(kappa);
        for j in 1..n {
            a[j] = prev[j] + kappa * prev[n - j].conj();
        }
        let next = e * (1.0 - k2);
        if !(next > 0.0) {
            return Ok(SzegoSequence {
                errors,
                singular_at: Some(n),
            });
        }
        e = next;
        errors.push(e);
    }
    Ok(SzegoSequence {
        errors,
        singular_at: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KolmogorovConfig {
    /// `mean(1/h)` above this counts as divergent.
    pub inverse_ceiling: f64,
    /// Growth factor of `mean(1/h)` per grid doubling counted as divergent.
    pub growth_ratio: f64,
}

impl Default for KolmogorovConfig {
    fn default() -> Self {
        KolmogorovConfig {
            inverse_ceiling: DEFAULT_INVERSE_CEILING,
            growth_ratio: DEFAULT_GROWTH_RATIO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KolmogorovError {
    /// `(mean 1/h)^{-1}`.
    pub value: f64,
    pub mean_inverse: f64,
    pub diverged: bool,
}

/// Harmonic mean of the samples on a single grid.
pub fn kolmogorov_error(density: &GridDensity, cfg: &KolmogorovConfig) -> KolmogorovError {
    let mean_inverse = math::mean_by(&density.values, |v| 1.0 / v);
    let diverged = !(mean_inverse <= cfg.inverse_ceiling);
    KolmogorovError {
        value: if diverged { 0.0 } else { 1.0 / mean_inverse },
        mean_inverse,
        diverged,
    }
}

/// Harmonic means on `grid, 2·grid, …` (`doublings + 1` grids). Divergence is
/// flagged when the ceiling is crossed or the last doubling grows `mean(1/h)`
/// by at least the configured ratio.
pub fn kolmogorov_refined<F>(
    grid: UnitCircleGrid,
    doublings: usize,
    cfg: &KolmogorovConfig,
    sample: F,
) -> Result<Vec<KolmogorovError>>
where
    F: Fn(&UnitCircleGrid) -> Result<Vec<f64>>,
{
    let mut out: Vec<KolmogorovError> = Vec::with_capacity(doublings + 1);
    let mut g = grid;
    for _ in 0..=doublings {
        let d = GridDensity::from_samples(g, sample(&g)?)?;
        out.push(kolmogorov_error(&d, cfg));
        g = g.refined();
    }
    if out.len() >= 2 {
        let [a, b] = [out[out.len() - 2], out[out.len() - 1]];
        if b.mean_inverse >= cfg.growth_ratio * a.mean_inverse {
            for e in out.iter_mut() {
                e.diverged = true;
                e.value = 0.0;
            }
        }
    }
    Ok(out)
}

impl KolmogorovError {
    pub fn estimate(&self, refinement_gap: f64) -> MahlerEstimate {
        MahlerEstimate {
            value: self.value,
            engine: MahlerEngine::KolmogorovLower,
            refinement_gap,
            status: EstimateStatus::Estimate,
            excluded_samples: 0,
        }
    }
}

/// Taylor coefficients `α_0..α_n` of the outer function `φ` with `|φ|² = h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterCoefficients {
    pub alphas: Vec<Complex64>,
    /// Stages of the source density (empty for raw samples).
    pub source_stages: Vec<usize>,
    pub n: usize,
}

impl OuterCoefficients {
    /// `(Σ_{k≤n} |α_k|²)^{1/2}`.
    pub fn nakazi_error(&self, n: usize) -> Result<f64> {
        if n > self.n {
            return Err(Error::InvalidArgument(alloc::format!(
                "order {n} beyond computed order {}",
                self.n
            )));
        }
        Ok(math::sqrt(self.alphas[..=n].iter().map(|a| a.norm_sqr()).sum()))
    }

    /// `NotConverged` when `|α_n|² > tol · Σ|α_k|²`.
    pub fn check_tail(&self, tol: f64) -> Result<()> {
        let total: f64 = self.alphas.iter().map(|a| a.norm_sqr()).sum();
        let tail = self.alphas[self.n].norm_sqr();
        if self.n > 0 && tail > tol * total {
            return Err(Error::NotConverged {
                order: self.n,
                tail_ratio: tail / total,
            });
        }
        Ok(())
    }
}

/// `φ = exp(c_0/2 + Σ_{k≥1} c_k z^k)` with `c_k` the Fourier coefficients of
/// `log h`, expanded through `n·α_n = Σ_{k=1}^n k c_k α_{n−k}`.
pub fn outer_coefficients(density: &GridDensity, n: usize) -> Result<OuterCoefficients> {
    let mut logs = Vec::with_capacity(density.values.len());
    for (i, &v) in density.values.iter().enumerate() {
        if !(v > ZERO_SAMPLE_FLOOR) || !v.is_finite() {
            return Err(Error::LogDiverged { index: i });
        }
        logs.push(math::ln(v));
    }
    let c = fourier_coefficients(&logs, &density.grid, n)?;
    let mut alphas: Vec<Complex64> = Vec::with_capacity(n + 1);
    alphas.push(Complex64::new(math::exp(c[0].re / 2.0), 0.0));
    for m in 1..=n {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=m {
            acc += c[k] * alphas[m - k] * k as f64;
        }
        alphas.push(acc / m as f64);
    }
    Ok(OuterCoefficients {
        alphas,
        source_stages: density.stages.clone(),
        n,
    })
}

/// As [`outer_coefficients`], failing when the last coefficient carries more
/// than `tol` of the accumulated mass.
pub fn outer_coefficients_checked(density: &GridDensity, n: usize, tol: f64) -> Result<OuterCoefficients> {
    let oc = outer_coefficients(density, n)?;
    oc.check_tail(tol)?;
    Ok(oc)
}

pub fn nakazi_error(density: &GridDensity, n: usize) -> Result<f64> {
    outer_coefficients(density, n)?.nakazi_error(n)
}

/// Human-readable one-liner used by the CLI table.
pub fn describe(est: &MahlerEstimate) -> String {
    alloc::format!(
        "{:<17} {:.12} gap={:.3e} {:?}",
        est.engine.as_str(),
        est.value,
        est.refinement_gap,
        est.status
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn poly(exps: &[u128]) -> SparseCirclePolynomial {
        SparseCirclePolynomial::new(exps.to_vec()).unwrap()
    }

    fn density_of(p: &SparseCirclePolynomial, n: usize) -> GridDensity {
        GridDensity::from_polynomial(p, UnitCircleGrid::half_step(n).unwrap())
    }

    /// `M((1+z+z³)/√3)`: the outside pair of `z³+z+1` has `|α|² = 1/0.6823278…`.
    const CHACON_M: f64 = 1.0 / 0.682_327_803_828_019_3 / 1.732_050_807_568_877_2;

    #[test]
    fn grid_examples() {
        let g = UnitCircleGrid::half_step(1 << 16).unwrap();
        let one = mahler_of_samples(&vec![1.0; 64]);
        assert_eq!(one.value, 1.0);
        let m = mahler_grid(&poly(&[0, 1]), g).unwrap();
        assert!((m.value - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-5);
        let m = mahler_grid(&poly(&[0, 1, 3]), g).unwrap();
        assert!((m.value - CHACON_M).abs() < 1e-4, "{}", m.value);
        assert!(m.refinement_gap < 1e-8);
        assert!(mahler_grid(&poly(&[0, 1]), UnitCircleGrid::aligned(8).unwrap()).is_err());
    }

    #[test]
    fn zero_samples_are_excluded() {
        let est = mahler_of_samples(&[1.0, 0.0, 4.0]);
        assert_eq!(est.excluded_samples, 1);
        assert_eq!(est.status, EstimateStatus::Estimate);
        assert!((est.value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn jensen_examples() {
        let m = mahler_jensen(&poly(&[0, 1]), DEFAULT_DEGREE_CAP).unwrap();
        assert!((m.value - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let m = mahler_jensen(&poly(&[0, 1, 3]), DEFAULT_DEGREE_CAP).unwrap();
        assert!((m.value - CHACON_M).abs() < 1e-12);
        assert!((m.value - 0.84615).abs() < 1e-4);
        // a single monomial z^5 is the constant polynomial 1 in modulus
        assert!((mahler_jensen(&poly(&[5]), 16).unwrap().value - 1.0).abs() < 1e-15);
        assert_eq!(
            mahler_jensen(&poly(&[0, 5000]), 4096).unwrap_err(),
            Error::DegreeTooLarge { degree: 5000, cap: 4096 }
        );
        assert_eq!(roots_outside(&poly(&[0, 1, 3]), 16).unwrap().len(), 2);
    }

    #[test]
    fn delta_profile_examples() {
        let p = delta_norm_profile(&vec![1.0; 16], &dyadic_deltas(6)).unwrap();
        assert!(p.norms.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert!((p.support_mass - 1.0).abs() < 1e-15);

        let half: Vec<f64> = (0..1024).map(|i| if i < 512 { 2.0 } else { 0.0 }).collect();
        let p = delta_norm_profile(&half, &[1.0 / 64.0]).unwrap();
        let expected = 2.0 * libm::pow(0.5, 64.0);
        assert!((p.norms[0] / expected - 1.0).abs() < 1e-9);
        assert!(p.norms[0] < 1e-15);

        let d = density_of(&poly(&[0, 1]), 1 << 16);
        let p = delta_norm_profile(&d.values, &dyadic_deltas(6)).unwrap();
        assert!(p.norms.windows(2).all(|w| w[1] <= w[0]));
        assert!(p.norms[5] > 0.5 && p.norms[5] < 0.52, "{:?}", p.norms);

        assert!(delta_norm_profile(&half, &[0.25, 0.5]).is_err());
        assert!(delta_norm_profile(&half, &[2.0]).is_err());
    }

    #[test]
    fn szego_examples() {
        let flat = GridDensity::constant(UnitCircleGrid::half_step(64).unwrap(), 1.0);
        let s = szego_error_sequence(&flat, 20).unwrap();
        assert!(s.errors.iter().all(|&e| (e - 1.0).abs() < 1e-14));

        let d = density_of(&poly(&[0, 1]), 4096);
        let s = szego_error_sequence(&d, 512).unwrap();
        assert!((s.errors[1] - 0.75).abs() < 1e-14);
        // closed form for this density: E_n = (n + 2) / (2(n + 1))
        for n in [2usize, 10, 100, 512] {
            let exact = (n as f64 + 2.0) / (2.0 * (n as f64 + 1.0));
            assert!((s.errors[n] - exact).abs() < 1e-10, "n={n}");
        }
        assert!(s.errors.windows(2).all(|w| w[1] <= w[0]));
        assert!((s.last() - 0.5).abs() < 2e-3);
        assert!(s.singular_at.is_none());
    }

    #[test]
    fn szego_chacon_limit() {
        let d = density_of(&poly(&[0, 1, 3]), 4096);
        let s = szego_error_sequence(&d, 512).unwrap();
        assert!((math::sqrt(s.last()) - CHACON_M).abs() < 1e-6);
    }

    #[test]
    fn singular_toeplitz() {
        let zero = GridDensity::constant(UnitCircleGrid::half_step(8).unwrap(), 0.0);
        assert!(matches!(
            szego_error_sequence(&zero, 2),
            Err(Error::ToeplitzSingular { order: 0 })
        ));
        // |1 - z|² as the density of a deterministic process: one exact step.
        let r = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(matches!(levinson(&r), Err(Error::ToeplitzSingular { order: 1 })));
    }

    #[test]
    fn kolmogorov_examples() {
        let cfg = KolmogorovConfig::default();
        let flat = GridDensity::constant(UnitCircleGrid::half_step(64).unwrap(), 1.0);
        let k = kolmogorov_error(&flat, &cfg);
        assert_eq!((k.value, k.diverged), (1.0, false));

        let p = poly(&[0, 1]);
        let seq = kolmogorov_refined(UnitCircleGrid::half_step(256).unwrap(), 4, &cfg, |g| {
            Ok(modulus_on_grid(&p, g).iter().map(|v| v * v).collect())
        })
        .unwrap();
        assert!(seq.windows(2).all(|w| w[1].mean_inverse > w[0].mean_inverse));
        assert!(seq.iter().all(|k| k.diverged));

        // |2 + z|²/5: M = 4/5, harmonic mean (4 - 1)/5 = 3/5
        let vals = |g: &UnitCircleGrid| -> Result<Vec<f64>> {
            Ok((0..g.len())
                .map(|i| (g.point(i) + 2.0).norm_sqr() / 5.0)
                .collect())
        };
        let seq = kolmogorov_refined(UnitCircleGrid::half_step(256).unwrap(), 3, &cfg, vals).unwrap();
        let last = seq.last().unwrap();
        assert!(!last.diverged);
        assert!((last.value - 0.6).abs() < 1e-10);
        assert!(last.value < 0.8);
    }

    #[test]
    fn outer_and_nakazi_examples() {
        let flat = GridDensity::constant(UnitCircleGrid::half_step(64).unwrap(), 1.0);
        let oc = outer_coefficients(&flat, 5).unwrap();
        assert!((oc.alphas[0].re - 1.0).abs() < 1e-15);
        assert!(oc.alphas[1..].iter().all(|a| a.norm() < 1e-15));
        assert!((nakazi_error(&flat, 3).unwrap() - 1.0).abs() < 1e-15);

        let d = density_of(&poly(&[0, 1]), 1 << 20);
        let oc = outer_coefficients(&d, 8).unwrap();
        let s = core::f64::consts::FRAC_1_SQRT_2;
        assert!((oc.alphas[0].re - s).abs() < 1e-6);
        assert!((oc.alphas[1] - s).norm() < 1e-6);
        assert!(oc.alphas[2..].iter().all(|a| a.norm() < 1e-5));
        assert!((oc.nakazi_error(0).unwrap() - s).abs() < 1e-6);
        assert!((oc.nakazi_error(1).unwrap() - 1.0).abs() < 1e-6);
        assert!(oc.check_tail(1e-2).is_ok());
        assert!(matches!(
            outer_coefficients_checked(&d, 1, 1e-2),
            Err(Error::NotConverged { order: 1, .. })
        ));

        let z = GridDensity::constant(UnitCircleGrid::half_step(8).unwrap(), 0.0);
        assert_eq!(outer_coefficients(&z, 1).unwrap_err(), Error::LogDiverged { index: 0 });
    }

    #[test]
    fn nakazi_tracks_szego_and_mass() {
        let d = density_of(&poly(&[0, 1, 3]), 1 << 14);
        let oc = outer_coefficients(&d, 256).unwrap();
        let s = szego_error_sequence(&d, 256).unwrap();
        let n0 = oc.nakazi_error(0).unwrap();
        assert!((n0 * n0 - s.last()).abs() < 5e-3);
        assert!((oc.nakazi_error(256).unwrap() - 1.0).abs() < 1e-6);
        let seq: Vec<f64> = (0..=256).map(|n| oc.nakazi_error(n).unwrap()).collect();
        assert!(seq.windows(2).all(|w| w[1] >= w[0] - 1e-15));
    }

    #[test]
    fn engine_names_roundtrip() {
        for e in MahlerEngine::ALL {
            assert_eq!(e.as_str().parse::<MahlerEngine>().unwrap(), e);
        }
        assert!("nope".parse::<MahlerEngine>().is_err());
    }

    fn product_samples(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x * y).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn grid_matches_jensen(raw in proptest::collection::btree_set(0u128..=64, 1..12)) {
            let p = SparseCirclePolynomial::new(raw.into_iter().collect()).unwrap();
            let g = mahler_grid(&p, UnitCircleGrid::half_step(1 << 16).unwrap()).unwrap();
            let j = mahler_jensen(&p, DEFAULT_DEGREE_CAP).unwrap();
            prop_assert!((g.value - j.value).abs() <= 1e-4, "grid {} jensen {}", g.value, j.value);
        }

        #[test]
        fn ordering_chain(raw in proptest::collection::btree_set(0u128..=24, 2..8)) {
            let p = SparseCirclePolynomial::new(raw.into_iter().collect()).unwrap();
            let d = density_of(&p, 1 << 12);
            let m = mahler_of_samples(&d.values).value;
            let prof = delta_norm_profile(&d.values, &[1.0, 0.5, 0.25]).unwrap();
            prop_assert!(m <= prof.norms[2] + 1e-9);
            prop_assert!(prof.norms[2] <= prof.norms[1] + 1e-9);
            prop_assert!(prof.norms[1] <= prof.norms[0] + 1e-9);
            let k = kolmogorov_error(&d, &KolmogorovConfig::default());
            let s = szego_error_sequence(&d, 64).unwrap();
            prop_assert!(k.value <= s.last() + 1e-9);
            prop_assert!(s.errors.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        }

        #[test]
        fn multiplicative(a in proptest::collection::btree_set(0u128..=20, 1..6),
                          b in proptest::collection::btree_set(0u128..=20, 1..6)) {
            let grid = UnitCircleGrid::half_step(1 << 10).unwrap();
            let pa = SparseCirclePolynomial::new(a.into_iter().collect()).unwrap();
            let pb = SparseCirclePolynomial::new(b.into_iter().collect()).unwrap();
            let fa = GridDensity::from_polynomial(&pa, grid).values;
            let fb = GridDensity::from_polynomial(&pb, grid).values;
            let joint = mahler_of_samples(&product_samples(&fa, &fb)).value;
            let split = mahler_of_samples(&fa).value * mahler_of_samples(&fb).value;
            prop_assert!((joint - split).abs() <= 1e-10 * split.max(1.0));
        }
    }
}
