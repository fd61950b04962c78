//! Theorem-level trend diagnostics and the assembled [`SpectralReport`].
//!
//! Every verdict is three-valued and driven by thresholds kept in
//! [`ReportConfig`]; nothing here certifies a limit.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::affinity::{
    affinity_to_uniform, fractional_mean_check, mcgehee_check, q_sequence, FractionalMeanCheck,
    InequalityCheck, QSequenceProfile, INEQUALITY_TOL,
};
use crate::circlepoly::{
    modulus_on_grid, GridDensity, SparseCirclePolynomial, StageGridTable, UnitCircleGrid,
    DEFAULT_COMBINATORIAL_CAP,
};
use crate::construction::{
    GeneratorSpec, MeasureTrendConfig, MeasureVerdict, RankOneConstruction, TotalMeasure,
};
use crate::error::{Error, Result};
use crate::mahler::{
    kolmogorov_error, mahler_grid, mahler_jensen, roots_outside, szego_error_sequence, KolmogorovConfig,
    MahlerEngine, DEFAULT_DEGREE_CAP,
};
use crate::math;
use crate::tower::{wiener_atom_mass, AtomMass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Undetermined,
}

/// Per-stage Mahler factors `M(P_j)` and their running products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyPartial {
    pub engine: MahlerEngine,
    pub factors: Vec<f64>,
    /// `∏_{j<K'} M(P_j)` for `K' = 1..=K`.
    pub partials: Vec<f64>,
    /// `∫|P_j| dλ` on the same grid.
    pub l1_norms: Vec<f64>,
    /// `M(P_j) ≤ ∫|P_j| < 1` at every stage, within tolerance.
    pub chain_holds: bool,
    /// Partials below the floor: singularity-consistent. Geometrically
    /// vanishing `1 − M(P_j)`: consistent with an absolutely continuous part,
    /// reported as `Inconsistent`.
    pub singularity: Verdict,
    /// Stage at which the engine failed, with the reason.
    pub stopped: Option<StageFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: usize,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DichotomyConfig {
    /// Partial products below this read as singularity-consistent.
    pub floor: f64,
    /// `1 − M(P_j)` shrinking by at least this factor over the last steps
    /// reads as summable.
    pub summable_ratio: f64,
    /// `1 − M(P_j)` holding at least this fraction of its value over the
    /// last steps reads as non-summable.
    pub persistent_ratio: f64,
    /// Levinson order for the Szegő engine.
    pub szego_order: usize,
    pub degree_cap: usize,
}

impl Default for DichotomyConfig {
    fn default() -> Self {
        DichotomyConfig {
            floor: 1e-3,
            summable_ratio: 0.75,
            persistent_ratio: 0.9,
            szego_order: 512,
            degree_cap: DEFAULT_DEGREE_CAP,
        }
    }
}

/// `M(P)` by one engine; the density-based engines return `√M(|P|²)`.
pub fn stage_mahler(
    poly: &SparseCirclePolynomial,
    engine: MahlerEngine,
    grid: UnitCircleGrid,
    cfg: &DichotomyConfig,
) -> Result<f64> {
    match engine {
        MahlerEngine::Grid => Ok(mahler_grid(poly, grid)?.value),
        MahlerEngine::Jensen => Ok(mahler_jensen(poly, cfg.degree_cap)?.value),
        MahlerEngine::Szego => {
            let d = GridDensity::from_polynomial(poly, grid);
            let order = cfg.szego_order.min(grid.len() / 2 - 1);
            Ok(math::sqrt(szego_error_sequence(&d, order)?.last()))
        }
        MahlerEngine::KolmogorovLower => {
            let d = GridDensity::from_polynomial(poly, grid);
            Ok(math::sqrt(kolmogorov_error(&d, &KolmogorovConfig::default()).value))
        }
    }
}

/// Dichotomy partial products over the polynomials of `table`, in order.
pub fn dichotomy_partial(table: &StageGridTable, engine: MahlerEngine, cfg: &DichotomyConfig) -> DichotomyPartial {
    let mut factors = Vec::new();
    let mut l1_norms = Vec::new();
    let mut stopped = None;
    for (i, poly) in table.polys.iter().enumerate() {
        let stage = poly.stage.unwrap_or(i);
        match stage_mahler(poly, engine, table.grid, cfg) {
            Ok(f) => {
                factors.push(f);
                l1_norms.push(math::mean(table.modulus(stage).expect("own stage")));
            }
            Err(e) => {
                stopped = Some(StageFailure {
                    stage,
                    error: e.to_string(),
                });
                break;
            }
        }
    }
    let mut partials = Vec::with_capacity(factors.len());
    let mut acc = 1.0;
    for f in &factors {
        acc *= f;
        partials.push(acc);
    }
    let chain_holds = factors
        .iter()
        .zip(&l1_norms)
        .all(|(&f, &l)| f <= l + INEQUALITY_TOL && l < 1.0);
    let singularity = dichotomy_verdict(&factors, &partials, cfg);
    DichotomyPartial {
        engine,
        factors,
        partials,
        l1_norms,
        chain_holds,
        singularity,
        stopped,
    }
}

fn dichotomy_verdict(factors: &[f64], partials: &[f64], cfg: &DichotomyConfig) -> Verdict {
    match partials.last() {
        None => return Verdict::Undetermined,
        Some(&p) if p < cfg.floor => return Verdict::Consistent,
        _ => {}
    }
    if factors.len() >= 3 {
        let gaps: Vec<f64> = factors[factors.len() - 3..].iter().map(|f| 1.0 - f).collect();
        if gaps[1] <= cfg.summable_ratio * gaps[0] && gaps[2] <= cfg.summable_ratio * gaps[1] {
            return Verdict::Inconsistent;
        }
        if gaps[0] > 0.0 && gaps[1] >= cfg.persistent_ratio * gaps[0] && gaps[2] >= cfg.persistent_ratio * gaps[1] {
            return Verdict::Consistent;
        }
    }
    Verdict::Undetermined
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesTrendConfig {
    /// Last increment relative to the partial sum below which a series
    /// reads as convergent.
    pub relative_tol: f64,
    /// Last increment at least this fraction of the largest one reads as
    /// non-decaying, hence divergent.
    pub persistence: f64,
}

impl Default for SeriesTrendConfig {
    fn default() -> Self {
        SeriesTrendConfig {
            relative_tol: 1e-2,
            persistence: 0.5,
        }
    }
}

/// `Consistent` = divergent, `Inconsistent` = convergent.
fn series_verdict(increments: &[f64], sum: f64, cfg: &SeriesTrendConfig) -> Verdict {
    let Some(&last) = increments.last() else {
        return Verdict::Undetermined;
    };
    if increments.len() >= 2 {
        let max = increments.iter().copied().fold(0.0, f64::max);
        if last >= cfg.persistence * max {
            return Verdict::Consistent;
        }
    }
    if sum > 0.0 && last / sum < cfg.relative_tol {
        return Verdict::Inconsistent;
    }
    Verdict::Undetermined
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlemesReinhold {
    /// `Σ_{k<K'} 1/m_k²` for `K' = 1..=K`.
    pub partial_sums: Vec<f64>,
    /// `Consistent` when the series looks divergent (the criterion fires).
    pub divergent: Verdict,
}

pub fn klemes_reinhold(cuts: &[u64], cfg: &SeriesTrendConfig) -> KlemesReinhold {
    let increments: Vec<f64> = cuts.iter().map(|&m| 1.0 / (m as f64 * m as f64)).collect();
    let partial_sums = running_sums(&increments);
    let divergent = series_verdict(&increments, *partial_sums.last().unwrap_or(&0.0), cfg);
    KlemesReinhold {
        partial_sums,
        divergent,
    }
}

fn running_sums(xs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    xs.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BourgainGap {
    pub n: usize,
    /// `∫ |(1/√n) Σ z^{l_i}| dλ`.
    pub l1: f64,
    /// `(1 − l1)·n / ln n`.
    pub gap: f64,
}

/// Quadrature points per unit of degree used for `l1`.
pub const BOURGAIN_OVERSAMPLING: u128 = 16;

/// Gap of a sparse exponent set on a half-step grid with at least
/// `min_grid` points and `16·max exponent` resolution.
pub fn bourgain_gap(exponents: &[u128], min_grid: usize) -> Result<BourgainGap> {
    if exponents.len() < 2 {
        return Err(Error::TooFewTerms { n: exponents.len() });
    }
    let mut sorted = exponents.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != exponents.len() {
        return Err(Error::InvalidArgument("exponents must be distinct".into()));
    }
    let poly = SparseCirclePolynomial::new(sorted)?;
    let grid = UnitCircleGrid::exact_for(poly.max_exponent().saturating_mul(BOURGAIN_OVERSAMPLING / 2), min_grid)?;
    Ok(bourgain_gap_of(&math::mean(&modulus_on_grid(&poly, &grid)), poly.len()))
}

fn bourgain_gap_of(l1: &f64, n: usize) -> BourgainGap {
    let nf = n as f64;
    BourgainGap {
        n,
        l1: *l1,
        gap: (1.0 - l1) * nf / math::ln(nf),
    }
}

/// Per-stage gaps `(1 − ∫|P_j|)·m_j / ln m_j` from a stage table.
pub fn stage_bourgain_gaps(table: &StageGridTable) -> Vec<BourgainGap> {
    table
        .polys
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let l1 = math::mean(table.modulus(p.stage.unwrap_or(i)).expect("own stage"));
            bourgain_gap_of(&l1, p.len())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCount {
    /// Roots of `√m_k·P_k` with `|α| > 1 + 1e-8`.
    pub count: usize,
    /// `c·h_{k−1}`.
    pub threshold: f64,
    pub holds: bool,
}

pub fn zero_count_for(poly: &SparseCirclePolynomial, previous_height: u128, c: f64, degree_cap: usize) -> Result<ZeroCount> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("constant {c} must lie in (0, 1)")));
    }
    let count = roots_outside(poly, degree_cap)?.len();
    let threshold = c * previous_height as f64;
    Ok(ZeroCount {
        count,
        threshold,
        holds: (count as f64) < threshold,
    })
}

pub fn zero_count_check(construction: &RankOneConstruction, k: usize, c: f64, degree_cap: usize) -> Result<ZeroCount> {
    if k == 0 {
        return Err(Error::InvalidArgument("the zero count needs k ≥ 1".into()));
    }
    let poly = crate::circlepoly::stage_polynomial(construction, k)?;
    let h = construction.heights_strict(k)?.heights[k - 1];
    zero_count_for(&poly, h, c, degree_cap)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nad3Bounds {
    /// `(∫Q_K dλ)²`.
    pub ac_mass_lower: f64,
    pub atom: Option<AtomMass>,
    /// `1 − atom mass`, absent for infinite-measure constructions.
    pub atom_upper: Option<f64>,
    /// `ac_mass_lower ≤ atom_upper + tolerance`.
    pub consistent: Option<bool>,
    pub margin: Option<f64>,
    pub tolerance: f64,
    pub note: Option<String>,
}

/// Lower bound from the `Q`-integral and upper bound from the Wiener atom
/// at `z = 1`; the atom side is skipped when the total measure diverges.
pub fn nad3_bounds(
    table: &StageGridTable,
    count: usize,
    construction: &RankOneConstruction,
    measure: MeasureVerdict,
    atom_stage: usize,
    lags: u128,
    cap: u128,
    tolerance: f64,
) -> Result<Nad3Bounds> {
    let stages: Vec<usize> = (0..count).collect();
    let q = math::mean(&table.product_modulus(&stages)?);
    let ac_mass_lower = q * q;
    let mut out = Nad3Bounds {
        ac_mass_lower,
        atom: None,
        atom_upper: None,
        consistent: None,
        margin: None,
        tolerance,
        note: None,
    };
    if measure == MeasureVerdict::Diverging {
        out.note = Some(Error::InfiniteMeasure.to_string());
        return Ok(out);
    }
    let atom = wiener_atom_mass(construction, 0, atom_stage, lags, cap)?;
    let upper = 1.0 - atom.mass;
    out.atom = Some(atom);
    out.atom_upper = Some(upper);
    out.consistent = Some(ac_mass_lower <= upper + tolerance);
    out.margin = Some(upper - ac_mass_lower);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Main2Trend {
    pub c_hat: f64,
    /// `∏_{j<K'} (1 − ĉ·ln m_j / m_j)`.
    pub products: Vec<f64>,
    /// `Σ_{j<K'} ln m_j / m_j`.
    pub sums: Vec<f64>,
    /// `Consistent` when the sum keeps growing (product driven to 0).
    pub divergent: Verdict,
}

pub fn main2_trend(cuts: &[u64], c_hat: f64, cfg: &SeriesTrendConfig) -> Result<Main2Trend> {
    if !(c_hat > 0.0 && c_hat < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("c_hat {c_hat} must lie in (0, 1)")));
    }
    let terms: Vec<f64> = cuts
        .iter()
        .map(|&m| {
            let m = m as f64;
            math::ln(m) / m
        })
        .collect();
    let sums = running_sums(&terms);
    let mut acc = 1.0;
    let products = terms
        .iter()
        .map(|t| {
            acc *= 1.0 - c_hat * t;
            acc
        })
        .collect();
    let divergent = main2_verdict(&terms, &sums, cfg);
    Ok(Main2Trend {
        c_hat,
        products,
        sums,
        divergent,
    })
}

/// The sum diverges when its tail over the second half of the stages is not
/// small against the whole; a slowly decaying term still grows the sum.
fn main2_verdict(terms: &[f64], sums: &[f64], cfg: &SeriesTrendConfig) -> Verdict {
    let n = sums.len();
    if n < 4 {
        return series_verdict(terms, *sums.last().unwrap_or(&0.0), cfg);
    }
    let total = sums[n - 1];
    let half_tail = total - sums[n / 2 - 1];
    if half_tail >= cfg.relative_tol * total * 10.0 {
        Verdict::Consistent
    } else if half_tail < cfg.relative_tol * total {
        Verdict::Inconsistent
    } else {
        Verdict::Undetermined
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportConfig {
    /// Half-step grid size for every density.
    pub grid_n: usize,
    /// Number of stages `K` in the partial products.
    pub stages: usize,
    /// Engine whose partials head the `mahler` section.
    pub engine: MahlerEngine,
    pub engines: Vec<MahlerEngine>,
    pub dichotomy: DichotomyConfig,
    pub series: SeriesTrendConfig,
    pub measure: MeasureTrendConfig,
    /// Stages for the trend product `∏(1 − ĉ ln m / m)`.
    pub main2_stages: usize,
    pub c_hat: f64,
    /// Ambient stage `M` for the atom estimate.
    pub atom_stage: usize,
    /// Cesàro length `L`; `None` means `h_{M−1}`.
    pub atom_lags: Option<u128>,
    pub nad3_tolerance: f64,
    /// Residue-class counts for the fractional-mean check.
    pub classes: Vec<usize>,
    pub combinatorial_cap: u128,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            grid_n: 1 << 16,
            stages: 8,
            engine: MahlerEngine::Grid,
            engines: MahlerEngine::ALL.to_vec(),
            dichotomy: DichotomyConfig::default(),
            series: SeriesTrendConfig::default(),
            measure: MeasureTrendConfig::default(),
            main2_stages: 10_000,
            c_hat: 0.1,
            atom_stage: 6,
            atom_lags: None,
            nad3_tolerance: 0.02,
            classes: alloc::vec![1, 2, 3],
            combinatorial_cap: DEFAULT_COMBINATORIAL_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionSummary {
    pub name: String,
    pub generator: Option<GeneratorSpec>,
    pub stage_count: usize,
    pub cut_counts: Vec<u64>,
    pub heights: Vec<u128>,
    pub total_measure: Option<TotalMeasure>,
    pub overflow: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MahlerSection {
    pub engine: MahlerEngine,
    pub partials: Vec<f64>,
    pub per_engine: BTreeMap<MahlerEngine, DichotomyPartial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalitySection {
    pub mcgehee: Vec<InequalityCheck>,
    pub fractional_mean: Vec<FractionalMeanCheck>,
    /// `G(∏|P_k|² dλ, λ)` per `K`.
    pub affinity_to_uniform: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Caps {
    pub stage_cap: usize,
    pub combinatorial_cap: u128,
    pub degree_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(rename = "grid_N")]
    pub grid_n: usize,
    pub exact_grid: bool,
    pub caps: Caps,
    pub seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub construction: ConstructionSummary,
    pub mahler: Option<MahlerSection>,
    pub klemes_reinhold: Option<KlemesReinhold>,
    pub bourgain: Vec<BourgainGap>,
    pub q_profile: Option<QSequenceProfile>,
    pub inequalities: Option<InequalitySection>,
    pub atom_mass: Option<f64>,
    pub nad3: Option<Nad3Bounds>,
    pub main2: Option<Main2Trend>,
    pub verdicts: BTreeMap<String, Verdict>,
    pub config: ReportConfig,
    pub provenance: Provenance,
    /// Section name → error message for every section that was skipped.
    pub errors: BTreeMap<String, String>,
}

fn record<T>(errors: &mut BTreeMap<String, String>, section: &str, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            errors.insert(section.to_string(), e.to_string());
            None
        }
    }
}

/// Every section computed sequentially; failures become entries of
/// `errors` instead of aborting the report.
pub fn build_report(construction: &RankOneConstruction, cfg: &ReportConfig) -> Result<SpectralReport> {
    let construction = construction.clone().validate()?;
    let mut errors = BTreeMap::new();
    let grid = UnitCircleGrid::half_step(cfg.grid_n)?;

    let requested = cfg.stages;
    let heights = construction.heights(requested.min(construction.available_stages()))?;
    let count = heights.heights.len() - 1;
    if count < requested {
        errors.insert(
            "stages".into(),
            if heights.overflow {
                Error::Overflow { stage: count }.to_string()
            } else {
                Error::StageCapExceeded {
                    requested,
                    cap: construction.available_stages(),
                }
                .to_string()
            },
        );
    }
    let cut_counts = construction.cut_counts(count)?;
    let total_measure = record(&mut errors, "total_measure", construction.total_measure(count, &cfg.measure));
    let measure_verdict = total_measure
        .as_ref()
        .map_or(MeasureVerdict::Undetermined, |t| t.verdict);

    let table = record(
        &mut errors,
        "stage_table",
        StageGridTable::build_range(&construction, count, grid, cfg.combinatorial_cap),
    );
    let all: Vec<usize> = (0..count).collect();
    let exact_grid = table
        .as_ref()
        .and_then(|t| t.exact_for(&all).ok())
        .unwrap_or(false);

    let mut verdicts = BTreeMap::new();

    let mahler = table.as_ref().map(|t| {
        let mut per_engine = BTreeMap::new();
        let mut engines = cfg.engines.clone();
        if !engines.contains(&cfg.engine) {
            engines.push(cfg.engine);
        }
        for e in engines {
            per_engine.insert(e, dichotomy_partial(t, e, &cfg.dichotomy));
        }
        let primary = &per_engine[&cfg.engine];
        verdicts.insert("dichotomy_singularity".into(), primary.singularity);
        MahlerSection {
            engine: cfg.engine,
            partials: primary.partials.clone(),
            per_engine,
        }
    });

    let klemes = klemes_reinhold(&cut_counts, &cfg.series);
    verdicts.insert("klemes_reinhold_divergent".into(), klemes.divergent);

    let bourgain = table.as_ref().map(stage_bourgain_gaps).unwrap_or_default();

    let q_profile = table.as_ref().and_then(|t| {
        let ks: Vec<usize> = (0..=count).collect();
        let pairs: Vec<(usize, usize)> = (1..count).map(|n| (n, count)).collect();
        record(&mut errors, "q_profile", q_sequence(t, &ks, &pairs))
    });
    if let Some(q) = &q_profile {
        verdicts.insert("q_sequence_singularity".into(), q.singularity);
    }

    let inequalities = table.as_ref().and_then(|t| {
        let r = (|| -> Result<InequalitySection> {
            let mut mcgehee = Vec::with_capacity(count);
            let mut affinity = Vec::with_capacity(count);
            for k in 1..=count {
                let stages: Vec<usize> = (0..k).collect();
                mcgehee.push(mcgehee_check(t, &stages, 0)?);
                affinity.push(affinity_to_uniform(&t.density(&stages)?).affinity);
            }
            let mut fractional = Vec::new();
            for &c in &cfg.classes {
                if c >= 1 && c <= count {
                    fractional.push(fractional_mean_check(t, count, c)?);
                }
            }
            Ok(InequalitySection {
                mcgehee,
                fractional_mean: fractional,
                affinity_to_uniform: affinity,
            })
        })();
        record(&mut errors, "inequalities", r)
    });
    if let Some(ineq) = &inequalities {
        let ok = ineq.mcgehee.iter().all(|c| c.holds)
            && ineq.fractional_mean.iter().all(|c| c.check.holds);
        verdicts.insert(
            "inequalities_hold".into(),
            if ok { Verdict::Consistent } else { Verdict::Inconsistent },
        );
    }

    let atom_stage = cfg.atom_stage.min(construction.available_stages());
    let lags = match cfg.atom_lags {
        Some(l) => Ok(l),
        None => construction
            .heights_strict(atom_stage)
            .map(|h| h.heights[atom_stage.saturating_sub(1)]),
    };
    let nad3 = table.as_ref().and_then(|t| {
        let r = lags.clone().and_then(|l| {
            nad3_bounds(
                t,
                count,
                &construction,
                measure_verdict,
                atom_stage,
                l,
                cfg.combinatorial_cap,
                cfg.nad3_tolerance,
            )
        });
        record(&mut errors, "nad3", r)
    });
    let atom_mass = nad3.as_ref().and_then(|n| n.atom.map(|a| a.mass));
    if let Some(n) = &nad3 {
        verdicts.insert(
            "nad3_consistent".into(),
            match n.consistent {
                Some(true) => Verdict::Consistent,
                Some(false) => Verdict::Inconsistent,
                None => Verdict::Undetermined,
            },
        );
    }

    let main2_cuts = construction.cut_counts(cfg.main2_stages.min(main2_available(&construction)));
    let main2 = record(
        &mut errors,
        "main2",
        main2_cuts.and_then(|c| main2_trend(&c, cfg.c_hat, &cfg.series)),
    );
    if let Some(m) = &main2 {
        verdicts.insert("main2_divergent".into(), m.divergent);
    }
    verdicts.insert(
        "total_measure_finite".into(),
        match measure_verdict {
            MeasureVerdict::Converging => Verdict::Consistent,
            MeasureVerdict::Diverging => Verdict::Inconsistent,
            MeasureVerdict::Undetermined => Verdict::Undetermined,
        },
    );

    Ok(SpectralReport {
        construction: ConstructionSummary {
            name: construction.name.clone(),
            generator: construction.generator.clone(),
            stage_count: count,
            cut_counts,
            heights: heights.heights.clone(),
            total_measure,
            overflow: heights.overflow,
        },
        mahler,
        klemes_reinhold: Some(klemes),
        bourgain,
        q_profile,
        inequalities,
        atom_mass,
        nad3,
        main2,
        verdicts,
        config: cfg.clone(),
        provenance: Provenance {
            grid_n: cfg.grid_n,
            exact_grid,
            caps: Caps {
                stage_cap: construction.stage_cap,
                combinatorial_cap: cfg.combinatorial_cap,
                degree_cap: cfg.dichotomy.degree_cap,
            },
            seed: construction.generator.as_ref().map_or(0, |g| g.seed),
            version: crate::VERSION.to_string(),
        },
        errors,
    })
}

/// Cut counts need no heights, so generated constructions supply any number.
fn main2_available(c: &RankOneConstruction) -> usize {
    if c.generator.is_some() {
        usize::MAX
    } else {
        c.stages.len()
    }
}
