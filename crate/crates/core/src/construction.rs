//! Rank-one constructions: cutting parameters, spacers, tower heights.
//!
//! Stage `k` cuts the current tower of height `h_k` into `m_k` columns and
//! puts `a_j^{(k)}` spacer levels above column `j`, so
//! `h_{k+1} = m_k·h_k + Σ_j a_j^{(k)}` with `h_0 = 1`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{self, Ratio};
use crate::rng;

/// Default number of stages any height-dependent operation may touch.
pub const DEFAULT_STAGE_CAP: usize = 24;

/// One cutting stage: `m` columns and the spacer counts above each of them.
///
/// Kept signed so that untrusted input can be parsed first and rejected by
/// [`RankOneConstruction::validate`] with a precise error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSpec {
    pub m: i64,
    pub spacers: Vec<i64>,
}

impl StageSpec {
    pub fn new(m: i64, spacers: Vec<i64>) -> Self {
        StageSpec { m, spacers }
    }

    /// `m` columns, no spacers.
    pub fn plain(m: i64) -> Self {
        StageSpec {
            m,
            spacers: vec![0; m.max(0) as usize],
        }
    }

    pub fn check(&self, stage: usize) -> Result<()> {
        if self.m < 2 {
            return Err(Error::CutTooSmall { stage, m: self.m });
        }
        if self.spacers.len() != self.m as usize {
            return Err(Error::SpacerShape {
                stage,
                expected: self.m as usize,
                found: self.spacers.len(),
            });
        }
        if let Some(column) = self.spacers.iter().position(|&a| a < 0) {
            return Err(Error::NegativeSpacer { stage, column });
        }
        Ok(())
    }

    /// Cut count; only meaningful after [`StageSpec::check`].
    pub fn cuts(&self) -> usize {
        self.m as usize
    }

    pub fn spacer_sum(&self) -> u128 {
        self.spacers.iter().map(|&a| a as u128).sum()
    }

    /// `s(k,0) = 0`, `s(k,j) = a_1 + … + a_j` for `1 ≤ j < m`.
    /// The last spacer only feeds the next height.
    pub fn cumulative_spacers(&self) -> Vec<u128> {
        let mut out = Vec::with_capacity(self.cuts());
        let mut acc = 0u128;
        out.push(0);
        for &a in self.spacers.iter().take(self.cuts().saturating_sub(1)) {
            acc += a as u128;
            out.push(acc);
        }
        out
    }
}

/// Optional knobs of the named presets. Unused fields are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacers: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, rename = "C", skip_serializing_if = "Option::is_none")]
    pub big_c: Option<f64>,
}

/// Generator rule as it appears in config files:
/// `{"type": "chacon", "params": {...}, "seed": 7}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub params: PresetParams,
    #[serde(default)]
    pub seed: u64,
}

pub const PRESET_NAMES: [&str; 5] = [
    "chacon",
    "constant",
    "staircase",
    "ornstein-random",
    "power-growth",
];

#[derive(Debug, Clone, PartialEq)]
enum Rule {
    Chacon,
    Constant { m: i64, spacers: Vec<i64> },
    Staircase { m: i64, step: i64 },
    OrnsteinRandom { m: i64, step: i64, seed: u64 },
    PowerGrowth { beta: f64, c: f64, big_c: f64 },
}

impl Rule {
    fn resolve(spec: &GeneratorSpec) -> Result<Rule> {
        let p = &spec.params;
        let m_or = |default: i64| -> Result<i64> {
            let m = p.m.unwrap_or(default);
            if m < 2 {
                return Err(Error::BadParams(format!("m = {m} must be at least 2")));
            }
            Ok(m)
        };
        let step = p.step.unwrap_or(0);
        if step < 0 {
            return Err(Error::BadParams(format!("step = {step} must be nonnegative")));
        }
        match spec.kind.as_str() {
            "chacon" => Ok(Rule::Chacon),
            "constant" => {
                let m = m_or(2)?;
                let spacers = p.spacers.clone().unwrap_or_else(|| vec![0; m as usize]);
                if spacers.len() != m as usize || spacers.iter().any(|&a| a < 0) {
                    return Err(Error::BadParams(format!(
                        "constant preset needs {m} nonnegative spacers"
                    )));
                }
                Ok(Rule::Constant { m, spacers })
            }
            "staircase" => Ok(Rule::Staircase { m: m_or(2)?, step }),
            "ornstein-random" => Ok(Rule::OrnsteinRandom {
                m: m_or(3)?,
                step,
                seed: spec.seed,
            }),
            "power-growth" => {
                let beta = p.beta.unwrap_or(1.0);
                let c = p.c.unwrap_or(1.0);
                let big_c = p.big_c.unwrap_or(3.0);
                if !(beta > 0.0 && beta.is_finite()) || !(c > 0.0) || !(big_c >= c) {
                    return Err(Error::BadParams(format!(
                        "power-growth needs beta > 0 and 0 < c <= C (beta={beta}, c={c}, C={big_c})"
                    )));
                }
                Ok(Rule::PowerGrowth { beta, c, big_c })
            }
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    fn cut_count(&self, k: usize) -> Result<i64> {
        Ok(match self {
            Rule::Chacon => 3,
            Rule::Constant { m, .. } => *m,
            Rule::Staircase { m, step } | Rule::OrnsteinRandom { m, step, .. } => {
                m.checked_add(step.checked_mul(k as i64).ok_or(Error::Overflow { stage: k })?)
                    .ok_or(Error::Overflow { stage: k })?
            }
            Rule::PowerGrowth { beta, c, big_c } => {
                // m_j = max(2, ceil(c·(j+1)^β) + 1); for c = β = 1 this is j + 2.
                let raw = math::ceil(c * math::powf(k as f64 + 1.0, *beta)) + 1.0;
                if !(raw < 9.0e18) {
                    return Err(Error::Overflow { stage: k });
                }
                let m = (raw as i64).max(2);
                if k >= 1 {
                    let ratio = m as f64 / math::powf(k as f64, *beta);
                    if ratio < *c || ratio > *big_c {
                        return Err(Error::BadParams(format!(
                            "power-growth stage {k}: m/j^beta = {ratio} outside [{c}, {big_c}]"
                        )));
                    }
                }
                m
            }
        })
    }

    /// Stage `k` given the current height `h_k`.
    fn stage(&self, k: usize, height: u128) -> Result<StageSpec> {
        let m = self.cut_count(k)?;
        Ok(match self {
            Rule::Chacon => StageSpec::new(3, vec![0, 1, 0]),
            Rule::Constant { spacers, .. } => StageSpec::new(m, spacers.clone()),
            Rule::Staircase { .. } => StageSpec::new(m, (0..m).collect()),
            Rule::OrnsteinRandom { seed, .. } => {
                let mut spacers = Vec::with_capacity(m as usize);
                for column in 0..m as usize {
                    let x = rng::word(*seed, rng::stage_counter(k, column));
                    let a = rng::uniform_inclusive(x, height)
                        .filter(|&a| a <= i64::MAX as u128)
                        .ok_or(Error::Overflow { stage: k })?;
                    spacers.push(a as i64);
                }
                StageSpec::new(m, spacers)
            }
            Rule::PowerGrowth { .. } => StageSpec::plain(m),
        })
    }
}

/// A rank-one construction: explicit stages, an optional generator for the
/// stages not listed, and a cap on how many stages may be materialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOneConstruction {
    pub name: String,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
    #[serde(default)]
    pub stages: Vec<StageSpec>,
    #[serde(default = "default_stage_cap")]
    pub stage_cap: usize,
}

fn default_stage_cap() -> usize {
    DEFAULT_STAGE_CAP
}

/// `h_0..h_K` together with `∏_{i<k} m_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightTable {
    pub heights: Vec<u128>,
    pub cut_products: Vec<u128>,
    /// Set when the table stops early because a height left 128 bits.
    pub overflow: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureVerdict {
    Converging,
    Diverging,
    Undetermined,
}

/// Thresholds for the total-measure trend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureTrendConfig {
    /// Last increment relative to the partial value below which the trend
    /// counts as converging.
    pub relative_tol: f64,
    /// Absolute increment the last two steps must both reach to count as
    /// diverging.
    pub growth_floor: f64,
}

impl Default for MeasureTrendConfig {
    fn default() -> Self {
        MeasureTrendConfig {
            relative_tol: 1e-2,
            growth_floor: 0.05,
        }
    }
}

/// Partial total measures `h_k / ∏_{i<k} m_i`, `k = 0..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotalMeasure {
    pub partials: Vec<Ratio>,
    pub values: Vec<f64>,
    pub verdict: MeasureVerdict,
}

impl TotalMeasure {
    pub fn last(&self) -> f64 {
        *self.values.last().unwrap_or(&1.0)
    }
}

impl RankOneConstruction {
    /// Construction made only of explicit stages.
    pub fn explicit(name: impl Into<String>, stages: Vec<StageSpec>) -> Self {
        RankOneConstruction {
            name: name.into(),
            generator: None,
            stages,
            stage_cap: DEFAULT_STAGE_CAP,
        }
    }

    /// One of [`PRESET_NAMES`]. Deterministic in `(name, params, seed)`.
    pub fn preset(name: &str, params: PresetParams, seed: u64) -> Result<Self> {
        let spec = GeneratorSpec {
            kind: name.to_string(),
            params,
            seed,
        };
        Rule::resolve(&spec)?;
        Ok(RankOneConstruction {
            name: name.to_string(),
            generator: Some(spec),
            stages: Vec::new(),
            stage_cap: DEFAULT_STAGE_CAP,
        })
    }

    pub fn chacon() -> Self {
        Self::preset("chacon", PresetParams::default(), 0).expect("chacon preset")
    }

    pub fn with_stage_cap(mut self, cap: usize) -> Self {
        self.stage_cap = cap;
        self
    }

    /// Returns the construction iff every explicit stage and the generator
    /// parameters are well formed.
    pub fn validate(self) -> Result<Self> {
        if self.stages.is_empty() && self.generator.is_none() {
            return Err(Error::EmptyConstruction);
        }
        for (k, stage) in self.stages.iter().enumerate() {
            stage.check(k)?;
        }
        if let Some(spec) = &self.generator {
            Rule::resolve(spec)?;
        }
        Ok(self)
    }

    fn rule(&self) -> Result<Option<Rule>> {
        self.generator.as_ref().map(Rule::resolve).transpose()
    }

    /// Number of stages that can be materialized (the cap for generated
    /// constructions, the explicit count otherwise).
    pub fn available_stages(&self) -> usize {
        if self.generator.is_some() {
            self.stage_cap
        } else {
            self.stages.len().min(self.stage_cap)
        }
    }

    /// Cut counts `m_0..m_{K-1}`. Not bound by the stage cap since no height
    /// is involved.
    pub fn cut_counts(&self, count: usize) -> Result<Vec<u64>> {
        let rule = self.rule()?;
        (0..count)
            .map(|k| {
                let m = match (self.stages.get(k), &rule) {
                    (Some(s), _) => {
                        s.check(k)?;
                        s.m
                    }
                    (None, Some(rule)) => rule.cut_count(k)?,
                    (None, None) => {
                        return Err(Error::StageOutOfRange {
                            stage: k,
                            available: self.stages.len(),
                        })
                    }
                };
                Ok(m as u64)
            })
            .collect()
    }

    /// Walks the first `count` stages computing heights; stops early on overflow.
    fn walk(&self, count: usize) -> Result<(Vec<StageSpec>, HeightTable)> {
        if count > self.stage_cap {
            return Err(Error::StageCapExceeded {
                requested: count,
                cap: self.stage_cap,
            });
        }
        let rule = self.rule()?;
        let mut stages = Vec::with_capacity(count);
        let mut table = HeightTable {
            heights: vec![1],
            cut_products: vec![1],
            overflow: false,
        };
        for k in 0..count {
            let h = table.heights[k];
            let stage = match (self.stages.get(k), &rule) {
                (Some(s), _) => s.clone(),
                (None, Some(rule)) => match rule.stage(k, h) {
                    Ok(s) => s,
                    Err(Error::Overflow { .. }) => {
                        table.overflow = true;
                        break;
                    }
                    Err(e) => return Err(e),
                },
                (None, None) => {
                    return Err(Error::StageOutOfRange {
                        stage: k,
                        available: self.stages.len(),
                    })
                }
            };
            stage.check(k)?;
            let m = stage.m as u128;
            let next_h = m
                .checked_mul(h)
                .and_then(|x| x.checked_add(stage.spacer_sum()));
            let next_p = table.cut_products[k].checked_mul(m);
            match (next_h, next_p) {
                (Some(nh), Some(np)) => {
                    table.heights.push(nh);
                    table.cut_products.push(np);
                    stages.push(stage);
                }
                _ => {
                    table.overflow = true;
                    break;
                }
            }
        }
        Ok((stages, table))
    }

    /// Stages `0..count`, with explicit entries overriding the generator.
    pub fn materialize(&self, count: usize) -> Result<Vec<StageSpec>> {
        let (stages, table) = self.walk(count)?;
        if stages.len() < count {
            debug_assert!(table.overflow);
            return Err(Error::Overflow {
                stage: stages.len(),
            });
        }
        Ok(stages)
    }

    pub fn stage(&self, k: usize) -> Result<StageSpec> {
        let mut stages = self.materialize(k + 1)?;
        Ok(stages.pop().expect("k+1 stages"))
    }

    /// Heights `h_0..h_K`. On overflow the table is truncated and flagged
    /// rather than failing.
    pub fn heights(&self, count: usize) -> Result<HeightTable> {
        self.walk(count).map(|(_, table)| table)
    }

    /// Heights with overflow promoted to an error.
    pub fn heights_strict(&self, count: usize) -> Result<HeightTable> {
        let table = self.heights(count)?;
        if table.overflow {
            return Err(Error::Overflow {
                stage: table.heights.len() - 1,
            });
        }
        Ok(table)
    }

    /// `s(k, 0..m_k)`.
    pub fn cumulative_spacers(&self, k: usize) -> Result<Vec<u128>> {
        if k >= self.available_stages() {
            return Err(Error::StageOutOfRange {
                stage: k,
                available: self.available_stages(),
            });
        }
        Ok(self.stage(k)?.cumulative_spacers())
    }

    /// Partial total measures up to stage `K` and their trend.
    pub fn total_measure(&self, count: usize, cfg: &MeasureTrendConfig) -> Result<TotalMeasure> {
        let table = self.heights_strict(count)?;
        let partials: Vec<Ratio> = table
            .heights
            .iter()
            .zip(&table.cut_products)
            .map(|(&h, &p)| Ratio::new(h, p))
            .collect();
        let values: Vec<f64> = partials.iter().map(|r| r.to_f64()).collect();
        let verdict = measure_verdict(&values, cfg);
        Ok(TotalMeasure {
            partials,
            values,
            verdict,
        })
    }
}

fn measure_verdict(values: &[f64], cfg: &MeasureTrendConfig) -> MeasureVerdict {
    let increments: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let Some(&last) = increments.last() else {
        return MeasureVerdict::Undetermined;
    };
    let prev = increments.len().checked_sub(2).map(|i| increments[i]);
    if last >= cfg.growth_floor && prev.is_some_and(|p| p >= cfg.growth_floor) {
        return MeasureVerdict::Diverging;
    }
    let current = *values.last().expect("nonempty");
    if last / current < cfg.relative_tol && prev.is_none_or(|p| last <= p) {
        return MeasureVerdict::Converging;
    }
    MeasureVerdict::Undetermined
}
