//! Construction and report config files, and the `key=value` preset
//! parameter syntax of the command line.

use std::ops::Range;
use std::path::Path;

use riesz_one_core::{PresetParams, RankOneConstruction, ReportConfig};

use crate::error::{AppError, AppResult};

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> AppResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| AppError::Json {
        path: path.into(),
        source: e,
    })
}

/// `{"name", "generator", "stages", "stage_cap"}`, validated.
pub fn load_construction(path: &Path) -> AppResult<RankOneConstruction> {
    let c: RankOneConstruction = read_json(path)?;
    Ok(c.validate()?)
}

pub fn load_report_config(path: &Path) -> AppResult<ReportConfig> {
    read_json(path)
}

/// Parses `m=3`, `step=1`, `spacers=0,1,0`, `beta=1`, `c=1`, `C=3`.
pub fn parse_params(pairs: &[String]) -> AppResult<PresetParams> {
    let mut p = PresetParams::default();
    for pair in pairs {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| AppError::Usage(format!("parameter `{pair}` is not key=value")))?;
        let bad = |what: &str| AppError::Usage(format!("parameter {key}: `{value}` is not {what}"));
        match key {
            "m" => p.m = Some(value.parse().map_err(|_| bad("an integer"))?),
            "step" => p.step = Some(value.parse().map_err(|_| bad("an integer"))?),
            "spacers" => {
                p.spacers = Some(
                    value
                        .split(',')
                        .map(|s| s.trim().parse::<i64>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| bad("a comma-separated integer list"))?,
                )
            }
            "beta" => p.beta = Some(value.parse().map_err(|_| bad("a number"))?),
            "c" => p.c = Some(value.parse().map_err(|_| bad("a number"))?),
            "C" => p.big_c = Some(value.parse().map_err(|_| bad("a number"))?),
            other => return Err(AppError::Usage(format!("unknown preset parameter `{other}`"))),
        }
    }
    Ok(p)
}

/// `a..b` (half-open) or a single integer `a` meaning `a..a+1`.
pub fn parse_range(text: &str) -> AppResult<Range<i64>> {
    let bad = || AppError::Usage(format!("`{text}` is not a range like 0..121"));
    match text.split_once("..") {
        Some((a, b)) => {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            if b <= a {
                return Err(bad());
            }
            Ok(a..b)
        }
        None => {
            let a: i64 = text.trim().parse().map_err(|_| bad())?;
            Ok(a..a + 1)
        }
    }
}

/// Comma-separated unsigned integers, e.g. `0,1,3`.
pub fn parse_u128_list(text: &str) -> AppResult<Vec<u128>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<u128>()
                .map_err(|_| AppError::Usage(format!("`{s}` in `{text}` is not a nonnegative integer")))
        })
        .collect()
}
