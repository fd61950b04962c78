//! Optional on-disk memo of partial product densities, enabled by setting
//! `RIESZ_ONE_CACHE` to a directory.

use std::path::{Path, PathBuf};

use riesz_one_core::circlepoly::partial_product_density;
use riesz_one_core::{GridDensity, GridOffset, RankOneConstruction, UnitCircleGrid, VERSION};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{AppError, AppResult};
use crate::io::write_atomic;

pub const CACHE_ENV: &str = "RIESZ_ONE_CACHE";
const MAGIC: &[u8; 8] = b"R1DENS01";

#[derive(Serialize)]
struct Key<'a> {
    construction: &'a RankOneConstruction,
    stages: &'a [usize],
    grid_n: usize,
    half_step: bool,
    version: &'a str,
}

pub struct DensityCache {
    dir: PathBuf,
}

impl DensityCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        DensityCache { dir: dir.into() }
    }

    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_ENV)
            .filter(|v| !v.is_empty())
            .map(Self::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(construction: &RankOneConstruction, stages: &[usize], grid: &UnitCircleGrid) -> String {
        let key = Key {
            construction,
            stages,
            grid_n: grid.len(),
            half_step: grid.offset() == GridOffset::HalfStep,
            version: VERSION,
        };
        let json = serde_json::to_vec(&key).expect("cache key serializes");
        hex::encode(Sha256::digest(&json))
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.bin"))
    }

    /// A cached density, or `None` on a miss or an unreadable entry.
    pub fn load(&self, key: &str, grid: UnitCircleGrid, stages: &[usize]) -> Option<GridDensity> {
        let bytes = std::fs::read(self.path_for(key)).ok()?;
        let body = bytes.strip_prefix(MAGIC.as_slice())?;
        let (&exact, body) = body.split_first()?;
        let (len, body) = body.split_at_checked(8)?;
        let len = u64::from_le_bytes(len.try_into().ok()?) as usize;
        if len != grid.len() || body.len() != 8 * len {
            return None;
        }
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Some(GridDensity {
            grid,
            values,
            stages: stages.to_vec(),
            exact: exact == 1,
        })
    }

    pub fn store(&self, key: &str, density: &GridDensity) -> AppResult<()> {
        std::fs::create_dir_all(&self.dir).map_err(|e| AppError::io(&self.dir, e))?;
        let mut bytes = Vec::with_capacity(17 + 8 * density.values.len());
        bytes.extend_from_slice(MAGIC);
        bytes.push(density.exact as u8);
        bytes.extend_from_slice(&(density.values.len() as u64).to_le_bytes());
        for v in &density.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        write_atomic(&self.path_for(key), &bytes)
    }
}

/// `partial_product_density`, memoized when `cache` is present.
pub fn density_cached(
    cache: Option<&DensityCache>,
    construction: &RankOneConstruction,
    stages: &[usize],
    grid: UnitCircleGrid,
) -> AppResult<GridDensity> {
    let Some(cache) = cache else {
        return Ok(partial_product_density(construction, stages, grid)?);
    };
    let mut sorted = stages.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let key = DensityCache::key(construction, &sorted, &grid);
    if let Some(hit) = cache.load(&key, grid, &sorted) {
        return Ok(hit);
    }
    let density = partial_product_density(construction, &sorted, grid)?;
    cache.store(&key, &density)?;
    Ok(density)
}
