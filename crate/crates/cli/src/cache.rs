//! Critical values backed by an optional on-disk cache.
//!
//! Entries live in `$ECP_CACHE_DIR`, one JSON file per threshold, keyed by
//! statistic, sample size, level, method and, for simulated values, the
//! replication count, seed and generator version.

use std::path::{Path, PathBuf};

use benford_ecp::critical::{Calibrator, CriticalValueTable, LevelThreshold};
use benford_ecp::sampling::GENERATOR_VERSION;
use benford_ecp::StatisticKind;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const CACHE_ENV: &str = "ECP_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CacheEntry {
    key: String,
    threshold: f64,
}

#[derive(Debug, Clone)]
pub struct CriticalValues {
    calibrator: Calibrator,
    dir: Option<PathBuf>,
}

impl CriticalValues {
    pub fn new(calibrator: Calibrator, dir: Option<PathBuf>) -> Self {
        Self { calibrator, dir }
    }

    /// Uses `$ECP_CACHE_DIR` when set and non-empty.
    pub fn from_env(calibrator: Calibrator) -> Self {
        let dir = std::env::var_os(CACHE_ENV)
            .filter(|d| !d.is_empty())
            .map(PathBuf::from);
        Self::new(calibrator, dir)
    }

    pub fn calibrator(&self) -> &Calibrator {
        &self.calibrator
    }

    fn key(&self, kind: StatisticKind, n: u64, level: f64) -> String {
        let method = self.calibrator.method(kind);
        let mut key = format!("{kind}|n={n}|level={level}|{method}");
        if method.is_simulated() {
            key.push_str(&format!(
                "|reps={}|seed={}|{}",
                self.calibrator.replications(),
                self.calibrator.seed(),
                GENERATOR_VERSION
            ));
        }
        key
    }

    fn path(dir: &Path, key: &str) -> PathBuf {
        let name: String = key
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '=' {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        dir.join(format!("{name}.json"))
    }

    fn lookup(&self, key: &str) -> Option<f64> {
        let dir = self.dir.as_ref()?;
        let text = std::fs::read_to_string(Self::path(dir, key)).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        (entry.key == key).then_some(entry.threshold)
    }

    fn store(&self, key: &str, threshold: f64) -> CliResult<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        std::fs::create_dir_all(dir).map_err(|e| CliError::write(dir.display().to_string(), e))?;
        let path = Self::path(dir, key);
        let entry = CacheEntry {
            key: key.to_string(),
            threshold,
        };
        let text = serde_json::to_string_pretty(&entry).expect("cache entry serializes");
        std::fs::write(&path, text).map_err(|e| CliError::write(path.display().to_string(), e))
    }

    pub fn table(
        &self,
        kind: StatisticKind,
        n: u64,
        levels: &[f64],
    ) -> CliResult<CriticalValueTable> {
        let cached: Vec<Option<f64>> = levels
            .iter()
            .map(|&l| self.lookup(&self.key(kind, n, l)))
            .collect();
        let missing: Vec<f64> = levels
            .iter()
            .zip(&cached)
            .filter(|(_, c)| c.is_none())
            .map(|(&l, _)| l)
            .collect();
        let mut table = if missing.is_empty() {
            // Metadata only; thresholds are filled from the cache below.
            self.calibrator.table(kind, n, &[])?
        } else {
            self.calibrator.table(kind, n, &missing)?
        };
        for fresh in &table.levels {
            self.store(&self.key(kind, n, fresh.level), fresh.threshold)?;
        }
        let fresh = std::mem::take(&mut table.levels);
        table.levels = levels
            .iter()
            .zip(cached)
            .map(|(&level, c)| LevelThreshold {
                level,
                threshold: c.unwrap_or_else(|| {
                    fresh
                        .iter()
                        .find(|t| t.level == level)
                        .expect("computed every missing level")
                        .threshold
                }),
            })
            .collect();
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_round_trip_and_key_isolation() {
        let dir = tempfile::tempdir().unwrap();
        let make = |seed| {
            CriticalValues::new(
                Calibrator::new(1000, seed).unwrap(),
                Some(dir.path().to_path_buf()),
            )
        };
        let first = make(1)
            .table(StatisticKind::Kuiper, 100, &[0.95, 0.99])
            .unwrap();
        let files = std::fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(files, 2);
        let again = make(1)
            .table(StatisticKind::Kuiper, 100, &[0.99, 0.95])
            .unwrap();
        assert_eq!(again.threshold(0.95), first.threshold(0.95));
        assert_eq!(again.threshold(0.99), first.threshold(0.99));

        let other_seed = make(2).table(StatisticKind::Kuiper, 100, &[0.95]).unwrap();
        assert_ne!(other_seed.threshold(0.95), first.threshold(0.95));
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 3);
    }

    #[test]
    fn cached_value_is_reused() {
        let dir = tempfile::tempdir().unwrap();
        let values = CriticalValues::new(
            Calibrator::new(1000, 3).unwrap(),
            Some(dir.path().to_path_buf()),
        );
        let key = values.key(StatisticKind::Cvm, 50, 0.95);
        values.store(&key, 123.0).unwrap();
        let t = values.table(StatisticKind::Cvm, 50, &[0.95]).unwrap();
        assert_eq!(t.threshold(0.95), Some(123.0));
        assert!(key.contains(GENERATOR_VERSION));
    }
}
