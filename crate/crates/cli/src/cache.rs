//! Content-addressed spectrum cache: one JSON file per spectrum, named by
//! the SHA-256 of the canonical discretization parameters.

use std::io::Write;
use std::path::{Path, PathBuf};

use conformal_torsion::eigen::{Spectrum, SOLVER_VERSION};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheKey {
    pub metric_id: String,
    pub l: usize,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl CacheKey {
    pub fn canonical(&self) -> String {
        format!(
            "metric={}\nl={}\nn_theta={}\nn_phi={}\nsolver={}\n",
            self.metric_id, self.l, self.n_theta, self.n_phi, SOLVER_VERSION
        )
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Entry {
    solver_version: String,
    metric_id: String,
    l: usize,
    n_theta: usize,
    n_phi: usize,
    weyl_coefficient: f64,
    eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SpectrumCache {
    dir: PathBuf,
}

impl SpectrumCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("{}.json", key.digest()))
    }

    /// The cached spectrum, or None on a miss, a stale solver version or an
    /// unreadable file.
    pub fn load(&self, key: &CacheKey) -> Option<Spectrum> {
        let text = std::fs::read_to_string(self.path(key)).ok()?;
        let e: Entry = serde_json::from_str(&text).ok()?;
        if e.solver_version != SOLVER_VERSION
            || e.metric_id != key.metric_id
            || (e.l, e.n_theta, e.n_phi) != (key.l, key.n_theta, key.n_phi)
        {
            return None;
        }
        let mut s = Spectrum::from_eigenvalues(e.eigenvalues, e.metric_id, e.weyl_coefficient).ok()?;
        s.basis_l = e.l;
        Some(s)
    }

    /// Atomic write: temp file in the cache directory, then rename.
    pub fn store(&self, key: &CacheKey, spectrum: &Spectrum) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.dir)?;
        let entry = Entry {
            solver_version: SOLVER_VERSION.to_string(),
            metric_id: key.metric_id.clone(),
            l: key.l,
            n_theta: key.n_theta,
            n_phi: key.n_phi,
            weyl_coefficient: spectrum.weyl_coefficient,
            eigenvalues: spectrum.eigenvalues.clone(),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer(&mut tmp, &entry)?;
        tmp.flush()?;
        tmp.persist(self.path(key)).map_err(|e| CliError::Io(e.error))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key() -> CacheKey {
        CacheKey {
            metric_id: "fs".into(),
            l: 4,
            n_theta: 10,
            n_phi: 10,
        }
    }

    #[test]
    fn digest_is_stable_hex() {
        let d = key().digest();
        assert_eq!(d.len(), 64);
        assert!(d.chars().all(|c| c.is_ascii_hexdigit()));
        let mut other = key();
        other.l = 5;
        assert_ne!(d, other.digest());
    }

    #[test]
    fn round_trip_and_stale_entries() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SpectrumCache::new(dir.path());
        assert!(cache.load(&key()).is_none());
        let vals: Vec<f64> = (0..200).map(|i| (i as f64).powf(1.37) / 7.0 + 0.1 * (i as f64).sin().abs()).collect();
        let s = Spectrum::from_eigenvalues(vals, "fs", 2.0).unwrap();
        cache.store(&key(), &s).unwrap();
        let back = cache.load(&key()).unwrap();
        assert_eq!(back.eigenvalues, s.eigenvalues);
        assert_eq!(back.weyl_coefficient, 2.0);
        let text = std::fs::read_to_string(cache.path(&key())).unwrap();
        let stale = text.replace(SOLVER_VERSION, "old-solver");
        std::fs::write(cache.path(&key()), stale).unwrap();
        assert!(cache.load(&key()).is_none());
    }
}
