//! Model artifact: a text header followed by a little-endian `f64` payload.
//!
//! ```text
//! sapsom-model
//! format_version = 1
//! rows = 16
//! ...                      (TOML: dimensions, [training], [env])
//! end_header
//! <codebooks: units * dim f64><matrix 0: units^2 f64>...<matrix K-1>
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agent::{Agent, TrainingConfig};
use crate::env::EnvParams;
use crate::error::{Error, Result};
use crate::som::{MapGeometry, SomMap};
use crate::transition::TransitionModel;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "sapsom-model\n";
const END_HEADER: &str = "end_header\n";

/// Everything needed to rebuild a trained agent and its environment.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelArtifact {
    pub map: SomMap,
    pub model: TransitionModel,
    pub training: TrainingConfig,
    pub env: EnvParams,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    rows: usize,
    cols: usize,
    dim: usize,
    actions: usize,
    payload_bytes: usize,
    training: TrainingConfig,
    env: EnvParams,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

impl ModelArtifact {
    pub fn from_agent(agent: &Agent, env: EnvParams) -> Self {
        Self {
            map: agent.map.clone(),
            model: agent.model.clone(),
            training: agent.config().clone(),
            env,
        }
    }

    /// A frozen agent over this artifact's map and matrices.
    pub fn agent(&self) -> Result<Agent> {
        let mut agent =
            Agent::from_parts(self.map.clone(), self.model.clone(), self.training.clone())?;
        agent.freeze();
        Ok(agent)
    }

    pub fn seed(&self) -> u64 {
        self.training.seed
    }

    pub fn geometry(&self) -> MapGeometry {
        self.map.geometry()
    }

    pub fn is_untrained(&self) -> bool {
        self.model
            .matrices()
            .iter()
            .all(|m| m.iter().all(|&v| v == 0.0))
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let units = self.map.units();
        let payload_len = 8 * (units * self.map.dim() + self.model.action_count() * units * units);
        let header = Header {
            format_version: FORMAT_VERSION,
            rows: self.geometry().rows(),
            cols: self.geometry().cols(),
            dim: self.map.dim(),
            actions: self.model.action_count(),
            payload_bytes: payload_len,
            training: self.training.clone(),
            env: self.env,
        };
        let text = toml::to_string(&header).map_err(|e| Error::Config(e.to_string()))?;
        let mut out = Vec::with_capacity(MAGIC.len() + text.len() + END_HEADER.len() + payload_len);
        out.extend_from_slice(MAGIC.as_bytes());
        out.extend_from_slice(text.as_bytes());
        if !text.ends_with('\n') {
            out.push(b'\n');
        }
        out.extend_from_slice(END_HEADER.as_bytes());
        let values = self
            .map
            .codebook()
            .iter()
            .chain(self.model.matrices().iter().flatten());
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let rest = bytes
            .strip_prefix(MAGIC.as_bytes())
            .ok_or_else(|| Error::Corrupt("missing sapsom-model magic line".into()))?;
        let marker = format!("\n{END_HEADER}");
        let end = rest
            .windows(marker.len())
            .position(|w| w == marker.as_bytes())
            .ok_or_else(|| Error::Corrupt("header is not terminated".into()))?;
        let text = std::str::from_utf8(&rest[..=end])
            .map_err(|_| Error::Corrupt("header is not UTF-8".into()))?;
        let payload = &rest[end + marker.len()..];

        let probe: VersionProbe =
            toml::from_str(text).map_err(|e| Error::Corrupt(format!("header: {e}")))?;
        if probe.format_version != FORMAT_VERSION {
            return Err(Error::Version {
                found: probe.format_version,
                expected: FORMAT_VERSION,
            });
        }
        let header: Header =
            toml::from_str(text).map_err(|e| Error::Corrupt(format!("header: {e}")))?;

        let geometry = MapGeometry::new(header.rows, header.cols)
            .map_err(|e| Error::Corrupt(e.to_string()))?;
        let units = geometry.units();
        let expected = units
            .checked_mul(header.dim)
            .and_then(|c| units.checked_mul(units)?.checked_mul(header.actions)?.checked_add(c))
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| Error::Corrupt("header dimensions overflow".into()))?;
        if header.payload_bytes != expected || payload.len() != expected {
            return Err(Error::Corrupt(format!(
                "payload holds {} bytes, dimensions require {expected}",
                payload.len()
            )));
        }

        let mut values = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
        let codebook: Vec<f64> = values.by_ref().take(units * header.dim).collect();
        let matrices: Vec<Vec<f64>> = (0..header.actions)
            .map(|_| values.by_ref().take(units * units).collect())
            .collect();

        let map = SomMap::from_codebook(geometry, header.dim, codebook)
            .map_err(|e| Error::Corrupt(e.to_string()))?;
        let model = TransitionModel::from_matrices(units, matrices)
            .map_err(|e| Error::Corrupt(e.to_string()))?;
        Ok(Self {
            map,
            model,
            training: header.training,
            env: header.env,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes()?;
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn artifact(seed: u64, rows: usize, cols: usize) -> ModelArtifact {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = MapGeometry::new(rows, cols).unwrap();
        let map = SomMap::random_uniform(g, 4, 3.0, &mut rng);
        let n = g.units();
        let mats = (0..2)
            .map(|_| (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        ModelArtifact {
            map,
            model: TransitionModel::from_matrices(n, mats).unwrap(),
            training: TrainingConfig {
                rows,
                cols,
                seed,
                eval_sigma0: Some(1.0 / 3.0),
                ..TrainingConfig::default()
            },
            env: EnvParams {
                theta_limit: 12f64.to_radians(),
                ..EnvParams::default()
            },
        }
    }

    #[test]
    fn header_is_readable_text() {
        let bytes = artifact(1, 3, 2).to_bytes().unwrap();
        let head = String::from_utf8_lossy(&bytes[..200]);
        assert!(head.starts_with("sapsom-model\nformat_version = 1\nrows = 3\ncols = 2\n"));
    }

    #[test]
    fn wrong_version_is_a_version_error() {
        let mut bytes = artifact(1, 2, 2).to_bytes().unwrap();
        let key = b"format_version = 1";
        let at = bytes.windows(key.len()).position(|w| w == key).unwrap();
        bytes[at + key.len() - 1] = b'7';
        assert!(matches!(
            ModelArtifact::from_bytes(&bytes),
            Err(Error::Version { found: 7, expected: 1 })
        ));
    }

    #[test]
    fn corruption_is_detected() {
        let bytes = artifact(2, 2, 2).to_bytes().unwrap();
        assert!(matches!(
            ModelArtifact::from_bytes(&bytes[..bytes.len() - 3]),
            Err(Error::Corrupt(_))
        ));
        assert!(matches!(
            ModelArtifact::from_bytes(b"not a model"),
            Err(Error::Corrupt(_))
        ));
        let mut nan = bytes.clone();
        let at = nan.len() - 8;
        nan[at..].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(ModelArtifact::from_bytes(&nan), Err(Error::Corrupt(_))));
        let no_end = String::from_utf8_lossy(&bytes).replace("end_header", "end_haeder");
        assert!(matches!(
            ModelArtifact::from_bytes(no_end.as_bytes()),
            Err(Error::Corrupt(_))
        ));
    }

    #[test]
    fn unwritable_and_missing_paths_are_io_errors() {
        let a = artifact(3, 2, 2);
        assert!(matches!(
            a.save(Path::new("/nonexistent-dir/model.sapsom")),
            Err(Error::Io { .. })
        ));
        assert!(matches!(
            ModelArtifact::load(Path::new("/nonexistent-dir/model.sapsom")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.sapsom");
        let a = artifact(4, 4, 5);
        a.save(&path).unwrap();
        let b = ModelArtifact::load(&path).unwrap();
        assert_eq!(a, b);
        for s in 0..a.map.units() {
            let (x, y) = (a.map.decode(s).unwrap(), b.map.decode(s).unwrap());
            assert!(x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn bytes_round_trip_bit_exactly(seed in 0u64..i64::MAX as u64, rows in 1usize..6, cols in 1usize..6) {
            let a = artifact(seed, rows, cols);
            let bytes = a.to_bytes().unwrap();
            let b = ModelArtifact::from_bytes(&bytes).unwrap();
            prop_assert_eq!(b.to_bytes().unwrap(), bytes);
            prop_assert_eq!(b, a);
        }
    }
}
