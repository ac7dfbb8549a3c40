//! TOML run configuration.
//!
//! ```toml
//! lexicon = "lexicon.json"        # relative to this file
//! script = "derivation.txt"
//! output_dir = "out"              # optional
//! seed = 7                        # optional, overrides encoding.seed
//!
//! [encoding]                      # any EncodingConfig field
//! duration_per_node = 1.0
//!
//! [roundtrip]
//! snr_db = 20.0                   # optional white noise on the lf trace
//! # decode_phase_code = { amplitude = 1.0, frequency = 6.0, mapping = { N = 0.0 } }
//!
//! [sim]
//! duration = 2.0
//! dt = 0.001
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rose_core::codec::EncodingConfig;
use rose_core::signal::PhaseCode;

use crate::error::{config_err, io_err, CliError};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoundtripConfig {
    /// Adds white noise at this SNR (dB) to the lf trace before decoding.
    pub snr_db: Option<f64>,
    /// Decode with this phase code instead of the encoding one.
    pub decode_phase_code: Option<PhaseCode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub duration: f64,
    pub dt: f64,
    pub tau_r: f64,
    pub tau_o: f64,
    pub base_scale: f64,
    /// Rows of the projection; defaults to half the embedding size.
    pub compressed_dim: Option<usize>,
    pub oscillators: usize,
    /// All-to-all Kuramoto coupling (rad/s).
    pub coupling: f64,
    /// Mean natural frequency (Hz).
    pub frequency: f64,
    /// Standard deviation of natural frequencies (Hz).
    pub frequency_spread: f64,
    /// Time of the first script event (s).
    pub onset: f64,
    /// Gap between consecutive script events (s).
    pub event_spacing: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            duration: 2.0,
            dt: 1e-3,
            tau_r: 0.05,
            tau_o: 0.05,
            base_scale: 200.0,
            compressed_dim: None,
            oscillators: 8,
            coupling: 2.0,
            frequency: 6.0,
            frequency_spread: 0.2,
            onset: 0.1,
            event_spacing: 0.1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let ok = self.duration.is_finite()
            && self.duration >= 0.0
            && self.dt.is_finite()
            && self.tau_r > 0.0
            && self.tau_o > 0.0
            && self.base_scale >= 0.0
            && self.oscillators > 0
            && self.coupling.is_finite()
            && self.frequency.is_finite()
            && self.frequency_spread >= 0.0
            && self.onset >= 0.0
            && self.event_spacing > 0.0;
        if ok {
            Ok(())
        } else {
            Err(CliError::Config(
                "[sim] needs duration >= 0, tau_r, tau_o, event_spacing > 0, oscillators >= 1, finite frequencies".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lexicon: PathBuf,
    pub script: PathBuf,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub encoding: EncodingConfig,
    #[serde(default)]
    pub roundtrip: RoundtripConfig,
    #[serde(default)]
    pub sim: SimConfig,
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> Result<RunConfig, CliError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| config_err(format!("config: {e}")))?;
        for p in [&mut cfg.lexicon, &mut cfg.script] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(out) = &mut cfg.output_dir {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        if let Some(seed) = cfg.seed {
            cfg.encoding.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads `path`, resolving relative paths against its directory.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        RunConfig::parse(&text, base)
    }

    pub fn seed(&self) -> u64 {
        self.encoding.seed
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (what, p) in [("lexicon", &self.lexicon), ("script", &self.script)] {
            if !p.is_file() {
                return Err(CliError::Config(format!("{what} file {} does not exist", p.display())));
            }
        }
        self.encoding.validate().map_err(config_err)?;
        if let Some(snr) = self.roundtrip.snr_db {
            if !snr.is_finite() {
                return Err(CliError::Config(format!("roundtrip.snr_db must be finite, got {snr}")));
            }
        }
        self.sim.validate()
    }
}

/// `--out`, then the config's `output_dir`, then `$ROSE_OUT_DIR`, then
/// `rose-out`.
pub fn output_dir(flag: Option<&Path>, cfg: Option<&RunConfig>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = cfg.and_then(|c| c.output_dir.clone()) {
        return p;
    }
    match std::env::var_os("ROSE_OUT_DIR") {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => PathBuf::from("rose-out"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("lex.json"), "{}").unwrap();
        fs::write(dir.path().join("s.txt"), "").unwrap();
        let cfg = RunConfig::parse("lexicon = \"lex.json\"\nscript = \"s.txt\"\nseed = 3\n", dir.path()).unwrap();
        assert_eq!(cfg.seed(), 3);
        assert_eq!(cfg.sim, SimConfig::default());
        assert_eq!(cfg.encoding.sample_rate, 500.0);
    }

    #[test]
    fn bad_configs_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("lex.json"), "{}").unwrap();
        fs::write(dir.path().join("s.txt"), "").unwrap();
        let base = "lexicon = \"lex.json\"\nscript = \"s.txt\"\n";
        for extra in [
            "bogus = 1\n",
            "[encoding]\nsample_rate = 100.0\n",
            "[sim]\ntau_r = 0.0\n",
        ] {
            let e = RunConfig::parse(&format!("{base}{extra}"), dir.path()).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{extra}");
        }
        let e = RunConfig::parse("lexicon = \"nope.json\"\nscript = \"s.txt\"\n", dir.path()).unwrap_err();
        assert!(e.to_string().contains("does not exist"));
    }
}
