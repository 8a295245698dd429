//! Run configuration: a flat TOML file with one table per system and per
//! command.
//!
//! ```toml
//! rng_seed = 7
//! output_dir = "out"
//!
//! [baker]
//! a = 3
//! alphabet = [0, 2]
//!
//! [spectrum]
//! N = 243
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::baker_classical::BakerSpec;
use crate::disk_billiard::DiskConfig;
use crate::phase_space::DEFAULT_SLACK;
use crate::quantum_baker::{Variant, DEFAULT_PHASE};
use crate::{Error, Result};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BakerSection {
    pub a: usize,
    pub alphabet: Vec<usize>,
    #[serde(default = "default_phase")]
    pub theta: f64,
    #[serde(default = "default_variant")]
    pub variant: Variant,
}

fn default_phase() -> f64 {
    DEFAULT_PHASE
}

fn default_variant() -> Variant {
    Variant::Fft
}

impl BakerSection {
    pub fn spec(&self) -> Result<BakerSpec> {
        BakerSpec::new(self.a, self.alphabet.clone())
    }
}

/// Disk layout inline or in a separate file with the same keys.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskSection {
    pub centers: Option<Vec<[f64; 2]>>,
    pub radii: Option<Vec<f64>>,
    pub file: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PressureParams {
    pub depths: Vec<usize>,
    pub coeff_j: f64,
    pub coeff_t: f64,
    /// Monte-Carlo cross-check of the decay rate (disk systems only); 0 skips it.
    pub mc_samples: usize,
    pub max_bounces: usize,
}

impl Default for PressureParams {
    fn default() -> Self {
        PressureParams { depths: vec![4, 5, 6, 7, 8], coeff_j: -1.0, coeff_t: 0.0, mc_samples: 0, max_bounces: 60 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DimensionParams {
    pub depths: Vec<usize>,
    pub box_depths: Vec<usize>,
    pub cover_depth: usize,
    pub slice_depth: usize,
}

impl Default for DimensionParams {
    fn default() -> Self {
        DimensionParams { depths: vec![4, 5, 6, 7, 8], box_depths: vec![2, 4, 6, 8, 10], cover_depth: 3, slice_depth: 10 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SigmaParams {
    pub depths: Vec<usize>,
    pub points: usize,
    /// Upper end of the `γ` grid; the classical decay rate when absent.
    pub gamma_max: Option<f64>,
}

impl Default for SigmaParams {
    fn default() -> Self {
        SigmaParams { depths: vec![4, 5, 6, 7, 8], points: 21, gamma_max: None }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitParams {
    pub length: usize,
}

impl Default for OrbitParams {
    fn default() -> Self {
        OrbitParams { length: 4 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumParams {
    #[serde(rename = "N")]
    pub dim: usize,
    pub nu: Vec<f64>,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        SpectrumParams { dim: 243, nu: vec![0.5, 0.9] }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeylParams {
    #[serde(rename = "N")]
    pub dims: Vec<usize>,
    pub nu: Vec<f64>,
}

impl Default for WeylParams {
    fn default() -> Self {
        WeylParams { dims: vec![27, 81, 243, 729], nu: vec![0.5, 0.9] }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagateParams {
    #[serde(rename = "N")]
    pub dim: usize,
    pub rho: [f64; 2],
    pub delta: f64,
    pub m_const: f64,
    pub t: f64,
    pub n_max: usize,
}

impl Default for PropagateParams {
    fn default() -> Self {
        PropagateParams { dim: 729, rho: [0.25, 0.75], delta: 0.4, m_const: 1.0, t: 2.0, n_max: 3 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HusimiParams {
    #[serde(rename = "N")]
    pub dim: usize,
    pub rho: [f64; 2],
    pub frames: usize,
    /// Grid resolution; the frame grid `N` when absent.
    pub k: Option<usize>,
}

impl Default for HusimiParams {
    fn default() -> Self {
        HusimiParams { dim: 243, rho: [0.1, 0.4], frames: 3, k: None }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceParams {
    #[serde(rename = "N")]
    pub dims: Vec<usize>,
    pub delta: f64,
    pub m_const: f64,
    pub t: f64,
    pub epsilon: f64,
    pub slack: f64,
}

impl Default for TraceParams {
    fn default() -> Self {
        TraceParams { dims: vec![81, 243, 729], delta: 0.4, m_const: 1.0, t: 2.0, epsilon: 0.01, slack: DEFAULT_SLACK }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub rng_seed: u64,
    pub output_dir: Option<PathBuf>,
    pub baker: Option<BakerSection>,
    pub disks: Option<DiskSection>,
    #[serde(default)]
    pub pressure: PressureParams,
    #[serde(default)]
    pub dimension: DimensionParams,
    #[serde(default, rename = "sigma-curve")]
    pub sigma_curve: SigmaParams,
    #[serde(default, rename = "billiard-orbits")]
    pub billiard_orbits: OrbitParams,
    #[serde(default)]
    pub spectrum: SpectrumParams,
    #[serde(default, rename = "weyl-fit")]
    pub weyl_fit: WeylParams,
    #[serde(default)]
    pub propagate: PropagateParams,
    #[serde(default, rename = "husimi-frames")]
    pub husimi_frames: HusimiParams,
    #[serde(default, rename = "trace-check")]
    pub trace_check: TraceParams,
    #[serde(skip)]
    base_dir: PathBuf,
}

/// Which system a command runs on.
pub enum System {
    Baker(BakerSpec),
    Disks(DiskConfig),
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        if let Some(DiskSection { file: Some(f), .. }) = &cfg.disks {
            let path = cfg.base_dir.join(f);
            if !path.is_file() {
                return Err(Error::ConfigParse(format!("disk file {} does not exist", path.display())));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigParse(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Ok((Self::parse(&text, base)?, text))
    }

    pub fn baker(&self) -> Result<(BakerSpec, &BakerSection)> {
        let sec = self.baker.as_ref().ok_or_else(|| Error::ConfigParse("missing [baker] section".into()))?;
        Ok((sec.spec()?, sec))
    }

    pub fn disks(&self) -> Result<DiskConfig> {
        let sec = self.disks.as_ref().ok_or_else(|| Error::ConfigParse("missing [disks] section".into()))?;
        let sec = match &sec.file {
            Some(f) => {
                let text = std::fs::read_to_string(self.base_dir.join(f))?;
                toml::from_str::<DiskSection>(&text).map_err(|e| Error::ConfigParse(e.to_string()))?
            }
            None => sec.clone(),
        };
        match (sec.centers, sec.radii) {
            (Some(c), Some(r)) => DiskConfig::new(c, r),
            _ => Err(Error::ConfigParse("[disks] needs `centers` and `radii`".into())),
        }
    }

    /// The baker when a `[baker]` table is present, else the disks.
    pub fn system(&self) -> Result<System> {
        match (&self.baker, &self.disks) {
            (Some(_), None) => Ok(System::Baker(self.baker()?.0)),
            (None, Some(_)) => Ok(System::Disks(self.disks()?)),
            (Some(_), Some(_)) => Err(Error::ConfigParse("give either [baker] or [disks], not both".into())),
            (None, None) => Err(Error::ConfigParse("no [baker] or [disks] section".into())),
        }
    }
}
