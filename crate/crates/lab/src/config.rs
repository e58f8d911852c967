//! Run configuration: a TOML document with fixed sections. Unknown keys are
//! rejected so that a typo never silently falls back to a default.

use crate::error::{LabError, LabResult};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use wkbflow_core::hamiltonian::IsothermalParams;
use wkbflow_core::torus_field::TorusGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tier {
    Base,
    Extended,
    Reduced,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub tier: Tier,
    /// Scale separation; required whenever waves or a θ-grid are involved.
    #[serde(default)]
    pub eps: Option<f64>,
    pub grid: GridSpec,
    #[serde(default)]
    pub physics: PhysicsSpec,
    pub time: TimeSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub compare: CompareSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lengths: Vec<f64>,
    pub n_x: Vec<usize>,
    #[serde(default = "default_n_theta")]
    pub n_theta: usize,
}

fn default_n_theta() -> usize {
    16
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HamiltonianName {
    #[default]
    Isothermal,
    /// Isothermal plus κ|∇ρ|²/(2ρ); base tier only.
    Capillary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSpec {
    #[serde(default)]
    pub hamiltonian: HamiltonianName,
    #[serde(default = "one")]
    pub c_s: f64,
    #[serde(default = "one")]
    pub rho_ref: f64,
    /// Capillary coefficient, used by `hamiltonian = "capillary"` only.
    #[serde(default)]
    pub kappa: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PhysicsSpec {
    fn default() -> Self {
        PhysicsSpec { hamiltonian: HamiltonianName::Isothermal, c_s: 1.0, rho_ref: 1.0, kappa: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub t_end: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub cfl: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetName {
    /// Uniform density at ρ_ref, no flow, no waves.
    Rest,
    /// Small-amplitude travelling sound wave, θ-independent.
    Acoustic,
    /// Modulated wave train over a slowly varying moving background.
    WaveTrain,
    /// Gaussian wave packet over a slowly varying moving background.
    WavePacket,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub preset: PresetName,
    /// Wave amplitude a (ρ̂ for wave presets, relative ρ' for `acoustic`).
    #[serde(default)]
    pub amplitude: f64,
    /// Integer winding of the phase per axis.
    #[serde(default)]
    pub winding: Vec<i64>,
    /// Background velocity along the first axis.
    #[serde(default)]
    pub u0: f64,
    /// Relative amplitude of the background density modulation.
    #[serde(default)]
    pub rho_offset: f64,
    /// Gaussian packet width.
    #[serde(default = "default_width")]
    pub width: f64,
    /// Spatial mode number of the acoustic wave / background modulation.
    #[serde(default = "default_mode")]
    pub mode: usize,
}

fn default_width() -> f64 {
    0.35
}

fn default_mode() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Steps between CSV rows.
    #[serde(default = "default_diag_every")]
    pub diag_every: usize,
    /// Steps between snapshots; 0 writes only the initial and final states.
    #[serde(default)]
    pub snapshot_every: usize,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_diag_every() -> usize {
    10
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_dir(), diag_every: default_diag_every(), snapshot_every: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FullTier {
    Base,
    Extended,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    #[serde(default = "default_eps_list")]
    pub eps_list: Vec<f64>,
    #[serde(default = "default_full_tier")]
    pub full_tier: FullTier,
    /// Number of equally spaced comparison times in (0, t_end].
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
    /// Averaging window width in local wavelengths.
    #[serde(default = "default_window")]
    pub window_periods: f64,
}

fn default_eps_list() -> Vec<f64> {
    vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]
}

fn default_full_tier() -> FullTier {
    FullTier::Base
}

fn default_checkpoints() -> usize {
    4
}

fn default_window() -> f64 {
    2.0
}

impl Default for CompareSpec {
    fn default() -> Self {
        CompareSpec {
            eps_list: default_eps_list(),
            full_tier: default_full_tier(),
            checkpoints: default_checkpoints(),
            window_periods: default_window(),
        }
    }
}

fn invalid(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> LabResult<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> LabResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> LabResult<()> {
        self.grid()?;
        self.params()?;
        let d = self.grid.lengths.len();
        let t = &self.time;
        if !(t.t_end.is_finite() && t.t_end > 0.0) {
            return Err(invalid(format!("time.t_end = {} must be positive", t.t_end)));
        }
        match (t.dt, t.cfl) {
            (Some(_), Some(_)) => return Err(invalid("time.dt and time.cfl are mutually exclusive")),
            (None, None) => return Err(invalid("one of time.dt or time.cfl is required")),
            (Some(dt), None) if !(dt.is_finite() && dt > 0.0) => return Err(invalid(format!("time.dt = {dt} must be positive"))),
            (None, Some(c)) if !(c.is_finite() && c > 0.0 && c <= 1.0) => {
                return Err(invalid(format!("time.cfl = {c} must lie in (0, 1]")))
            }
            _ => {}
        }
        if let Some(eps) = self.eps {
            if !(eps.is_finite() && eps > 0.0 && eps < 1.0) {
                return Err(invalid(format!("eps = {eps} must lie in (0, 1)")));
            }
        }
        let ini = &self.initial;
        let waves = matches!(ini.preset, PresetName::WaveTrain | PresetName::WavePacket);
        if (waves || self.tier != Tier::Base) && self.eps.is_none() {
            return Err(invalid("eps is required for this tier and preset"));
        }
        if (waves || self.tier == Tier::Reduced) && ini.winding.len() != d {
            return Err(invalid(format!("initial.winding needs {d} entries")));
        }
        if !ini.winding.is_empty() && ini.winding.len() != d {
            return Err(invalid(format!("initial.winding needs {d} entries")));
        }
        if self.tier == Tier::Reduced && ini.preset == PresetName::Acoustic {
            return Err(invalid("the acoustic preset has no reduced-tier counterpart"));
        }
        let ph = &self.physics;
        match ph.hamiltonian {
            HamiltonianName::Isothermal if ph.kappa != 0.0 => {
                return Err(invalid("physics.kappa requires hamiltonian = \"capillary\""))
            }
            HamiltonianName::Capillary if self.tier != Tier::Base => {
                return Err(invalid("the capillary hamiltonian is only supported by the base tier"))
            }
            HamiltonianName::Capillary if !(ph.kappa.is_finite() && ph.kappa >= 0.0) => {
                return Err(invalid(format!("physics.kappa = {} must be non-negative", ph.kappa)))
            }
            _ => {}
        }
        if !(ini.width.is_finite() && ini.width > 0.0) {
            return Err(invalid("initial.width must be positive"));
        }
        if !(ini.amplitude.is_finite() && ini.rho_offset.is_finite() && ini.u0.is_finite()) {
            return Err(invalid("initial parameters must be finite"));
        }
        if ini.rho_offset.abs() >= 1.0 {
            return Err(invalid("initial.rho_offset must satisfy |rho_offset| < 1"));
        }
        if ini.preset == PresetName::Acoustic && ini.amplitude.abs() >= 1.0 {
            return Err(invalid("acoustic amplitude must satisfy |a| < 1"));
        }
        let o = &self.output;
        if o.diag_every == 0 {
            return Err(invalid("output.diag_every must be at least 1"));
        }
        let c = &self.compare;
        if c.eps_list.iter().any(|&e| !(e > 0.0 && e < 1.0)) || c.checkpoints == 0 || !(c.window_periods > 0.0) {
            return Err(invalid("compare: eps_list entries in (0, 1), checkpoints ≥ 1, window_periods > 0"));
        }
        Ok(())
    }

    pub fn grid(&self) -> LabResult<TorusGrid> {
        let g = &self.grid;
        TorusGrid::new(&g.lengths, &g.n_x, g.n_theta).map_err(|e| invalid(e.to_string()))
    }

    pub fn params(&self) -> LabResult<IsothermalParams> {
        IsothermalParams::new(self.physics.c_s, self.physics.rho_ref).map_err(|e| invalid(e.to_string()))
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        RunConfig { eps: Some(eps), ..self.clone() }
    }

    pub fn with_tier(&self, tier: Tier) -> Self {
        RunConfig { tier, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
tier = "reduced"
eps = 0.0625
[grid]
lengths = [6.283185307179586]
n_x = [64]
[time]
t_end = 1.0
cfl = 0.4
[initial]
preset = "wave-packet"
amplitude = 0.3
winding = [4]
"#;

    #[test]
    fn parses_minimal_config_with_defaults() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.grid.n_theta, 16);
        assert_eq!(cfg.output.diag_every, 10);
        assert_eq!(cfg.compare.eps_list.len(), 3);
        assert_eq!(RunConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn rejects_unknown_keys_and_conflicts() {
        let typo = MINIMAL.replace("amplitude", "amplitud");
        assert!(matches!(RunConfig::parse(&typo), Err(LabError::Config(_))));
        let both = MINIMAL.replace("cfl = 0.4", "cfl = 0.4\ndt = 0.01");
        assert!(RunConfig::parse(&both).unwrap_err().to_string().contains("mutually exclusive"));
        let no_eps = MINIMAL.replace("eps = 0.0625", "");
        assert!(RunConfig::parse(&no_eps).is_err());
        let bad_grid = MINIMAL.replace("n_x = [64]", "n_x = [63]");
        assert!(RunConfig::parse(&bad_grid).is_err());
        let stray_kappa = MINIMAL.replace("[time]", "[physics]\nkappa = 0.1\n[time]");
        assert!(RunConfig::parse(&stray_kappa).unwrap_err().to_string().contains("capillary"));
        let capillary = MINIMAL.replace("[time]", "[physics]\nhamiltonian = \"capillary\"\nkappa = 0.1\n[time]");
        assert!(RunConfig::parse(&capillary).unwrap_err().to_string().contains("base tier"));
        assert!(RunConfig::parse(&capillary.replace("\"reduced\"", "\"base\"")).is_ok());
    }
}
