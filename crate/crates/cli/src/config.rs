//! Run configuration. A TOML file with one table per block; dotted keys
//! such as `physics.eta_c = 0.9` work the same as tables. Unknown keys are
//! rejected. Command-line flags override file values.

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::{Path, PathBuf};

use qsdc_core::devices::NoiseFamily;
use qsdc_core::protocol::{MessageSource, SecondRoundBasis};
use qsdc_core::{
    BasisConfig, BasisPolicy, BlindingAttackParams, ChannelNoiseModel, EfficiencyParams, GainModel, LinkBudget,
    MemoryConfig, ProtocolParams, ToleranceRule,
};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub protocol: ProtocolBlock,
    pub physics: PhysicsBlock,
    pub adversary: AdversaryBlock,
    pub analysis: AnalysisBlock,
    pub output: OutputBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Uniform,
    TargetP1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ToleranceKind {
    Hoeffding,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MessageKind {
    Random,
    Zeros,
    Ones,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolBlock {
    pub r: usize,
    pub n: u32,
    pub theta: f64,
    pub policy: PolicyKind,
    /// Target `P(g=0)` of both checks under the `target-p1` policy.
    pub p1: f64,
    pub second_round: SecondRoundBasis,
    pub tolerance: ToleranceKind,
    pub epsilon: f64,
    pub fixed_tolerance: f64,
    pub message: MessageKind,
    pub seed: u64,
    pub continue_after_abort: bool,
}

impl Default for ProtocolBlock {
    fn default() -> Self {
        Self {
            r: 10_000,
            n: 16,
            theta: FRAC_PI_4,
            policy: PolicyKind::TargetP1,
            p1: 0.1,
            second_round: SecondRoundBasis::Policy,
            tolerance: ToleranceKind::Hoeffding,
            epsilon: 1e-6,
            fixed_tolerance: 0.01,
            message: MessageKind::Random,
            seed: 0,
            continue_after_abort: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    /// Every photon rotated by `delta_theta`.
    Uniform,
    /// Each photon draws its own rotation from
    /// `[delta_theta − noise_half_width, delta_theta + noise_half_width]`.
    PerPhoton,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsBlock {
    /// Bare total efficiency. When set it replaces the link budget.
    pub eta: Option<f64>,
    pub distance_km: f64,
    pub alpha: f64,
    pub eta_c: f64,
    pub eta_m: f64,
    pub eta_d: f64,
    pub delta_theta: f64,
    pub noise: NoiseKind,
    pub noise_half_width: f64,
    /// Storage-loop trips per memory stage; 0 uses `eta_m` directly.
    pub memory_trips: u32,
    pub memory_max_trips: u32,
    pub dark_count: f64,
}

impl Default for PhysicsBlock {
    fn default() -> Self {
        Self {
            eta: None,
            distance_km: 0.0,
            alpha: 0.2,
            eta_c: 0.95,
            eta_m: 1.0,
            eta_d: 1.0,
            delta_theta: 0.0,
            noise: NoiseKind::Uniform,
            noise_half_width: 0.0,
            memory_trips: 0,
            memory_max_trips: 11,
            dark_count: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdversaryBlock {
    pub enabled: bool,
    pub p1: f64,
    pub p2: f64,
    pub p1_grid: Vec<f64>,
    pub p2_grid: Vec<f64>,
}

impl Default for AdversaryBlock {
    fn default() -> Self {
        let grid = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        Self { enabled: false, p1: 0.5, p2: 0.5, p1_grid: grid.clone(), p2_grid: grid }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisKind {
    Eta,
    Distance,
    DeltaTheta,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisBlock {
    pub axis: AxisKind,
    /// Explicit grid; overrides start/stop/points.
    pub grid: Option<Vec<f64>>,
    pub grid_start: Option<f64>,
    pub grid_stop: Option<f64>,
    pub grid_points: usize,
    /// One sweep curve and one threshold row per value.
    pub p1_values: Vec<f64>,
    pub solver_tol: f64,
    pub r_rep: f64,
    pub p_s: f64,
    pub p_e: f64,
}

impl Default for AnalysisBlock {
    fn default() -> Self {
        Self {
            axis: AxisKind::Eta,
            grid: None,
            grid_start: None,
            grid_stop: None,
            grid_points: 101,
            p1_values: vec![0.001, 0.1, 0.2, 0.3, 0.4, 0.5],
            solver_tol: 1e-6,
            r_rep: 1e7,
            p_s: 1.0,
            p_e: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TableFormat {
    #[default]
    Csv,
    Tsv,
}

impl TableFormat {
    pub fn delimiter(self) -> u8 {
        match self {
            TableFormat::Csv => b',',
            TableFormat::Tsv => b'\t',
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Tsv => "tsv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: PathBuf,
    pub format: TableFormat,
    /// Also write a gnuplot script next to sweep tables.
    pub gnuplot: bool,
    /// Write the per-photon transcript from `simulate`.
    pub transcript: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), format: TableFormat::Csv, gnuplot: false, transcript: true }
    }
}

fn config_error(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(config_error)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn basis(&self) -> Result<BasisConfig, CliError> {
        BasisConfig::new(self.protocol.n, self.protocol.theta).map_err(config_error)
    }

    pub fn link(&self) -> Result<LinkBudget, CliError> {
        let p = &self.physics;
        match p.eta {
            Some(eta) => LinkBudget::from_total_efficiency(eta),
            None => LinkBudget::new(p.distance_km, p.alpha, p.eta_c, p.eta_m, p.eta_d),
        }
        .map_err(config_error)
    }

    pub fn gain(&self) -> Result<GainModel, CliError> {
        match self.physics.eta {
            Some(eta) if (0.0..=1.0).contains(&eta) => Ok(GainModel::Total { eta }),
            Some(eta) => Err(CliError::Config(format!("physics.eta = {eta} outside [0, 1]"))),
            None => Ok(GainModel::Link(self.link()?)),
        }
    }

    pub fn noise(&self) -> ChannelNoiseModel {
        let p = &self.physics;
        match p.noise {
            NoiseKind::Uniform => ChannelNoiseModel::Uniform { delta_theta: p.delta_theta },
            NoiseKind::PerPhoton => ChannelNoiseModel::PerPhoton(NoiseFamily::UniformInterval {
                mean: p.delta_theta,
                half_width: p.noise_half_width,
            }),
        }
    }

    pub fn attack(&self) -> Result<Option<BlindingAttackParams>, CliError> {
        let a = &self.adversary;
        if !a.enabled {
            return Ok(None);
        }
        BlindingAttackParams::new(a.p1, a.p2).map(Some).map_err(config_error)
    }

    pub fn efficiency(&self) -> EfficiencyParams {
        EfficiencyParams { r_rep: self.analysis.r_rep, p_s: self.analysis.p_s, p_e: self.analysis.p_e }
    }

    pub fn protocol_params(&self) -> Result<ProtocolParams, CliError> {
        let pr = &self.protocol;
        if pr.r == 0 {
            return Err(CliError::Config("protocol.r must be at least 1".into()));
        }
        let policy = match pr.policy {
            PolicyKind::Uniform => BasisPolicy::Uniform,
            PolicyKind::TargetP1 => BasisPolicy::TargetP1 { target: pr.p1 },
        };
        let config = self.basis()?;
        policy.offset_distribution(&config).map_err(config_error)?;
        let tolerance = match pr.tolerance {
            ToleranceKind::Hoeffding => ToleranceRule::Hoeffding { epsilon: pr.epsilon },
            ToleranceKind::Fixed => ToleranceRule::Fixed { tolerance: pr.fixed_tolerance },
        };
        tolerance.validate().map_err(config_error)?;
        let link = self.link()?;
        let memory = match self.physics.memory_trips {
            0 => None,
            k => Some(MemoryConfig {
                per_trip_efficiency: self.physics.eta_m.powf(1.0 / f64::from(k)),
                max_round_trips: self.physics.memory_max_trips,
                trips_per_stage: k,
            }),
        };
        let params = ProtocolParams {
            r: pr.r,
            config,
            policy,
            second_round: pr.second_round,
            link,
            noise: self.noise(),
            memory,
            dark_count: self.physics.dark_count,
            attack: self.attack()?,
            tolerance,
            message: match pr.message {
                MessageKind::Random => MessageSource::Random,
                MessageKind::Zeros => MessageSource::Zeros,
                MessageKind::Ones => MessageSource::Ones,
            },
            continue_after_abort: pr.continue_after_abort,
            seed: pr.seed,
        };
        params.environment().map_err(config_error)?;
        Ok(params)
    }

    /// Sweep grid: the explicit list, or evenly spaced points with
    /// axis-dependent default bounds.
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        let a = &self.analysis;
        if let Some(g) = &a.grid {
            return Ok(g.clone());
        }
        let (lo, hi) = match a.axis {
            AxisKind::Eta => (0.0, 1.0),
            AxisKind::Distance => (0.0, 100.0),
            AxisKind::DeltaTheta => (0.0, 0.3 * PI),
        };
        let (lo, hi) = (a.grid_start.unwrap_or(lo), a.grid_stop.unwrap_or(hi));
        if a.grid_points < 2 || !(hi > lo) {
            return Err(CliError::Config("analysis grid needs at least 2 points and grid_stop > grid_start".into()));
        }
        let step = (hi - lo) / (a.grid_points - 1) as f64;
        Ok((0..a.grid_points).map(|k| if k + 1 == a.grid_points { hi } else { lo + k as f64 * step }).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_published_settings() {
        let c = RunConfig::default();
        assert_eq!(c.protocol.theta, FRAC_PI_4);
        assert_eq!((c.physics.alpha, c.physics.eta_c, c.physics.eta_m, c.physics.eta_d), (0.2, 0.95, 1.0, 1.0));
        assert_eq!((c.analysis.r_rep, c.analysis.p_s, c.analysis.p_e), (1e7, 1.0, 1e-3));
        assert!(c.protocol_params().is_ok());
    }

    #[test]
    fn dotted_keys_and_tables_agree() {
        let a = RunConfig::from_toml("physics.eta_c = 0.9\nprotocol.r = 50\n").unwrap();
        let b = RunConfig::from_toml("[physics]\neta_c = 0.9\n[protocol]\nr = 50\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.physics.eta_c, 0.9);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(RunConfig::from_toml("physics.eta_x = 1"), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::from_toml("bogus = 1"), Err(CliError::Config(_))));
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let c = RunConfig::from_toml("protocol.n = 4").unwrap();
        assert!(matches!(c.protocol_params(), Err(CliError::Config(_))));
        let c = RunConfig::from_toml("physics.eta_c = 1.5").unwrap();
        assert!(matches!(c.protocol_params(), Err(CliError::Config(_))));
    }

    #[test]
    fn grid_defaults_per_axis() {
        let g = RunConfig::from_toml("analysis.axis = \"distance\"\nanalysis.grid_points = 3").unwrap().grid().unwrap();
        assert_eq!(g, vec![0.0, 50.0, 100.0]);
    }
}
