//! TOML experiment configuration.
//!
//! Every section is optional; anything left out falls back to the
//! `paper-fig1` preset. Example:
//!
//! ```toml
//! preset = "paper-fig1"
//! experiment = "fig1-pn-heatmap"
//!
//! [model]
//! b_0 = 1.5
//! n_max = 64
//!
//! [evolution]
//! steps_per_period = 256
//! t_end_periods = 16
//! samples_per_period = 8
//!
//! [initial_state]
//! kind = "fock"
//! n0 = 10
//! spin_axis = [1.0, 0.0, 0.0]
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{BoostError, Result};
use crate::linalg::C64;
use crate::model::{FieldVector, ModelParams};
use crate::propagator::{EvolutionConfig, Scheme};
use crate::semiclassics::EnsembleKind;
use crate::state::{make_cat, make_coherent, make_fock, with_spin, QuantumState, SpinSign};

/// Registered experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Experiment {
    Fig1PnHeatmap,
    Fig2Snapshots,
    Fig3SemiclassicalEnsembles,
    Fig4QfuncsAlignment,
    Fig5PhaseDrift,
    Fig6Labframe,
    Fig7SemiclassVsQuantum,
    Fig8CoherentQfunc,
    Fig9Entanglement,
    Fig10RephasingMetrics,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::Fig1PnHeatmap,
        Experiment::Fig2Snapshots,
        Experiment::Fig3SemiclassicalEnsembles,
        Experiment::Fig4QfuncsAlignment,
        Experiment::Fig5PhaseDrift,
        Experiment::Fig6Labframe,
        Experiment::Fig7SemiclassVsQuantum,
        Experiment::Fig8CoherentQfunc,
        Experiment::Fig9Entanglement,
        Experiment::Fig10RephasingMetrics,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Fig1PnHeatmap => "fig1-pn-heatmap",
            Experiment::Fig2Snapshots => "fig2-snapshots",
            Experiment::Fig3SemiclassicalEnsembles => "fig3-semiclassical-ensembles",
            Experiment::Fig4QfuncsAlignment => "fig4-qfuncs-alignment",
            Experiment::Fig5PhaseDrift => "fig5-phase-drift",
            Experiment::Fig6Labframe => "fig6-labframe",
            Experiment::Fig7SemiclassVsQuantum => "fig7-semiclass-vs-quantum",
            Experiment::Fig8CoherentQfunc => "fig8-coherent-qfunc",
            Experiment::Fig9Entanglement => "fig9-entanglement",
            Experiment::Fig10RephasingMetrics => "fig10-rephasing-metrics",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Experiment::Fig1PnHeatmap => "P(n) of a boosted Fock state over 16 drive periods, with almost periods",
            Experiment::Fig2Snapshots => "P(n) and Husimi Q snapshots at integer drive periods up to 12T",
            Experiment::Fig3SemiclassicalEnsembles => {
                "semiclassical n(t) ensembles for quasiperiodic and periodic drives, with variance"
            }
            Experiment::Fig4QfuncsAlignment => {
                "Q functions and spin-field alignment M(t) for Fock, coherent and cat starts"
            }
            Experiment::Fig5PhaseDrift => "cavity phase drift of coherent starts against the predicted frequency shift",
            Experiment::Fig6Labframe => "lab-frame boosting with a qubit carrier, compared to the rotating frame",
            Experiment::Fig7SemiclassVsQuantum => "quantum mean occupation against back-action semiclassical ensembles",
            Experiment::Fig8CoherentQfunc => "Q function of a coherent start at 0 and 12T",
            Experiment::Fig9Entanglement => "spin-cavity entanglement entropy for Fock and coherent starts",
            Experiment::Fig10RephasingMetrics => "torus return distance, participation ratio and cat infidelity",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = BoostError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .iter()
            .copied()
            .find(|e| e.name() == s)
            .ok_or_else(|| BoostError::UnknownExperiment(s.to_string()))
    }
}

impl TryFrom<String> for Experiment {
    type Error = BoostError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Experiment> for String {
    fn from(e: Experiment) -> String {
        e.name().to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionSection {
    /// dt_max = T / steps_per_period.
    pub steps_per_period: u32,
    pub tol_norm: f64,
    pub t_end_periods: f64,
    pub samples_per_period: u32,
    pub scheme: Scheme,
    pub certify: bool,
    pub leakage_threshold: f64,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        EvolutionSection {
            steps_per_period: 256,
            tol_norm: 1e-9,
            t_end_periods: 16.0,
            samples_per_period: 8,
            scheme: Scheme::Magnus4,
            certify: true,
            leakage_threshold: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Fock,
    Coherent,
    Cat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialStateSection {
    pub kind: StateKind,
    /// Fock level.
    pub n0: usize,
    /// |α| for coherent and cat states.
    pub alpha: f64,
    /// Coherent states use α = |α|·e^{−iθ₀₂}.
    pub theta02: f64,
    pub spin_axis: [f64; 3],
    pub spin_sign: SpinSign,
}

impl Default for InitialStateSection {
    fn default() -> Self {
        InitialStateSection {
            kind: StateKind::Fock,
            n0: 10,
            alpha: 10f64.sqrt(),
            theta02: 0.0,
            spin_axis: [1.0, 0.0, 0.0],
            spin_sign: SpinSign::Plus,
        }
    }
}

impl InitialStateSection {
    pub fn axis(&self) -> FieldVector {
        FieldVector::new(self.spin_axis[0], self.spin_axis[1], self.spin_axis[2])
    }

    /// Builds the configured product state, or the same spin with another
    /// cavity kind.
    pub fn build_kind(&self, kind: StateKind, p: &ModelParams) -> Result<QuantumState> {
        let cavity = match kind {
            StateKind::Fock => make_fock(self.n0, p)?,
            StateKind::Coherent => make_coherent(C64::from_polar(self.alpha, -self.theta02), p)?,
            StateKind::Cat => make_cat(self.alpha, p)?,
        };
        with_spin(&cavity, self.axis(), self.spin_sign)
    }

    pub fn build(&self, p: &ModelParams) -> Result<QuantumState> {
        self.build_kind(self.kind, p)
    }

    /// Mean photon number of the configured cavity state.
    pub fn mean_n(&self) -> f64 {
        match self.kind {
            StateKind::Fock => self.n0 as f64,
            _ => self.alpha * self.alpha,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    /// Members per ensemble; each experiment has its own default.
    pub n_theta: Option<usize>,
    /// Semiclassical integrand variant; each experiment has its own default.
    pub kind: Option<EnsembleKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PredictionSection {
    /// Largest drive-cycle count listed.
    pub h_max: u64,
    /// Use ω + [δω₀]_θ instead of the bare ω.
    pub corrected: bool,
}

impl Default for PredictionSection {
    fn default() -> Self {
        PredictionSection {
            h_max: 16,
            corrected: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Points per axis of Husimi Q grids.
    pub q_grid_points: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { q_grid_points: 201 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Only "paper-fig1" is defined; it is also the fallback.
    pub preset: String,
    pub experiment: Option<Experiment>,
    pub output_dir: Option<PathBuf>,
    pub model: ModelParams,
    pub evolution: EvolutionSection,
    pub initial_state: InitialStateSection,
    pub ensemble: EnsembleSection,
    pub prediction: PredictionSection,
    pub output: OutputSection,
}

pub const PRESET_FIG1: &str = "paper-fig1";

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            preset: PRESET_FIG1.to_string(),
            experiment: None,
            output_dir: None,
            model: ModelParams::paper_fig1(),
            evolution: EvolutionSection::default(),
            initial_state: InitialStateSection::default(),
            ensemble: EnsembleSection::default(),
            prediction: PredictionSection::default(),
            output: OutputSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn paper_fig1() -> Self {
        ExperimentConfig::default()
    }

    /// Parses and validates TOML text.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| BoostError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BoostError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        if self.preset != PRESET_FIG1 {
            return Err(BoostError::Config(format!("unknown preset `{}`", self.preset)));
        }
        self.model.validate()?;
        let ev = &self.evolution;
        if ev.steps_per_period == 0 || ev.samples_per_period == 0 {
            return Err(BoostError::Config(
                "steps_per_period and samples_per_period must be positive".into(),
            ));
        }
        if !(ev.t_end_periods > 0.0 && ev.t_end_periods.is_finite()) {
            return Err(BoostError::Config("t_end_periods must be positive".into()));
        }
        if !(ev.tol_norm >= 0.0 && ev.tol_norm.is_finite()) {
            return Err(BoostError::Config("tol_norm must be non-negative".into()));
        }
        if !(ev.leakage_threshold > 0.0) {
            return Err(BoostError::Config("leakage_threshold must be positive".into()));
        }
        let st = &self.initial_state;
        if !(st.alpha >= 0.0 && st.alpha.is_finite()) {
            return Err(BoostError::Config("alpha must be finite and non-negative".into()));
        }
        if !st.theta02.is_finite() {
            return Err(BoostError::Config("theta02 must be finite".into()));
        }
        if st.axis().norm() == 0.0 || !st.axis().is_finite() {
            return Err(BoostError::Config("spin_axis must be a finite nonzero vector".into()));
        }
        if let Some(n) = self.ensemble.n_theta {
            if n < 2 {
                return Err(BoostError::Config("n_theta must be at least 2".into()));
            }
        }
        if self.output.q_grid_points < 2 {
            return Err(BoostError::Config("q_grid_points must be at least 2".into()));
        }
        // truncation check for the configured state
        st.build(&self.model).map(|_| ())
    }

    /// Sample times k·T/samples_per_period up to t_end_periods·T.
    pub fn sample_times(&self) -> Vec<f64> {
        let t = self.model.drive_period();
        let per = self.evolution.samples_per_period as f64;
        let count = (self.evolution.t_end_periods * per + 1e-9).floor() as usize;
        (0..=count).map(|k| k as f64 * t / per).collect()
    }

    /// Propagator settings for a rotating-frame run over `sample_times`.
    pub fn evolution_config(&self, sample_times: Vec<f64>) -> EvolutionConfig {
        let t = self.model.drive_period();
        let ev = &self.evolution;
        let mut cfg = EvolutionConfig::new(t / ev.steps_per_period as f64, sample_times);
        cfg.tol_norm = ev.tol_norm;
        cfg.scheme = ev.scheme;
        cfg.certify = ev.certify;
        cfg.leakage_threshold = Some(ev.leakage_threshold);
        cfg.dt_floor = cfg.dt_max / 64.0;
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_preset() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::paper_fig1());
        assert_eq!(cfg.sample_times().len(), 129);
    }

    #[test]
    fn partial_sections_overlay_the_preset() {
        let cfg = ExperimentConfig::from_toml(
            "experiment = \"fig9-entanglement\"\n[model]\nb_0 = 0.0\n[initial_state]\nkind = \"coherent\"\nalpha = 2.0\n",
        )
        .unwrap();
        assert_eq!(cfg.model.b_0, 0.0);
        assert_eq!(cfg.model.b_m, 6.0);
        assert_eq!(cfg.initial_state.kind, StateKind::Coherent);
        assert_eq!(cfg.experiment, Some(Experiment::Fig9Entanglement));
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = ExperimentConfig::paper_fig1();
        cfg.model.omega_q = Some(100.0);
        cfg.ensemble.n_theta = Some(8);
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "experiment = \"fig11\"",
            "[model]\nbogus = 1",
            "[model]\nOmega = -1.0",
            "[evolution]\nsteps_per_period = 0",
            "[initial_state]\nn0 = 65",
            "[initial_state]\nkind = \"coherent\"\nalpha = 7.0",
            "preset = \"other\"",
            "[ensemble]\nn_theta = 1",
            "not toml at all [",
        ] {
            let err = ExperimentConfig::from_toml(text).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}: {err}");
        }
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!(matches!(
            "fig0".parse::<Experiment>(),
            Err(BoostError::UnknownExperiment(_))
        ));
    }
}
