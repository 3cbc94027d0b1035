//! Named experiments that write CSV data and JSON manifests.

mod quantum;
mod semiclassical;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::linalg::C64;
use crate::model::{DrivenHamiltonian, ModelParams};
use crate::observables::{GridSpec, Observer, QGrid};
use crate::output::{write_table, Cell, ColumnKind, CsvSchema, CsvTable, NamedCertificate, RunContext};
use crate::propagator::{evolve_observed, evolve_snapshots, Certificate, ObservedRun, Snapshots};
use crate::quasiperiodicity::{almost_periods, continued_fraction, AlmostPeriod, MAX_TERMS, REMAINDER_TOL};
use crate::semiclassics::{b_eff, delta_omega0_avg};
use crate::state::{make_coherent, with_spin, QuantumState, SpinSign};

/// Command-line overrides.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub no_correction: bool,
    /// Recorded in manifests; every experiment is deterministic.
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub experiment: Experiment,
    pub files: Vec<PathBuf>,
    pub wall_time_s: f64,
}

/// Runs `experiment` and writes its files into `out`.
pub fn run_experiment(
    experiment: Experiment,
    cfg: &ExperimentConfig,
    out: &Path,
    opts: &RunOptions,
) -> Result<RunSummary> {
    cfg.validate()?;
    let start = Instant::now();
    let mut ctx = Ctx {
        cfg,
        opts,
        certificates: Vec::new(),
        notes: Vec::new(),
        tables: Vec::new(),
    };
    match experiment {
        Experiment::Fig1PnHeatmap => quantum::fig1(&mut ctx)?,
        Experiment::Fig2Snapshots => quantum::fig2(&mut ctx)?,
        Experiment::Fig3SemiclassicalEnsembles => semiclassical::fig3(&mut ctx)?,
        Experiment::Fig4QfuncsAlignment => quantum::fig4(&mut ctx)?,
        Experiment::Fig5PhaseDrift => semiclassical::fig5(&mut ctx)?,
        Experiment::Fig6Labframe => quantum::fig6(&mut ctx)?,
        Experiment::Fig7SemiclassVsQuantum => semiclassical::fig7(&mut ctx)?,
        Experiment::Fig8CoherentQfunc => quantum::fig8(&mut ctx)?,
        Experiment::Fig9Entanglement => quantum::fig9(&mut ctx)?,
        Experiment::Fig10RephasingMetrics => semiclassical::fig10(&mut ctx)?,
    }
    let wall = start.elapsed().as_secs_f64();
    let mut echo = cfg.clone();
    echo.experiment = Some(experiment);
    echo.prediction.corrected = ctx.corrected();
    let run = RunContext {
        experiment: experiment.name().to_string(),
        config: serde_json::to_value(&echo)?,
        seed: opts.seed,
        certificates: ctx.certificates,
        notes: ctx.notes,
    };
    let files = ctx
        .tables
        .iter()
        .map(|(name, table)| write_table(out, name, table, &run, wall))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunSummary {
        experiment,
        files,
        wall_time_s: wall,
    })
}

/// Accumulates tables and certificates while an experiment runs.
pub(crate) struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    opts: &'a RunOptions,
    certificates: Vec<NamedCertificate>,
    notes: Vec<String>,
    tables: Vec<(String, CsvTable)>,
}

impl Ctx<'_> {
    fn p(&self) -> &ModelParams {
        &self.cfg.model
    }

    fn corrected(&self) -> bool {
        self.cfg.prediction.corrected && !self.opts.no_correction
    }

    fn certify(&mut self, run: &str, c: Certificate) {
        self.certificates.push(NamedCertificate {
            run: run.to_string(),
            certificate: c,
        });
    }

    fn table(&mut self, name: &str, t: CsvTable) {
        self.tables.push((name.to_string(), t));
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn t_over_period(&self, t: f64) -> f64 {
        t / self.p().drive_period()
    }

    /// Sample times with at least `min_per_period` points per drive period.
    fn times(&self, min_per_period: u32, t_end_periods: f64) -> Vec<f64> {
        let t = self.p().drive_period();
        let per = self.cfg.evolution.samples_per_period.max(min_per_period) as f64;
        let count = (t_end_periods * per + 1e-9).floor() as usize;
        (0..=count).map(|k| k as f64 * t / per).collect()
    }

    fn t_end(&self) -> f64 {
        self.cfg.evolution.t_end_periods
    }

    fn rotating(&self) -> Result<DrivenHamiltonian> {
        self.p().validate_quantum()?;
        DrivenHamiltonian::rotating(self.p())
    }

    /// Runs quantum jobs in parallel, results in job order.
    fn observed(
        &mut self,
        jobs: Vec<(String, QuantumState)>,
        times: &[f64],
        observers: &[Observer],
    ) -> Result<Vec<ObservedRun>> {
        let h = self.rotating()?;
        let cfg = self.cfg.evolution_config(times.to_vec());
        let runs: Vec<ObservedRun> = jobs
            .par_iter()
            .map(|(_, psi)| evolve_observed(psi, &h, &cfg, observers))
            .collect::<Result<_>>()?;
        for ((name, _), r) in jobs.iter().zip(&runs) {
            self.certify(name, r.certificate.clone());
        }
        Ok(runs)
    }

    fn snapshots(&mut self, jobs: Vec<(String, QuantumState)>, times: &[f64]) -> Result<Vec<Snapshots>> {
        let h = self.rotating()?;
        let cfg = self.cfg.evolution_config(times.to_vec());
        let runs: Vec<Snapshots> = jobs
            .par_iter()
            .map(|(_, psi)| evolve_snapshots(psi, &h, &cfg))
            .collect::<Result<_>>()?;
        for ((name, _), r) in jobs.iter().zip(&runs) {
            self.certify(name, r.certificate.clone());
        }
        Ok(runs)
    }

    fn grid(&self) -> GridSpec {
        GridSpec {
            points: self.cfg.output.q_grid_points,
            ..GridSpec::for_truncation(self.p().n_max)
        }
    }

    fn prediction(&self) -> Result<Prediction> {
        predict_almost_periods(self.cfg, self.corrected())
    }
}

/// Header "t_over_T", "P0", …, "P{n_max}".
pub fn pn_schema(n_max: usize) -> CsvSchema {
    let mut names = vec!["t_over_T".to_string()];
    names.extend((0..=n_max).map(|n| format!("P{n}")));
    CsvSchema::reals(&names)
}

/// Header "t_over_T", "P0_up", "P0_down", … in basis order.
pub fn pn_spin_schema(n_max: usize) -> CsvSchema {
    let mut names = vec!["t_over_T".to_string()];
    for n in 0..=n_max {
        names.push(format!("P{n}_up"));
        names.push(format!("P{n}_down"));
    }
    CsvSchema::reals(&names)
}

pub fn q_schema() -> CsvSchema {
    CsvSchema::reals(&["re_alpha", "im_alpha", "Q"])
}

fn q_table(q: &QGrid) -> CsvTable {
    let mut t = CsvTable::new(q_schema());
    for (i, row) in q.q.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            t.push_reals([q.re[j], q.im[i], *v]);
        }
    }
    t
}

/// Coherent state |√n₀·e^{−iθ₀₂}⟩ with the spin along +B_eff(θ₀₁, θ₀₂, n₀).
pub fn aligned_coherent(p: &ModelParams, n0: f64, theta02: f64) -> Result<QuantumState> {
    let cavity = make_coherent(C64::from_polar(n0.sqrt(), -theta02), p)?;
    with_spin(&cavity, b_eff(p.theta01, theta02, n0, p), SpinSign::Plus)
}

/// Output of `predict almost-periods`.
#[derive(Clone, Debug, Serialize)]
pub struct Prediction {
    pub n0: f64,
    pub corrected: bool,
    pub delta_omega0: f64,
    pub omega_eff: f64,
    pub ratio: f64,
    pub coeffs: Vec<u64>,
    pub periods: Vec<AlmostPeriod>,
}

impl Prediction {
    pub fn hs(&self) -> Vec<u64> {
        self.periods.iter().map(|a| a.h).collect()
    }

    pub fn table(&self, p: &ModelParams) -> CsvTable {
        let mut t = CsvTable::new(CsvSchema {
            columns: vec![
                ("h".into(), ColumnKind::Int),
                ("k".into(), ColumnKind::Int),
                ("t_over_T".into(), ColumnKind::Real),
                ("t".into(), ColumnKind::Real),
                ("kind".into(), ColumnKind::Text),
            ],
        });
        for a in &self.periods {
            t.push(vec![
                Cell::Int(a.h as i64),
                Cell::Int(a.k as i64),
                Cell::Real(a.t / p.drive_period()),
                Cell::Real(a.t),
                Cell::Text(a.kind.as_str().to_string()),
            ]);
        }
        t
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{:<22}{}", "n0", self.n0).unwrap();
        writeln!(s, "{:<22}{:.6e}", "[delta omega0]/omega", self.delta_omega0).unwrap();
        writeln!(s, "{:<22}{:.10}", "omega'", self.omega_eff).unwrap();
        writeln!(s, "{:<22}{:.10}", "Omega/omega'", self.ratio).unwrap();
        writeln!(s, "{:<22}{}", "correction", if self.corrected { "on" } else { "off" }).unwrap();
        let cf: Vec<String> = self.coeffs.iter().map(|a| a.to_string()).collect();
        let tail = if cf.len() > 1 {
            cf[1..].join(", ")
        } else {
            String::new()
        };
        writeln!(s, "{:<22}[{}; {}]", "continued fraction", cf[0], tail).unwrap();
        writeln!(s, "{:>6} {:>6} {:>12} kind", "h", "k", "t/T").unwrap();
        for a in &self.periods {
            writeln!(s, "{:>6} {:>6} {:>12.6} {}", a.h, a.k, a.h as f64, a.kind.as_str()).unwrap();
        }
        s
    }
}

/// [δω₀]_θ(n₀), the ratio Ω/ω′, its expansion and the almost periods.
pub fn predict_almost_periods(cfg: &ExperimentConfig, corrected: bool) -> Result<Prediction> {
    let p = &cfg.model;
    p.validate()?;
    let n0 = cfg.initial_state.mean_n();
    let delta = if p.b_0 == 0.0 { 0.0 } else { delta_omega0_avg(n0, p)? };
    let omega_eff = if corrected { p.omega + delta } else { p.omega };
    let ratio = p.drive_omega / omega_eff;
    let cf = continued_fraction(ratio, MAX_TERMS, REMAINDER_TOL)?;
    let periods = almost_periods(p.drive_omega, omega_eff, cfg.prediction.h_max)?;
    Ok(Prediction {
        n0,
        corrected,
        delta_omega0: delta / p.omega,
        omega_eff,
        ratio,
        coeffs: cf.coeffs,
        periods,
    })
}

/// Writes `almost_periods.csv` and its manifest into `out`.
pub fn write_prediction(
    cfg: &ExperimentConfig,
    prediction: &Prediction,
    out: &Path,
    seed: Option<u64>,
) -> Result<PathBuf> {
    let mut echo = cfg.clone();
    echo.prediction.corrected = prediction.corrected;
    let ctx = RunContext {
        experiment: "predict-almost-periods".into(),
        config: serde_json::to_value(&echo)?,
        seed,
        certificates: vec![],
        notes: vec![format!(
            "ratio {:.10}, delta_omega0/omega {:.6e}",
            prediction.ratio, prediction.delta_omega0
        )],
    };
    write_table(out, "almost_periods", &prediction.table(&cfg.model), &ctx, 0.0)
}
