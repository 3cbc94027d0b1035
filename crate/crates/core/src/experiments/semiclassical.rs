use std::f64::consts::TAU;

use super::*;
use crate::config::StateKind;
use crate::quasiperiodicity::{torus_distance, torus_return_distance};
use crate::semiclassics::{ensemble_run, omega_eff, EnsembleConfig, EnsembleKind, EnsembleResult, TorusPoint};

/// Ω/ω′ of the periodic comparison ensemble.
pub const PERIODIC_RATIO: (f64, f64) = (5.0, 3.0);
const FIG3_MIN_PERIODS: f64 = 30.0;
const FIG3_SAMPLES_PER_PERIOD: u32 = 16;
const PHASE_MEMBERS: usize = 8;
const BACKACTION_MEMBERS: usize = 8;

fn member_table(ctx: &Ctx, res: &EnsembleResult, times: &[f64]) -> CsvTable {
    let mut names = vec!["t_over_T".to_string()];
    names.extend((0..res.members.len()).map(|k| format!("n_{k}")));
    let mut t = CsvTable::new(CsvSchema::reals(&names));
    for (i, time) in times.iter().enumerate() {
        t.push_reals(std::iter::once(ctx.t_over_period(*time)).chain(res.members.iter().map(|m| m.n[i])));
    }
    t
}

fn theta_grid(count: usize) -> Vec<f64> {
    (0..count).map(|k| TAU * k as f64 / count as f64).collect()
}

pub(super) fn fig3(ctx: &mut Ctx) -> Result<()> {
    let p = ctx.p().clone();
    let n0 = ctx.cfg.initial_state.mean_n();
    let n_theta = ctx.cfg.ensemble.n_theta.unwrap_or(32);
    let kind = ctx.cfg.ensemble.kind.unwrap_or(EnsembleKind::Fixed);
    let times = ctx.times(FIG3_SAMPLES_PER_PERIOD, ctx.t_end().max(FIG3_MIN_PERIODS));
    let quasi = EnsembleConfig {
        kind,
        n_theta,
        n0,
        omega_eff: omega_eff(n0, &p, ctx.corrected())?,
        times: times.clone(),
    };
    let periodic = EnsembleConfig {
        omega_eff: p.drive_omega * PERIODIC_RATIO.1 / PERIODIC_RATIO.0,
        ..quasi.clone()
    };
    let (q, per) = rayon::join(|| ensemble_run(&quasi, &p), || ensemble_run(&periodic, &p));
    let (q, per) = (q?, per?);
    ctx.note(format!(
        "quasiperiodic omega' = {:.12}, periodic omega' = {:.12} (Omega/omega' = {}/{})",
        quasi.omega_eff, periodic.omega_eff, PERIODIC_RATIO.0, PERIODIC_RATIO.1
    ));
    let mut var = CsvTable::new(CsvSchema::reals(&["t_over_T", "var_quasiperiodic", "var_periodic"]));
    for (i, t) in times.iter().enumerate() {
        var.push_reals([ctx.t_over_period(*t), q.variance[i], per.variance[i]]);
    }
    let qt = member_table(ctx, &q, &times);
    let pt = member_table(ctx, &per, &times);
    let prediction = ctx.prediction()?;
    ctx.table("fig3_quasiperiodic", qt);
    ctx.table("fig3_periodic", pt);
    ctx.table("fig3_variance", var);
    ctx.table("fig3_almost_periods", prediction.table(&p));
    Ok(())
}

/// Aligned coherent members at θ₀₂ = 2πk/count.
fn coherent_members(ctx: &Ctx, count: usize) -> Result<Vec<(String, QuantumState)>> {
    let n0 = ctx.cfg.initial_state.alpha.powi(2);
    theta_grid(count)
        .into_iter()
        .enumerate()
        .map(|(k, t2)| Ok((format!("coherent_{k}"), aligned_coherent(ctx.p(), n0, t2)?)))
        .collect()
}

pub(super) fn fig5(ctx: &mut Ctx) -> Result<()> {
    let p = ctx.p().clone();
    let n0 = ctx.cfg.initial_state.alpha.powi(2);
    let times = ctx.cfg.sample_times();
    let jobs = coherent_members(ctx, PHASE_MEMBERS)?;
    let runs = ctx.observed(jobs, &times, &[Observer::CavityPhase])?;
    let shift = delta_omega0_avg(n0, &p)?;
    ctx.note(format!("[delta omega0] at n0 = {n0}: {shift:.10e}"));
    let mut names = vec!["t_over_T".to_string()];
    names.extend((0..PHASE_MEMBERS).map(|k| format!("dtheta_{k}")));
    names.push("dtheta_mean".into());
    names.push("predicted".into());
    let mut t = CsvTable::new(CsvSchema::reals(&names));
    for (i, time) in times.iter().enumerate() {
        let d: Vec<f64> = runs
            .iter()
            .map(|r| {
                let th = r.series.scalar("theta2").expect("theta2 channel");
                th[i] - th[0] - p.omega * time
            })
            .collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        t.push_reals(
            std::iter::once(ctx.t_over_period(*time))
                .chain(d)
                .chain([mean, shift * time]),
        );
    }
    ctx.table("fig5_phase", t);
    Ok(())
}

pub(super) fn fig7(ctx: &mut Ctx) -> Result<()> {
    let p = ctx.p().clone();
    let psi = ctx.cfg.initial_state.build(&p)?;
    let n0 = ctx.cfg.initial_state.mean_n();
    let times = ctx.cfg.sample_times();
    let run = ctx
        .observed(
            vec![("fock".into(), psi)],
            &times,
            &[
                Observer::FockDistribution,
                Observer::MeanOccupation,
                Observer::ParticipationRatio,
            ],
        )?
        .remove(0);
    let ens = ensemble_run(
        &EnsembleConfig {
            kind: EnsembleKind::Backaction,
            n_theta: BACKACTION_MEMBERS,
            n0,
            omega_eff: omega_eff(n0, &p, ctx.corrected())?,
            times: times.clone(),
        },
        &p,
    )?;
    let mean_n = run.series.scalar("mean_n").expect("mean_n channel");
    let pr = run.series.scalar("PR").expect("PR channel");
    let mut quantum = CsvTable::new(CsvSchema::reals(&["t_over_T", "mean_n", "PR"]));
    for (i, t) in times.iter().enumerate() {
        quantum.push_reals([ctx.t_over_period(*t), mean_n[i], pr[i]]);
    }
    let mut pn = CsvTable::new(pn_schema(p.n_max));
    for (t, row) in times.iter().zip(run.series.vector("P(n)").expect("P(n) channel")) {
        pn.push_reals(std::iter::once(ctx.t_over_period(*t)).chain(row.iter().copied()));
    }
    let mut names = vec!["t_over_T".to_string()];
    names.extend((0..BACKACTION_MEMBERS).map(|k| format!("n_{k}")));
    names.push("mean".into());
    names.push("variance".into());
    let mut semi = CsvTable::new(CsvSchema::reals(&names));
    for (i, t) in times.iter().enumerate() {
        let ns: Vec<f64> = ens.members.iter().map(|m| m.n[i]).collect();
        let mean = ns.iter().sum::<f64>() / ns.len() as f64;
        semi.push_reals(
            std::iter::once(ctx.t_over_period(*t))
                .chain(ns)
                .chain([mean, ens.variance[i]]),
        );
    }
    ctx.table("fig7_quantum", quantum);
    ctx.table("fig7_pn", pn);
    ctx.table("fig7_semiclassical", semi);
    Ok(())
}

pub(super) fn fig10(ctx: &mut Ctx) -> Result<()> {
    let p = ctx.p().clone();
    let n0 = ctx.cfg.initial_state.mean_n();
    let times = ctx.cfg.sample_times();
    let init = ctx.cfg.initial_state.clone();
    let phases = ctx.observed(coherent_members(ctx, PHASE_MEMBERS)?, &times, &[Observer::CavityPhase])?;
    let others = ctx.observed(
        vec![
            ("fock".into(), init.build_kind(StateKind::Fock, &p)?),
            ("cat".into(), init.build_kind(StateKind::Cat, &p)?),
        ],
        &times,
        &[
            Observer::ParticipationRatio,
            Observer::CatInfidelity {
                alpha_max: (p.n_max as f64).sqrt(),
            },
        ],
    )?;
    let w = omega_eff(n0, &p, ctx.corrected())?;
    let pr = others[0].series.scalar("PR").expect("PR channel");
    let infid = others[1].series.scalar("cat_infidelity").expect("cat channel");
    let alpha = others[1].series.scalar("cat_alpha").expect("cat channel");
    let mut t = CsvTable::new(CsvSchema::reals(&[
        "t_over_T",
        "delta_theta",
        "delta_theta_predicted",
        "PR",
        "cat_infidelity",
        "cat_alpha",
    ]));
    for (i, time) in times.iter().enumerate() {
        let measured = phases
            .iter()
            .map(|r| {
                let th = r.series.scalar("theta2").expect("theta2 channel");
                torus_distance(
                    TorusPoint::new(p.theta1(*time), th[i]),
                    TorusPoint::new(p.theta01, th[0]),
                )
            })
            .fold(0.0, f64::max);
        t.push_reals([
            ctx.t_over_period(*time),
            measured,
            torus_return_distance(*time, p.drive_omega, w),
            pr[i],
            infid[i],
            alpha[i],
        ]);
    }
    let prediction = ctx.prediction()?;
    ctx.table("fig10_metrics", t);
    ctx.table("fig10_almost_periods", prediction.table(&p));
    Ok(())
}
