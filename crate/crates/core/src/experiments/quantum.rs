use super::*;
use crate::config::StateKind;
use crate::observables::{
    alignment_metric, fock_distribution, husimi_q, mean_occupation, participation_ratio, reduced_cavity,
    ridge_radius_sq,
};
use crate::propagator::evolve_observed;

const DEFAULT_OMEGA_Q: f64 = 100.0;

fn pn_table(ctx: &Ctx, times: &[f64], rows: &[Vec<f64>]) -> CsvTable {
    let mut t = CsvTable::new(pn_schema(ctx.p().n_max));
    for (time, row) in times.iter().zip(rows) {
        t.push_reals(std::iter::once(ctx.t_over_period(*time)).chain(row.iter().copied()));
    }
    t
}

fn series_rows<'a>(run: &'a ObservedRun, name: &str) -> &'a [Vec<f64>] {
    run.series.vector(name).expect("observer channel present")
}

fn series_scalar<'a>(run: &'a ObservedRun, name: &str) -> &'a [f64] {
    run.series.scalar(name).expect("observer channel present")
}

pub(super) fn fig1(ctx: &mut Ctx) -> Result<()> {
    let psi = ctx.cfg.initial_state.build(ctx.p())?;
    let times = ctx.cfg.sample_times();
    let observers = [
        Observer::FockDistribution,
        Observer::SpinResolvedDistribution,
        Observer::MeanOccupation,
        Observer::ParticipationRatio,
    ];
    let run = ctx.observed(vec![("fock".into(), psi)], &times, &observers)?.remove(0);

    let pn = pn_table(ctx, &times, series_rows(&run, "P(n)"));
    let mut spin = CsvTable::new(pn_spin_schema(ctx.p().n_max));
    for (t, row) in times.iter().zip(series_rows(&run, "P(n,m)")) {
        spin.push_reals(std::iter::once(ctx.t_over_period(*t)).chain(row.iter().copied()));
    }
    let mut summary = CsvTable::new(CsvSchema::reals(&["t_over_T", "mean_n", "PR"]));
    for ((t, n), pr) in times
        .iter()
        .zip(series_scalar(&run, "mean_n"))
        .zip(series_scalar(&run, "PR"))
    {
        summary.push_reals([ctx.t_over_period(*t), *n, *pr]);
    }
    let prediction = ctx.prediction()?;
    ctx.table("fig1_pn", pn);
    ctx.table("fig1_pn_spin", spin);
    ctx.table("fig1_summary", summary);
    ctx.table("fig1_almost_periods", prediction.table(ctx.p()));
    Ok(())
}

/// Snapshot times 0, T, …, up to 12T.
fn integer_periods(ctx: &Ctx, last: f64) -> Vec<f64> {
    let count = ctx.t_end().min(last).floor() as usize;
    (0..=count).map(|h| h as f64 * ctx.p().drive_period()).collect()
}

pub(super) fn fig2(ctx: &mut Ctx) -> Result<()> {
    let psi = ctx.cfg.initial_state.build(ctx.p())?;
    let times = integer_periods(ctx, 12.0);
    let snaps = ctx.snapshots(vec![("fock".into(), psi)], &times)?.remove(0);
    let grid = ctx.grid();
    let mut rows = Vec::new();
    let mut summary = CsvTable::new(CsvSchema::reals(&[
        "t_over_T",
        "mean_n",
        "PR",
        "ridge_radius_sq",
        "q_integral",
        "q_min",
    ]));
    let mut q_tables = Vec::new();
    for (h, state) in snaps.states.iter().enumerate() {
        let rho = reduced_cavity(state)?;
        let p = fock_distribution(&rho);
        let q = husimi_q(&rho, grid)?;
        summary.push_reals([
            h as f64,
            mean_occupation(&p),
            participation_ratio(&p),
            ridge_radius_sq(&p),
            q.integral(),
            q.min(),
        ]);
        q_tables.push((format!("fig2_q_t{h:02}"), q_table(&q)));
        rows.push(p);
    }
    let pn = pn_table(ctx, &times, &rows);
    ctx.table("fig2_pn", pn);
    ctx.table("fig2_summary", summary);
    for (name, t) in q_tables {
        ctx.table(&name, t);
    }
    Ok(())
}

pub(super) fn fig4(ctx: &mut Ctx) -> Result<()> {
    let init = &ctx.cfg.initial_state;
    let kinds = [
        ("fock", StateKind::Fock),
        ("coherent", StateKind::Coherent),
        ("cat", StateKind::Cat),
    ];
    let jobs = kinds
        .iter()
        .map(|(name, kind)| Ok((name.to_string(), init.build_kind(*kind, ctx.p())?)))
        .collect::<Result<Vec<_>>>()?;
    let times = ctx.cfg.sample_times();
    let runs = ctx.snapshots(jobs, &times)?;
    let p = ctx.p().clone();
    let mut alignment = CsvTable::new(CsvSchema::reals(&["t_over_T", "M_fock", "M_coherent", "M_cat"]));
    for (i, t) in times.iter().enumerate() {
        let theta1 = p.theta1(*t);
        alignment.push_reals(
            std::iter::once(ctx.t_over_period(*t))
                .chain(runs.iter().map(|r| alignment_metric(&r.states[i], theta1, &p))),
        );
    }
    ctx.table("fig4_alignment", alignment);
    let target = 12.0 * p.drive_period();
    let idx = times
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    ctx.note(format!("Q snapshots at t/T = {:.6}", ctx.t_over_period(times[idx])));
    let grid = ctx.grid();
    for ((name, _), run) in kinds.iter().zip(&runs) {
        let q = husimi_q(&reduced_cavity(&run.states[idx])?, grid)?;
        ctx.table(&format!("fig4_q_{name}"), q_table(&q));
    }
    Ok(())
}

pub(super) fn fig6(ctx: &mut Ctx) -> Result<()> {
    let mut p = ctx.p().clone();
    let omega_q = *p.omega_q.get_or_insert(DEFAULT_OMEGA_Q);
    let psi = ctx.cfg.initial_state.build(&p)?;
    let times = ctx.cfg.sample_times();
    let observers = [Observer::FockDistribution, Observer::MeanOccupation];

    let lab = DrivenHamiltonian::lab(&p)?;
    let mut lab_cfg = ctx.cfg.evolution_config(times.clone());
    let scale = (p.omega / omega_q).min(1.0);
    lab_cfg.dt_max *= scale;
    lab_cfg.dt_floor *= scale;
    let rot = ctx.rotating()?;
    let rot_cfg = ctx.cfg.evolution_config(times.clone());
    let (lab_run, rot_run) = rayon::join(
        || evolve_observed(&psi, &lab, &lab_cfg, &observers),
        || evolve_observed(&psi, &rot, &rot_cfg, &observers),
    );
    let (lab_run, rot_run) = (lab_run?, rot_run?);
    ctx.certify("lab", lab_run.certificate.clone());
    ctx.certify("rotating", rot_run.certificate.clone());
    ctx.note(format!("omega_q = {omega_q}"));

    let lab_p = series_rows(&lab_run, "P(n)");
    let rot_p = series_rows(&rot_run, "P(n)");
    let mut tv = CsvTable::new(CsvSchema::reals(&["t_over_T", "tv", "mean_n_lab", "mean_n_rot"]));
    for (i, t) in times.iter().enumerate() {
        let d = 0.5 * lab_p[i].iter().zip(&rot_p[i]).map(|(a, b)| (a - b).abs()).sum::<f64>();
        tv.push_reals([
            ctx.t_over_period(*t),
            d,
            series_scalar(&lab_run, "mean_n")[i],
            series_scalar(&rot_run, "mean_n")[i],
        ]);
    }
    let pn = pn_table(ctx, &times, lab_p);
    ctx.table("fig6_pn_lab", pn);
    ctx.table("fig6_tv", tv);
    Ok(())
}

pub(super) fn fig8(ctx: &mut Ctx) -> Result<()> {
    let init = &ctx.cfg.initial_state;
    let psi = aligned_coherent(ctx.p(), init.alpha * init.alpha, init.theta02)?;
    let t12 = 12.0 * ctx.p().drive_period();
    let times = vec![0.0, t12];
    let snaps = ctx.snapshots(vec![("coherent".into(), psi)], &times)?.remove(0);
    let grid = ctx.grid();
    let mut summary = CsvTable::new(CsvSchema::reals(&[
        "t_over_T",
        "mean_n",
        "q_integral",
        "q_min",
        "q_max",
        "argmax_re",
        "argmax_im",
    ]));
    for (t, state) in times.iter().zip(&snaps.states) {
        let rho = reduced_cavity(state)?;
        let q = husimi_q(&rho, grid)?;
        let (at, max) = q.argmax();
        let h = ctx.t_over_period(*t).round() as usize;
        summary.push_reals([
            ctx.t_over_period(*t),
            mean_occupation(&fock_distribution(&rho)),
            q.integral(),
            q.min(),
            max,
            at.re,
            at.im,
        ]);
        ctx.table(&format!("fig8_q_t{h:02}"), q_table(&q));
    }
    ctx.table("fig8_summary", summary);
    Ok(())
}

pub(super) fn fig9(ctx: &mut Ctx) -> Result<()> {
    let init = &ctx.cfg.initial_state;
    let fock = init.build_kind(StateKind::Fock, ctx.p())?;
    let coherent = aligned_coherent(ctx.p(), init.alpha * init.alpha, init.theta02)?;
    let times = ctx.times(32, ctx.t_end());
    let runs = ctx.observed(
        vec![("fock".into(), fock), ("coherent".into(), coherent)],
        &times,
        &[Observer::Entropy],
    )?;
    let mut t = CsvTable::new(CsvSchema::reals(&["t_over_T", "S_fock", "S_coherent"]));
    for (i, time) in times.iter().enumerate() {
        t.push_reals([
            ctx.t_over_period(*time),
            series_scalar(&runs[0], "S_ent")[i],
            series_scalar(&runs[1], "S_ent")[i],
        ]);
    }
    ctx.table("fig9_entropy", t);
    Ok(())
}
