//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::{LN_2, TAU};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use boost_core::config::{Experiment, ExperimentConfig, StateKind};
use boost_core::experiments::{aligned_coherent, predict_almost_periods, run_experiment, RunOptions};
use boost_core::linalg::{hermiticity_defect, C64};
use boost_core::model::hamiltonian_rotating;
use boost_core::observables::{husimi_q, reduced_cavity, GridSpec, Observer};
use boost_core::propagator::{evolve, evolve_observed, EvolutionConfig};
use boost_core::quasiperiodicity::{best_approx_check, continued_fraction, MAX_TERMS, REMAINDER_TOL};
use boost_core::semiclassics::{
    b_eff, chern_integral, delta_omega0_avg, field_jet, ndot_adiabatic, torus_average, TORUS_GRID,
};
use boost_core::state::{make_coherent, with_spin};
use boost_core::{DrivenHamiltonian, FieldVector, ModelParams, Result, SpinSign};
use nalgebra::DVector;

mod common;
use common::{dense_oracle, distance, fd_field, gap};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(checks: &[(bool, String)]) -> Outcome {
    Outcome {
        pass: checks.iter().all(|(ok, _)| *ok),
        detail: checks
            .iter()
            .map(|(ok, s)| format!("{s} [{}]", if *ok { "ok" } else { "miss" }))
            .collect::<Vec<_>>()
            .join("; "),
    }
}

fn preset() -> ExperimentConfig {
    ExperimentConfig::paper_fig1()
}

fn frequency_renormalization() -> Result<Outcome> {
    let p = ModelParams::paper_fig1();
    let d = delta_omega0_avg(10.0, &p)? / p.omega;
    Ok(outcome(&[(
        (d - -5.52e-2).abs() <= 0.05e-2,
        format!("[delta omega0]/omega = {d:.6e}, target -5.52e-2 +/- 5e-4"),
    )]))
}

fn almost_period_prediction() -> Result<Outcome> {
    let cfg = preset();
    let corrected = predict_almost_periods(&cfg, true)?;
    let bare = predict_almost_periods(&cfg, false)?;
    let ratio = format!("{:.2}", corrected.ratio);
    let prefix: Vec<u64> = corrected.coeffs.iter().take(4).copied().collect();
    let hs = corrected.hs();
    let bare_hs = bare.hs();
    Ok(outcome(&[
        (
            ratio == "1.71",
            format!("ratio {:.6} rounds to {ratio}", corrected.ratio),
        ),
        (prefix == [1, 1, 2, 2], format!("CF prefix {prefix:?}")),
        (hs == [1, 2, 3, 5, 7, 12], format!("h = {hs:?}")),
        (bare_hs.ends_with(&[8, 13]), format!("bare h = {bare_hs:?}")),
    ]))
}

fn chern_pump_quantization() -> Result<Outcome> {
    let p = ModelParams::paper_fig1();
    let c10 = chern_integral(TORUS_GRID, 10.0, &p)?;
    let c100 = chern_integral(TORUS_GRID, 100.0, &p)?;
    let pump = torus_average(TORUS_GRID, |a, b| ndot_adiabatic(a, b, 10.0, &p))?;
    let expected = p.drive_omega * c10.round() / TAU;
    Ok(outcome(&[
        (c10.round().abs() == 1.0, format!("C(n=10) = {c10:.8}")),
        (c100.round() == 0.0, format!("C(n=100) = {c100:.8}")),
        (
            (c10 - c10.round()).abs() < 1e-4 && (c100 - c100.round()).abs() < 1e-4,
            "integrals within 1e-4 of integers".into(),
        ),
        (
            (pump - expected).abs() < 1e-6,
            format!("<ndot> = {pump:.9}, Omega C/2pi = {expected:.9}"),
        ),
    ]))
}

fn quantum_boosting() -> Result<Outcome> {
    let cfg = preset();
    let p = &cfg.model;
    let t = p.drive_period();
    let times: Vec<f64> = (0..=16).map(|h| h as f64 * t).collect();
    let psi = cfg.initial_state.build(p)?;
    let h = DrivenHamiltonian::rotating(p)?;
    let run = evolve_observed(
        &psi,
        &h,
        &cfg.evolution_config(times),
        &[Observer::ParticipationRatio, Observer::MeanOccupation],
    )?;
    let pr = run.series.scalar("PR").unwrap();
    let n = run.series.scalar("mean_n").unwrap();
    let mut checks: Vec<(bool, String)> = [2usize, 5, 7, 12]
        .iter()
        .map(|&k| (pr[k] < 2.0, format!("PR({k}T) = {:.3}", pr[k])))
        .collect();
    checks.push((
        (n[12] - 22.0).abs() <= 1.0,
        format!("mean_n(12T) = {:.3}, target 22 +/- 1", n[12]),
    ));
    Ok(outcome(&checks))
}

fn read_columns(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn row_at(rows: &[Vec<f64>], t_over_period: f64) -> &Vec<f64> {
    rows.iter()
        .min_by(|a, b| (a[0] - t_over_period).abs().total_cmp(&(b[0] - t_over_period).abs()))
        .unwrap()
}

fn semiclassical_rephasing(dir: &Path) -> Result<Outcome> {
    let cfg = preset();
    run_experiment(
        Experiment::Fig3SemiclassicalEnsembles,
        &cfg,
        dir,
        &RunOptions::default(),
    )?;
    let (header, rows) = read_columns(&dir.join("fig3_variance.csv"));
    assert_eq!(header, ["t_over_T", "var_quasiperiodic", "var_periodic"]);
    let (v2, v12) = (row_at(&rows, 2.0)[1], row_at(&rows, 12.0)[1]);
    let periodic: Vec<(f64, f64)> = (1..=6).map(|k| (k as f64, row_at(&rows, 5.0 * k as f64)[2])).collect();
    let mx = periodic.iter().map(|p| p.0).sum::<f64>() / periodic.len() as f64;
    let my = periodic.iter().map(|p| p.1).sum::<f64>() / periodic.len() as f64;
    let slope = periodic.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / periodic.iter().map(|(x, _)| (x - mx).powi(2)).sum::<f64>();
    Ok(outcome(&[
        (v12 < v2, format!("var(12T) = {v12:.4} vs var(2T) = {v2:.4}")),
        (slope > 0.0, format!("periodic variance slope {slope:.3e} per 5T")),
    ]))
}

fn entanglement_and_alignment() -> Result<Outcome> {
    let cfg = preset();
    let p = &cfg.model;
    let t = p.drive_period();
    let fine: Vec<f64> = (0..=14 * 64).map(|k| k as f64 * t / 64.0).collect();
    let h = DrivenHamiltonian::rotating(p)?;
    let fock = cfg.initial_state.build_kind(StateKind::Fock, p)?;
    let coherent = aligned_coherent(p, 10.0, 0.0)?;
    let fock_run = evolve_observed(
        &fock,
        &h,
        &cfg.evolution_config(fine.clone()),
        &[Observer::Entropy, Observer::Alignment(p.clone())],
    )?;
    let coh_run = evolve_observed(&coherent, &h, &cfg.evolution_config(fine.clone()), &[Observer::Entropy])?;
    let s_fock = fock_run.series.scalar("S_ent").unwrap();
    let m = fock_run.series.scalar("M").unwrap();
    let s_coh = coh_run.series.scalar("S_ent").unwrap();
    let first = fine.iter().take_while(|&&x| x <= t * (1.0 + 1e-12)).count();
    let s_max = s_fock[..first].iter().copied().fold(0.0, f64::max);
    let s_coh_max = s_coh.iter().copied().fold(0.0, f64::max);
    let m_min = m.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    Ok(outcome(&[
        (
            s_max >= 0.95 * LN_2,
            format!("Fock max S_ent(first period) = {:.4} ln2", s_max / LN_2),
        ),
        (
            s_coh_max < 0.25 * LN_2,
            format!("coherent max S_ent(0..14T) = {:.4} ln2", s_coh_max / LN_2),
        ),
        (
            m_min >= 0.9 * p.spin,
            format!("Fock min |M|(0..14T) = {m_min:.4}, need >= {:.2}", 0.9 * p.spin),
        ),
    ]))
}

fn property_suites() -> Result<Outcome> {
    let cfg = preset();
    let p = &cfg.model;
    let t = p.drive_period();

    let herm = (0..32)
        .map(|k| hamiltonian_rotating(k as f64 * 0.37, p).map(|m| hermiticity_defect(&m)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let times: Vec<f64> = (0..=32).map(|k| k as f64 * t / 2.0).collect();
    let h = DrivenHamiltonian::rotating(p)?;
    let run = evolve_observed(
        &cfg.initial_state.build(p)?,
        &h,
        &cfg.evolution_config(times),
        &[Observer::FockDistribution],
    )?;
    let drift = run.certificate.max_norm_drift;
    let sum_err = run
        .series
        .vector("P(n)")
        .unwrap()
        .iter()
        .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let q = husimi_q(&reduced_cavity(&run.final_state)?, GridSpec::for_truncation(p.n_max))?;

    let mut fd = 0.0f64;
    for k in 0..100 {
        let x = k as f64;
        let (t1, t2) = ((x * 0.618_034).fract() * TAU, (x * 0.754_878).fract() * TAU);
        let n = 1.0 + 149.0 * (x * 0.569_840).fract();
        let jet = field_jet(t1, t2, n, p);
        fd = fd
            .max(gap(jet.d_theta1, fd_field(|s| b_eff(s, t2, n, p), t1, 1e-5)))
            .max(gap(jet.d_theta2, fd_field(|s| b_eff(t1, s, n, p), t2, 1e-5)))
            .max(gap(jet.d_n, fd_field(|s| b_eff(t1, t2, s, p), n, 1e-5)));
    }

    let small = ModelParams { n_max: 8, ..p.clone() };
    let psi = with_spin(
        &make_coherent(C64::new(1.0, 0.3), &small)?,
        FieldVector::new(1.0, 0.0, 0.0),
        SpinSign::Plus,
    )?;
    let mut ecfg = EvolutionConfig::new(t / 256.0, vec![t]);
    ecfg.certify = true;
    ecfg.leakage_threshold = None;
    let got = evolve(&psi, &DrivenHamiltonian::rotating(&small)?, 0.0, t, &ecfg)?.state;
    let oracle = distance(
        got.amps(),
        &dense_oracle(&DVector::from_column_slice(psi.amps()), &small, t, 1500),
    );

    let mut cf_ok = true;
    for beta in [
        predict_almost_periods(&cfg, true)?.ratio,
        p.drive_omega,
        2f64.sqrt(),
        std::f64::consts::E,
    ] {
        let cf = continued_fraction(beta, MAX_TERMS, REMAINDER_TOL)?;
        for n in 1..cf.convergents.len() {
            if cf.convergents[n].1 > 1_000_000 {
                break;
            }
            cf_ok &= best_approx_check(&cf, n)?;
        }
    }

    Ok(outcome(&[
        (drift < 1e-9, format!("norm drift {drift:.2e}")),
        (herm < 1e-12, format!("Hermiticity {herm:.2e}")),
        (sum_err < 1e-9, format!("|sum P(n) - 1| {sum_err:.2e}")),
        (
            q.min() >= 0.0 && (q.integral() - 1.0).abs() < 1e-3,
            format!("Q min {:.2e}, integral {:.6}", q.min(), q.integral()),
        ),
        (fd < 1e-6, format!("derivatives vs FD {fd:.2e}")),
        (oracle < 1e-6, format!("propagator vs dense oracle {oracle:.2e}")),
        (cf_ok, "CF best-approximation brute force".into()),
    ]))
}

fn lab_frame_equivalence(dir: &Path) -> Result<Outcome> {
    let mut cfg = preset();
    cfg.model.omega_q = Some(100.0 * cfg.model.omega);
    run_experiment(Experiment::Fig6Labframe, &cfg, dir, &RunOptions::default())?;
    let (header, rows) = read_columns(&dir.join("fig6_tv.csv"));
    assert_eq!(header[1], "tv");
    let (worst, at) = rows
        .iter()
        .map(|r| (r[1], r[0]))
        .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    Ok(outcome(&[(
        worst <= 0.05,
        format!("max TV {worst:.4} at t/T = {at:.3} over {} samples", rows.len()),
    )]))
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    type Check<'a> = (&'a str, Box<dyn Fn() -> Result<Outcome> + 'a>);
    let criteria: Vec<Check> = vec![
        ("frequency renormalization", Box::new(frequency_renormalization)),
        ("almost-period prediction", Box::new(almost_period_prediction)),
        ("Chern/pump quantization", Box::new(chern_pump_quantization)),
        ("quantum boosting", Box::new(quantum_boosting)),
        (
            "lab-frame equivalence",
            Box::new(|| lab_frame_equivalence(&dir.path().join("fig6"))),
        ),
        (
            "semiclassical rephasing statistics",
            Box::new(|| semiclassical_rephasing(&dir.path().join("fig3"))),
        ),
        ("entanglement and alignment", Box::new(entanglement_and_alignment)),
        ("property suites", Box::new(property_suites)),
    ];
    let total = criteria.len();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} [{}/{total}] {name}: {detail} ({:.1} s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", total - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
