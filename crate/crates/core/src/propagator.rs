//! Time-dependent Schrödinger propagation with norm, leakage and step-size
//! convergence checks.
//!
//! Each step is taken in the interaction picture of the Hamiltonian's
//! constant diagonal part (when it has one), so the fast free rotation of the
//! cavity, and in the lab frame the qubit carrier, are integrated exactly.
//! The remaining generator is stepped with the fourth-order commutator-free
//! Magnus scheme
//!
//! ```text
//! U(t + h, t) ≈ exp(−ih(α₁H₁ + α₂H₂)) · exp(−ih(α₂H₁ + α₁H₂)),
//! H_j = H(t + c_j h),  c₁,₂ = 1/2 ∓ √3/6,  α₁,₂ = (3 ∓ 2√3)/12,
//! ```
//!
//! with every exponential applied through [`expm_action`].

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{BoostError, Result};
use crate::linalg::{distance, expm_action, norm, C64, I, ZERO};
use crate::observables::{ObservableSeries, Observer};
use crate::state::QuantumState;

/// Provider of a time-dependent Hermitian Hamiltonian.
///
/// `H(t) = diag(d) + V(t)` where `d` is the optional constant diagonal
/// returned by [`static_diagonal`](Hamiltonian::static_diagonal).
pub trait Hamiltonian: Sync {
    fn dim(&self) -> usize;

    fn static_diagonal(&self) -> Option<&[f64]> {
        None
    }

    /// Overwrites `out` with `V(t) psi`.
    fn apply_dynamic(&self, t: f64, psi: &[C64], out: &mut [C64]);

    /// Upper bound on `||V(t)||`.
    fn dynamic_norm_bound(&self, t: f64) -> f64;

    /// Full `H(t)` as a dense matrix.
    fn matrix(&self, t: f64) -> DMatrix<C64>;
}

/// Adapter for an arbitrary `t -> H(t)` closure.
pub struct DenseHamiltonian<F> {
    dim: usize,
    build: F,
}

impl<F> DenseHamiltonian<F>
where
    F: Fn(f64) -> DMatrix<C64> + Sync,
{
    pub fn new(dim: usize, build: F) -> Self {
        DenseHamiltonian { dim, build }
    }
}

impl<F> Hamiltonian for DenseHamiltonian<F>
where
    F: Fn(f64) -> DMatrix<C64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_dynamic(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        let r = (self.build)(t) * DVector::from_column_slice(psi);
        out.copy_from_slice(r.as_slice());
    }

    fn dynamic_norm_bound(&self, t: f64) -> f64 {
        let m = (self.build)(t);
        (0..m.ncols())
            .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn matrix(&self, t: f64) -> DMatrix<C64> {
        (self.build)(t)
    }
}

/// Integrator identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Fourth-order commutator-free Magnus, two exponentials per step.
    Magnus4,
    /// Second-order exponential midpoint rule.
    Midpoint,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolutionConfig {
    /// Maximum step, in the same time units as the Hamiltonian.
    pub dt_max: f64,
    /// Allowed norm drift; the dt-halving certificate must agree to 10×.
    pub tol_norm: f64,
    /// Output times, strictly increasing.
    pub sample_times: Vec<f64>,
    pub scheme: Scheme,
    /// Verify step-size convergence by re-running with dt/2.
    pub certify: bool,
    /// Refinement stops with an error below this step.
    pub dt_floor: f64,
    /// Maximum allowed Σ_{n ≥ n_max−2} P(n) at sample times.
    pub leakage_threshold: Option<f64>,
}

impl EvolutionConfig {
    pub fn new(dt_max: f64, sample_times: Vec<f64>) -> Self {
        EvolutionConfig {
            dt_max,
            tol_norm: 1e-9,
            sample_times,
            scheme: Scheme::Magnus4,
            certify: false,
            dt_floor: dt_max * 1e-3,
            leakage_threshold: Some(1e-8),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(BoostError::InvalidParameter("dt_max must be positive".into()));
        }
        if !(self.tol_norm >= 0.0) {
            return Err(BoostError::InvalidParameter("tol_norm must be non-negative".into()));
        }
        if self.sample_times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(BoostError::InvalidParameter(
                "sample_times must be strictly increasing".into(),
            ));
        }
        if self.sample_times.iter().any(|t| !t.is_finite()) {
            return Err(BoostError::InvalidParameter("sample_times must be finite".into()));
        }
        Ok(())
    }
}

/// Evidence attached to every propagation result.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Certificate {
    /// Step actually used for the returned result.
    pub dt: f64,
    /// `||ψ_dt(t1) − ψ_{dt/2}(t1)||`, when certification ran.
    pub halving_difference: Option<f64>,
    /// Largest |‖ψ‖ − 1| seen at sample times.
    pub max_norm_drift: f64,
    /// Largest tail mass seen at sample times.
    pub max_leakage: f64,
    pub steps: usize,
}

const C1: f64 = 0.5 - 0.288_675_134_594_812_9; // 1/2 − √3/6
const C2: f64 = 0.5 + 0.288_675_134_594_812_9;
const A1: f64 = (3.0 - 2.0 * 1.732_050_807_568_877_2) / 12.0;
const A2: f64 = (3.0 + 2.0 * 1.732_050_807_568_877_2) / 12.0;

struct Stepper<'a, H: Hamiltonian + ?Sized> {
    h: &'a H,
    scheme: Scheme,
    diag: Option<&'a [f64]>,
    scratch: Vec<C64>,
    phase_a: Vec<C64>,
    phase_b: Vec<C64>,
}

impl<'a, H: Hamiltonian + ?Sized> Stepper<'a, H> {
    fn new(h: &'a H, scheme: Scheme) -> Self {
        let n = h.dim();
        Stepper {
            h,
            scheme,
            diag: h.static_diagonal(),
            scratch: vec![ZERO; 2 * n],
            phase_a: vec![ZERO; n],
            phase_b: vec![ZERO; n],
        }
    }

    fn fill_phase(diag: Option<&[f64]>, tau: f64, out: &mut [C64]) {
        // e^{−i d tau}
        match diag {
            Some(d) => out
                .iter_mut()
                .zip(d)
                .for_each(|(z, di)| *z = C64::from_polar(1.0, -di * tau)),
            None => out.iter_mut().for_each(|z| *z = C64::from(1.0)),
        }
    }

    /// One exponential exp(−ih(wa·H_I(t+ca·h) + wb·H_I(t+cb·h))) applied to psi,
    /// in the interaction picture referenced to the step start `t`.
    #[allow(clippy::too_many_arguments)]
    fn exp_pair(&mut self, t: f64, h: f64, ca: f64, wa: f64, cb: f64, wb: f64, psi: &mut [C64]) {
        let n = psi.len();
        let ham = self.h;
        let diag = self.diag;
        Self::fill_phase(diag, ca * h, &mut self.phase_a);
        Self::fill_phase(diag, cb * h, &mut self.phase_b);
        let (ta, tb) = (t + ca * h, t + cb * h);
        let bound = h * (wa.abs() * ham.dynamic_norm_bound(ta) + wb.abs() * ham.dynamic_norm_bound(tb));
        let (phase_a, phase_b) = (&self.phase_a, &self.phase_b);
        let (buf, tmp) = self.scratch.split_at_mut(n);
        let mut apply = |x: &[C64], y: &mut [C64]| {
            y.iter_mut().for_each(|z| *z = ZERO);
            for (p, w, tt) in [(phase_a, wa, ta), (phase_b, wb, tb)] {
                if w == 0.0 {
                    continue;
                }
                // e^{iD tau} V(t) e^{−iD tau} x
                for ((b, xi), pi) in buf.iter_mut().zip(x).zip(p.iter()) {
                    *b = xi * pi;
                }
                ham.apply_dynamic(tt, buf, tmp);
                let coef = -I * (h * w);
                for ((yi, ti), pi) in y.iter_mut().zip(tmp.iter()).zip(p.iter()) {
                    *yi += coef * ti * pi.conj();
                }
            }
        };
        expm_action(&mut apply, bound, psi);
    }

    fn step(&mut self, t: f64, h: f64, psi: &mut [C64]) {
        match self.scheme {
            Scheme::Magnus4 => {
                self.exp_pair(t, h, C1, A2, C2, A1, psi);
                self.exp_pair(t, h, C1, A1, C2, A2, psi);
            }
            Scheme::Midpoint => self.exp_pair(t, h, 0.5, 1.0, 0.5, 0.0, psi),
        }
        if let Some(d) = self.diag {
            // back to the Schrödinger picture at t + h
            for (z, di) in psi.iter_mut().zip(d) {
                *z *= C64::from_polar(1.0, -di * h);
            }
        }
    }

    /// Advances psi from `t0` to `t1` with steps no longer than `dt`.
    fn advance(&mut self, t0: f64, t1: f64, dt: f64, psi: &mut [C64]) -> usize {
        let span = t1 - t0;
        if span <= 0.0 {
            return 0;
        }
        let steps = (span / dt - 1e-9).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for k in 0..steps {
            self.step(t0 + k as f64 * h, h, psi);
        }
        steps
    }
}

fn check_input<H: Hamiltonian + ?Sized>(psi0: &QuantumState, h: &H, cfg: &EvolutionConfig) -> Result<()> {
    cfg.validate()?;
    if psi0.dim() != h.dim() {
        return Err(BoostError::InvalidParameter(format!(
            "state dimension {} does not match Hamiltonian dimension {}",
            psi0.dim(),
            h.dim()
        )));
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(BoostError::InvalidParameter("initial state is not normalized".into()));
    }
    Ok(())
}

fn guard(psi: &[C64], t: f64, cfg: &EvolutionConfig, cert: &mut Certificate) -> Result<()> {
    let drift = (norm(psi) - 1.0).abs();
    cert.max_norm_drift = cert.max_norm_drift.max(drift);
    if drift > cfg.tol_norm {
        return Err(BoostError::NonConvergence(format!(
            "norm drift {drift:.3e} exceeds {:.1e} at t = {t:.6}",
            cfg.tol_norm
        )));
    }
    let probe = QuantumState::from_raw(psi.to_vec(), t);
    let tail = probe.tail_mass();
    cert.max_leakage = cert.max_leakage.max(tail);
    if let Some(threshold) = cfg.leakage_threshold {
        if tail > threshold {
            return Err(BoostError::Leakage {
                tail,
                threshold,
                time: t,
            });
        }
    }
    Ok(())
}

/// Runs the sampled evolution once at a fixed `dt`, calling `visit` at each
/// sample time.
fn run_fixed<H, V>(
    psi0: &QuantumState,
    h: &H,
    t0: f64,
    checkpoints: &[f64],
    dt: f64,
    cfg: &EvolutionConfig,
    mut visit: V,
) -> Result<(Vec<C64>, Certificate)>
where
    H: Hamiltonian + ?Sized,
    V: FnMut(f64, &[C64]) -> Result<()>,
{
    let mut stepper = Stepper::new(h, cfg.scheme);
    let mut psi = psi0.amps().to_vec();
    let mut cert = Certificate {
        dt,
        ..Default::default()
    };
    let mut t = t0;
    for &ts in checkpoints {
        cert.steps += stepper.advance(t, ts, dt, &mut psi);
        t = ts.max(t);
        guard(&psi, t, cfg, &mut cert)?;
        visit(t, &psi)?;
    }
    Ok((psi, cert))
}

/// Runs `attempt(dt)` and, when certification is on, compares against
/// `final(dt/2)` while halving until the two agree to 10 × tol_norm.
fn certified<T, A, F>(cfg: &EvolutionConfig, mut attempt: A, mut final_state: F) -> Result<(T, Vec<C64>, Certificate)>
where
    A: FnMut(f64) -> Result<(T, Vec<C64>, Certificate)>,
    F: FnMut(f64) -> Result<Vec<C64>>,
{
    let mut dt = cfg.dt_max;
    loop {
        let (out, psi, mut cert) = attempt(dt)?;
        if !cfg.certify {
            return Ok((out, psi, cert));
        }
        let fine = final_state(dt / 2.0)?;
        let diff = distance(&psi, &fine);
        cert.halving_difference = Some(diff);
        if diff < 10.0 * cfg.tol_norm {
            return Ok((out, psi, cert));
        }
        dt /= 2.0;
        if dt < cfg.dt_floor {
            return Err(BoostError::NonConvergence(format!(
                "dt-halving difference {diff:.3e} still above {:.1e} at step floor {:.3e}",
                10.0 * cfg.tol_norm,
                cfg.dt_floor
            )));
        }
    }
}

/// Result of [`evolve`].
#[derive(Clone, Debug)]
pub struct Evolution {
    pub state: QuantumState,
    pub certificate: Certificate,
}

/// Propagates `psi0` from `t0` to `t1`. Intermediate `cfg.sample_times`
/// inside (t0, t1) are used as guard checkpoints.
pub fn evolve<H: Hamiltonian + ?Sized>(
    psi0: &QuantumState,
    h: &H,
    t0: f64,
    t1: f64,
    cfg: &EvolutionConfig,
) -> Result<Evolution> {
    check_input(psi0, h, cfg)?;
    if t1 < t0 {
        return Err(BoostError::InvalidParameter("t1 must not precede t0".into()));
    }
    let mut checkpoints: Vec<f64> = cfg.sample_times.iter().copied().filter(|&s| s > t0 && s < t1).collect();
    checkpoints.push(t1);

    let (_, psi, certificate) = certified(
        cfg,
        |dt| {
            let (psi, cert) = run_fixed(psi0, h, t0, &checkpoints, dt, cfg, |_, _| Ok(()))?;
            Ok(((), psi, cert))
        },
        |dt| Ok(run_fixed(psi0, h, t0, &checkpoints, dt, cfg, |_, _| Ok(()))?.0),
    )?;
    Ok(Evolution {
        state: QuantumState::from_raw(psi, t1),
        certificate,
    })
}

/// Result of [`evolve_observed`].
#[derive(Clone, Debug)]
pub struct ObservedRun {
    pub series: ObservableSeries,
    pub final_state: QuantumState,
    pub certificate: Certificate,
}

/// Propagates from `psi0.time()` through every sample time, applying each
/// observer at each sample.
pub fn evolve_observed<H: Hamiltonian + ?Sized>(
    psi0: &QuantumState,
    h: &H,
    cfg: &EvolutionConfig,
    observers: &[Observer],
) -> Result<ObservedRun> {
    check_input(psi0, h, cfg)?;
    let t0 = psi0.time();
    if cfg.sample_times.first().is_some_and(|&s| s < t0) {
        return Err(BoostError::InvalidParameter(
            "sample times must not precede the initial state time".into(),
        ));
    }
    let checkpoints = cfg.sample_times.clone();
    let (series, psi, certificate) = certified(
        cfg,
        |dt| {
            let mut series = ObservableSeries::new(observers);
            let (psi, cert) = run_fixed(psi0, h, t0, &checkpoints, dt, cfg, |t, amps| {
                let state = QuantumState::from_raw(amps.to_vec(), t);
                series.record(t, &state)
            })?;
            series.finish();
            Ok((series, psi, cert))
        },
        |dt| Ok(run_fixed(psi0, h, t0, &checkpoints, dt, cfg, |_, _| Ok(()))?.0),
    )?;
    let t_end = checkpoints.last().copied().unwrap_or(t0);
    Ok(ObservedRun {
        series,
        final_state: QuantumState::from_raw(psi, t_end),
        certificate,
    })
}

/// States at every sample time, plus the certificate of the run.
#[derive(Clone, Debug)]
pub struct Snapshots {
    pub states: Vec<QuantumState>,
    pub certificate: Certificate,
}

/// Like [`evolve_observed`] but keeps the full state at each sample time.
pub fn evolve_snapshots<H: Hamiltonian + ?Sized>(
    psi0: &QuantumState,
    h: &H,
    cfg: &EvolutionConfig,
) -> Result<Snapshots> {
    check_input(psi0, h, cfg)?;
    let t0 = psi0.time();
    if cfg.sample_times.first().is_some_and(|&s| s < t0) {
        return Err(BoostError::InvalidParameter(
            "sample times must not precede the initial state time".into(),
        ));
    }
    let checkpoints = cfg.sample_times.clone();
    let (states, _, certificate) = certified(
        cfg,
        |dt| {
            let mut states = Vec::with_capacity(checkpoints.len());
            let (psi, cert) = run_fixed(psi0, h, t0, &checkpoints, dt, cfg, |t, amps| {
                states.push(QuantumState::from_raw(amps.to_vec(), t));
                Ok(())
            })?;
            Ok((states, psi, cert))
        },
        |dt| Ok(run_fixed(psi0, h, t0, &checkpoints, dt, cfg, |_, _| Ok(()))?.0),
    )?;
    Ok(Snapshots { states, certificate })
}
