//! Diagnostics extracted from cavity ⊗ spin-1/2 states.

use nalgebra::{DMatrix, DVector, Matrix2};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BoostError, Result};
use crate::linalg::{hermiticity_defect, C64, I, ZERO};
use crate::model::{drive_field, ModelParams};
use crate::state::{cat_amplitudes, coherent_overlaps, QuantumState};

/// Reduced density matrix of the cavity.
#[derive(Clone, Debug)]
pub struct CavityDensityMatrix {
    rho: DMatrix<C64>,
}

impl CavityDensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: DMatrix<C64>) -> Result<Self> {
        if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
            return Err(BoostError::InvalidDensityMatrix("not square".into()));
        }
        let herm = hermiticity_defect(&rho);
        if herm > 1e-10 {
            return Err(BoostError::InvalidDensityMatrix(format!(
                "Hermiticity defect {herm:.3e}"
            )));
        }
        let trace = rho.trace();
        if (trace - C64::from(1.0)).norm() > 1e-10 {
            return Err(BoostError::InvalidDensityMatrix(format!("trace {trace}")));
        }
        // λ_min ≥ −10⁻⁹ iff ρ + 10⁻⁹·1 admits a Cholesky factor.
        let shifted = &rho + DMatrix::<C64>::identity(rho.nrows(), rho.ncols()) * C64::from(PSD_SLACK);
        if shifted.cholesky().is_none() {
            let lowest = hermitian_eigenvalues(&rho)?.into_iter().fold(f64::INFINITY, f64::min);
            return Err(BoostError::InvalidDensityMatrix(format!("eigenvalue {lowest:.3e}")));
        }
        Ok(CavityDensityMatrix { rho })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn n_max(&self) -> usize {
        self.rho.nrows() - 1
    }

    /// Eigenvalues in decreasing order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut ev = hermitian_eigenvalues(&self.rho)?;
        ev.sort_by(|a, b| b.total_cmp(a));
        Ok(ev)
    }
}

const PSD_SLACK: f64 = 1e-9;

/// The default-epsilon solver can return −inf on nearly diagonal input.
fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    let ev = m
        .clone()
        .try_symmetric_eigen(1e-14, 0)
        .ok_or_else(|| BoostError::InvalidDensityMatrix("eigen solver failed".into()))?
        .eigenvalues;
    if ev.iter().any(|x| !x.is_finite()) {
        return Err(BoostError::InvalidDensityMatrix("non-finite eigenvalue".into()));
    }
    Ok(ev.iter().copied().collect())
}

/// Cavity vector ψ(·, m) for spin index m.
fn cavity_component(psi: &QuantumState, m: usize) -> Vec<C64> {
    (0..=psi.n_max()).map(|n| psi.amp(n, m)).collect()
}

pub fn reduced_cavity(psi: &QuantumState) -> Result<CavityDensityMatrix> {
    let d = psi.n_max() + 1;
    let mut rho = DMatrix::<C64>::zeros(d, d);
    for m in 0..2 {
        let u = DVector::from_vec(cavity_component(psi, m));
        rho += &u * u.adjoint();
    }
    CavityDensityMatrix::new(rho)
}

/// 2×2 reduced density matrix of the spin, basis (up, down).
pub fn reduced_spin(psi: &QuantumState) -> Matrix2<C64> {
    let mut rho = Matrix2::zeros();
    for n in 0..=psi.n_max() {
        let a = [psi.amp(n, 0), psi.amp(n, 1)];
        for i in 0..2 {
            for j in 0..2 {
                rho[(i, j)] += a[i] * a[j].conj();
            }
        }
    }
    rho
}

/// P(n) from a reduced density matrix.
pub fn fock_distribution(rho: &CavityDensityMatrix) -> Vec<f64> {
    rho.rho.diagonal().iter().map(|z| z.re).collect()
}

/// P(n) straight from the state vector.
pub fn occupation(psi: &QuantumState) -> Vec<f64> {
    (0..=psi.n_max())
        .map(|n| psi.amp(n, 0).norm_sqr() + psi.amp(n, 1).norm_sqr())
        .collect()
}

pub fn mean_occupation(p: &[f64]) -> f64 {
    p.iter().enumerate().map(|(n, x)| n as f64 * x).sum()
}

/// 1 / Σ P(n)²
pub fn participation_ratio(p: &[f64]) -> f64 {
    1.0 / p.iter().map(|x| x * x).sum::<f64>()
}

/// Square grid of complex amplitudes α = re + i·im.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub half_width: f64,
    pub points: usize,
}

impl GridSpec {
    /// 201 × 201 points over [−√n_max, √n_max]².
    pub fn for_truncation(n_max: usize) -> Self {
        GridSpec {
            half_width: (n_max as f64).sqrt(),
            points: 201,
        }
    }

    pub fn axis(&self) -> Vec<f64> {
        let step = self.step();
        (0..self.points).map(|k| -self.half_width + k as f64 * step).collect()
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }
}

/// Husimi Q on a grid. `q[i][j]` is Q at α = re[j] + i·im[i].
#[derive(Clone, Debug, Serialize)]
pub struct QGrid {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub q: Vec<Vec<f64>>,
}

impl QGrid {
    /// Riemann-sum approximation of ∫Q d²α.
    pub fn integral(&self) -> f64 {
        let dx = self.re[1] - self.re[0];
        let dy = self.im[1] - self.im[0];
        self.q.iter().flatten().sum::<f64>() * dx * dy
    }

    pub fn min(&self) -> f64 {
        self.q.iter().flatten().cloned().fold(f64::INFINITY, f64::min)
    }

    /// (α, Q) at the grid maximum.
    pub fn argmax(&self) -> (C64, f64) {
        let mut best = (ZERO, f64::NEG_INFINITY);
        for (i, row) in self.q.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best.1 {
                    best = (C64::new(self.re[j], self.im[i]), v);
                }
            }
        }
        best
    }
}

/// Q(α) = ⟨α|ρ|α⟩/π.
pub fn husimi_q(rho: &CavityDensityMatrix, grid: GridSpec) -> Result<QGrid> {
    if grid.points < 2 || !(grid.half_width > 0.0) {
        return Err(BoostError::InvalidParameter(
            "Q grid needs >= 2 points and positive width".into(),
        ));
    }
    let n_max = rho.n_max();
    let axis = grid.axis();
    let q = axis
        .par_iter()
        .map(|&y| {
            axis.iter()
                .map(|&x| {
                    let c = DVector::from_vec(coherent_overlaps(C64::new(x, y), n_max));
                    let v = &rho.rho * &c;
                    (c.dotc(&v).re / std::f64::consts::PI).max(0.0)
                })
                .collect()
        })
        .collect();
    Ok(QGrid {
        re: axis.clone(),
        im: axis,
        q,
    })
}

/// Q averaged over the phase of α, as a function of x = |α|²:
/// Q̄(x) = (1/π) Σ P(n) e^{−x} xⁿ/n!.
pub fn radial_q(p: &[f64], x: f64) -> f64 {
    if x <= 0.0 {
        return p[0] / std::f64::consts::PI;
    }
    let lnx = x.ln();
    let mut lnfact = 0.0;
    let mut s = 0.0;
    for (n, pn) in p.iter().enumerate() {
        if n > 0 {
            lnfact += (n as f64).ln();
        }
        s += pn * (n as f64 * lnx - x - lnfact).exp();
    }
    s / std::f64::consts::PI
}

/// |α|² at which the phase-averaged Q function peaks.
pub fn ridge_radius_sq(p: &[f64]) -> f64 {
    let hi = (p.len() - 1) as f64;
    let f = |x: f64| radial_q(p, x);
    let n = 512;
    let (k, _) = (0..=n)
        .map(|k| (k, f(hi * k as f64 / n as f64)))
        .fold((0, f64::NEG_INFINITY), |b, (k, v)| if v > b.1 { (k, v) } else { b });
    let step = hi / n as f64;
    let lo = (k as f64 - 1.0).max(0.0) * step;
    let up = ((k + 1) as f64 * step).min(hi);
    golden_max(f, lo, up, 1e-10).0
}

/// Von Neumann entropy of the reduced spin, in nats.
pub fn entanglement_entropy(psi: &QuantumState) -> f64 {
    let rho = reduced_spin(psi);
    let a = rho[(0, 0)].re;
    let d = rho[(1, 1)].re;
    let b = rho[(0, 1)].norm();
    let half = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    [half + r, half - r]
        .iter()
        .filter(|&&l| l > 1e-300)
        .map(|&l| -l * l.ln())
        .sum::<f64>()
        .clamp(0.0, std::f64::consts::LN_2)
}

/// ⟨â⟩
pub fn expect_annihilation(psi: &QuantumState) -> C64 {
    let mut s = ZERO;
    for n in 1..=psi.n_max() {
        let sq = (n as f64).sqrt();
        for m in 0..2 {
            s += psi.amp(n - 1, m).conj() * psi.amp(n, m) * sq;
        }
    }
    s
}

/// θ₂ = −arg⟨â⟩ in (−π, π].
pub fn cavity_phase(psi: &QuantumState) -> Result<f64> {
    let a = expect_annihilation(psi);
    if a.norm() < 1e-6 {
        return Err(BoostError::UndefinedPhase(a.norm()));
    }
    Ok(-a.arg())
}

/// Nearest-branch continuation, in place.
pub fn unwrap_phases(phases: &mut [f64]) {
    use std::f64::consts::TAU;
    for k in 1..phases.len() {
        let prev = phases[k - 1];
        let mut v = phases[k];
        v -= TAU * ((v - prev) / TAU).round();
        phases[k] = v;
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// ⟨cat(α)|ρ|cat(α)⟩ with the cat normalized on the truncated space.
pub fn cat_fidelity(rho: &CavityDensityMatrix, alpha: f64) -> f64 {
    let mut c = DVector::from_vec(cat_amplitudes(alpha, rho.n_max()));
    let nrm = c.norm();
    c /= C64::from(nrm);
    c.dotc(&(&rho.rho * &c)).re
}

/// max over α in `alpha_range` (clipped to α ≥ 0 and to the truncation
/// mass bound |α|² + 6|α| ≤ n_max) of the cat fidelity. Returns (f_max, α*).
pub fn cat_fidelity_max(rho: &CavityDensityMatrix, alpha_range: (f64, f64)) -> Result<(f64, f64)> {
    let n_max = rho.n_max() as f64;
    let bound = -3.0 + (9.0 + n_max).sqrt();
    let lo = alpha_range.0.max(0.0);
    let hi = alpha_range.1.min(bound);
    if !(lo <= hi) || !lo.is_finite() {
        return Err(BoostError::InvalidParameter(format!(
            "empty cat search range [{}, {}]",
            alpha_range.0, alpha_range.1
        )));
    }
    let f = |a: f64| cat_fidelity(rho, a);
    if hi - lo < 1e-12 {
        return Ok((f(lo), lo));
    }
    let n = 64;
    let step = (hi - lo) / (n - 1) as f64;
    let (k, _) = (0..n)
        .map(|k| (k, f(lo + k as f64 * step)))
        .fold((0, f64::NEG_INFINITY), |b, (k, v)| if v > b.1 { (k, v) } else { b });
    let a = lo + (k as f64 - 1.0).max(0.0) * step;
    let b = (lo + (k + 1) as f64 * step).min(hi);
    let (x, fx) = golden_max(f, a, b, 1e-9);
    // edges are not reachable by the interior search
    let best = [(f(lo), lo), (f(hi), hi), (fx, x)]
        .into_iter()
        .fold((f64::NEG_INFINITY, 0.0), |acc, c| if c.0 > acc.0 { c } else { acc });
    Ok((best.0.min(1.0), best.1))
}

/// M = ⟨B̂·S⟩/√⟨B̂²⟩ with the cavity-operator-valued field
/// B̂ = (b_m − b_d sinθ₁ − (b_0/2)(â+â†), −(b_0/2)i(â−â†), b_d cosθ₁).
pub fn alignment_metric(psi: &QuantumState, theta1: f64, p: &ModelParams) -> f64 {
    let d = psi.n_max() + 1;
    let bc = drive_field(theta1, p);
    let half = 0.5 * p.b_0;
    let u = [cavity_component(psi, 0), cavity_component(psi, 1)];

    // B̂_x u and B̂_y u for each spin component
    let apply = |v: &[C64]| -> (Vec<C64>, Vec<C64>) {
        let mut bx = vec![ZERO; d];
        let mut by = vec![ZERO; d];
        for n in 0..d {
            let a_v = if n + 1 < d {
                v[n + 1] * ((n + 1) as f64).sqrt()
            } else {
                ZERO
            };
            let ad_v = if n > 0 { v[n - 1] * (n as f64).sqrt() } else { ZERO };
            bx[n] = v[n] * bc.x - (a_v + ad_v) * half;
            by[n] = -(a_v - ad_v) * I * half;
        }
        (bx, by)
    };
    let applied = [apply(&u[0]), apply(&u[1])];
    let dot = |a: &[C64], b: &[C64]| -> C64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum() };

    let sx = [[ZERO, C64::from(0.5)], [C64::from(0.5), ZERO]];
    let sy = [[ZERO, -I * 0.5], [I * 0.5, ZERO]];
    let sz = [[C64::from(0.5), ZERO], [ZERO, C64::from(-0.5)]];
    let mut bs = ZERO;
    for i in 0..2 {
        for j in 0..2 {
            bs += sx[i][j] * dot(&u[i], &applied[j].0);
            bs += sy[i][j] * dot(&u[i], &applied[j].1);
            bs += sz[i][j] * dot(&u[i], &u[j]) * bc.z;
        }
    }
    let b2: f64 = (0..2)
        .map(|m| {
            let nx: f64 = applied[m].0.iter().map(|z| z.norm_sqr()).sum();
            let ny: f64 = applied[m].1.iter().map(|z| z.norm_sqr()).sum();
            let nz: f64 = u[m].iter().map(|z| z.norm_sqr()).sum::<f64>() * bc.z * bc.z;
            nx + ny + nz
        })
        .sum();
    if b2 <= 0.0 {
        return 0.0;
    }
    bs.re / b2.sqrt()
}

/// Observable sampled by [`crate::propagator::evolve_observed`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Observer {
    /// "P(n)", one row of n_max + 1 values per sample.
    FockDistribution,
    /// "P(n,m)", spin-resolved rows of 2(n_max + 1) values in basis order.
    SpinResolvedDistribution,
    /// "mean_n"
    MeanOccupation,
    /// "S_ent"
    Entropy,
    /// "PR"
    ParticipationRatio,
    /// "theta2", unwrapped across samples.
    CavityPhase,
    /// "M", for the drive phase at the sample time.
    Alignment(ModelParams),
    /// "cat_infidelity" (1 − f_max) and "cat_alpha", searched over [0, alpha_max].
    CatInfidelity { alpha_max: f64 },
}

impl Observer {
    pub fn channel_names(&self) -> &'static [&'static str] {
        match self {
            Observer::FockDistribution => &["P(n)"],
            Observer::SpinResolvedDistribution => &["P(n,m)"],
            Observer::MeanOccupation => &["mean_n"],
            Observer::Entropy => &["S_ent"],
            Observer::ParticipationRatio => &["PR"],
            Observer::CavityPhase => &["theta2"],
            Observer::Alignment(_) => &["M"],
            Observer::CatInfidelity { .. } => &["cat_infidelity", "cat_alpha"],
        }
    }

    fn measure(&self, psi: &QuantumState) -> Result<Vec<ChannelValue>> {
        Ok(match self {
            Observer::FockDistribution => vec![ChannelValue::Vector(occupation(psi))],
            Observer::SpinResolvedDistribution => {
                vec![ChannelValue::Vector(psi.amps().iter().map(|z| z.norm_sqr()).collect())]
            }
            Observer::MeanOccupation => vec![ChannelValue::Scalar(mean_occupation(&occupation(psi)))],
            Observer::Entropy => vec![ChannelValue::Scalar(entanglement_entropy(psi))],
            Observer::ParticipationRatio => vec![ChannelValue::Scalar(participation_ratio(&occupation(psi)))],
            Observer::CavityPhase => vec![ChannelValue::Scalar(cavity_phase(psi)?)],
            Observer::Alignment(p) => vec![ChannelValue::Scalar(alignment_metric(psi, p.theta1(psi.time()), p))],
            Observer::CatInfidelity { alpha_max } => {
                let rho = reduced_cavity(psi)?;
                let (f, a) = cat_fidelity_max(&rho, (0.0, *alpha_max))?;
                vec![ChannelValue::Scalar(1.0 - f), ChannelValue::Scalar(a)]
            }
        })
    }
}

enum ChannelValue {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ChannelData {
    Scalar(Vec<f64>),
    Vector(Vec<Vec<f64>>),
}

impl ChannelData {
    pub fn len(&self) -> usize {
        match self {
            ChannelData::Scalar(v) => v.len(),
            ChannelData::Vector(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Channel {
    pub name: String,
    pub data: ChannelData,
}

/// Sample times and one named channel per observable output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub channels: Vec<Channel>,
    #[serde(skip)]
    observers: Vec<Observer>,
}

impl ObservableSeries {
    pub fn new(observers: &[Observer]) -> Self {
        let channels = observers
            .iter()
            .flat_map(|o| {
                o.channel_names().iter().map(move |name| Channel {
                    name: name.to_string(),
                    data: match o {
                        Observer::FockDistribution | Observer::SpinResolvedDistribution => {
                            ChannelData::Vector(Vec::new())
                        }
                        _ => ChannelData::Scalar(Vec::new()),
                    },
                })
            })
            .collect();
        ObservableSeries {
            times: Vec::new(),
            channels,
            observers: observers.to_vec(),
        }
    }

    /// Applies every observer to `psi` and appends the results.
    pub fn record(&mut self, t: f64, psi: &QuantumState) -> Result<()> {
        let mut values = Vec::with_capacity(self.channels.len());
        for o in &self.observers {
            values.extend(o.measure(psi)?);
        }
        for (ch, v) in self.channels.iter_mut().zip(values) {
            match (&mut ch.data, v) {
                (ChannelData::Scalar(s), ChannelValue::Scalar(x)) => s.push(x),
                (ChannelData::Vector(s), ChannelValue::Vector(x)) => s.push(x),
                _ => unreachable!("observer produced a value of the wrong shape"),
            }
        }
        self.times.push(t);
        Ok(())
    }

    /// Unwraps phase channels. Called once after the last sample.
    pub fn finish(&mut self) {
        for ch in &mut self.channels {
            if ch.name == "theta2" {
                if let ChannelData::Scalar(v) = &mut ch.data {
                    unwrap_phases(v);
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn channel(&self, name: &str) -> Option<&ChannelData> {
        self.channels.iter().find(|c| c.name == name).map(|c| &c.data)
    }

    pub fn scalar(&self, name: &str) -> Option<&[f64]> {
        match self.channel(name)? {
            ChannelData::Scalar(v) => Some(v),
            ChannelData::Vector(_) => None,
        }
    }

    pub fn vector(&self, name: &str) -> Option<&[Vec<f64>]> {
        match self.channel(name)? {
            ChannelData::Vector(v) => Some(v),
            ChannelData::Scalar(_) => None,
        }
    }
}
