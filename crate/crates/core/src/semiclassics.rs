//! Semiclassical pumping theory on the (θ₁, θ₂) torus.
//!
//! The cavity is replaced by a classical amplitude √n·e^{−iθ₂} and the spin
//! follows the effective field
//! `B_eff = (b_m − b_d sinθ₁ − b_0√n cosθ₂, −b_0√n sinθ₂, b_d cosθ₁)`
//! adiabatically. S is taken from `ModelParams::spin` and may be any
//! positive real here.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BoostError, Result};
use crate::model::{FieldVector, ModelParams};

/// Angles on the torus, stored in [0, 2π).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TorusPoint {
    pub theta1: f64,
    pub theta2: f64,
}

impl TorusPoint {
    pub fn new(theta1: f64, theta2: f64) -> Self {
        TorusPoint {
            theta1: theta1.rem_euclid(TAU),
            theta2: theta2.rem_euclid(TAU),
        }
    }
}

pub fn b_eff(theta1: f64, theta2: f64, n: f64, p: &ModelParams) -> FieldVector {
    let r = p.b_0 * n.max(0.0).sqrt();
    FieldVector::new(
        p.b_m - p.b_d * theta1.sin() - r * theta2.cos(),
        -r * theta2.sin(),
        p.b_d * theta1.cos(),
    )
}

/// B_eff and its partial derivatives at one point.
#[derive(Clone, Copy, Debug)]
pub struct FieldJet {
    pub b: FieldVector,
    pub d_theta1: FieldVector,
    pub d_theta2: FieldVector,
    /// ∂_n B_eff; infinite components at n = 0.
    pub d_n: FieldVector,
}

pub fn field_jet(theta1: f64, theta2: f64, n: f64, p: &ModelParams) -> FieldJet {
    let sn = n.max(0.0).sqrt();
    let (s1, c1) = theta1.sin_cos();
    let (s2, c2) = theta2.sin_cos();
    FieldJet {
        b: b_eff(theta1, theta2, n, p),
        d_theta1: FieldVector::new(-p.b_d * c1, 0.0, -p.b_d * s1),
        d_theta2: FieldVector::new(p.b_0 * sn * s2, -p.b_0 * sn * c2, 0.0),
        d_n: FieldVector::new(-p.b_0 * c2 / (2.0 * sn), -p.b_0 * s2 / (2.0 * sn), 0.0),
    }
}

/// ∂B̂ = (∂B − B̂(B̂·∂B))/|B|
pub fn unit_derivative(b: FieldVector, db: FieldVector) -> FieldVector {
    let r = b.norm();
    let u = b * (1.0 / r);
    (db - u * u.dot(&db)) * (1.0 / r)
}

fn nonsingular(b: FieldVector, theta1: f64, theta2: f64, n: f64) -> Result<f64> {
    let r = b.norm();
    if !(r >= 1e-9) {
        return Err(BoostError::SingularField {
            magnitude: r,
            theta1,
            theta2,
            n,
        });
    }
    Ok(r)
}

/// F = S·B̂·(∂_{θ₁}B̂ × ∂_{θ₂}B̂)
pub fn berry_curvature(theta1: f64, theta2: f64, n: f64, p: &ModelParams) -> Result<f64> {
    let j = field_jet(theta1, theta2, n, p);
    let r = nonsingular(j.b, theta1, theta2, n)?;
    let u = j.b * (1.0 / r);
    let d1 = unit_derivative(j.b, j.d_theta1);
    let d2 = unit_derivative(j.b, j.d_theta2);
    Ok(p.spin * u.dot(&d1.cross(&d2)))
}

/// ṅ = S·∂_{θ₂}|B_eff| + Ω·F
pub fn ndot_adiabatic(theta1: f64, theta2: f64, n: f64, p: &ModelParams) -> Result<f64> {
    let j = field_jet(theta1, theta2, n, p);
    let r = nonsingular(j.b, theta1, theta2, n)?;
    let d_abs = j.b.dot(&j.d_theta2) / r;
    Ok(p.spin * d_abs + p.drive_omega * berry_curvature(theta1, theta2, n, p)?)
}

/// Pointwise δω₀ = −S·(B_eff·∂_n B_eff)/|B_eff|.
pub fn delta_omega0(theta1: f64, theta2: f64, n: f64, p: &ModelParams) -> Result<f64> {
    if !(n > 0.0) {
        return Err(BoostError::InvalidParameter(format!(
            "frequency shift needs n > 0, got {n}"
        )));
    }
    let j = field_jet(theta1, theta2, n, p);
    let r = nonsingular(j.b, theta1, theta2, n)?;
    Ok(-p.spin * j.b.dot(&j.d_n) / r)
}

/// Default torus grid per axis.
pub const TORUS_GRID: usize = 256;

/// Uniform average of `f` over a `grid × grid` tensor grid on the torus.
pub fn torus_average<F>(grid: usize, f: F) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let h = TAU / grid as f64;
    let rows: Result<Vec<f64>> = (0..grid)
        .into_par_iter()
        .map(|i| {
            let t1 = i as f64 * h;
            (0..grid).map(|k| f(t1, k as f64 * h)).sum::<Result<f64>>()
        })
        .collect();
    Ok(rows?.iter().sum::<f64>() / (grid * grid) as f64)
}

/// [δω₀]_θ on the default grid.
pub fn delta_omega0_avg(n: f64, p: &ModelParams) -> Result<f64> {
    delta_omega0_avg_on(TORUS_GRID, n, p)
}

pub fn delta_omega0_avg_on(grid: usize, n: f64, p: &ModelParams) -> Result<f64> {
    torus_average(grid, |a, b| delta_omega0(a, b, n, p))
}

/// (1/2π)∬F dθ², before rounding.
pub fn chern_integral(grid: usize, n: f64, p: &ModelParams) -> Result<f64> {
    Ok(TAU * torus_average(grid, |a, b| berry_curvature(a, b, n, p))?)
}

/// Chern number of the spin band at occupation n.
pub fn chern_number(n: f64, p: &ModelParams) -> Result<i32> {
    let value = chern_integral(TORUS_GRID, n, p)?;
    let c = value.round();
    let residual = (value - c).abs();
    if residual >= 1e-4 {
        return Err(BoostError::Degenerate { value, residual });
    }
    Ok(c as i32)
}

/// Cavity frequency used for prescribed θ₂(t): ω + [δω₀]_θ(n₀), or the bare ω.
pub fn omega_eff(n0: f64, p: &ModelParams, corrected: bool) -> Result<f64> {
    if corrected && p.b_0 != 0.0 {
        Ok(p.omega + delta_omega0_avg(n0, p)?)
    } else {
        Ok(p.omega)
    }
}

/// Semiclassical time series.
#[derive(Clone, Debug, Serialize)]
pub struct SemiclassicalTrajectory {
    pub times: Vec<f64>,
    pub theta: Vec<TorusPoint>,
    pub n: Vec<f64>,
    pub phi: Vec<f64>,
}

/// Prescribed torus path θ⃗_t = (Ωt + θ₀₁, ω_eff t + θ₀₂).
#[derive(Clone, Copy, Debug)]
struct Path {
    theta1: f64,
    theta2: f64,
    drive: f64,
    omega_eff: f64,
}

impl Path {
    fn at(&self, t: f64) -> (f64, f64) {
        (self.theta1 + self.drive * t, self.theta2 + self.omega_eff * t)
    }

    /// min(2π/Ω, 2π/ω_eff)/64
    fn max_step(&self) -> f64 {
        let fastest = self.drive.abs().max(self.omega_eff.abs()).max(1e-12);
        TAU / fastest / 64.0
    }
}

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite 5-point Gauss–Legendre on [a, b] with panels no wider than `h`.
fn integrate<F: FnMut(f64) -> Result<f64>>(a: f64, b: f64, h: f64, mut f: F) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let panels = ((b - a) / h - 1e-9).ceil().max(1.0) as usize;
    let w = (b - a) / panels as f64;
    let mut s = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * w;
        for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
            s += wt * f(mid + 0.5 * w * x)?;
        }
    }
    Ok(0.5 * w * s)
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(BoostError::InvalidParameter(
            "times must be finite and non-negative".into(),
        ));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(BoostError::InvalidParameter(
            "sample times must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// n(t) = n₀ + ∫ṅ and φ(t) = ∫(ωn₀ − S|B_eff|) with n frozen at n₀ in
/// both integrands.
pub fn trajectory_fixed(
    times: &[f64],
    theta0: TorusPoint,
    n0: f64,
    p: &ModelParams,
    omega_eff: f64,
) -> Result<SemiclassicalTrajectory> {
    check_times(times)?;
    let path = Path {
        theta1: theta0.theta1,
        theta2: theta0.theta2,
        drive: p.drive_omega,
        omega_eff,
    };
    let h = path.max_step();
    let mut out = SemiclassicalTrajectory {
        times: times.to_vec(),
        theta: Vec::with_capacity(times.len()),
        n: Vec::with_capacity(times.len()),
        phi: Vec::with_capacity(times.len()),
    };
    let (mut t, mut dn, mut phi) = (0.0, 0.0, 0.0);
    for &ts in times {
        dn += integrate(t, ts, h, |s| {
            let (a, b) = path.at(s);
            ndot_adiabatic(a, b, n0, p)
        })?;
        phi += integrate(t, ts, h, |s| {
            let (a, b) = path.at(s);
            Ok(p.omega * n0 - p.spin * b_eff(a, b, n0, p).norm())
        })?;
        t = ts;
        let (a, b) = path.at(ts);
        out.theta.push(TorusPoint::new(a, b));
        out.n.push(n0 + dn);
        out.phi.push(phi);
    }
    Ok(out)
}

/// Δn(T) with n frozen at n₀.
pub fn delta_n_fixed(t: f64, theta0: TorusPoint, n0: f64, p: &ModelParams, omega_eff: f64) -> Result<f64> {
    Ok(trajectory_fixed(&[t], theta0, n0, p, omega_eff)?.n[0] - n0)
}

/// φ(T) = ∫₀ᵀ (ωn₀ − S|B_eff(θ⃗_s, n₀)|) ds.
pub fn phase_integral(t: f64, theta0: TorusPoint, n0: f64, p: &ModelParams, omega_eff: f64) -> Result<f64> {
    check_times(&[t])?;
    let path = Path {
        theta1: theta0.theta1,
        theta2: theta0.theta2,
        drive: p.drive_omega,
        omega_eff,
    };
    integrate(0.0, t, path.max_step(), |s| {
        let (a, b) = path.at(s);
        Ok(p.omega * n0 - p.spin * b_eff(a, b, n0, p).norm())
    })
}

fn rk4_run(times: &[f64], path: Path, n0: f64, p: &ModelParams, h_max: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    // state: (n, φ)
    let rhs = |t: f64, n: f64| -> Result<(f64, f64)> {
        if n < 0.0 {
            return Err(BoostError::NegativeOccupation { n, time: t });
        }
        let (a, b) = path.at(t);
        let dn = ndot_adiabatic(a, b, n, p)?;
        let dphi = p.omega * n - p.spin * b_eff(a, b, n, p).norm();
        Ok((dn, dphi))
    };
    let (mut t, mut n, mut phi) = (0.0, n0, 0.0);
    let mut ns = Vec::with_capacity(times.len());
    let mut phis = Vec::with_capacity(times.len());
    for &ts in times {
        if ts > t {
            let steps = ((ts - t) / h_max - 1e-9).ceil().max(1.0) as usize;
            let h = (ts - t) / steps as f64;
            for k in 0..steps {
                let t0 = t + k as f64 * h;
                let k1 = rhs(t0, n)?;
                let k2 = rhs(t0 + 0.5 * h, n + 0.5 * h * k1.0)?;
                let k3 = rhs(t0 + 0.5 * h, n + 0.5 * h * k2.0)?;
                let k4 = rhs(t0 + h, n + h * k3.0)?;
                n += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
                phi += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            }
            t = ts;
        }
        if n < 0.0 {
            return Err(BoostError::NegativeOccupation { n, time: t });
        }
        ns.push(n);
        phis.push(phi);
    }
    Ok((ns, phis))
}

/// Integrates ṅ(θ⃗_t, n) with n fed back, θ₂ still prescribed. The step is
/// halved until the final n changes by less than 10⁻⁶.
pub fn delta_n_backaction(
    times: &[f64],
    theta0: TorusPoint,
    n0: f64,
    p: &ModelParams,
    omega_eff: f64,
) -> Result<SemiclassicalTrajectory> {
    check_times(times)?;
    let path = Path {
        theta1: theta0.theta1,
        theta2: theta0.theta2,
        drive: p.drive_omega,
        omega_eff,
    };
    let mut h = path.max_step();
    let mut previous = rk4_run(times, path, n0, p, h)?.0.last().copied();
    for _ in 0..8 {
        h /= 2.0;
        let (ns, phis) = rk4_run(times, path, n0, p, h)?;
        let diff = match (previous, ns.last()) {
            (Some(a), Some(b)) => (a - b).abs(),
            _ => 0.0,
        };
        if diff < 1e-6 {
            let theta = times
                .iter()
                .map(|&t| {
                    let (a, b) = path.at(t);
                    TorusPoint::new(a, b)
                })
                .collect();
            return Ok(SemiclassicalTrajectory {
                times: times.to_vec(),
                theta,
                n: ns,
                phi: phis,
            });
        }
        previous = ns.last().copied();
    }
    Err(BoostError::NonConvergence(
        "back-action ODE did not converge under step halving".into(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Fixed,
    Backaction,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleConfig {
    pub kind: EnsembleKind,
    pub n_theta: usize,
    pub n0: f64,
    pub omega_eff: f64,
    pub times: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleResult {
    pub theta02: Vec<f64>,
    pub members: Vec<SemiclassicalTrajectory>,
    /// Population variance of n over members, per sample time.
    pub variance: Vec<f64>,
}

/// Members at θ₀₂ = 2πk/N_θ with θ₀₁ from `p`, run in parallel and kept in
/// member order.
pub fn ensemble_run(cfg: &EnsembleConfig, p: &ModelParams) -> Result<EnsembleResult> {
    if cfg.n_theta < 2 {
        return Err(BoostError::InvalidParameter("ensemble needs N_theta >= 2".into()));
    }
    let theta02: Vec<f64> = (0..cfg.n_theta).map(|k| TAU * k as f64 / cfg.n_theta as f64).collect();
    let members: Result<Vec<_>> = theta02
        .par_iter()
        .map(|&t2| {
            let start = TorusPoint::new(p.theta01, t2);
            match cfg.kind {
                EnsembleKind::Fixed => trajectory_fixed(&cfg.times, start, cfg.n0, p, cfg.omega_eff),
                EnsembleKind::Backaction => delta_n_backaction(&cfg.times, start, cfg.n0, p, cfg.omega_eff),
            }
        })
        .collect();
    let members = members?;
    let variance = (0..cfg.times.len())
        .map(|i| population_variance(members.iter().map(|m| m.n[i])))
        .collect();
    Ok(EnsembleResult {
        theta02,
        members,
        variance,
    })
}

pub fn population_variance<I: Iterator<Item = f64> + Clone>(xs: I) -> f64 {
    let (count, sum) = xs.clone().fold((0usize, 0.0), |(c, s), x| (c + 1, s + x));
    if count == 0 {
        return 0.0;
    }
    let mean = sum / count as f64;
    xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / count as f64
}

/// Smallest arc containing all angles, in [0, 2π).
pub fn circular_spread(angles: &[f64]) -> f64 {
    if angles.len() < 2 {
        return 0.0;
    }
    let mut a: Vec<f64> = angles.iter().map(|x| x.rem_euclid(TAU)).collect();
    a.sort_by(f64::total_cmp);
    let mut gap = a[0] + TAU - a[a.len() - 1];
    for w in a.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    TAU - gap
}

/// True when `(|b_m|−|b_d|)² < b_0²n < (|b_m|+|b_d|)²`.
pub fn in_pumping_window(n: f64, p: &ModelParams) -> bool {
    let x = p.b_0 * p.b_0 * n;
    let lo = (p.b_m.abs() - p.b_d.abs()).powi(2);
    let hi = (p.b_m.abs() + p.b_d.abs()).powi(2);
    lo < x && x < hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::model::hamiltonian_rotating;
    use crate::state::{make_coherent, with_spin, SpinSign};
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;
    use std::f64::consts::PI;

    fn fig1() -> ModelParams {
        ModelParams::paper_fig1()
    }

    #[test]
    fn field_at_special_angles() {
        let p = fig1();
        let b = b_eff(3.0 * PI / 2.0, 0.0, 10.0, &p);
        assert_abs_diff_eq!(b.x, 12.0 - 1.5 * 10f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(b.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.z, 0.0, epsilon = 1e-12);
        let mut q = fig1();
        q.b_0 = 0.0;
        let b = b_eff(0.4, 1.3, 7.0, &q);
        let d = crate::model::drive_field(0.4, &q);
        assert_eq!(b, d);
    }

    #[test]
    fn coherent_energy_matches_effective_field() {
        let mut p = fig1();
        p.n_max = 32;
        let (t1, t2, n) = (0.9, 2.2, 6.0f64);
        let alpha = C64::from_polar(n.sqrt(), -t2);
        let axis = FieldVector::new(0.3, -0.5, 0.8);
        let psi = with_spin(&make_coherent(alpha, &p).unwrap(), axis, SpinSign::Plus).unwrap();
        let t = (t1 - p.theta01) / p.drive_omega;
        let mut h = hamiltonian_rotating(t, &p).unwrap();
        for k in 0..h.nrows() {
            h[(k, k)] -= C64::from(p.omega * (k / 2) as f64);
        }
        let v = DVector::from_column_slice(psi.amps());
        let energy = v.dotc(&(&h * &v)).re;
        // ⟨S⟩ for the spin eigenstate along `axis` is axis/(2|axis|)
        let s = axis * (0.5 / axis.norm());
        let want = -b_eff(t1, t2, n, &p).dot(&s);
        assert_abs_diff_eq!(energy, want, epsilon = 1e-7);
    }

    #[test]
    fn no_coupling_no_curvature_no_pumping() {
        let mut p = fig1();
        p.b_0 = 0.0;
        for &(a, b) in &[(0.1, 0.2), (2.0, 5.0), (4.0, 1.0)] {
            assert_eq!(berry_curvature(a, b, 10.0, &p).unwrap(), 0.0);
            assert_abs_diff_eq!(ndot_adiabatic(a, b, 10.0, &p).unwrap(), 0.0, epsilon = 1e-15);
            assert_eq!(delta_omega0(a, b, 10.0, &p).unwrap(), 0.0);
        }
        let traj = delta_n_backaction(&[1.0, 5.0], TorusPoint::new(1.0, 2.0), 10.0, &p, 1.0).unwrap();
        assert_eq!(traj.n, vec![10.0, 10.0]);
        assert_abs_diff_eq!(
            delta_n_fixed(7.0, TorusPoint::new(0.0, 0.0), 10.0, &p, 1.0).unwrap(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn curvature_matches_finite_differences() {
        let p = fig1();
        let (t1, t2, n) = (0.7, 2.9, 10.0);
        let e = 1e-5;
        let unit = |a: f64, b: f64| {
            let v = b_eff(a, b, n, &p);
            v * (1.0 / v.norm())
        };
        let d1 = (unit(t1 + e, t2) - unit(t1 - e, t2)) * (0.5 / e);
        let d2 = (unit(t1, t2 + e) - unit(t1, t2 - e)) * (0.5 / e);
        let fd = p.spin * unit(t1, t2).dot(&d1.cross(&d2));
        assert_abs_diff_eq!(berry_curvature(t1, t2, n, &p).unwrap(), fd, epsilon = 1e-6);
    }

    #[test]
    fn chern_examples() {
        let p = fig1();
        assert_eq!(chern_number(10.0, &p).unwrap().abs(), 1);
        assert_abs_diff_eq!(chern_integral(TORUS_GRID, 10.0, &p).unwrap().abs(), 1.0, epsilon = 1e-6);
        assert_eq!(chern_number(100.0, &p).unwrap(), 0);
        let q = ModelParams { b_d: 2.0, ..fig1() };
        assert_eq!(chern_number(1.0, &q).unwrap(), 0);
    }

    #[test]
    fn chern_degenerate_at_window_edge() {
        let p = fig1();
        // b_0²n = 144 closes the gap at θ = (3π/2, 0)
        let err = chern_number(64.0, &p).unwrap_err();
        assert!(matches!(
            err,
            BoostError::Degenerate { .. } | BoostError::SingularField { .. }
        ));
    }

    #[test]
    fn average_pump_rate_is_quantized() {
        let p = fig1();
        let c = chern_number(10.0, &p).unwrap() as f64;
        for n in [5.0, 10.0, 20.0] {
            let avg = torus_average(TORUS_GRID, |a, b| ndot_adiabatic(a, b, n, &p)).unwrap();
            assert_abs_diff_eq!(avg, p.drive_omega * c / TAU, epsilon = 1e-6);
        }
    }

    #[test]
    fn frequency_shift_grid_converged() {
        let p = fig1();
        let a = delta_omega0_avg_on(128, 10.0, &p).unwrap();
        let b = delta_omega0_avg_on(256, 10.0, &p).unwrap();
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn phase_integral_without_fields() {
        let p = ModelParams {
            b_m: 0.0,
            b_d: 0.0,
            b_0: 0.0,
            ..fig1()
        };
        let phi = phase_integral(3.3, TorusPoint::new(0.2, 0.1), 10.0, &p, 1.0).unwrap();
        assert_abs_diff_eq!(phi, 33.0, epsilon = 1e-10);
        assert_eq!(
            phase_integral(0.0, TorusPoint::new(0.2, 0.1), 10.0, &fig1(), 1.0).unwrap(),
            0.0
        );
        assert_eq!(
            delta_n_fixed(0.0, TorusPoint::new(0.2, 0.1), 10.0, &fig1(), 1.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn backaction_step_converged() {
        let p = fig1();
        let t = 3.0 * p.drive_period();
        let start = TorusPoint::new(p.theta01, 0.4);
        let traj = delta_n_backaction(&[t], start, 10.0, &p, 0.95).unwrap();
        // independent fine RK4 reference
        let path = Path {
            theta1: start.theta1,
            theta2: start.theta2,
            drive: p.drive_omega,
            omega_eff: 0.95,
        };
        let (fine, _) = rk4_run(&[t], path, 10.0, &p, path.max_step() / 64.0).unwrap();
        assert_abs_diff_eq!(traj.n[0], fine[0], epsilon = 1e-6);
    }

    #[test]
    fn ensemble_without_coupling_has_no_spread() {
        let p = ModelParams { b_0: 0.0, ..fig1() };
        let cfg = EnsembleConfig {
            kind: EnsembleKind::Fixed,
            n_theta: 8,
            n0: 10.0,
            omega_eff: 1.0,
            times: vec![1.0, 2.0, 3.0],
        };
        let r = ensemble_run(&cfg, &p).unwrap();
        assert!(r.variance.iter().all(|&v| v.abs() < 1e-24));
        assert_eq!(r.members.len(), 8);
        assert_abs_diff_eq!(r.theta02[2], PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn spread_wraps_around() {
        assert_abs_diff_eq!(circular_spread(&[0.1, TAU - 0.1]), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(circular_spread(&[1.0, 2.0, 1.5]), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pumping_window() {
        let p = fig1();
        assert!(in_pumping_window(10.0, &p));
        assert!(!in_pumping_window(100.0, &p));
        assert!(!in_pumping_window(1.0, &ModelParams { b_d: 2.0, ..fig1() }));
    }
}
