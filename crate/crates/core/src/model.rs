//! Model parameters, the classical drive, and the rotating- and lab-frame
//! Hamiltonians on the truncated cavity ⊗ spin-1/2 space.
//!
//! Units: ħ = μ = 1 and energies are given as ratios to the cavity frequency.
//! Basis ordering: index `2n + m` for Fock level `n` and spin index `m`
//! (`m = 0` is S_z = +1/2, `m = 1` is S_z = −1/2).

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{BoostError, Result};
use crate::linalg::{SparseOp, C64, I};
use crate::propagator::Hamiltonian;

/// Dimensionless model configuration.
///
/// Missing fields deserialize from [`ModelParams::paper_fig1`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    /// Cavity angular frequency ω.
    pub omega: f64,
    /// Drive angular frequency Ω.
    #[serde(rename = "Omega")]
    pub drive_omega: f64,
    /// Static x field energy μB_m.
    pub b_m: f64,
    /// Drive amplitude μB_d.
    pub b_d: f64,
    /// Spin-cavity coupling energy μB_0.
    pub b_0: f64,
    /// Initial drive phase θ₀₁.
    pub theta01: f64,
    /// Spin magnitude S. Quantum modules require 1/2.
    pub spin: f64,
    /// Fock truncation: levels 0..=n_max are kept.
    pub n_max: usize,
    /// Qubit carrier frequency, lab frame only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_q: Option<f64>,
}

impl ModelParams {
    /// Golden-ratio drive, b_m = b_d = 6, b_0 = 1.5, θ₀₁ = 3π/2, S = 1/2,
    /// truncation 64.
    pub fn paper_fig1() -> Self {
        ModelParams {
            omega: 1.0,
            drive_omega: (1.0 + 5f64.sqrt()) / 2.0,
            b_m: 6.0,
            b_d: 6.0,
            b_0: 1.5,
            theta01: 3.0 * PI / 2.0,
            spin: 0.5,
            n_max: 64,
            omega_q: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(BoostError::InvalidParameter(what.to_string()));
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return bad("omega must be positive and finite");
        }
        if !(self.drive_omega > 0.0 && self.drive_omega.is_finite()) {
            return bad("Omega must be positive and finite");
        }
        if ![self.b_m, self.b_d, self.b_0, self.theta01]
            .iter()
            .all(|v| v.is_finite())
        {
            return bad("field energies and theta01 must be finite");
        }
        if !(self.spin > 0.0 && self.spin.is_finite()) {
            return bad("spin must be positive");
        }
        if self.n_max < 1 {
            return bad("n_max must be at least 1");
        }
        if let Some(wq) = self.omega_q {
            if !(wq > 0.0 && wq.is_finite()) {
                return bad("omega_q must be positive and finite");
            }
        }
        Ok(())
    }

    /// Checks the additional requirements of the quantum (matrix) modules.
    pub fn validate_quantum(&self) -> Result<()> {
        self.validate()?;
        if (self.spin - 0.5).abs() > 1e-12 {
            return Err(BoostError::InvalidParameter(format!(
                "quantum dynamics supports spin 1/2 only, got {}",
                self.spin
            )));
        }
        Ok(())
    }

    /// Drive period T = 2π/Ω.
    pub fn drive_period(&self) -> f64 {
        2.0 * PI / self.drive_omega
    }

    /// θ₁(t) = Ωt + θ₀₁.
    pub fn theta1(&self, t: f64) -> f64 {
        self.drive_omega * t + self.theta01
    }

    /// Dimension of the cavity ⊗ spin-1/2 space.
    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    /// Upper edge of the topological window, (|b_m| + |b_d|)² / b_0².
    pub fn pumping_ceiling(&self) -> f64 {
        (self.b_m.abs() + self.b_d.abs()).powi(2) / (self.b_0 * self.b_0)
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams::paper_fig1()
    }
}

/// Energy-valued vector μB.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FieldVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        FieldVector { x, y, z }
    }

    pub fn dot(&self, o: &FieldVector) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &FieldVector) -> FieldVector {
        FieldVector::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for FieldVector {
    type Output = FieldVector;
    fn add(self, o: FieldVector) -> FieldVector {
        FieldVector::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for FieldVector {
    type Output = FieldVector;
    fn sub(self, o: FieldVector) -> FieldVector {
        FieldVector::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for FieldVector {
    type Output = FieldVector;
    fn mul(self, s: f64) -> FieldVector {
        FieldVector::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Circularly polarized drive: (b_m − b_d sin θ₁, 0, b_d cos θ₁).
pub fn drive_field(theta1: f64, p: &ModelParams) -> FieldVector {
    FieldVector::new(p.b_m - p.b_d * theta1.sin(), 0.0, p.b_d * theta1.cos())
}

#[inline]
pub(crate) fn basis_index(n: usize, m: usize) -> usize {
    2 * n + m
}

/// Spin z eigenvalue of basis spin index `m`.
#[inline]
pub(crate) fn spin_z(m: usize) -> f64 {
    if m == 0 {
        0.5
    } else {
        -0.5
    }
}

/// Constant operator blocks on the product space.
pub(crate) mod blocks {
    use super::*;

    pub fn number_diagonal(n_max: usize) -> Vec<f64> {
        (0..=n_max).flat_map(|n| [n as f64, n as f64]).collect()
    }

    pub fn spin_z_diagonal(n_max: usize) -> Vec<f64> {
        (0..=n_max).flat_map(|_| [0.5, -0.5]).collect()
    }

    pub fn s_x(n_max: usize) -> SparseOp {
        let dim = 2 * (n_max + 1);
        let mut e = Vec::with_capacity(dim);
        for n in 0..=n_max {
            e.push((basis_index(n, 0), basis_index(n, 1), C64::from(0.5)));
            e.push((basis_index(n, 1), basis_index(n, 0), C64::from(0.5)));
        }
        SparseOp::from_entries(dim, e)
    }

    pub fn s_z(n_max: usize) -> SparseOp {
        let dim = 2 * (n_max + 1);
        let e = (0..=n_max)
            .flat_map(|n| {
                [
                    (basis_index(n, 0), basis_index(n, 0), C64::from(0.5)),
                    (basis_index(n, 1), basis_index(n, 1), C64::from(-0.5)),
                ]
            })
            .collect();
        SparseOp::from_entries(dim, e)
    }

    /// a S⁺ + a† S⁻
    pub fn jaynes_cummings(n_max: usize) -> SparseOp {
        let dim = 2 * (n_max + 1);
        let mut e = Vec::new();
        for n in 1..=n_max {
            let amp = C64::from((n as f64).sqrt());
            // a S+ : |n, down> -> sqrt(n) |n-1, up>
            e.push((basis_index(n - 1, 0), basis_index(n, 1), amp));
            e.push((basis_index(n, 1), basis_index(n - 1, 0), amp));
        }
        SparseOp::from_entries(dim, e)
    }

    /// (a + a†) S_x
    pub fn quadrature_s_x(n_max: usize) -> SparseOp {
        let dim = 2 * (n_max + 1);
        let mut e = Vec::new();
        for n in 1..=n_max {
            let amp = C64::from(0.5 * (n as f64).sqrt());
            for (m, m2) in [(0, 1), (1, 0)] {
                e.push((basis_index(n - 1, m), basis_index(n, m2), amp));
                e.push((basis_index(n, m2), basis_index(n - 1, m), amp));
            }
        }
        SparseOp::from_entries(dim, e)
    }
}

/// Which Hamiltonian a [`DrivenHamiltonian`] represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    /// ω n̂ − B_c(θ₁)·S + (b_0/2)(a S⁺ + a† S⁻)
    Rotating,
    /// (ω_q + ω) n̂ + (ω_q − b_d cos θ₁) S_z + b_0 (a + a†) S_x
    /// − 2 (b_m − b_d sin θ₁) cos(ω_q t) S_x
    Lab,
}

/// Time-dependent model Hamiltonian stored as a constant diagonal plus a
/// few constant sparse blocks with scalar time-dependent coefficients.
#[derive(Clone, Debug)]
pub struct DrivenHamiltonian {
    params: ModelParams,
    frame: Frame,
    diagonal: Vec<f64>,
    terms: Vec<SparseOp>,
    term_norms: Vec<f64>,
}

impl DrivenHamiltonian {
    pub fn rotating(p: &ModelParams) -> Result<Self> {
        p.validate_quantum()?;
        let diagonal = blocks::number_diagonal(p.n_max)
            .into_iter()
            .map(|n| p.omega * n)
            .collect();
        let terms = vec![
            blocks::s_x(p.n_max),
            blocks::s_z(p.n_max),
            blocks::jaynes_cummings(p.n_max),
        ];
        Ok(Self::assemble(p, Frame::Rotating, diagonal, terms))
    }

    pub fn lab(p: &ModelParams) -> Result<Self> {
        p.validate_quantum()?;
        let wq = p.omega_q.ok_or(BoostError::MissingParameter("omega_q"))?;
        let diagonal = blocks::number_diagonal(p.n_max)
            .into_iter()
            .zip(blocks::spin_z_diagonal(p.n_max))
            .map(|(n, sz)| (wq + p.omega) * n + wq * sz)
            .collect();
        let terms = vec![
            blocks::s_z(p.n_max),
            blocks::quadrature_s_x(p.n_max),
            blocks::s_x(p.n_max),
        ];
        Ok(Self::assemble(p, Frame::Lab, diagonal, terms))
    }

    fn assemble(p: &ModelParams, frame: Frame, diagonal: Vec<f64>, terms: Vec<SparseOp>) -> Self {
        let term_norms = terms.iter().map(SparseOp::norm_bound).collect();
        DrivenHamiltonian {
            params: p.clone(),
            frame,
            diagonal,
            terms,
            term_norms,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    fn coefficients(&self, t: f64) -> [f64; 3] {
        let p = &self.params;
        let th = p.theta1(t);
        match self.frame {
            Frame::Rotating => {
                let b = drive_field(th, p);
                [-b.x, -b.z, 0.5 * p.b_0]
            }
            Frame::Lab => {
                let wq = p.omega_q.unwrap_or_default();
                [
                    -p.b_d * th.cos(),
                    p.b_0,
                    -2.0 * (p.b_m - p.b_d * th.sin()) * (wq * t).cos(),
                ]
            }
        }
    }
}

impl Hamiltonian for DrivenHamiltonian {
    fn dim(&self) -> usize {
        self.diagonal.len()
    }

    fn static_diagonal(&self) -> Option<&[f64]> {
        Some(&self.diagonal)
    }

    fn apply_dynamic(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|z| *z = C64::from(0.0));
        for (op, c) in self.terms.iter().zip(self.coefficients(t)) {
            if c != 0.0 {
                op.apply_add(C64::from(c), psi, out);
            }
        }
    }

    fn dynamic_norm_bound(&self, t: f64) -> f64 {
        self.coefficients(t)
            .iter()
            .zip(&self.term_norms)
            .map(|(c, n)| c.abs() * n)
            .sum()
    }

    fn matrix(&self, t: f64) -> DMatrix<C64> {
        let mut m = DMatrix::<C64>::zeros(self.dim(), self.dim());
        for (i, d) in self.diagonal.iter().enumerate() {
            m[(i, i)] += C64::from(*d);
        }
        for (op, c) in self.terms.iter().zip(self.coefficients(t)) {
            for &(r, col, v) in op.entries() {
                m[(r, col)] += v * c;
            }
        }
        m
    }
}

/// Rotating-frame Hamiltonian matrix at time `t`.
pub fn hamiltonian_rotating(t: f64, p: &ModelParams) -> Result<DMatrix<C64>> {
    Ok(DrivenHamiltonian::rotating(p)?.matrix(t))
}

/// Lab-frame Hamiltonian matrix at time `t`. Fails if `omega_q` is unset.
///
/// The slow modulations use θ₁(t) = Ωt + θ₀₁ so that the rotating-wave limit
/// reproduces [`hamiltonian_rotating`] for any initial drive phase.
pub fn hamiltonian_lab(t: f64, p: &ModelParams) -> Result<DMatrix<C64>> {
    Ok(DrivenHamiltonian::lab(p)?.matrix(t))
}

/// Applies U(t) = exp[i ω_q t (n̂ + S_z)], mapping a lab-frame state into
/// the frame co-rotating with the qubit carrier.
pub fn rotating_frame_map(state: &crate::state::QuantumState, t: f64, omega_q: f64) -> crate::state::QuantumState {
    let mut out = state.clone();
    for n in 0..=state.n_max() {
        for m in 0..2 {
            let phase = omega_q * t * (n as f64 + spin_z(m));
            out.amps_mut()[basis_index(n, m)] *= (I * phase).exp();
        }
    }
    out
}

/// Cavity annihilation operator on levels 0..=n_max.
#[cfg(test)]
pub(crate) fn annihilation(n_max: usize) -> DMatrix<C64> {
    let d = n_max + 1;
    let mut a = DMatrix::<C64>::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = crate::linalg::ONE * (n as f64).sqrt();
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermiticity_defect, ONE};
    use crate::state::{make_fock, with_spin, SpinSign};

    fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
        a.kronecker(b)
    }

    /// Independent construction from cavity and spin factors.
    fn rotating_oracle(t: f64, p: &ModelParams) -> DMatrix<C64> {
        let d = p.n_max + 1;
        let a = annihilation(p.n_max);
        let n = a.adjoint() * &a;
        let id_c = DMatrix::<C64>::identity(d, d);
        let id_s = DMatrix::<C64>::identity(2, 2);
        let half = C64::from(0.5);
        let sx = DMatrix::from_row_slice(2, 2, &[C64::from(0.0), half, half, C64::from(0.0)]);
        let sz = DMatrix::from_row_slice(2, 2, &[half, C64::from(0.0), C64::from(0.0), -half]);
        let sp = DMatrix::from_row_slice(2, 2, &[C64::from(0.0), ONE, C64::from(0.0), C64::from(0.0)]);
        let sm = sp.adjoint();
        let b = drive_field(p.theta1(t), p);
        kron(&n, &id_s) * C64::from(p.omega) - kron(&id_c, &sx) * C64::from(b.x) - kron(&id_c, &sz) * C64::from(b.z)
            + (kron(&a, &sp) + kron(&a.adjoint(), &sm)) * C64::from(0.5 * p.b_0)
    }

    #[test]
    fn drive_field_special_angles() {
        let p = ModelParams::paper_fig1();
        let f0 = drive_field(0.0, &p);
        assert_eq!((f0.x, f0.y, f0.z), (6.0, 0.0, 6.0));
        let f = drive_field(1.5 * PI, &p);
        assert!((f.x - 12.0).abs() < 1e-12 && f.z.abs() < 1e-12);
        let f = drive_field(0.5 * PI, &p);
        assert!(f.x.abs() < 1e-12 && f.z.abs() < 1e-12);
    }

    #[test]
    fn drive_field_is_two_pi_periodic() {
        let p = ModelParams::paper_fig1();
        for k in 0..50 {
            let th = 0.37 * k as f64 - 4.0;
            let a = drive_field(th, &p);
            let b = drive_field(th + 2.0 * PI, &p);
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn free_cavity_is_diagonal() {
        let mut p = ModelParams::paper_fig1();
        p.b_m = 0.0;
        p.b_d = 0.0;
        p.b_0 = 0.0;
        p.n_max = 6;
        let h = hamiltonian_rotating(1.3, &p).unwrap();
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                let expect = if i == j { (i / 2) as f64 } else { 0.0 };
                assert!((h[(i, j)] - C64::from(expect)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn rotating_matches_kron_oracle() {
        let mut p = ModelParams::paper_fig1();
        p.n_max = 7;
        for t in [0.0, 0.4, 2.9, 11.0] {
            let h = hamiltonian_rotating(t, &p).unwrap();
            let o = rotating_oracle(t, &p);
            assert!((h - o).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-13);
        }
    }

    #[test]
    fn coupling_matrix_elements() {
        let p = ModelParams::paper_fig1();
        let h = hamiltonian_rotating(0.0, &p).unwrap();
        for n in 1..=3usize {
            let el = h[(basis_index(n - 1, 0), basis_index(n, 1))];
            assert!((el - C64::from(0.75 * (n as f64).sqrt())).norm() < 1e-14);
        }
    }

    #[test]
    fn lab_frame_requires_carrier() {
        let p = ModelParams::paper_fig1();
        assert!(matches!(
            hamiltonian_lab(0.0, &p),
            Err(BoostError::MissingParameter("omega_q"))
        ));
    }

    #[test]
    fn lab_frame_without_fields() {
        let mut p = ModelParams::paper_fig1();
        p.b_m = 0.0;
        p.b_d = 0.0;
        p.b_0 = 0.0;
        p.n_max = 5;
        p.omega_q = Some(100.0);
        let h = hamiltonian_lab(0.77, &p).unwrap();
        for i in 0..h.nrows() {
            let n = (i / 2) as f64;
            let expect = 101.0 * n + 100.0 * spin_z(i % 2);
            assert!((h[(i, i)].re - expect).abs() < 1e-12);
        }
        assert!(hermiticity_defect(&h) == 0.0);
        let offdiag: f64 = (0..h.nrows())
            .flat_map(|i| (0..h.ncols()).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| h[(i, j)].norm())
            .sum();
        assert_eq!(offdiag, 0.0);
    }

    #[test]
    fn lab_energy_averages_to_diagonal_sum() {
        let mut p = ModelParams::paper_fig1();
        p.n_max = 20;
        p.omega_q = Some(100.0);
        let psi = with_spin(
            &make_fock(10, &p).unwrap(),
            FieldVector::new(1.0, 0.0, 0.0),
            SpinSign::Plus,
        )
        .unwrap();
        let v = nalgebra::DVector::from_column_slice(psi.amps());
        // Average over an integer number of drive periods, resolving the
        // carrier with 64 samples per cycle.
        let span = p.drive_period();
        let samples = 64 * (100.0 * span / (2.0 * PI)).ceil() as usize;
        let mut acc = 0.0;
        for k in 0..samples {
            let t = span * k as f64 / samples as f64;
            let h = hamiltonian_lab(t, &p).unwrap();
            acc += (v.adjoint() * &h * &v)[(0, 0)].re;
        }
        let mean = acc / samples as f64;
        // (omega_q + omega) * 10 + omega_q * <S_z> with <S_z> = 0
        assert!((mean - 1010.0).abs() < 0.05, "mean energy {mean}");
    }
}
