//! Cavity states, spin factors and the product-space state vector.

use serde::{Deserialize, Serialize};

use crate::error::{BoostError, Result};
use crate::linalg::{norm, C64, ZERO};
use crate::model::{basis_index, FieldVector, ModelParams};

/// Normalized amplitudes over Fock levels 0..=n_max.
#[derive(Clone, Debug, PartialEq)]
pub struct CavityState {
    amps: Vec<C64>,
}

impl CavityState {
    pub fn from_amplitudes(mut amps: Vec<C64>) -> Result<Self> {
        let nrm = norm(&amps);
        if !(nrm > 0.0 && nrm.is_finite()) {
            return Err(BoostError::InvalidParameter(
                "cavity amplitudes must have finite nonzero norm".into(),
            ));
        }
        amps.iter_mut().for_each(|z| *z /= nrm);
        Ok(CavityState { amps })
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn n_max(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn fock_distribution(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Sign of the spin projection along an axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinSign {
    Plus,
    Minus,
}

/// Normalized state vector on cavity ⊗ spin-1/2, with its simulation time.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amps: Vec<C64>,
    n_max: usize,
    time: f64,
}

impl QuantumState {
    /// Wraps raw amplitudes (length `2(n_max + 1)`), normalizing them.
    pub fn from_amplitudes(mut amps: Vec<C64>, time: f64) -> Result<Self> {
        if amps.len() < 4 || !amps.len().is_multiple_of(2) {
            return Err(BoostError::InvalidParameter(format!(
                "state length {} is not 2(n_max + 1) with n_max >= 1",
                amps.len()
            )));
        }
        let nrm = norm(&amps);
        if !(nrm > 0.0 && nrm.is_finite()) {
            return Err(BoostError::InvalidParameter(
                "state must have finite nonzero norm".into(),
            ));
        }
        amps.iter_mut().for_each(|z| *z /= nrm);
        let n_max = amps.len() / 2 - 1;
        Ok(QuantumState { amps, n_max, time })
    }

    /// Wraps amplitudes without renormalizing (propagator output).
    pub(crate) fn from_raw(amps: Vec<C64>, time: f64) -> Self {
        let n_max = amps.len() / 2 - 1;
        QuantumState { amps, n_max, time }
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// Amplitude of |n⟩ ⊗ |m⟩.
    pub fn amp(&self, n: usize, m: usize) -> C64 {
        self.amps[basis_index(n, m)]
    }

    /// Σ_{n ≥ n_max − 2} P(n)
    pub fn tail_mass(&self) -> f64 {
        let start = self.n_max.saturating_sub(2);
        (start..=self.n_max)
            .map(|n| self.amp(n, 0).norm_sqr() + self.amp(n, 1).norm_sqr())
            .sum()
    }
}

/// Spin-1/2 eigenstate of `axis · S` with eigenvalue ±1/2, as (up, down)
/// amplitudes.
pub fn spin_eigenstate(axis: FieldVector, sign: SpinSign) -> Result<[C64; 2]> {
    let r = axis.norm();
    if !(r > 0.0 && r.is_finite()) {
        return Err(BoostError::InvalidParameter(
            "spin axis must be a finite nonzero vector".into(),
        ));
    }
    let (x, y, z) = (axis.x / r, axis.y / r, axis.z / r);
    // Eigenvectors of [[z, x - iy], [x + iy, -z]]. Pick the representation
    // that stays well conditioned near either pole.
    let transverse = C64::new(x, y);
    let v = match sign {
        SpinSign::Plus => {
            if z > -0.5 {
                [C64::from(1.0 + z), transverse]
            } else {
                [transverse.conj(), C64::from(1.0 - z)]
            }
        }
        SpinSign::Minus => {
            if z > -0.5 {
                [-transverse.conj(), C64::from(1.0 + z)]
            } else {
                [C64::from(1.0 - z), -transverse]
            }
        }
    };
    let nrm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    Ok([v[0] / nrm, v[1] / nrm])
}

/// ⟨n|α⟩ for n = 0..=n_max, including the e^{−|α|²/2} prefactor.
/// Evaluated in log space so large n and |α| do not overflow.
pub(crate) fn coherent_overlaps(alpha: C64, n_max: usize) -> Vec<C64> {
    let r = alpha.norm();
    let phase = alpha.arg();
    if r == 0.0 {
        let mut v = vec![ZERO; n_max + 1];
        v[0] = C64::from(1.0);
        return v;
    }
    let lnr = r.ln();
    let mut lnfact = 0.0;
    (0..=n_max)
        .map(|n| {
            if n > 0 {
                lnfact += (n as f64).ln();
            }
            let mag = (n as f64 * lnr - 0.5 * lnfact - 0.5 * r * r).exp();
            C64::from_polar(mag, n as f64 * phase)
        })
        .collect()
}

fn check_mass(alpha_abs: f64, p: &ModelParams) -> Result<()> {
    let needed = alpha_abs * alpha_abs + 6.0 * alpha_abs;
    if needed > p.n_max as f64 {
        return Err(BoostError::TruncationOverflow { needed, n_max: p.n_max });
    }
    Ok(())
}

/// Fock state |n0⟩.
pub fn make_fock(n0: usize, p: &ModelParams) -> Result<CavityState> {
    if n0 > p.n_max {
        return Err(BoostError::TruncationOverflow {
            needed: n0 as f64,
            n_max: p.n_max,
        });
    }
    let mut amps = vec![ZERO; p.n_max + 1];
    amps[n0] = C64::from(1.0);
    CavityState::from_amplitudes(amps)
}

/// Coherent state |α⟩, renormalized after truncation.
pub fn make_coherent(alpha: C64, p: &ModelParams) -> Result<CavityState> {
    check_mass(alpha.norm(), p)?;
    CavityState::from_amplitudes(coherent_overlaps(alpha, p.n_max))
}

/// Even cat state ∝ |α⟩ + |−α⟩ for real α, renormalized after truncation.
pub fn make_cat(alpha: f64, p: &ModelParams) -> Result<CavityState> {
    check_mass(alpha.abs(), p)?;
    CavityState::from_amplitudes(cat_amplitudes(alpha, p.n_max))
}

/// Unnormalized |α⟩ + |−α⟩: only even levels survive.
pub(crate) fn cat_amplitudes(alpha: f64, n_max: usize) -> Vec<C64> {
    let mut v = coherent_overlaps(C64::from(alpha), n_max);
    for (n, z) in v.iter_mut().enumerate() {
        *z = if n % 2 == 0 { *z * 2.0 } else { ZERO };
    }
    v
}

/// Product of `cavity` with the ±S eigenstate of the spin along `axis`.
pub fn with_spin(cavity: &CavityState, axis: FieldVector, sign: SpinSign) -> Result<QuantumState> {
    let spin = spin_eigenstate(axis, sign)?;
    let amps = cavity.amps().iter().flat_map(|c| [c * spin[0], c * spin[1]]).collect();
    QuantumState::from_amplitudes(amps, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1(n_max: usize) -> ModelParams {
        ModelParams {
            n_max,
            ..ModelParams::paper_fig1()
        }
    }

    fn mean_n(c: &CavityState) -> f64 {
        c.fock_distribution()
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    #[test]
    fn fock_is_point_mass() {
        let c = make_fock(10, &fig1(64)).unwrap();
        let p = c.fock_distribution();
        assert_eq!(p[10], 1.0);
        assert_eq!(p.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn fock_beyond_truncation_fails() {
        assert!(matches!(
            make_fock(9, &fig1(8)),
            Err(BoostError::TruncationOverflow { .. })
        ));
    }

    #[test]
    fn coherent_has_poisson_mean() {
        let c = make_coherent(C64::from(10f64.sqrt()), &fig1(64)).unwrap();
        assert!((mean_n(&c) - 10.0).abs() < 1e-6);
        assert!((norm(c.amps()) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coherent_overflow_is_rejected() {
        // |alpha|^2 + 6|alpha| = 10 + 18.97 > 16
        assert!(matches!(
            make_coherent(C64::from(10f64.sqrt()), &fig1(16)),
            Err(BoostError::TruncationOverflow { .. })
        ));
    }

    #[test]
    fn cat_has_even_parity() {
        let c = make_cat(10f64.sqrt(), &fig1(64)).unwrap();
        for (n, p) in c.fock_distribution().iter().enumerate() {
            if n % 2 == 1 {
                assert_eq!(*p, 0.0);
            }
        }
    }

    #[test]
    fn cat_of_zero_is_vacuum() {
        let c = make_cat(0.0, &fig1(8)).unwrap();
        assert!((c.fock_distribution()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn overlaps_stay_finite_for_large_levels() {
        let v = coherent_overlaps(C64::new(5.0, 5.0), 200);
        assert!(v.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        let total: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spin_eigenstates_are_eigenvectors() {
        let axes = [
            FieldVector::new(1.0, 0.0, 0.0),
            FieldVector::new(0.0, 0.0, 1.0),
            FieldVector::new(0.0, 0.0, -1.0),
            FieldVector::new(0.3, -0.8, 0.2),
            FieldVector::new(-0.1, 0.2, -3.0),
            FieldVector::new(0.01, 0.0, 0.9),
        ];
        for axis in axes {
            let r = axis.norm();
            let (x, y, z) = (axis.x / r, axis.y / r, axis.z / r);
            for (sign, ev) in [(SpinSign::Plus, 0.5), (SpinSign::Minus, -0.5)] {
                let v = spin_eigenstate(axis, sign).unwrap();
                // (n . S) v
                let up = 0.5 * (C64::from(z) * v[0] + C64::new(x, -y) * v[1]);
                let dn = 0.5 * (C64::new(x, y) * v[0] - C64::from(z) * v[1]);
                assert!((up - v[0] * ev).norm() < 1e-14, "{axis:?} {sign:?}");
                assert!((dn - v[1] * ev).norm() < 1e-14, "{axis:?} {sign:?}");
            }
        }
    }

    #[test]
    fn product_state_layout() {
        let p = fig1(4);
        let psi = with_spin(
            &make_fock(2, &p).unwrap(),
            FieldVector::new(1.0, 0.0, 0.0),
            SpinSign::Plus,
        )
        .unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((psi.amp(2, 0) - C64::from(h)).norm() < 1e-15);
        assert!((psi.amp(2, 1) - C64::from(h)).norm() < 1e-15);
        assert_eq!(psi.dim(), 10);
    }
}
