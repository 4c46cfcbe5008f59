//! Dense state vectors on a truncated multi-mode Fock space.
//!
//! A [`FockVector`] stores one complex amplitude per occupation tuple, over an
//! explicit list of labelled modes with independent truncation caps. Written
//! population that would land above a cap is never silently lost: every
//! operation adds the squared norm it had to drop to the vector's
//! [`truncation_leak`](FockVector::truncation_leak) accumulator.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Squared-norm threshold below which a vector counts as numerically zero.
pub const ZERO_NORM_THRESHOLD: f64 = 1e-14;

/// Physical roles a mode can play in the simulated circuit.
///
/// `S` is the gated field, `H1/V1` are the internal ancilla rails, `H2/V2`
/// carry the programme qubit, the `L*` labels are loss ancillas attached in
/// front of the corresponding detector, and `Comp` is a passive companion
/// (the un-gated half of a two-mode input).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeLabel {
    S,
    H1,
    V1,
    H2,
    V2,
    LH1,
    LV1,
    LH2,
    LV2,
    Comp,
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ModeLabel::S => "S",
            ModeLabel::H1 => "H1",
            ModeLabel::V1 => "V1",
            ModeLabel::H2 => "H2",
            ModeLabel::V2 => "V2",
            ModeLabel::LH1 => "LH1",
            ModeLabel::LV1 => "LV1",
            ModeLabel::LH2 => "LH2",
            ModeLabel::LV2 => "LV2",
            ModeLabel::Comp => "Comp",
        };
        f.write_str(name)
    }
}

/// Unnormalised state vector on a truncated multi-mode Fock space.
#[derive(Debug, Clone)]
pub struct FockVector {
    modes: Vec<ModeLabel>,
    /// Per-mode dimension (`cap + 1`).
    dims: Vec<usize>,
    /// Row-major amplitudes; the last mode varies fastest.
    amps: Vec<Complex64>,
    leak: f64,
}

impl FockVector {
    /// Vacuum on the given `(mode, cap)` list. Mode order fixes the layout.
    pub fn vacuum(caps: &[(ModeLabel, usize)]) -> Result<Self> {
        let mut v = Self::zeros(caps)?;
        v.amps[0] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    /// All-zero vector with the given layout.
    pub fn zeros(caps: &[(ModeLabel, usize)]) -> Result<Self> {
        let mut modes = Vec::with_capacity(caps.len());
        let mut dims = Vec::with_capacity(caps.len());
        for &(m, cap) in caps {
            if modes.contains(&m) {
                return Err(Error::DuplicateMode(m));
            }
            modes.push(m);
            dims.push(cap + 1);
        }
        let len = dims.iter().product();
        Ok(FockVector {
            modes,
            dims,
            amps: vec![Complex64::new(0.0, 0.0); len],
            leak: 0.0,
        })
    }

    /// Basis ket `|n₁ n₂ …⟩`. `occupations` must list every mode of `caps`
    /// (same order not required).
    pub fn basis_state(occupations: &[(ModeLabel, usize)], caps: &[(ModeLabel, usize)]) -> Result<Self> {
        let mut v = Self::zeros(caps)?;
        if occupations.len() != v.modes.len() {
            return Err(Error::ModeMismatch(format!(
                "{} occupations given for {} modes",
                occupations.len(),
                v.modes.len()
            )));
        }
        let mut idx = vec![usize::MAX; v.modes.len()];
        for &(m, n) in occupations {
            let ax = v.axis_of(m)?;
            if idx[ax] != usize::MAX {
                return Err(Error::DuplicateMode(m));
            }
            if n >= v.dims[ax] {
                return Err(Error::OccupationAboveCap {
                    mode: m,
                    occupation: n,
                    cap: v.dims[ax] - 1,
                });
            }
            idx[ax] = n;
        }
        let flat = v.flat_index(&idx);
        v.amps[flat] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    /// Single-mode vector from explicit amplitudes (`amps[n]` on `|n⟩`).
    pub fn from_amplitudes(mode: ModeLabel, amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidParams("empty amplitude list".into()));
        }
        Ok(FockVector {
            modes: vec![mode],
            dims: vec![amps.len()],
            amps,
            leak: 0.0,
        })
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    /// Truncation cap of `mode`.
    pub fn cap(&self, mode: ModeLabel) -> Result<usize> {
        Ok(self.dims[self.axis_of(mode)?] - 1)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Accumulated squared norm dropped above truncation caps.
    pub fn truncation_leak(&self) -> f64 {
        self.leak
    }

    pub(crate) fn add_leak(&mut self, w: f64) {
        self.leak += w;
    }

    pub(crate) fn set_leak(&mut self, w: f64) {
        self.leak = w;
    }

    /// Amplitude of one occupation tuple (must list every mode).
    pub fn amplitude(&self, occupations: &[(ModeLabel, usize)]) -> Result<Complex64> {
        if occupations.len() != self.modes.len() {
            return Err(Error::ModeMismatch(format!(
                "{} occupations given for {} modes",
                occupations.len(),
                self.modes.len()
            )));
        }
        let mut idx = vec![usize::MAX; self.modes.len()];
        for &(m, n) in occupations {
            let ax = self.axis_of(m)?;
            if n >= self.dims[ax] {
                return Err(Error::OccupationAboveCap {
                    mode: m,
                    occupation: n,
                    cap: self.dims[ax] - 1,
                });
            }
            idx[ax] = n;
        }
        Ok(self.amps[self.flat_index(&idx)])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`. Layouts must match exactly.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        self.check_same_layout(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Unit vector plus the original norm. Errors on numerically zero input.
    /// The leak accumulator is rescaled by the same factor as the population.
    pub fn normalize(&self) -> Result<(Self, f64)> {
        let n2 = self.norm_sqr();
        if n2 < ZERO_NORM_THRESHOLD {
            return Err(Error::ZeroNormState { norm_sqr: n2 });
        }
        let n = n2.sqrt();
        let mut out = self.clone();
        let inv = Complex64::new(1.0 / n, 0.0);
        for a in &mut out.amps {
            *a *= inv;
        }
        out.leak = self.leak / n2;
        Ok((out, n))
    }

    /// Multiply by a scalar. The leak accumulator tracks dropped population,
    /// so it scales with |c|².
    pub fn scale(&mut self, c: Complex64) {
        for a in &mut self.amps {
            *a *= c;
        }
        self.leak *= c.norm_sqr();
    }

    /// `self + c·other`; layouts must match. Leak accumulators combine as
    /// `self.leak + |c|²·other.leak`.
    pub fn add_scaled(&self, other: &Self, c: Complex64) -> Result<Self> {
        self.check_same_layout(other)?;
        let mut out = self.clone();
        for (a, b) in out.amps.iter_mut().zip(&other.amps) {
            *a += c * b;
        }
        out.leak = self.leak + c.norm_sqr() * other.leak;
        Ok(out)
    }

    /// Creation operator `â†` on `mode`. Population pushed above the cap is
    /// dropped and its squared norm (including the `√(n+1)` weight) is added
    /// to the leak accumulator.
    pub fn apply_creation(&self, mode: ModeLabel) -> Result<Self> {
        let ax = self.axis_of(mode)?;
        let dim = self.dims[ax];
        let stride = self.stride(ax);
        let block = stride * dim;
        let mut out = self.clone();
        for base in (0..self.amps.len()).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                // shift up, highest level first
                let top = self.amps[start + (dim - 1) * stride];
                out.leak += top.norm_sqr() * dim as f64;
                for n in (1..dim).rev() {
                    out.amps[start + n * stride] =
                        self.amps[start + (n - 1) * stride] * (n as f64).sqrt();
                }
                out.amps[start] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(out)
    }

    /// Annihilation operator `â` on `mode` (exact on the truncated space).
    pub fn apply_annihilation(&self, mode: ModeLabel) -> Result<Self> {
        let ax = self.axis_of(mode)?;
        let dim = self.dims[ax];
        let stride = self.stride(ax);
        let block = stride * dim;
        let mut out = self.clone();
        for base in (0..self.amps.len()).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                for n in 0..dim - 1 {
                    out.amps[start + n * stride] =
                        self.amps[start + (n + 1) * stride] * ((n + 1) as f64).sqrt();
                }
                out.amps[start + (dim - 1) * stride] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(out)
    }

    /// Tensor product `self ⊗ other` (other's modes become the fast axes).
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        for m in &other.modes {
            if self.modes.contains(m) {
                return Err(Error::DuplicateMode(*m));
            }
        }
        let mut modes = self.modes.clone();
        modes.extend_from_slice(&other.modes);
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut amps = vec![Complex64::new(0.0, 0.0); self.amps.len() * other.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let row = i * other.amps.len();
            for (j, b) in other.amps.iter().enumerate() {
                amps[row + j] = a * b;
            }
        }
        Ok(FockVector {
            modes,
            dims,
            amps,
            leak: self.leak + other.leak,
        })
    }

    /// Project `mode` onto occupation `n` and drop the mode from the layout.
    /// The result is unnormalised (its squared norm is the outcome weight).
    pub fn project_mode(&self, mode: ModeLabel, n: usize) -> Result<Self> {
        let ax = self.axis_of(mode)?;
        let dim = self.dims[ax];
        if n >= dim {
            return Err(Error::OccupationAboveCap {
                mode,
                occupation: n,
                cap: dim - 1,
            });
        }
        let stride = self.stride(ax);
        let block = stride * dim;
        let mut modes = self.modes.clone();
        modes.remove(ax);
        let mut dims = self.dims.clone();
        dims.remove(ax);
        let mut amps = Vec::with_capacity(self.amps.len() / dim);
        for base in (0..self.amps.len()).step_by(block) {
            let start = base + n * stride;
            amps.extend_from_slice(&self.amps[start..start + stride]);
        }
        Ok(FockVector {
            modes,
            dims,
            amps,
            leak: self.leak,
        })
    }

    /// Embed into a larger cap on `mode` (exact, no amplitudes change).
    pub fn grow_cap(&self, mode: ModeLabel, new_cap: usize) -> Result<Self> {
        let ax = self.axis_of(mode)?;
        let old_dim = self.dims[ax];
        let new_dim = new_cap + 1;
        if new_dim < old_dim {
            return Err(Error::InvalidParams(format!(
                "grow_cap cannot shrink mode {mode} from cap {} to {new_cap}",
                old_dim - 1
            )));
        }
        if new_dim == old_dim {
            return Ok(self.clone());
        }
        let mut dims = self.dims.clone();
        dims[ax] = new_dim;
        let mut out = FockVector {
            modes: self.modes.clone(),
            dims,
            amps: vec![Complex64::new(0.0, 0.0); self.amps.len() / old_dim * new_dim],
            leak: self.leak,
        };
        let stride = self.stride(ax);
        let old_block = stride * old_dim;
        let new_block = stride * new_dim;
        for (bi, base) in (0..self.amps.len()).step_by(old_block).enumerate() {
            let nbase = bi * new_block;
            out.amps[nbase..nbase + old_block].copy_from_slice(&self.amps[base..base + old_block]);
        }
        Ok(out)
    }

    /// Discard every component whose total occupation over `modes` exceeds
    /// `budget`, shrinking those axes to `budget + 1` levels.
    ///
    /// This is a projection, not a truncation: the caller asserts that all
    /// later operations conserve the total on `modes` until a projection
    /// fixes it at or below `budget`, so the removed components could never
    /// have reached the selected outcome. The leak accumulator is untouched.
    pub fn retain_total_at_most(&self, modes: &[ModeLabel], budget: usize) -> Result<Self> {
        let mut axes = Vec::with_capacity(modes.len());
        for &m in modes {
            axes.push(self.axis_of(m)?);
        }
        let mut dims = self.dims.clone();
        for &ax in &axes {
            dims[ax] = dims[ax].min(budget + 1);
        }
        let mut out = FockVector {
            modes: self.modes.clone(),
            dims: dims.clone(),
            amps: vec![Complex64::new(0.0, 0.0); dims.iter().product()],
            leak: self.leak,
        };
        let mut idx = vec![0usize; self.dims.len()];
        for (flat, amp) in self.amps.iter().enumerate() {
            if amp.norm_sqr() != 0.0 {
                self.decode(flat, &mut idx);
                let total: usize = axes.iter().map(|&a| idx[a]).sum();
                if total <= budget {
                    let nf = out.flat_index(&idx);
                    out.amps[nf] = *amp;
                }
            }
        }
        Ok(out)
    }

    /// Distribution of the total occupation summed over `modes`
    /// (`out[T]` = population with `Σ n_i = T`).
    pub fn total_occupation_distribution(&self, modes: &[ModeLabel]) -> Result<Vec<f64>> {
        let mut axes = Vec::with_capacity(modes.len());
        for &m in modes {
            axes.push(self.axis_of(m)?);
        }
        let max_total: usize = axes.iter().map(|&a| self.dims[a] - 1).sum();
        let mut dist = vec![0.0; max_total + 1];
        let mut idx = vec![0usize; self.dims.len()];
        for (flat, amp) in self.amps.iter().enumerate() {
            let w = amp.norm_sqr();
            if w != 0.0 {
                self.decode(flat, &mut idx);
                let total: usize = axes.iter().map(|&a| idx[a]).sum();
                dist[total] += w;
            }
        }
        Ok(dist)
    }

    /// Marginal occupation distribution `P(n)` of one mode.
    pub fn occupation_distribution(&self, mode: ModeLabel) -> Result<Vec<f64>> {
        let ax = self.axis_of(mode)?;
        let dim = self.dims[ax];
        let stride = self.stride(ax);
        let block = stride * dim;
        let mut dist = vec![0.0; dim];
        for base in (0..self.amps.len()).step_by(block) {
            for n in 0..dim {
                let start = base + n * stride;
                for off in 0..stride {
                    dist[n] += self.amps[start + off].norm_sqr();
                }
            }
        }
        Ok(dist)
    }

    /// Largest componentwise |difference| against another vector of the same
    /// layout; convenient in tests and verification checks.
    pub fn max_component_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_layout(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub(crate) fn axis_of(&self, mode: ModeLabel) -> Result<usize> {
        self.modes
            .iter()
            .position(|&m| m == mode)
            .ok_or(Error::UnknownMode(mode))
    }

    pub(crate) fn stride(&self, axis: usize) -> usize {
        self.dims[axis + 1..].iter().product()
    }

    pub(crate) fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for (i, &n) in idx.iter().enumerate() {
            flat = flat * self.dims[i] + n;
        }
        flat
    }

    fn decode(&self, mut flat: usize, idx: &mut [usize]) {
        for i in (0..self.dims.len()).rev() {
            idx[i] = flat % self.dims[i];
            flat /= self.dims[i];
        }
    }

    fn check_same_layout(&self, other: &Self) -> Result<()> {
        if self.modes != other.modes || self.dims != other.dims {
            return Err(Error::ModeMismatch(format!(
                "{:?}/{:?} vs {:?}/{:?}",
                self.modes, self.dims, other.modes, other.dims
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOLERANCE: f64 = 1e-12;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_has_unit_amplitude_at_origin() {
        let v = FockVector::vacuum(&[(ModeLabel::S, 3), (ModeLabel::H1, 2)]).unwrap();
        assert_eq!(
            v.amplitude(&[(ModeLabel::S, 0), (ModeLabel::H1, 0)]).unwrap(),
            c(1.0, 0.0)
        );
        assert!((v.norm_sqr() - 1.0).abs() < TOLERANCE);
    }

    #[test]
    fn basis_state_rejects_occupation_above_cap() {
        let err = FockVector::basis_state(&[(ModeLabel::S, 5)], &[(ModeLabel::S, 4)]).unwrap_err();
        assert!(matches!(err, Error::OccupationAboveCap { occupation: 5, cap: 4, .. }));
    }

    #[test]
    fn duplicate_mode_is_rejected() {
        let err = FockVector::vacuum(&[(ModeLabel::S, 2), (ModeLabel::S, 2)]).unwrap_err();
        assert_eq!(err, Error::DuplicateMode(ModeLabel::S));
    }

    #[test]
    fn creation_gives_sqrt_weight() {
        // a†|3⟩ = 2|4⟩
        let v = FockVector::basis_state(&[(ModeLabel::S, 3)], &[(ModeLabel::S, 10)]).unwrap();
        let w = v.apply_creation(ModeLabel::S).unwrap();
        assert!((w.amplitude(&[(ModeLabel::S, 4)]).unwrap() - c(2.0, 0.0)).norm() < TOLERANCE);
        assert_eq!(w.truncation_leak(), 0.0);
    }

    #[test]
    fn creation_at_cap_leaks_full_weight() {
        // a† on cap-saturated |N⟩: zero vector, leak N+1
        let n_cap = 6;
        let v = FockVector::basis_state(&[(ModeLabel::S, n_cap)], &[(ModeLabel::S, n_cap)]).unwrap();
        let w = v.apply_creation(ModeLabel::S).unwrap();
        assert!(w.norm_sqr() < TOLERANCE);
        assert!((w.truncation_leak() - (n_cap + 1) as f64).abs() < TOLERANCE);
    }

    #[test]
    fn annihilation_of_vacuum_is_zero() {
        let v = FockVector::vacuum(&[(ModeLabel::S, 4)]).unwrap();
        let w = v.apply_annihilation(ModeLabel::S).unwrap();
        assert_eq!(w.norm_sqr(), 0.0);
        assert_eq!(w.truncation_leak(), 0.0);
    }

    #[test]
    fn ladder_commutator_is_identity_below_cap() {
        // (a a† − a† a)|n⟩ = |n⟩ for n < cap
        for n in 0..9 {
            let v = FockVector::basis_state(&[(ModeLabel::S, n)], &[(ModeLabel::S, 10)]).unwrap();
            let up_down = v
                .apply_creation(ModeLabel::S)
                .unwrap()
                .apply_annihilation(ModeLabel::S)
                .unwrap();
            let down_up = v
                .apply_annihilation(ModeLabel::S)
                .unwrap()
                .apply_creation(ModeLabel::S)
                .unwrap();
            let comm = up_down.add_scaled(&down_up, c(-1.0, 0.0)).unwrap();
            assert!(comm.max_component_diff(&v).unwrap() < TOLERANCE, "n = {n}");
        }
    }

    #[test]
    fn truncated_coherent_state_has_unit_norm() {
        // ⟨α|α⟩ at α = 1, cap 30: truncation error far below 1e−12
        // amplitude e^{−1/2}·1ⁿ/√n!
        let cap = 30;
        let mut amps = Vec::with_capacity(cap + 1);
        let mut log_fact = 0.0;
        for n in 0..=cap {
            if n > 0 {
                log_fact += (n as f64).ln();
            }
            amps.push(c((-0.5f64).exp() * (-0.5 * log_fact).exp(), 0.0));
        }
        let v = FockVector::from_amplitudes(ModeLabel::S, amps).unwrap();
        assert!((v.inner_product(&v).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inner_product_is_conjugate_linear_in_left_argument() {
        let a = FockVector::from_amplitudes(ModeLabel::S, vec![c(0.3, 0.4), c(0.1, -0.2)]).unwrap();
        let b = FockVector::from_amplitudes(ModeLabel::S, vec![c(-0.5, 0.1), c(0.7, 0.3)]).unwrap();
        let ab = a.inner_product(&b).unwrap();
        let ba = b.inner_product(&a).unwrap();
        assert!((ab - ba.conj()).norm() < TOLERANCE);
    }

    #[test]
    fn projection_slices_the_selected_occupation() {
        // two-mode correlated vector; project second mode
        let mut v = FockVector::zeros(&[(ModeLabel::S, 2), (ModeLabel::V1, 2)]).unwrap();
        let idx01 = 0 * 3 + 1;
        let idx22 = 2 * 3 + 2;
        v.amps_mut()[idx01] = c(0.6, 0.0);
        v.amps_mut()[idx22] = c(0.0, 0.8);
        let p1 = v.project_mode(ModeLabel::V1, 1).unwrap();
        assert_eq!(p1.modes(), &[ModeLabel::S]);
        assert!((p1.amplitude(&[(ModeLabel::S, 0)]).unwrap() - c(0.6, 0.0)).norm() < TOLERANCE);
        assert!((p1.norm_sqr() - 0.36).abs() < TOLERANCE);
        let p2 = v.project_mode(ModeLabel::V1, 2).unwrap();
        assert!((p2.norm_sqr() - 0.64).abs() < TOLERANCE);
    }

    #[test]
    fn projection_outcomes_partition_the_norm() {
        let mut v = FockVector::zeros(&[(ModeLabel::S, 3), (ModeLabel::V1, 3)]).unwrap();
        for (i, a) in v.amps_mut().iter_mut().enumerate() {
            *a = c(0.1 * i as f64, 0.05 * (i as f64 - 3.0));
        }
        let total = v.norm_sqr();
        let sum: f64 = (0..4)
            .map(|n| v.project_mode(ModeLabel::V1, n).unwrap().norm_sqr())
            .sum();
        assert!((sum - total).abs() < TOLERANCE);
    }

    #[test]
    fn tensor_multiplies_norms_and_concatenates_layout() {
        let a = FockVector::from_amplitudes(ModeLabel::S, vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let b = FockVector::from_amplitudes(ModeLabel::H1, vec![c(0.0, 1.0), c(0.5, 0.5)]).unwrap();
        let t = a.tensor(&b).unwrap();
        assert_eq!(t.modes(), &[ModeLabel::S, ModeLabel::H1]);
        assert!((t.norm_sqr() - a.norm_sqr() * b.norm_sqr()).abs() < TOLERANCE);
        let expect = c(0.0, 0.8) * c(0.5, 0.5);
        assert!(
            (t.amplitude(&[(ModeLabel::S, 1), (ModeLabel::H1, 1)]).unwrap() - expect).norm()
                < TOLERANCE
        );
    }

    #[test]
    fn tensor_rejects_shared_mode() {
        let a = FockVector::vacuum(&[(ModeLabel::S, 1)]).unwrap();
        let b = FockVector::vacuum(&[(ModeLabel::S, 1)]).unwrap();
        assert_eq!(a.tensor(&b).unwrap_err(), Error::DuplicateMode(ModeLabel::S));
    }

    #[test]
    fn normalize_returns_unit_vector_and_norm() {
        let v = FockVector::from_amplitudes(ModeLabel::S, vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        let (u, n) = v.normalize().unwrap();
        assert!((n - 5.0).abs() < TOLERANCE);
        assert!((u.norm_sqr() - 1.0).abs() < TOLERANCE);
    }

    #[test]
    fn normalize_rejects_zero_vector() {
        let v = FockVector::zeros(&[(ModeLabel::S, 4)]).unwrap();
        assert!(matches!(v.normalize().unwrap_err(), Error::ZeroNormState { .. }));
    }

    #[test]
    fn grow_cap_preserves_amplitudes() {
        let v = FockVector::from_amplitudes(ModeLabel::S, vec![c(0.1, 0.2), c(0.3, 0.4)]).unwrap();
        let w = v.grow_cap(ModeLabel::S, 5).unwrap();
        assert_eq!(w.cap(ModeLabel::S).unwrap(), 5);
        assert!((w.amplitude(&[(ModeLabel::S, 1)]).unwrap() - c(0.3, 0.4)).norm() < TOLERANCE);
        assert!((w.norm_sqr() - v.norm_sqr()).abs() < TOLERANCE);
    }

    #[test]
    fn retain_total_keeps_low_sectors_and_shrinks_axes() {
        let mut v = FockVector::zeros(&[(ModeLabel::H1, 3), (ModeLabel::H2, 3)]).unwrap();
        for (i, a) in v.amps_mut().iter_mut().enumerate() {
            *a = c(1.0 + i as f64, 0.0);
        }
        let w = v
            .retain_total_at_most(&[ModeLabel::H1, ModeLabel::H2], 1)
            .unwrap();
        assert_eq!(w.cap(ModeLabel::H1).unwrap(), 1);
        assert_eq!(w.cap(ModeLabel::H2).unwrap(), 1);
        // kept: (0,0), (0,1), (1,0); removed: (1,1) and everything higher
        assert!((w.amplitude(&[(ModeLabel::H1, 0), (ModeLabel::H2, 1)]).unwrap() - c(2.0, 0.0))
            .norm()
            < TOLERANCE);
        assert_eq!(
            w.amplitude(&[(ModeLabel::H1, 1), (ModeLabel::H2, 1)]).unwrap(),
            c(0.0, 0.0)
        );
        assert_eq!(w.truncation_leak(), 0.0);
    }

    #[test]
    fn scaling_rescales_leak() {
        let mut v = FockVector::basis_state(&[(ModeLabel::S, 2)], &[(ModeLabel::S, 2)]).unwrap();
        let w = v.apply_creation(ModeLabel::S).unwrap(); // all population dropped, leak 3
        v = w;
        v.scale(c(0.5, 0.0));
        assert!((v.truncation_leak() - 0.75).abs() < TOLERANCE);
        let sum = v.add_scaled(&v.clone(), c(0.0, 2.0)).unwrap();
        assert!((sum.truncation_leak() - (0.75 + 4.0 * 0.75)).abs() < TOLERANCE);
    }

    #[test]
    fn total_occupation_distribution_sums_modes() {
        let mut v = FockVector::zeros(&[(ModeLabel::H1, 2), (ModeLabel::H2, 2)]).unwrap();
        v.amps_mut()[1] = c(0.6, 0.0); // (0,1): total 1
        v.amps_mut()[3] = c(0.0, 0.8); // (1,0): total 1
        v.amps_mut()[8] = c(0.1, 0.0); // (2,2): total 4
        let d = v
            .total_occupation_distribution(&[ModeLabel::H1, ModeLabel::H2])
            .unwrap();
        assert!((d[1] - 1.0).abs() < TOLERANCE);
        assert!((d[4] - 0.01).abs() < TOLERANCE);
        assert_eq!(d[0], 0.0);
    }

    #[test]
    fn occupation_distribution_marginalises() {
        let mut v = FockVector::zeros(&[(ModeLabel::S, 1), (ModeLabel::V1, 1)]).unwrap();
        v.amps_mut()[0] = c(0.5, 0.0); // |0,0⟩
        v.amps_mut()[3] = c(0.5, 0.5); // |1,1⟩
        let d = v.occupation_distribution(ModeLabel::S).unwrap();
        assert!((d[0] - 0.25).abs() < TOLERANCE);
        assert!((d[1] - 0.5).abs() < TOLERANCE);
    }

    #[test]
    fn unknown_mode_is_reported() {
        let v = FockVector::vacuum(&[(ModeLabel::S, 1)]).unwrap();
        assert_eq!(
            v.apply_creation(ModeLabel::H1).unwrap_err(),
            Error::UnknownMode(ModeLabel::H1)
        );
    }
}
