//! Input-state families for the signal mode: coherent states, even cat
//! states, squeezed vacuum, and one arm of a two-mode squeezed vacuum kept
//! together with its companion mode.
//!
//! All families are built at unit norm on a finite cap; the population the
//! cap cuts off is recorded in the leak accumulator and must be below
//! [`INPUT_TAIL_TOLERANCE`].

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockVector, ModeLabel};
use crate::math::ln_factorials;

/// Largest population a cap may cut off an input state; above this
/// [`make_input`] refuses with [`Error::CapTooSmall`].
pub const INPUT_TAIL_TOLERANCE: f64 = 1e-10;

/// Tail target used by [`InputFamily::auto_capped`].
pub const AUTO_CAP_TAIL: f64 = 1e-12;

/// The four supported input families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    /// `|α⟩` with real amplitude `parameter ≥ 0` (times the family phase).
    Coherent,
    /// Even cat `∝ |α⟩ + |−α⟩`.
    CatPlus,
    /// Single-mode squeezed vacuum with squeezing parameter `s ≥ 0`,
    /// position-squeezed at zero phase.
    SqueezedVacuum,
    /// One arm of a two-mode squeezed vacuum; the companion arm is kept as
    /// an extra mode so joint fidelities remain meaningful.
    TmsvHalf,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FamilyKind::Coherent => "coherent",
            FamilyKind::CatPlus => "cat_plus",
            FamilyKind::SqueezedVacuum => "squeezed_vacuum",
            FamilyKind::TmsvHalf => "tmsv_half",
        };
        f.write_str(s)
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coherent" => Ok(FamilyKind::Coherent),
            "cat_plus" => Ok(FamilyKind::CatPlus),
            "squeezed_vacuum" => Ok(FamilyKind::SqueezedVacuum),
            "tmsv_half" => Ok(FamilyKind::TmsvHalf),
            other => Err(Error::InvalidParams(format!(
                "unknown input family `{other}`; expected coherent, cat_plus, \
                 squeezed_vacuum or tmsv_half"
            ))),
        }
    }
}

/// A fully specified input state: family, real strength parameter, signal
/// cap, and an overall optical phase `φ` multiplying the family amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputFamily {
    pub kind: FamilyKind,
    pub parameter: f64,
    pub cap: usize,
    pub phase: f64,
}

impl InputFamily {
    pub fn new(kind: FamilyKind, parameter: f64, cap: usize) -> Result<Self> {
        if !parameter.is_finite() || parameter < 0.0 {
            return Err(Error::InvalidParams(format!(
                "family parameter must be finite and ≥ 0, got {parameter}"
            )));
        }
        Ok(InputFamily {
            kind,
            parameter,
            cap,
            phase: 0.0,
        })
    }

    pub fn with_phase(mut self, phase: f64) -> Result<Self> {
        if !phase.is_finite() {
            return Err(Error::InvalidParams(format!(
                "phase must be finite, got {phase}"
            )));
        }
        self.phase = phase;
        Ok(self)
    }

    /// The family at the smallest cap whose cut-off population is below
    /// [`AUTO_CAP_TAIL`].
    pub fn auto_capped(kind: FamilyKind, parameter: f64) -> Result<Self> {
        let f = Self::new(kind, parameter, 0)?;
        let mut cum = 0.0;
        for (n, p) in occupation_probabilities(kind, parameter)
            .take(4097)
            .enumerate()
        {
            cum += p;
            if 1.0 - cum < AUTO_CAP_TAIL {
                return Ok(InputFamily { cap: n, ..f });
            }
        }
        Err(Error::CapTooSmall {
            detail: format!("{kind} state with parameter {parameter} needs a cap above 4096"),
            dropped: 1.0 - cum,
            tolerance: AUTO_CAP_TAIL,
        })
    }
}

/// Signal-mode occupation probabilities of an untruncated family member,
/// in increasing occupation order. Stable recursions, no factorials.
fn occupation_probabilities(kind: FamilyKind, parameter: f64) -> impl Iterator<Item = f64> {
    let a2 = parameter * parameter;
    let even_only = matches!(kind, FamilyKind::CatPlus | FamilyKind::SqueezedVacuum);
    let mut p = match kind {
        FamilyKind::Coherent => (-a2).exp(),
        FamilyKind::CatPlus => 2.0 * (-a2).exp() / (1.0 + (-2.0 * a2).exp()),
        FamilyKind::SqueezedVacuum => 1.0 / parameter.cosh(),
        FamilyKind::TmsvHalf => 1.0 / parameter.cosh().powi(2),
    };
    let th2 = parameter.tanh().powi(2);
    let mut n = 0usize;
    std::iter::from_fn(move || {
        if even_only && n % 2 == 1 {
            n += 1;
            return Some(0.0);
        }
        let out = p;
        p *= match kind {
            // Poisson: p_{n+1} = p_n · α²/(n+1)
            FamilyKind::Coherent => a2 / (n as f64 + 1.0),
            // even Poisson: p_{n+2} = p_n · α⁴/((n+1)(n+2))
            FamilyKind::CatPlus => a2 * a2 / ((n as f64 + 1.0) * (n as f64 + 2.0)),
            // p_{n+2} = p_n · tanh²s · (n+1)/(n+2)
            FamilyKind::SqueezedVacuum => th2 * (n as f64 + 1.0) / (n as f64 + 2.0),
            // thermal marginal: p_{n+1} = p_n · tanh²s
            FamilyKind::TmsvHalf => th2,
        };
        n += 1;
        Some(out)
    })
}

/// Build the input state at unit norm.
///
/// Single-mode families live on the signal mode; [`FamilyKind::TmsvHalf`]
/// lives on (signal, companion) with both modes at `f.cap`. The population
/// beyond the cap becomes the leak; if it reaches
/// [`INPUT_TAIL_TOLERANCE`] the cap is rejected.
pub fn make_input(f: &InputFamily) -> Result<FockVector> {
    let cap = f.cap;
    let a = f.parameter;
    let lnf = ln_factorials(2 * cap + 2);
    let phase = |k: f64| Complex64::from_polar(1.0, k * f.phase);

    let state = match f.kind {
        FamilyKind::Coherent => {
            let mut amps = vec![Complex64::new(0.0, 0.0); cap + 1];
            amps[0] = Complex64::new((-0.5 * a * a).exp(), 0.0);
            if a > 0.0 {
                for n in 1..=cap {
                    let ln_mag = -0.5 * a * a + n as f64 * a.ln() - 0.5 * lnf[n];
                    amps[n] = ln_mag.exp() * phase(n as f64);
                }
            }
            FockVector::from_amplitudes(ModeLabel::S, amps)?
        }
        FamilyKind::CatPlus => {
            // 2N e^{−α²/2} αⁿ/√n! on even n, N = 1/√(2(1 + e^{−2α²}))
            let norm = 1.0 / (2.0 * (1.0 + (-2.0 * a * a).exp())).sqrt();
            let mut amps = vec![Complex64::new(0.0, 0.0); cap + 1];
            amps[0] = Complex64::new(2.0 * norm * (-0.5 * a * a).exp(), 0.0);
            if a > 0.0 {
                for n in (2..=cap).step_by(2) {
                    let ln_mag = (2.0 * norm).ln() - 0.5 * a * a + n as f64 * a.ln() - 0.5 * lnf[n];
                    amps[n] = ln_mag.exp() * phase(n as f64);
                }
            }
            FockVector::from_amplitudes(ModeLabel::S, amps)?
        }
        FamilyKind::SqueezedVacuum => {
            // (1/√cosh s)(−e^{2iφ} tanh s)^m √((2m)!)/(2^m m!) on n = 2m
            let mut amps = vec![Complex64::new(0.0, 0.0); cap + 1];
            amps[0] = Complex64::new(1.0 / a.cosh().sqrt(), 0.0);
            if a > 0.0 {
                let ln_th = a.tanh().ln();
                for m in 1..=(cap / 2) {
                    let ln_mag = -0.5 * a.cosh().ln() + m as f64 * (ln_th - 2.0_f64.ln())
                        + 0.5 * lnf[2 * m]
                        - lnf[m];
                    let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
                    amps[2 * m] = sign * ln_mag.exp() * phase(2.0 * m as f64);
                }
            }
            FockVector::from_amplitudes(ModeLabel::S, amps)?
        }
        FamilyKind::TmsvHalf => {
            // (e^{2iφ} tanh s)ⁿ / cosh s on |n,n⟩ of (signal, companion)
            let mut v = FockVector::zeros(&[(ModeLabel::S, cap), (ModeLabel::Comp, cap)])?;
            let amps = v.amps_mut();
            amps[0] = Complex64::new(1.0 / a.cosh(), 0.0);
            if a > 0.0 {
                let ln_th = a.tanh().ln();
                for n in 1..=cap {
                    let ln_mag = -a.cosh().ln() + n as f64 * ln_th;
                    amps[n * (cap + 1) + n] = ln_mag.exp() * phase(2.0 * n as f64);
                }
            }
            v
        }
    };

    let tail = (1.0 - state.norm_sqr()).max(0.0);
    if tail >= INPUT_TAIL_TOLERANCE {
        return Err(Error::CapTooSmall {
            detail: format!(
                "{} state with parameter {} does not fit a cap of {}",
                f.kind, f.parameter, f.cap
            ),
            dropped: tail,
            tolerance: INPUT_TAIL_TOLERANCE,
        });
    }
    let (mut state, _) = state.normalize()?;
    state.set_leak(tail);
    Ok(state)
}

/// Mean occupation of one mode, `Σ n·P(n)`, for a state of any norm.
pub fn mean_photon_number(state: &FockVector, mode: ModeLabel) -> Result<f64> {
    let dist = state.occupation_distribution(mode)?;
    let total: f64 = dist.iter().sum();
    if total < crate::fock::ZERO_NORM_THRESHOLD {
        return Err(Error::ZeroNormState { norm_sqr: total });
    }
    Ok(dist
        .iter()
        .enumerate()
        .map(|(n, w)| n as f64 * w)
        .sum::<f64>()
        / total)
}

/// The family parameter giving signal-mode mean occupation `nbar`.
///
/// Closed forms: `√n̄` for coherent, `asinh(√n̄)` for squeezed vacuum and the
/// two-mode squeezed arm. The even cat satisfies `n̄ = α²·tanh(α²)`, solved
/// by bisection.
pub fn parameter_for_nbar(kind: FamilyKind, nbar: f64) -> Result<f64> {
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(Error::InvalidParams(format!(
            "mean occupation must be finite and ≥ 0, got {nbar}"
        )));
    }
    if nbar == 0.0 {
        return Ok(0.0);
    }
    Ok(match kind {
        FamilyKind::Coherent => nbar.sqrt(),
        FamilyKind::SqueezedVacuum | FamilyKind::TmsvHalf => nbar.sqrt().asinh(),
        FamilyKind::CatPlus => {
            let f = |x: f64| x * x * (x * x).tanh() - nbar;
            let (mut lo, mut hi) = (0.0, nbar.sqrt() + 2.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    })
}
