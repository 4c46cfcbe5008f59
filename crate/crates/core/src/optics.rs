//! The three physical primitives acting on Fock vectors: a two-mode
//! squeezer, a beamsplitter, and a photon-loss channel.
//!
//! Conventions (all coefficients real):
//! - beamsplitter, subtraction convention: `â_a† → t·b̂_a† + r·b̂_b†`,
//!   `â_b† → t·b̂_b† − r·b̂_a†`;
//! - symmetric beamsplitter: the same map at `t = r = 1/√2`;
//! - squeezer: `e^{Γ â_s† â_i†} · C^{−(n̂_s+n̂_i+1)} · e^{−Γ â_s â_i}` with
//!   `Γ = tanh g`, `C = cosh g`, applied right to left as truncated series;
//! - loss of efficiency η: subtraction-convention beamsplitter with
//!   `t = √η` coupling the mode to a vacuum ancilla.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockVector, ModeLabel};
use crate::math::{ln_factorials, pascal_triangle, powers};

/// Tail threshold used by [`auto_series_cutoff`]: the pair-creation series is
/// truncated once the uniform bound on a term falls below this value.
pub const SERIES_TAIL_THRESHOLD: f64 = 1e-14;

/// Two-mode squeezer strength and series order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParams {
    g: f64,
    j_max: usize,
}

impl SqueezeParams {
    /// `g ≥ 0` is the squeezing parameter; the pair-creation series is
    /// evaluated up to order `j_max ≥ 1` (it also stops on its own once a
    /// term vanishes inside the truncated space).
    pub fn new(g: f64, j_max: usize) -> Result<Self> {
        if !g.is_finite() || g < 0.0 {
            return Err(Error::InvalidParams(format!(
                "squeezing parameter must be finite and ≥ 0, got {g}"
            )));
        }
        if j_max == 0 {
            return Err(Error::InvalidParams("series cutoff must be ≥ 1".into()));
        }
        Ok(SqueezeParams { g, j_max })
    }

    /// Series order from [`auto_series_cutoff`] for states capped at `cap`.
    pub fn with_auto_cutoff(g: f64, cap: usize) -> Result<Self> {
        Self::new(g, auto_series_cutoff(g, cap))
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    /// `Γ = tanh g`.
    pub fn gamma(&self) -> f64 {
        self.g.tanh()
    }

    /// `C = cosh g`.
    pub fn c_factor(&self) -> f64 {
        self.g.cosh()
    }
}

/// Smallest series order `j` at which `Γ^j/j! · √(cap!)` — a uniform bound on
/// the pair-creation term over the capped subspace — drops below
/// [`SERIES_TAIL_THRESHOLD`]. Evaluated in log space so large caps are safe.
pub fn auto_series_cutoff(g: f64, cap: usize) -> usize {
    let gamma = g.tanh();
    if gamma <= 0.0 {
        return 1;
    }
    let lnf = ln_factorials(cap.max(1) + 1024);
    let ln_gamma_factor = gamma.ln();
    let half_ln_cap_fact = 0.5 * lnf[cap.max(1)];
    for j in 1..=1024 {
        let ln_bound = j as f64 * ln_gamma_factor - lnf[j] + half_ln_cap_fact;
        if ln_bound < SERIES_TAIL_THRESHOLD.ln() {
            return j;
        }
    }
    1024
}

/// Beamsplitter amplitude coefficients with `t² + r² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsParams {
    t: f64,
    r: f64,
}

impl BsParams {
    pub fn new(t: f64, r: f64) -> Result<Self> {
        if !(t.is_finite() && r.is_finite()) || t <= 0.0 || t > 1.0 || r < 0.0 || r >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "beamsplitter needs t ∈ (0,1], r ∈ [0,1), got t={t}, r={r}"
            )));
        }
        if (t * t + r * r - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "beamsplitter coefficients must satisfy t²+r²=1, got {}",
                t * t + r * r
            )));
        }
        Ok(BsParams { t, r })
    }

    /// `r = √(1−t²)`.
    pub fn from_transmittance(t: f64) -> Result<Self> {
        if !t.is_finite() || t <= 0.0 || t > 1.0 {
            return Err(Error::InvalidParams(format!(
                "transmittance must lie in (0,1], got {t}"
            )));
        }
        Self::new(t, (1.0 - t * t).max(0.0).sqrt())
    }

    /// 50:50 coefficients `t = r = 1/√2`.
    pub fn balanced() -> Self {
        BsParams {
            t: std::f64::consts::FRAC_1_SQRT_2,
            r: std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

/// Which coefficient set a [`beamsplitter`] call uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsConvention {
    /// Weakly reflecting tap: coefficients taken from the [`BsParams`].
    Subtraction,
    /// Balanced mixer: requires `t = r = 1/√2` (same sign layout).
    Symmetric,
}

/// Two-mode squeezer on `(signal, idler)`.
///
/// Applies the three disentangled factors right to left. The annihilation
/// series terminates exactly; the creation series runs to `p.j_max` or until
/// a term vanishes inside the truncated space. Population pushed above a cap
/// is added to the leak accumulator via the exact norm deficit (see
/// [`two_mode_squeeze_with_deficit`]). Orders beyond `j_max` are not
/// evaluated: the caller either chose `j_max` so their bound is negligible
/// (see [`auto_series_cutoff`]) or knows a downstream projection removes
/// them.
pub fn two_mode_squeeze(
    state: &FockVector,
    p: &SqueezeParams,
    signal: ModeLabel,
    idler: ModeLabel,
) -> Result<FockVector> {
    let (mut out, deficit) = two_mode_squeeze_with_deficit(state, p, signal, idler)?;
    out.add_leak(deficit);
    Ok(out)
}

/// Squeezer kernel returning `(state, norm deficit)` with the deficit not
/// yet folded into the leak accumulator.
///
/// The full three-factor product is unitary, the computation inside the caps
/// is exact, and pair creation only raises occupations — a component that
/// leaves the truncated box never returns. The output therefore equals the
/// exact infinite-space result projected back onto the box, and the deficit
/// `‖in‖² − ‖out‖²` (clamped at zero) is exactly the dropped population when
/// the series terminates naturally, up to the `j_max` tail bound otherwise.
/// Callers that post-select afterwards may weight the deficit by the largest
/// factor a projection can retain instead of charging it in full.
pub(crate) fn two_mode_squeeze_with_deficit(
    state: &FockVector,
    p: &SqueezeParams,
    signal: ModeLabel,
    idler: ModeLabel,
) -> Result<(FockVector, f64)> {
    if signal == idler {
        return Err(Error::DuplicateMode(signal));
    }
    let ax_s = state.axis_of(signal)?;
    let ax_i = state.axis_of(idler)?;
    let gamma = p.gamma();
    let one = Complex64::new(1.0, 0.0);
    let norm_in = state.norm_sqr();

    // e^{−Γ â_s â_i}: nilpotent on the truncated space.
    let mut acc = state.clone();
    if gamma > 0.0 {
        let j_stop = state.dims()[ax_s].min(state.dims()[ax_i]);
        let mut term = state.clone();
        term.set_leak(0.0);
        for j in 1..=j_stop {
            term = term
                .apply_annihilation(signal)?
                .apply_annihilation(idler)?;
            term.scale(Complex64::new(-gamma / j as f64, 0.0));
            if term.norm_sqr() == 0.0 {
                break;
            }
            acc = acc.add_scaled(&term, one)?;
        }
    }

    // C^{−(n̂_s + n̂_i + 1)}
    apply_joint_number_power(&mut acc, ax_s, ax_i, p.c_factor());

    // e^{Γ â_s† â_i†}
    if gamma > 0.0 {
        let mut term = acc.clone();
        term.set_leak(0.0);
        for j in 1..=p.j_max {
            term = term.apply_creation(signal)?.apply_creation(idler)?;
            term.scale(Complex64::new(gamma / j as f64, 0.0));
            term.set_leak(0.0);
            acc = acc.add_scaled(&term, one)?;
            if term.norm_sqr() == 0.0 {
                break;
            }
        }
    }
    let deficit = (norm_in - acc.norm_sqr()).max(0.0);
    Ok((acc, deficit))
}

/// Multiply each amplitude by `base^{−(n_a + n_b + 1)}`.
fn apply_joint_number_power(state: &mut FockVector, ax_a: usize, ax_b: usize, base: f64) {
    let dims = state.dims().to_vec();
    let (d_a, d_b) = (dims[ax_a], dims[ax_b]);
    let (s_a, s_b) = (state.stride(ax_a), state.stride(ax_b));
    let factors: Vec<f64> = (0..d_a + d_b - 1)
        .map(|k| base.powi(-(k as i32 + 1)))
        .collect();
    let bases = plane_bases(&dims, ax_a, ax_b);
    let amps = state.amps_mut();
    for base_off in bases {
        for n_a in 0..d_a {
            for n_b in 0..d_b {
                amps[base_off + n_a * s_a + n_b * s_b] *= factors[n_a + n_b];
            }
        }
    }
}

/// Flat offsets of every index tuple with the two given axes at occupation 0.
fn plane_bases(dims: &[usize], ax_a: usize, ax_b: usize) -> Vec<usize> {
    let strides: Vec<usize> = (0..dims.len())
        .map(|i| dims[i + 1..].iter().product())
        .collect();
    let mut bases = vec![0usize];
    for (i, &d) in dims.iter().enumerate() {
        if i == ax_a || i == ax_b {
            continue;
        }
        let mut next = Vec::with_capacity(bases.len() * d);
        for &b in &bases {
            for n in 0..d {
                next.push(b + n * strides[i]);
            }
        }
        bases = next;
    }
    bases
}

/// Beamsplitter mixing modes `a` and `b`.
///
/// The transform is block-diagonal in the total photon number `m = n_a + n_b`
/// and is applied sector by sector. Output components that do not fit the
/// caps are dropped coherently and their squared norm added to the leak
/// accumulator.
pub fn beamsplitter(
    state: &FockVector,
    p: &BsParams,
    a: ModeLabel,
    b: ModeLabel,
    convention: BsConvention,
) -> Result<FockVector> {
    if convention == BsConvention::Symmetric && (p.t - p.r).abs() > 1e-12 {
        return Err(Error::InvalidParams(format!(
            "symmetric convention requires t = r = 1/√2, got t={}, r={}",
            p.t, p.r
        )));
    }
    bs_transform_signed(state, a, b, p.t, p.r, 1.0)
}

/// Photon-loss channel of efficiency `η` on `mode`, implemented as a
/// `t = √η` beamsplitter into `loss_mode` (which must be in vacuum).
/// Projecting `loss_mode` onto `k` afterwards yields the Kraus branch in
/// which `k` photons were lost.
pub fn loss_channel(
    state: &FockVector,
    eta: f64,
    mode: ModeLabel,
    loss_mode: ModeLabel,
) -> Result<FockVector> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParams(format!(
            "efficiency must lie in [0,1], got {eta}"
        )));
    }
    let ax_loss = state.axis_of(loss_mode)?;
    let dist = state.occupation_distribution(loss_mode)?;
    if dist[1..].iter().any(|&w| w != 0.0) {
        return Err(Error::LossModeNotVacuum(loss_mode));
    }
    let _ = ax_loss;
    bs_transform_signed(state, mode, loss_mode, eta.sqrt(), (1.0 - eta).max(0.0).sqrt(), 1.0)
}

/// Amplitude of `|n,n⟩` in the two-mode squeezed vacuum: `tanhⁿ(g)/cosh(g)`.
pub fn tmsv_reference_amplitude(n: usize, g: f64) -> f64 {
    g.tanh().powi(n as i32) / g.cosh()
}

/// Beamsplitter kernel with an explicit reflected-port sign:
/// `â_a† → t·b̂_a† + sign·r·b̂_b†`, `â_b† → t·b̂_b† − sign·r·b̂_a†`.
///
/// The sign is a pure convention (a phase on the reflected port); outputs for
/// the two choices differ only by `(−1)^{n_b}` when port `b` starts in
/// vacuum, which no herald probability can see. Exposed crate-internally so
/// a test can assert exactly that.
pub(crate) fn bs_transform_signed(
    state: &FockVector,
    a: ModeLabel,
    b: ModeLabel,
    t: f64,
    r: f64,
    sign: f64,
) -> Result<FockVector> {
    if a == b {
        return Err(Error::DuplicateMode(a));
    }
    let ax_a = state.axis_of(a)?;
    let ax_b = state.axis_of(b)?;
    let dims = state.dims().to_vec();
    let (d_a, d_b) = (dims[ax_a], dims[ax_b]);
    let (s_a, s_b) = (state.stride(ax_a), state.stride(ax_b));
    let max_m = d_a + d_b - 2;

    let lnf = ln_factorials(max_m);
    let binom = pascal_triangle(max_m);
    let t_pow = powers(t, max_m);
    let r_pow = powers(r, max_m);

    let mut out = state.clone();
    let mut extra_leak = 0.0;
    {
        let in_amps: Vec<Complex64> = state.amplitudes().to_vec();
        let out_amps = out.amps_mut();
        let mut sector = vec![Complex64::new(0.0, 0.0); max_m + 1];
        for base in plane_bases(&dims, ax_a, ax_b) {
            for m in 0..=max_m {
                let lo = m.saturating_sub(d_b - 1);
                let hi = (d_a - 1).min(m);
                let mut any = false;
                for x in sector.iter_mut().take(m + 1) {
                    *x = Complex64::new(0.0, 0.0);
                }
                for m_a in lo..=hi {
                    let m_b = m - m_a;
                    let amp = in_amps[base + m_a * s_a + m_b * s_b];
                    if amp.norm_sqr() == 0.0 {
                        continue;
                    }
                    any = true;
                    let ln_in = lnf[m_a] + lnf[m_b];
                    for (n_a, slot) in sector.iter_mut().enumerate().take(m + 1) {
                        let n_b = m - n_a;
                        let p_lo = n_a.saturating_sub(m_b);
                        let p_hi = m_a.min(n_a);
                        let mut sum = 0.0;
                        for p in p_lo..=p_hi {
                            let q = n_a - p;
                            let refl = m_a - p + q;
                            let mut term =
                                binom[m_a][p] * binom[m_b][q] * t_pow[2 * p + m_b - n_a] * r_pow[refl];
                            if q % 2 == 1 {
                                term = -term;
                            }
                            if sign < 0.0 && refl % 2 == 1 {
                                term = -term;
                            }
                            sum += term;
                        }
                        let coeff = sum * (0.5 * (lnf[n_a] + lnf[n_b] - ln_in)).exp();
                        *slot += amp * coeff;
                    }
                }
                if !any {
                    // still must clear stale outputs in this sector
                    for m_a in lo..=hi {
                        out_amps[base + m_a * s_a + (m - m_a) * s_b] = Complex64::new(0.0, 0.0);
                    }
                    continue;
                }
                for (n_a, &val) in sector.iter().enumerate().take(m + 1) {
                    let n_b = m - n_a;
                    if n_a < d_a && n_b < d_b {
                        out_amps[base + n_a * s_a + n_b * s_b] = val;
                    } else {
                        extra_leak += val.norm_sqr();
                    }
                }
            }
        }
    }
    out.add_leak(extra_leak);
    Ok(out)
}
