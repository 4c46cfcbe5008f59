//! The heralded programmable gate: parametric amplifier, subtraction tap,
//! dual-rail programme qubit, balanced mixing, detector loss, and
//! photon-number post-selection.
//!
//! # Detector loss without ancilla modes
//!
//! A detector of efficiency `η` preceded by a `√η` beamsplitter into an
//! ancilla, with the detector projecting onto `d` and the ancilla traced as
//! `k` lost photons, acts on the detected mode exactly as the scaled slice
//! projection `⟨d+k| · √(binom(d+k,d) η^d (1−η)^k)`. The pipeline therefore
//! runs the lossless circuit and extracts the whole loss ensemble from the
//! final amplitudes in one pass — no ancilla axes are ever materialized.
//! A test cross-checks this against the explicit ancilla construction.
//!
//! # Truncation strategy
//!
//! Photon number on each detection rail is conserved between its source and
//! its detectors, so components carrying more photons than the detectors
//! plus the modelled loss window can absorb are projected away exactly
//! (they cannot produce the herald within the window) and their residual
//! herald probability — reachable only through more-than-modelled loss — is
//! charged to the leak accumulator via binomial detection bounds. At η = 1
//! every such bound is exactly zero and the pipeline is exact.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockVector, ModeLabel, ZERO_NORM_THRESHOLD};
use crate::math::binomial;
use crate::optics::{
    beamsplitter, two_mode_squeeze_with_deficit, BsConvention, BsParams, SqueezeParams,
};

/// Default pair-creation series order; high enough that detection budgets,
/// not this constant, always decide the effective order.
pub const DEFAULT_SERIES_ORDER: usize = 1024;

/// Default number of lost photons modelled per detection mode when η < 1.
pub const DEFAULT_LOSS_CAP: usize = 4;

/// Default ceiling on unmodelled population, relative to the input norm.
pub const DEFAULT_LEAK_TOLERANCE: f64 = 1e-8;

/// Programme qubit `(h, v)` with `|h|² + |v|² = 1`; realizes the target
/// operation `U = v·â − h·â†` on the signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Qubit {
    h: Complex64,
    v: Complex64,
}

impl Qubit {
    /// Requires normalization within 1e−12.
    pub fn new(h: Complex64, v: Complex64) -> Result<Self> {
        let n2 = h.norm_sqr() + v.norm_sqr();
        if (n2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "programme qubit must be normalized, got |h|²+|v|² = {n2}"
            )));
        }
        Ok(Qubit { h, v })
    }

    /// Rescales `(h, v)` to unit norm.
    pub fn normalized(h: Complex64, v: Complex64) -> Result<Self> {
        let n2 = h.norm_sqr() + v.norm_sqr();
        if n2 < ZERO_NORM_THRESHOLD {
            return Err(Error::ZeroNormState { norm_sqr: n2 });
        }
        let n = n2.sqrt();
        Ok(Qubit { h: h / n, v: v / n })
    }

    /// `U = â` (weighted photon subtraction).
    pub fn subtraction() -> Self {
        Qubit {
            h: Complex64::new(0.0, 0.0),
            v: Complex64::new(1.0, 0.0),
        }
    }

    /// `U = â†` (weighted photon addition).
    pub fn addition() -> Self {
        Qubit {
            h: Complex64::new(-1.0, 0.0),
            v: Complex64::new(0.0, 0.0),
        }
    }

    /// `U = (â + â†)/√2`, the position quadrature up to a constant.
    pub fn position() -> Self {
        let w = std::f64::consts::FRAC_1_SQRT_2;
        Qubit {
            h: Complex64::new(-w, 0.0),
            v: Complex64::new(w, 0.0),
        }
    }

    /// `U = (â − â†)/√2`, the momentum quadrature up to the constant `i√2`
    /// (global phase, invisible to fidelities and probabilities).
    pub fn momentum() -> Self {
        let w = std::f64::consts::FRAC_1_SQRT_2;
        Qubit {
            h: Complex64::new(w, 0.0),
            v: Complex64::new(w, 0.0),
        }
    }

    pub fn h(&self) -> Complex64 {
        self.h
    }

    pub fn v(&self) -> Complex64 {
        self.v
    }
}

/// Photon counts demanded of the four herald detectors, in
/// (H1, V1, H2, V2) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HeraldOutcome {
    pub h1: usize,
    pub v1: usize,
    pub h2: usize,
    pub v2: usize,
}

impl HeraldOutcome {
    pub fn new(h1: usize, v1: usize, h2: usize, v2: usize) -> Self {
        HeraldOutcome { h1, v1, h2, v2 }
    }

    /// The principal post-selection pattern (1,0,0,1).
    pub fn principal() -> Self {
        HeraldOutcome::new(1, 0, 0, 1)
    }

    /// The same pattern with the two rails exchanged; maps the principal
    /// outcome to its partner (0,1,1,0).
    pub fn swapped(&self) -> Self {
        HeraldOutcome::new(self.v1, self.h1, self.v2, self.h2)
    }

    /// Counts in (H1, V1, H2, V2) order.
    pub fn counts(&self) -> [usize; 4] {
        [self.h1, self.v1, self.h2, self.v2]
    }
}

/// Full parameter set of one gate execution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateParams {
    pub squeeze: SqueezeParams,
    pub bs: BsParams,
    pub eta: f64,
    pub herald: HeraldOutcome,
    pub tune_gain: bool,
    /// Lost photons modelled per detection mode when η < 1.
    pub loss_cap: usize,
    /// Ceiling on unmodelled population relative to the input norm.
    pub leak_tolerance: f64,
}

impl GateParams {
    /// Gain-matched parameters at transmittance `t`: `Γ = r/t²`, which
    /// weights the addition and subtraction branches equally.
    pub fn tuned(t: f64) -> Result<Self> {
        let bs = BsParams::from_transmittance(t)?;
        let g = matched_gain(&bs)?;
        Ok(GateParams {
            squeeze: SqueezeParams::new(g, DEFAULT_SERIES_ORDER)?,
            bs,
            eta: 1.0,
            herald: HeraldOutcome::principal(),
            tune_gain: true,
            loss_cap: DEFAULT_LOSS_CAP,
            leak_tolerance: DEFAULT_LEAK_TOLERANCE,
        })
    }

    /// Explicit amplifier gain `g`, independent of the tap coefficients.
    pub fn untuned(t: f64, g: f64) -> Result<Self> {
        Ok(GateParams {
            squeeze: SqueezeParams::new(g, DEFAULT_SERIES_ORDER)?,
            bs: BsParams::from_transmittance(t)?,
            eta: 1.0,
            herald: HeraldOutcome::principal(),
            tune_gain: false,
            loss_cap: DEFAULT_LOSS_CAP,
            leak_tolerance: DEFAULT_LEAK_TOLERANCE,
        })
    }

    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParams(format!(
                "efficiency must lie in [0,1], got {eta}"
            )));
        }
        self.eta = eta;
        Ok(self)
    }

    pub fn with_herald(mut self, herald: HeraldOutcome) -> Self {
        self.herald = herald;
        self
    }

    pub fn with_loss_cap(mut self, loss_cap: usize) -> Self {
        self.loss_cap = loss_cap;
        self
    }

    pub fn with_leak_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !tolerance.is_finite() || tolerance <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "leak tolerance must be positive, got {tolerance}"
            )));
        }
        self.leak_tolerance = tolerance;
        Ok(self)
    }

    pub fn with_series_order(mut self, j_max: usize) -> Result<Self> {
        self.squeeze = SqueezeParams::new(self.squeeze.g(), j_max)?;
        Ok(self)
    }

    /// `Γ = tanh g` of the configured amplifier.
    pub fn gamma(&self) -> f64 {
        self.squeeze.gamma()
    }
}

/// Loss window adequate for a detector efficiency: the smallest number of
/// modelled lost photons per detector such that the neglected deeper-loss
/// orders carry under ~1e−9 probability, `(1−η)^{L+1} < 1e−9`, and never
/// below the default window. At η = 1 no window is needed.
pub fn adaptive_loss_cap(eta: f64) -> usize {
    if eta >= 1.0 {
        return 0;
    }
    let per_photon = -(1.0 - eta).ln();
    if per_photon <= 0.0 {
        return DEFAULT_LOSS_CAP;
    }
    let needed = (9.0 * std::f64::consts::LN_10 / per_photon).ceil() as usize;
    needed.saturating_sub(1).max(DEFAULT_LOSS_CAP)
}

/// The amplifier gain `g` with `tanh g = r/t²`; requires `r < t²`.
pub fn matched_gain(bs: &BsParams) -> Result<f64> {
    let ratio = bs.r() / (bs.t() * bs.t());
    if ratio >= 1.0 {
        return Err(Error::InvalidParams(format!(
            "gain matching needs r/t² < 1, got {ratio} (t = {})",
            bs.t()
        )));
    }
    Ok(ratio.atanh())
}

/// Output of a lossless gate execution.
#[derive(Debug, Clone)]
pub struct GateResult {
    /// Herald-conditioned signal state (and companion mode when present),
    /// unnormalized: its squared norm is the success probability.
    pub state: FockVector,
    pub success_probability: f64,
    /// Bound on the population the truncation strategy could not model.
    pub truncation_leak: f64,
}

/// One member of the loss ensemble: the conditional (unnormalized) state
/// given that exactly `lost[i]` photons were lost at detector `i`.
#[derive(Debug, Clone)]
pub struct LossyMember {
    /// Lost photon counts in (H1, V1, H2, V2) order.
    pub lost: [usize; 4],
    pub state: FockVector,
}

/// Output of a lossy gate execution: the ensemble over loss patterns, in
/// lexicographic order of `lost`. The conditioned density operator is
/// `Σ |member⟩⟨member|` and the total success probability the sum of the
/// members' squared norms.
#[derive(Debug, Clone)]
pub struct LossyGateResult {
    pub members: Vec<LossyMember>,
    pub success_probability: f64,
    pub truncation_leak: f64,
}

/// Run the lossless gate (η must be 1). See [`run_gate_lossy`] for η < 1.
pub fn run_gate(input: &FockVector, q: &Qubit, p: &GateParams) -> Result<GateResult> {
    if p.eta != 1.0 {
        return Err(Error::InvalidParams(format!(
            "the lossless gate requires η = 1, got {} (use the lossy variant)",
            p.eta
        )));
    }
    let result = run_heralded(input, q, p)?;
    let member = result
        .members
        .into_iter()
        .next()
        .expect("lossless run always produces the zero-loss member");
    let mut state = member.state;
    state.set_leak(result.truncation_leak);
    Ok(GateResult {
        success_probability: state.norm_sqr(),
        truncation_leak: result.truncation_leak,
        state,
    })
}

/// Run the gate with detector efficiency η ∈ (0, 1] and return the loss
/// ensemble. At η = 1 the ensemble has the single zero-loss member and the
/// run is exactly the lossless one.
pub fn run_gate_lossy(input: &FockVector, q: &Qubit, p: &GateParams) -> Result<LossyGateResult> {
    if !(p.eta > 0.0 && p.eta <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "the lossy gate requires η ∈ (0,1], got {}",
            p.eta
        )));
    }
    run_heralded(input, q, p)
}

/// Probability of the configured herald; 0 when the herald is impossible.
/// With `both_outcomes` the rail-swapped pattern is added.
pub fn herald_success_probability(
    input: &FockVector,
    q: &Qubit,
    p: &GateParams,
    both_outcomes: bool,
) -> Result<f64> {
    let success = |params: &GateParams| -> Result<f64> {
        match run_heralded(input, q, params) {
            Ok(r) => Ok(r.success_probability),
            Err(Error::ZeroNormState { .. }) => Ok(0.0),
            Err(e) => Err(e),
        }
    };
    let mut total = success(p)?;
    if both_outcomes {
        let swapped = p.with_herald(p.herald.swapped());
        total += success(&swapped)?;
    }
    Ok(total)
}

/// The target operation `U = v·â − h·â†` applied exactly to the signal mode
/// (identity on any companion mode). Returns the normalized result and the
/// pre-normalization norm.
pub fn ideal_apply(q: &Qubit, input: &FockVector) -> Result<(FockVector, f64)> {
    let cap = input.cap(ModeLabel::S)?;
    let grown = input.grow_cap(ModeLabel::S, cap + 1)?;
    let mut out = grown.apply_annihilation(ModeLabel::S)?;
    out.scale(q.v);
    let raised = grown.apply_creation(ModeLabel::S)?;
    out = out.add_scaled(&raised, -q.h)?;
    out.set_leak(input.truncation_leak());
    let (normalized, norm) = out.normalize()?;
    Ok((normalized, norm))
}

/// Probability that a binomial-loss detector registers `d` clicks from `m`
/// incident photons: `binom(m,d) η^d (1−η)^{m−d}`.
fn detect_weight(m: usize, d: usize, eta: f64) -> f64 {
    if m < d {
        return 0.0;
    }
    binomial(m as u64, d as u64) * eta.powi(d as i32) * (1.0 - eta).powi((m - d) as i32)
}

/// Upper bound on the probability that a rail carrying `total` photons
/// produces `detected` clicks across its two detectors with the rest lost:
/// `Σ_{k1+k2=K} binom(d1+k1,d1)binom(d2+k2,d2) η^D (1−η)^K` summed by the
/// Vandermonde identity to `binom(total+1, detected+1) η^D (1−η)^K`,
/// with `D = detected`, `K = total − detected`.
fn rail_herald_bound(total: usize, detected: usize, eta: f64) -> f64 {
    if total < detected {
        return 0.0;
    }
    binomial((total + 1) as u64, (detected + 1) as u64)
        * eta.powi(detected as i32)
        * (1.0 - eta).powi((total - detected) as i32)
}

/// Project away components whose total occupation on `rail` exceeds
/// `budget`; their herald probability — reachable only through
/// more-than-modelled loss — is charged to the leak accumulator. `may_gain`
/// is the number of photons the rail can still acquire downstream (the
/// programme qubit), which the bound must consider.
fn budget_retain(
    state: FockVector,
    rail: &[ModeLabel],
    budget: usize,
    detected: usize,
    eta: f64,
    may_gain: usize,
) -> Result<FockVector> {
    let dist = state.total_occupation_distribution(rail)?;
    let mut charge = 0.0;
    for (total, w) in dist.iter().enumerate().skip(budget + 1) {
        if *w > 0.0 {
            let bound = (0..=may_gain)
                .map(|e| rail_herald_bound(total + e, detected, eta))
                .fold(0.0, f64::max);
            charge += w * bound;
        }
    }
    let mut out = state.retain_total_at_most(rail, budget)?;
    out.add_leak(charge);
    Ok(out)
}

/// Post-detection window on one herald mode: keep occupations
/// `detected ..= detected + l_cap`. Occupations below `detected` cannot
/// produce the click count (weight exactly zero); occupations above the
/// window would need more than `l_cap` lost photons and are charged to the
/// leak accumulator at their detection-probability bound.
fn window_retain(
    state: FockVector,
    mode: ModeLabel,
    detected: usize,
    eta: f64,
    l_cap: usize,
) -> Result<FockVector> {
    let dist = state.occupation_distribution(mode)?;
    let hi = detected + l_cap;
    let mut charge = 0.0;
    for (m, w) in dist.iter().enumerate().skip(hi + 1) {
        if *w > 0.0 {
            charge += w * detect_weight(m, detected, eta);
        }
    }
    let mut out = state.retain_total_at_most(&[mode], hi)?;
    out.add_leak(charge);
    if detected > 0 {
        let ax = out.axis_of(mode)?;
        let stride = out.stride(ax);
        let dim = out.dims()[ax];
        let block = stride * dim;
        let zero_levels = detected.min(dim);
        let len = out.amplitudes().len();
        let amps = out.amps_mut();
        for base in (0..len).step_by(block) {
            for a in amps[base..base + zero_levels * stride].iter_mut() {
                *a = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(out)
}

fn grow_to(state: FockVector, mode: ModeLabel, cap: usize) -> Result<FockVector> {
    if state.cap(mode)? < cap {
        state.grow_cap(mode, cap)
    } else {
        Ok(state)
    }
}

/// The shared pipeline behind [`run_gate`] and [`run_gate_lossy`].
fn run_heralded(input: &FockVector, q: &Qubit, p: &GateParams) -> Result<LossyGateResult> {
    use ModeLabel::{H1, H2, S, V1, V2};

    let norm_in = input.norm_sqr();
    if norm_in < ZERO_NORM_THRESHOLD {
        return Err(Error::ZeroNormState { norm_sqr: norm_in });
    }
    if !input.modes().contains(&S) {
        return Err(Error::ModeMismatch(
            "gate input must contain the signal mode".into(),
        ));
    }
    for reserved in [
        H1,
        V1,
        H2,
        V2,
        ModeLabel::LH1,
        ModeLabel::LV1,
        ModeLabel::LH2,
        ModeLabel::LV2,
    ] {
        if input.modes().contains(&reserved) {
            return Err(Error::ModeMismatch(format!(
                "mode {reserved} is reserved for the gate pipeline"
            )));
        }
    }

    let eta = p.eta;
    let l_cap = if eta < 1.0 { p.loss_cap } else { 0 };
    let herald = p.herald;
    let b_h = herald.h1 + herald.h2 + 2 * l_cap;
    let b_v = herald.v1 + herald.v2 + 2 * l_cap;
    let detected_h = herald.h1 + herald.h2;
    let detected_v = herald.v1 + herald.v2;

    // Amplifier on (S, V1). Pair-creation orders beyond the V-rail budget
    // cannot reach the herald even through the loss window, so the series
    // is cut there; orders cut by a caller-imposed smaller j_max could
    // still have reached it and are charged in full.
    let j_eff = p.squeeze.j_max().min(b_v);
    let cap_in = input.cap(S)?;
    let mut state = input.grow_cap(S, cap_in + j_eff)?;
    state = state.tensor(&FockVector::vacuum(&[(V1, j_eff)])?)?;
    let squeeze = SqueezeParams::new(p.squeeze.g(), j_eff.max(1))?;
    let (mut state, deficit) = two_mode_squeeze_with_deficit(&state, &squeeze, S, V1)?;
    if j_eff < b_v {
        state.add_leak(deficit);
    }

    // Subtraction tap (S → H1); caps chosen so nothing is dropped.
    let cap_s = state.cap(S)?;
    state = state.tensor(&FockVector::vacuum(&[(H1, cap_s)])?)?;
    state = beamsplitter(&state, &p.bs, S, H1, BsConvention::Subtraction)?;
    state = budget_retain(state, &[H1], b_h, detected_h, eta, 1)?;

    // Programme qubit |q⟩ = h|1,0⟩ + v|0,1⟩ on (H2, V2).
    let mut qubit_state = FockVector::zeros(&[(H2, 1), (V2, 1)])?;
    qubit_state.amps_mut()[2] = q.h;
    qubit_state.amps_mut()[1] = q.v;
    state = state.tensor(&qubit_state)?;
    state = budget_retain(state, &[H1, H2], b_h, detected_h, eta, 0)?;
    state = budget_retain(state, &[V1, V2], b_v, detected_v, eta, 0)?;

    // Balanced mixing and detection windows, H rail then V rail.
    state = grow_to(state, H1, b_h)?;
    state = grow_to(state, H2, b_h)?;
    state = beamsplitter(
        &state,
        &BsParams::balanced(),
        H1,
        H2,
        BsConvention::Symmetric,
    )?;
    state = window_retain(state, H1, herald.h1, eta, l_cap)?;
    state = window_retain(state, H2, herald.h2, eta, l_cap)?;

    let v_sector_max = (j_eff + 1).min(b_v);
    state = grow_to(state, V1, v_sector_max)?;
    state = grow_to(state, V2, v_sector_max)?;
    state = beamsplitter(
        &state,
        &BsParams::balanced(),
        V1,
        V2,
        BsConvention::Symmetric,
    )?;
    state = window_retain(state, V1, herald.v1, eta, l_cap)?;
    state = window_retain(state, V2, herald.v2, eta, l_cap)?;

    let leak = state.truncation_leak();
    if leak > p.leak_tolerance * norm_in {
        return Err(Error::CapTooSmall {
            detail: "unmodelled population exceeds the leak tolerance; increase the loss cap"
                .into(),
            dropped: leak,
            tolerance: p.leak_tolerance * norm_in,
        });
    }

    // Extract every loss-ensemble member in one pass over the amplitudes.
    let herald_modes = [H1, V1, H2, V2];
    let herald_axes: Vec<usize> = herald_modes
        .iter()
        .map(|&m| state.axis_of(m))
        .collect::<Result<_>>()?;
    let carrier: Vec<(ModeLabel, usize)> = state
        .modes()
        .iter()
        .copied()
        .filter(|m| !herald_modes.contains(m))
        .map(|m| Ok((m, state.cap(m)?)))
        .collect::<Result<_>>()?;
    let carrier_axes: Vec<usize> = carrier
        .iter()
        .map(|&(m, _)| state.axis_of(m))
        .collect::<Result<_>>()?;
    let carrier_len: usize = carrier.iter().map(|&(_, c)| c + 1).product();
    let template = FockVector::zeros(&carrier)?;

    // carrier flat offsets into the big array, in the template's row-major order
    let mut offsets = vec![0usize; carrier_len];
    for (ax_idx, &ax) in carrier_axes.iter().enumerate() {
        let dim = state.dims()[ax];
        let stride = state.stride(ax);
        let repeat: usize = carrier[ax_idx + 1..].iter().map(|&(_, c)| c + 1).product();
        for (i, off) in offsets.iter_mut().enumerate() {
            *off += (i / repeat) % dim * stride;
        }
    }

    let weights: Vec<Vec<f64>> = herald_modes
        .iter()
        .zip(herald.counts())
        .map(|(&m, d)| {
            let cap = state.cap(m).unwrap_or(0);
            (0..=l_cap)
                .map(|k| {
                    if d + k <= cap {
                        detect_weight(d + k, d, eta).sqrt()
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();

    let amps = state.amplitudes();
    let counts = herald.counts();
    let mut members = Vec::with_capacity((l_cap + 1).pow(4));
    let mut success = 0.0;
    for k1 in 0..=l_cap {
        for k2 in 0..=l_cap {
            for k3 in 0..=l_cap {
                for k4 in 0..=l_cap {
                    let lost = [k1, k2, k3, k4];
                    let weight: f64 = (0..4).map(|i| weights[i][lost[i]]).product();
                    let mut member = template.clone();
                    if weight > 0.0 {
                        let base: usize = (0..4)
                            .map(|i| (counts[i] + lost[i]) * state.stride(herald_axes[i]))
                            .sum();
                        let w = Complex64::new(weight, 0.0);
                        let m_amps = member.amps_mut();
                        for (i, &off) in offsets.iter().enumerate() {
                            m_amps[i] = amps[base + off] * w;
                        }
                    }
                    success += member.norm_sqr();
                    members.push(LossyMember {
                        lost,
                        state: member,
                    });
                }
            }
        }
    }

    if success < ZERO_NORM_THRESHOLD * norm_in {
        return Err(Error::ZeroNormState { norm_sqr: success });
    }
    Ok(LossyGateResult {
        members,
        success_probability: success,
        truncation_leak: leak,
    })
}

/// The full pre-detection five-mode state (signal, companion if present,
/// V1, H1, H2, V2) at generous caps: signal grown by `series_order`, the
/// idler capped there, and both rails wide enough that nothing after the
/// amplifier is dropped. Used by cross-checks that compare the budgeted
/// pipeline against an unbudgeted reference.
pub(crate) fn circuit_state(
    input: &FockVector,
    q: &Qubit,
    p: &GateParams,
    series_order: usize,
) -> Result<FockVector> {
    use ModeLabel::{H1, H2, S, V1, V2};
    let cap_in = input.cap(S)?;
    let mut state = input.grow_cap(S, cap_in + series_order)?;
    state = state.tensor(&FockVector::vacuum(&[(V1, series_order)])?)?;
    let squeeze = SqueezeParams::new(p.squeeze.g(), series_order.max(1))?;
    let (mut state, deficit) = two_mode_squeeze_with_deficit(&state, &squeeze, S, V1)?;
    state.add_leak(deficit);
    let cap_s = state.cap(S)?;
    state = state.tensor(&FockVector::vacuum(&[(H1, cap_s)])?)?;
    state = beamsplitter(&state, &p.bs, S, H1, BsConvention::Subtraction)?;
    let mut qubit_state = FockVector::zeros(&[(H2, 1), (V2, 1)])?;
    qubit_state.amps_mut()[2] = q.h();
    qubit_state.amps_mut()[1] = q.v();
    state = state.tensor(&qubit_state)?;
    state = state.grow_cap(H1, cap_s + 1)?;
    state = state.grow_cap(H2, cap_s + 1)?;
    state = beamsplitter(
        &state,
        &BsParams::balanced(),
        H1,
        H2,
        BsConvention::Symmetric,
    )?;
    state = state.grow_cap(V1, series_order + 1)?;
    state = state.grow_cap(V2, series_order + 1)?;
    beamsplitter(
        &state,
        &BsParams::balanced(),
        V1,
        V2,
        BsConvention::Symmetric,
    )
}

/// Reference loss treatment for one detection mode of a pre-detection
/// state: couple `mode` to a fresh vacuum ancilla with a `√η` beamsplitter,
/// project the ancilla onto `lost` photons and the mode onto `detected`.
pub(crate) fn ancilla_loss_projection(
    state: &FockVector,
    eta: f64,
    mode: ModeLabel,
    ancilla: ModeLabel,
    detected: usize,
    lost: usize,
) -> Result<FockVector> {
    let cap = state.cap(mode)?;
    let with_ancilla = state.tensor(&FockVector::vacuum(&[(ancilla, cap)])?)?;
    let mixed = crate::optics::loss_channel(&with_ancilla, eta, mode, ancilla)?;
    mixed.project_mode(ancilla, lost)?.project_mode(mode, detected)
}
