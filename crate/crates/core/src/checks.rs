//! Self-diagnostic invariant suite: every structural property the simulator
//! relies on, each runnable programmatically and reported with its measured
//! defect. The CLI `verify` subcommand prints one line per check.

use num_complex::Complex64;

use crate::analysis::{process_tensor, Operator};
use crate::closed_form::{conditional_map_matrix, first_order_map};
use crate::error::Result;
use crate::fock::{FockVector, ModeLabel};
use crate::gate::{
    ancilla_loss_projection, circuit_state, run_gate, run_gate_lossy, GateParams, HeraldOutcome,
    Qubit,
};
use crate::optics::{
    beamsplitter, loss_channel, tmsv_reference_amplitude, two_mode_squeeze, BsConvention,
    BsParams, SqueezeParams,
};
use crate::states::{make_input, mean_photon_number, FamilyKind, InputFamily};

/// Outcome of one structural check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn report(name: &'static str, worst: f64, tol: f64) -> CheckReport {
    CheckReport {
        name,
        passed: worst.is_finite() && worst <= tol,
        detail: format!("max defect {worst:.3e} (tolerance {tol:.1e})"),
    }
}

/// Run the full suite in a fixed order.
pub fn run_all() -> Vec<CheckReport> {
    type Check = (&'static str, fn() -> Result<CheckReport>);
    let checks: &[Check] = &[
        ("ladder_commutator", ladder_commutator),
        ("coherent_state_norm", coherent_state_norm),
        ("beamsplitter_unitarity", beamsplitter_unitarity),
        ("beamsplitter_double_pass", beamsplitter_double_pass),
        ("squeezer_vacuum_series", squeezer_vacuum_series),
        ("squeezer_norm_accounting", squeezer_norm_accounting),
        ("loss_channel_trace", loss_channel_trace),
        ("loss_channel_composition", loss_channel_composition),
        ("hong_ou_mandel_dip", hong_ou_mandel_dip),
        ("subtraction_tap_signs", subtraction_tap_signs),
        ("pipeline_linear_in_input", pipeline_linear_in_input),
        ("pipeline_linear_in_programme", pipeline_linear_in_programme),
        ("swapped_herald_mirror", swapped_herald_mirror),
        (
            "herald_extraction_vs_direct_projection",
            herald_extraction_vs_direct_projection,
        ),
        (
            "projective_loss_equals_ancilla_loss",
            projective_loss_equals_ancilla_loss,
        ),
        ("closed_form_column_match", closed_form_column_match),
        ("one_loss_correction_match", one_loss_correction_match),
        ("circuit_norm_accounting", circuit_norm_accounting),
        ("first_order_tensor_hermiticity", first_order_tensor_hermiticity),
        ("pure_map_tensor_factorizes", pure_map_tensor_factorizes),
        ("tuned_diagonal_ratio", tuned_diagonal_ratio),
        ("quadrature_phase_symmetry", quadrature_phase_symmetry),
    ];
    checks
        .iter()
        .map(|&(name, f)| match f() {
            Ok(r) => r,
            Err(e) => CheckReport {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}

/// A deterministic dense test vector on one mode, populated up to `top`.
fn probe(mode: ModeLabel, cap: usize, top: usize) -> FockVector {
    let mut amps = vec![Complex64::new(0.0, 0.0); cap + 1];
    for (n, a) in amps.iter_mut().enumerate().take(top + 1) {
        let phase = 0.7 * n as f64 + 0.3;
        *a = Complex64::new(phase.cos(), phase.sin()) / (1.0 + n as f64);
    }
    FockVector::from_amplitudes(mode, amps).unwrap()
}

fn ket(n: usize, cap: usize) -> FockVector {
    let mut amps = vec![Complex64::new(0.0, 0.0); cap + 1];
    amps[n] = Complex64::new(1.0, 0.0);
    FockVector::from_amplitudes(ModeLabel::S, amps).unwrap()
}

/// `(â â† − â† â) ψ = ψ` for states safely below the cap.
fn ladder_commutator() -> Result<CheckReport> {
    let psi = probe(ModeLabel::S, 8, 5);
    let up_down = psi.apply_creation(ModeLabel::S)?.apply_annihilation(ModeLabel::S)?;
    let down_up = psi.apply_annihilation(ModeLabel::S)?.apply_creation(ModeLabel::S)?;
    let mut comm = up_down.add_scaled(&down_up, Complex64::new(-1.0, 0.0))?;
    comm = comm.add_scaled(&psi, Complex64::new(-1.0, 0.0))?;
    let worst = comm.amplitudes().iter().map(|a| a.norm()).fold(0.0, f64::max);
    Ok(report("ladder_commutator", worst, 1e-12))
}

/// Auto-capped input families are unit norm with negligible tail.
fn coherent_state_norm() -> Result<CheckReport> {
    let family = InputFamily::auto_capped(FamilyKind::Coherent, 1.5)?;
    let state = make_input(&family)?;
    let norm_defect = (state.norm_sqr() - 1.0).abs();
    let mean_defect = (mean_photon_number(&state, ModeLabel::S)? - 2.25).abs();
    let worst = norm_defect.max(state.truncation_leak()).max(mean_defect / 100.0);
    Ok(report("coherent_state_norm", worst, 1e-9))
}

/// A beamsplitter preserves the norm when every output fits the caps.
fn beamsplitter_unitarity() -> Result<CheckReport> {
    let a = probe(ModeLabel::H1, 6, 3);
    let b = probe(ModeLabel::H2, 6, 3);
    let joint = a.tensor(&b)?;
    let p = BsParams::new(0.8, 0.6)?;
    let out = beamsplitter(&joint, &p, ModeLabel::H1, ModeLabel::H2, BsConvention::Subtraction)?;
    let worst = (out.norm_sqr() - joint.norm_sqr()).abs().max(out.truncation_leak());
    Ok(report("beamsplitter_unitarity", worst, 1e-12))
}

/// Two passes of the balanced symmetric splitter swap the ports and put a
/// `(−1)^{n}` phase on the photons landing back in the first port:
/// `|n, m⟩ → (−1)^m |m, n⟩`.
fn beamsplitter_double_pass() -> Result<CheckReport> {
    let caps = [(ModeLabel::H1, 4), (ModeLabel::H2, 4)];
    let mut state = FockVector::basis_state(&[(ModeLabel::H1, 1), (ModeLabel::H2, 2)], &caps)?;
    state = state.add_scaled(
        &FockVector::basis_state(&[(ModeLabel::H1, 2), (ModeLabel::H2, 0)], &caps)?,
        Complex64::new(0.0, 0.5),
    )?;
    let p = BsParams::balanced();
    let once = beamsplitter(&state, &p, ModeLabel::H1, ModeLabel::H2, BsConvention::Symmetric)?;
    let twice = beamsplitter(&once, &p, ModeLabel::H1, ModeLabel::H2, BsConvention::Symmetric)?;
    let mut expect = FockVector::basis_state(&[(ModeLabel::H1, 2), (ModeLabel::H2, 1)], &caps)?;
    expect.scale(Complex64::new(1.0, 0.0)); // (−1)^2 on the |1,2⟩ term
    expect = expect.add_scaled(
        &FockVector::basis_state(&[(ModeLabel::H1, 0), (ModeLabel::H2, 2)], &caps)?,
        Complex64::new(0.0, 0.5), // (−1)^0 on the |2,0⟩ term
    )?;
    let worst = twice.max_component_diff(&expect)?;
    Ok(report("beamsplitter_double_pass", worst, 1e-12))
}

/// The amplifier on twin vacuum produces `tanhⁿ(g)/cosh(g)` on `|n,n⟩` and
/// nothing anywhere else.
fn squeezer_vacuum_series() -> Result<CheckReport> {
    let g = 0.5;
    let vac = FockVector::vacuum(&[(ModeLabel::S, 10), (ModeLabel::V1, 10)])?;
    let p = SqueezeParams::new(g, 64)?;
    let out = two_mode_squeeze(&vac, &p, ModeLabel::S, ModeLabel::V1)?;
    let mut worst = 0.0f64;
    for n in 0..=10usize {
        for m in 0..=10usize {
            let amp = out.amplitude(&[(ModeLabel::S, n), (ModeLabel::V1, m)])?;
            let expect = if n == m { tmsv_reference_amplitude(n, g) } else { 0.0 };
            worst = worst.max((amp - expect).norm());
        }
    }
    Ok(report("squeezer_vacuum_series", worst, 1e-12))
}

/// Population never disappears silently: squeezer output norm² plus the
/// recorded leak is exactly the input norm², even with a short series.
fn squeezer_norm_accounting() -> Result<CheckReport> {
    let mut worst = 0.0f64;
    for j_max in [3usize, 64] {
        let input = probe(ModeLabel::S, 2, 2).tensor(&FockVector::vacuum(&[(ModeLabel::V1, 2)])?)?;
        let p = SqueezeParams::new(0.8, j_max)?;
        let out = two_mode_squeeze(&input, &p, ModeLabel::S, ModeLabel::V1)?;
        worst = worst.max((out.norm_sqr() + out.truncation_leak() - input.norm_sqr()).abs());
    }
    Ok(report("squeezer_norm_accounting", worst, 1e-12))
}

/// The loss channel is trace preserving and splits `|3⟩` binomially.
fn loss_channel_trace() -> Result<CheckReport> {
    let eta = 0.7;
    let state = probe(ModeLabel::S, 3, 3).tensor(&FockVector::vacuum(&[(ModeLabel::LH1, 3)])?)?;
    let mixed = loss_channel(&state, eta, ModeLabel::S, ModeLabel::LH1)?;
    let total: f64 = (0..=3)
        .map(|k| mixed.project_mode(ModeLabel::LH1, k).map(|s| s.norm_sqr()))
        .sum::<Result<f64>>()?;
    let mut worst = (total - state.norm_sqr()).abs();

    let three = ket(3, 3).tensor(&FockVector::vacuum(&[(ModeLabel::LH1, 3)])?)?;
    let mixed3 = loss_channel(&three, eta, ModeLabel::S, ModeLabel::LH1)?;
    for k in 0..=3usize {
        let w = mixed3.project_mode(ModeLabel::LH1, k)?.norm_sqr();
        let binom = [1.0, 3.0, 3.0, 1.0][k];
        let expect = binom * eta.powi(3 - k as i32) * (1.0 - eta).powi(k as i32);
        worst = worst.max((w - expect).abs());
    }
    Ok(report("loss_channel_trace", worst, 1e-12))
}

/// Two cascaded loss channels equal one channel with the product efficiency.
fn loss_channel_composition() -> Result<CheckReport> {
    let (eta1, eta2) = (0.9, 0.8);
    let base = probe(ModeLabel::S, 3, 3);
    let two_step = {
        let s = base
            .tensor(&FockVector::vacuum(&[(ModeLabel::LH1, 3)])?)?
            .tensor(&FockVector::vacuum(&[(ModeLabel::LH2, 3)])?)?;
        let s = loss_channel(&s, eta1, ModeLabel::S, ModeLabel::LH1)?;
        loss_channel(&s, eta2, ModeLabel::S, ModeLabel::LH2)?
    };
    let one_step = {
        let s = base.tensor(&FockVector::vacuum(&[(ModeLabel::LH1, 3)])?)?;
        loss_channel(&s, eta1 * eta2, ModeLabel::S, ModeLabel::LH1)?
    };
    let d2 = two_step.occupation_distribution(ModeLabel::S)?;
    let d1 = one_step.occupation_distribution(ModeLabel::S)?;
    let worst = d1
        .iter()
        .zip(&d2)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(report("loss_channel_composition", worst, 1e-12))
}

/// Two identical photons on a balanced splitter never exit one per port.
fn hong_ou_mandel_dip() -> Result<CheckReport> {
    let caps = [(ModeLabel::H1, 2), (ModeLabel::H2, 2)];
    let state = FockVector::basis_state(&[(ModeLabel::H1, 1), (ModeLabel::H2, 1)], &caps)?;
    let out = beamsplitter(
        &state,
        &BsParams::balanced(),
        ModeLabel::H1,
        ModeLabel::H2,
        BsConvention::Symmetric,
    )?;
    let coincidence = out
        .amplitude(&[(ModeLabel::H1, 1), (ModeLabel::H2, 1)])?
        .norm();
    let bunched = out.amplitude(&[(ModeLabel::H1, 2), (ModeLabel::H2, 0)])?;
    let pair_defect = (bunched.norm() - std::f64::consts::FRAC_1_SQRT_2).abs();
    Ok(report("hong_ou_mandel_dip", coincidence.max(pair_defect), 1e-12))
}

/// The tap convention: the kept port keeps `+t`, the reflected photon picks
/// up `+r` going down and `−r` coming back.
fn subtraction_tap_signs() -> Result<CheckReport> {
    let caps = [(ModeLabel::S, 1), (ModeLabel::H1, 1)];
    let p = BsParams::new(0.8, 0.6)?;
    let fwd = beamsplitter(
        &FockVector::basis_state(&[(ModeLabel::S, 1), (ModeLabel::H1, 0)], &caps)?,
        &p,
        ModeLabel::S,
        ModeLabel::H1,
        BsConvention::Subtraction,
    )?;
    let kept = (fwd.amplitude(&[(ModeLabel::S, 1), (ModeLabel::H1, 0)])? - 0.8).norm();
    let tapped = (fwd.amplitude(&[(ModeLabel::S, 0), (ModeLabel::H1, 1)])? - 0.6).norm();
    let bwd = beamsplitter(
        &FockVector::basis_state(&[(ModeLabel::S, 0), (ModeLabel::H1, 1)], &caps)?,
        &p,
        ModeLabel::S,
        ModeLabel::H1,
        BsConvention::Subtraction,
    )?;
    let kept_b = (bwd.amplitude(&[(ModeLabel::S, 0), (ModeLabel::H1, 1)])? - 0.8).norm();
    let back = (bwd.amplitude(&[(ModeLabel::S, 1), (ModeLabel::H1, 0)])? + 0.6).norm();
    let worst = kept.max(tapped).max(kept_b).max(back);
    Ok(report("subtraction_tap_signs", worst, 1e-12))
}

/// The heralded (unnormalized) output is linear in the input state.
fn pipeline_linear_in_input() -> Result<CheckReport> {
    let p = GateParams::tuned(0.9)?;
    let q = Qubit::position();
    let psi1 = ket(1, 3);
    let psi2 = ket(2, 3);
    let c = Complex64::new(0.0, 0.7);
    let combined = psi1.add_scaled(&psi2, c)?;
    let g1 = run_gate(&psi1, &q, &p)?;
    let g2 = run_gate(&psi2, &q, &p)?;
    let g12 = run_gate(&combined, &q, &p)?;
    let expect = g1.state.add_scaled(&g2.state, c)?;
    let worst = g12.state.max_component_diff(&expect)?;
    Ok(report("pipeline_linear_in_input", worst, 1e-12))
}

/// The heralded output is linear in the programme amplitudes.
fn pipeline_linear_in_programme() -> Result<CheckReport> {
    let p = GateParams::tuned(0.9)?;
    let input = ket(2, 3);
    let h = Complex64::new(0.6, 0.0);
    let v = Complex64::new(0.0, 0.8);
    let mixed = run_gate(&input, &Qubit::new(h, v)?, &p)?;
    let h_only = run_gate(&input, &Qubit::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))?, &p)?;
    let v_only = run_gate(&input, &Qubit::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))?, &p)?;
    let mut expect = h_only.state.clone();
    expect.scale(h);
    let expect = expect.add_scaled(&v_only.state, v)?;
    let worst = mixed.state.max_component_diff(&expect)?;
    Ok(report("pipeline_linear_in_programme", worst, 1e-12))
}

/// The mirrored herald outcome produces exactly the negated state.
fn swapped_herald_mirror() -> Result<CheckReport> {
    let p = GateParams::tuned(0.95)?;
    let q = Qubit::position();
    let input = ket(2, 3);
    let principal = run_gate(&input, &q, &p)?;
    let swapped = run_gate(
        &input,
        &q,
        &p.with_herald(HeraldOutcome::principal().swapped()),
    )?;
    let mut negated = principal.state.clone();
    negated.scale(Complex64::new(-1.0, 0.0));
    let worst = swapped.state.max_component_diff(&negated)?;
    Ok(report("swapped_herald_mirror", worst, 1e-12))
}

/// The budgeted pipeline extraction agrees with brute-force projection of
/// the full pre-detection state onto the herald outcome.
fn herald_extraction_vs_direct_projection() -> Result<CheckReport> {
    use ModeLabel::{H1, H2, S, V1, V2};
    let p = GateParams::tuned(0.9)?;
    let q = Qubit::position();
    let input = ket(2, 2);
    let gate = run_gate(&input, &q, &p)?;
    let herald = p.herald;
    let full = circuit_state(&input, &q, &p, 8)?;
    let projected = full
        .project_mode(H1, herald.h1)?
        .project_mode(V1, herald.v1)?
        .project_mode(H2, herald.h2)?
        .project_mode(V2, herald.v2)?;
    let cap_gate = gate.state.cap(S)?;
    let cap_full = projected.cap(S)?;
    let mut worst = 0.0f64;
    for n in 0..=cap_full {
        let direct = projected.amplitude(&[(S, n)])?;
        let fast = if n <= cap_gate {
            gate.state.amplitude(&[(S, n)])?
        } else {
            Complex64::new(0.0, 0.0)
        };
        worst = worst.max((direct - fast).norm());
    }
    Ok(report("herald_extraction_vs_direct_projection", worst, 1e-12))
}

/// One-pass ensemble extraction equals the textbook construction that
/// couples each detector to an explicit vacuum ancilla.
fn projective_loss_equals_ancilla_loss() -> Result<CheckReport> {
    use ModeLabel::{H1, H2, LH1, LH2, LV1, LV2, S, V1, V2};
    let eta = 0.85;
    let p = GateParams::tuned(0.9)?
        .with_eta(eta)?
        .with_loss_cap(1)
        .with_leak_tolerance(1e-2)?;
    let q = Qubit::position();
    let input = ket(1, 1);
    let lossy = run_gate_lossy(&input, &q, &p)?;
    let herald = p.herald;
    let full = circuit_state(&input, &q, &p, 8)?;
    let mut worst = 0.0f64;
    for member in &lossy.members {
        let [k1, k2, k3, k4] = member.lost;
        let reference = ancilla_loss_projection(&full, eta, H1, LH1, herald.h1, k1)
            .and_then(|s| ancilla_loss_projection(&s, eta, V1, LV1, herald.v1, k2))
            .and_then(|s| ancilla_loss_projection(&s, eta, H2, LH2, herald.h2, k3))
            .and_then(|s| ancilla_loss_projection(&s, eta, V2, LV2, herald.v2, k4))?;
        let cap_fast = member.state.cap(S)?;
        for n in 0..=reference.cap(S)? {
            let direct = reference.amplitude(&[(S, n)])?;
            let fast = if n <= cap_fast {
                member.state.amplitude(&[(S, n)])?
            } else {
                Complex64::new(0.0, 0.0)
            };
            worst = worst.max((direct - fast).norm());
        }
    }
    Ok(report("projective_loss_equals_ancilla_loss", worst, 1e-10))
}

/// The pipeline on `|n⟩` reproduces the closed-form conditional map columns
/// entry by entry.
fn closed_form_column_match() -> Result<CheckReport> {
    let p = GateParams::tuned(0.9)?;
    let q = Qubit::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8))?;
    let mut worst = 0.0f64;
    for n in 0..=4usize {
        let input = ket(n, n.max(1));
        let gate = run_gate(&input, &q, &p)?;
        let map = conditional_map_matrix(&p, &q, n + 1);
        let cap_out = gate.state.cap(ModeLabel::S)?;
        for l in 0..=n + 1 {
            let amp = if l <= cap_out {
                gate.state.amplitude(&[(ModeLabel::S, l)])?
            } else {
                Complex64::new(0.0, 0.0)
            };
            worst = worst.max((amp - map.entry(l, n)).norm());
        }
    }
    Ok(report("closed_form_column_match", worst, 1e-10))
}

/// One-photon-lost ensemble members match the printed first-order
/// correction states entry by entry.
fn one_loss_correction_match() -> Result<CheckReport> {
    use crate::closed_form::{correction_states, ExcessPattern};
    let eta = 0.9;
    let p = GateParams::tuned(0.95)?
        .with_eta(eta)?
        .with_loss_cap(2)
        .with_leak_tolerance(1e-2)?;
    let q = Qubit::momentum();
    let mut worst = 0.0f64;
    for n in 0..=2usize {
        let input = ket(n, n.max(1));
        let lossy = run_gate_lossy(&input, &q, &p)?;
        let corrections = correction_states(n, &p, &q, eta)?;
        for member in &lossy.members {
            let [k1, k2, k3, k4] = member.lost;
            if k1 + k2 + k3 + k4 != 1 {
                continue;
            }
            let pattern = ExcessPattern::new(
                p.herald.h1 + k1,
                p.herald.h2 + k3,
                p.herald.v1 + k2,
                p.herald.v2 + k4,
            )?;
            let reference = &corrections
                .iter()
                .find(|(e, _)| *e == pattern)
                .expect("every one-loss pattern has a correction state")
                .1;
            let cap_ref = reference.cap(ModeLabel::S)?;
            for l in 0..=member.state.cap(ModeLabel::S)? {
                let expect = if l <= cap_ref {
                    reference.amplitude(&[(ModeLabel::S, l)])?
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let amp = member.state.amplitude(&[(ModeLabel::S, l)])?;
                worst = worst.max((amp - expect).norm());
            }
        }
    }
    Ok(report("one_loss_correction_match", worst, 1e-8))
}

/// Norm² plus recorded leak stays exactly 1 through the whole lossless
/// circuit on a normalized input.
fn circuit_norm_accounting() -> Result<CheckReport> {
    let p = GateParams::tuned(0.9)?;
    let q = Qubit::position();
    let input = ket(1, 1);
    let full = circuit_state(&input, &q, &p, 12)?;
    let worst = (full.norm_sqr() + full.truncation_leak() - 1.0).abs();
    Ok(report("circuit_norm_accounting", worst, 1e-12))
}

/// The one-loss branch set yields a Hermitian process tensor.
fn first_order_tensor_hermiticity() -> Result<CheckReport> {
    let p = GateParams::tuned(0.95)?.with_eta(0.9)?;
    let branches = first_order_map(&p, &Qubit::position(), 0.9, 6)?;
    let tensor = process_tensor(&branches, 6)?;
    Ok(report("first_order_tensor_hermiticity", tensor.hermiticity_defect(), 1e-12))
}

/// A single-branch process tensor factorizes into the branch matrix.
fn pure_map_tensor_factorizes() -> Result<CheckReport> {
    let p = GateParams::tuned(0.95)?;
    let map = conditional_map_matrix(&p, &Qubit::position(), 6);
    let tensor = process_tensor(std::slice::from_ref(&map), 6)?;
    let mut worst = tensor.hermiticity_defect();
    for n in 0..=6usize {
        for m in 0..=6usize {
            for l in 0..=6usize {
                for k in 0..=6usize {
                    let expect = map.entry(l, n) * map.entry(k, m).conj();
                    worst = worst.max((tensor.entry(n, m, l, k) - expect).norm());
                }
            }
        }
    }
    Ok(report("pure_map_tensor_factorizes", worst, 1e-12))
}

/// With the gain matched to the tap, the programmed quadrature transfers
/// photon number with the ideal `(n+1)/n` weight ratio.
fn tuned_diagonal_ratio() -> Result<CheckReport> {
    let p = GateParams::tuned(0.95)?;
    let map = conditional_map_matrix(&p, &Qubit::position(), 6);
    let diag = process_tensor(std::slice::from_ref(&map), 6)?.diagonal_slice();
    let mut worst = 0.0f64;
    for n in 1..=4usize {
        let ratio = diag[n][n + 1] / diag[n][n - 1];
        worst = worst.max((ratio - (n as f64 + 1.0) / n as f64).abs());
    }
    Ok(report("tuned_diagonal_ratio", worst, 1e-10))
}

/// Position programme on `|α⟩` and momentum programme on `|iα⟩` give equal
/// quadrature matrix elements: the gate treats the two quadratures
/// symmetrically under a π/2 phase-space rotation.
fn quadrature_phase_symmetry() -> Result<CheckReport> {
    let p = GateParams::tuned(0.95)?;
    let alpha = 1.0;
    let fam_x = InputFamily::auto_capped(FamilyKind::Coherent, alpha)?;
    let input_x = make_input(&fam_x)?;
    let fam_p = fam_x.with_phase(std::f64::consts::FRAC_PI_2)?;
    let input_p = make_input(&fam_p)?;

    let out_x = run_gate(&input_x, &Qubit::position(), &p)?;
    let out_p = run_gate(&input_p, &Qubit::momentum(), &p)?;

    let element = |input: &FockVector, out: &FockVector, op: Operator| -> Result<f64> {
        let cap = out.cap(ModeLabel::S)?;
        let mut amps = input.amplitudes().to_vec();
        amps.resize(cap + 1, Complex64::new(0.0, 0.0));
        let reference = FockVector::from_amplitudes(
            ModeLabel::S,
            op.ideal_matrix(cap).apply(&amps)?,
        )?;
        Ok(reference.inner_product(out)?.norm_sqr())
    };
    let vx = element(&input_x, &out_x.state, Operator::Position)?;
    let vp = element(&input_p, &out_p.state, Operator::Momentum)?;
    let worst = (vx - vp).abs() / vx.abs().max(1e-30);
    Ok(report("quadrature_phase_symmetry", worst, 1e-10))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_structural_check_passes() {
        let reports = run_all();
        assert_eq!(reports.len(), 22);
        for r in &reports {
            assert!(r.passed, "{} failed: {}", r.name, r.detail);
        }
    }
}
