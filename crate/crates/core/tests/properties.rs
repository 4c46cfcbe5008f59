//! Property-based invariants of the state container, the optical
//! operations, and the gate pipeline, over randomized inputs.

use num_complex::Complex64;
use proptest::prelude::*;

use qpgate::fock::{FockVector, ModeLabel};
use qpgate::gate::{run_gate, GateParams, Qubit};
use qpgate::optics::{beamsplitter, BsConvention, BsParams};

const TOLERANCE: f64 = 1e-10;

fn complex_strategy() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn amp_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    proptest::collection::vec(complex_strategy(), len)
}

/// Assemble an arbitrary (unnormalized) state from basis kets, walking the
/// row-major flat order with the last mode fastest.
fn filled(caps: &[(ModeLabel, usize)], amps: &[Complex64]) -> FockVector {
    let dims: Vec<usize> = caps.iter().map(|&(_, c)| c + 1).collect();
    let mut v = FockVector::zeros(caps).unwrap();
    for (flat, &a) in amps.iter().enumerate() {
        let mut occ: Vec<(ModeLabel, usize)> = Vec::with_capacity(caps.len());
        let mut rest = flat;
        for (ax, &(label, _)) in caps.iter().enumerate().rev() {
            occ.push((label, rest % dims[ax]));
            rest /= dims[ax];
        }
        occ.reverse();
        let basis = FockVector::basis_state(&occ, caps).unwrap();
        v = v.add_scaled(&basis, a).unwrap();
    }
    v
}

fn signal_amp(v: &FockVector, n: usize) -> Complex64 {
    if n > v.cap(ModeLabel::S).unwrap() {
        Complex64::new(0.0, 0.0)
    } else {
        v.amplitude(&[(ModeLabel::S, n)]).unwrap()
    }
}

proptest! {
    /// ⟨u|v⟩ = conj(⟨v|u⟩) and ⟨v|v⟩ = ‖v‖², real and non-negative.
    #[test]
    fn inner_product_conjugate_symmetry(
        a in amp_vec(6),
        b in amp_vec(6),
    ) {
        let u = filled(&[(ModeLabel::S, 5)], &a);
        let v = filled(&[(ModeLabel::S, 5)], &b);
        let uv = u.inner_product(&v).unwrap();
        let vu = v.inner_product(&u).unwrap();
        prop_assert!((uv - vu.conj()).norm() < TOLERANCE);
        let vv = v.inner_product(&v).unwrap();
        prop_assert!(vv.im.abs() < TOLERANCE);
        prop_assert!(vv.re >= -TOLERANCE);
        prop_assert!((vv.re - v.norm_sqr()).abs() < TOLERANCE);
    }

    /// ‖u ⊗ v‖² = ‖u‖² ‖v‖², and product-state amplitudes factorize.
    #[test]
    fn tensor_norm_multiplicativity(
        a in amp_vec(4),
        b in amp_vec(5),
    ) {
        let u = filled(&[(ModeLabel::S, 3)], &a);
        let v = filled(&[(ModeLabel::H2, 4)], &b);
        let uv = u.tensor(&v).unwrap();
        prop_assert!((uv.norm_sqr() - u.norm_sqr() * v.norm_sqr()).abs() < TOLERANCE);
        let amp = uv.amplitude(&[(ModeLabel::S, 2), (ModeLabel::H2, 3)]).unwrap();
        prop_assert!((amp - a[2] * b[3]).norm() < TOLERANCE);
    }

    /// Projecting a mode onto every occupation and summing the squared
    /// norms recovers the full squared norm, and each projection removes
    /// the projected mode from the carrier.
    #[test]
    fn projection_completeness(
        a in amp_vec(12),
    ) {
        let v = filled(&[(ModeLabel::S, 2), (ModeLabel::V2, 3)], &a);
        let mut total = 0.0;
        for k in 0..=3 {
            let projected = v.project_mode(ModeLabel::V2, k).unwrap();
            prop_assert_eq!(projected.modes(), &[ModeLabel::S]);
            total += projected.norm_sqr();
        }
        prop_assert!((total - v.norm_sqr()).abs() < TOLERANCE);
    }

    /// A beamsplitter with room for every scattered photon preserves the
    /// norm of any two-mode state and leaks nothing.
    #[test]
    fn beamsplitter_preserves_norm(
        a in amp_vec(16),
        theta in 0.05f64..1.52,
    ) {
        let v = filled(&[(ModeLabel::H1, 3), (ModeLabel::H2, 3)], &a);
        // headroom: caps 6 ≥ the largest reachable total occupation
        let v = v.grow_cap(ModeLabel::H1, 6).unwrap();
        let v = v.grow_cap(ModeLabel::H2, 6).unwrap();
        let before = v.norm_sqr();
        let bs = BsParams::from_transmittance(theta.cos()).unwrap();
        let out = beamsplitter(&v, &bs, ModeLabel::H1, ModeLabel::H2, BsConvention::Subtraction)
            .unwrap();
        prop_assert!((out.norm_sqr() - before).abs() < TOLERANCE * before.max(1.0));
        prop_assert!(out.truncation_leak() < TOLERANCE);
    }

    /// The heralded map is linear in the programme qubit: the output for
    /// (h, v) equals h·(output for H alone) + v·(output for V alone), for a
    /// fixed one-photon input.
    #[test]
    fn pipeline_linear_in_programme(
        hx in -0.9f64..0.9,
        hy in -0.9f64..0.9,
    ) {
        let h = Complex64::new(hx, hy);
        let norm = (h.norm_sqr() + 0.25).sqrt();
        let h = h / norm;
        let v = Complex64::new(0.5, 0.0) / norm;
        let p = GateParams::tuned(0.9).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let input = FockVector::from_amplitudes(
            ModeLabel::S,
            vec![zero, one, zero, zero],
        )
        .unwrap();

        let mixed = run_gate(&input, &Qubit::new(h, v).unwrap(), &p).unwrap();
        let h_only = run_gate(&input, &Qubit::new(one, zero).unwrap(), &p).unwrap();
        let v_only = run_gate(&input, &Qubit::new(zero, one).unwrap(), &p).unwrap();

        for n in 0..=3 {
            let combined =
                h * signal_amp(&h_only.state, n) + v * signal_amp(&v_only.state, n);
            let direct = signal_amp(&mixed.state, n);
            prop_assert!((combined - direct).norm() < TOLERANCE);
        }
    }
}
