//! Analytic reference for the heralded gate: the lossless conditional map
//! in closed form, its first-order corrections for a single photon lost at
//! a detector, and the event-index bookkeeping behind those corrections.
//!
//! Everything here is derived by expanding the circuit's operator product
//! by hand; the numeric pipeline in [`crate::gate`] must reproduce these
//! expressions, and dedicated tests hold the two routes together.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockVector, ModeLabel};
use crate::gate::{GateParams, Qubit};
#[cfg(test)]
use crate::math::{binomial, ln_factorials};

/// Photon counts arriving at the four herald detectors (H1, H2, V1, V2)
/// in one detection event. The leading event is (1,0,0,1); the four
/// one-photon-excess events carry one extra photon that the detectors
/// lose, leaving the same click pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExcessPattern {
    pub h1: usize,
    pub h2: usize,
    pub v1: usize,
    pub v2: usize,
}

impl ExcessPattern {
    /// Total arrival count must be 2 (leading) or 3 (one excess photon).
    pub fn new(h1: usize, h2: usize, v1: usize, v2: usize) -> Result<Self> {
        let total = h1 + h2 + v1 + v2;
        if !(2..=3).contains(&total) {
            return Err(Error::InvalidPattern(format!(
                "arrival pattern ({h1},{h2},{v1},{v2}) has total {total}, expected 2 or 3"
            )));
        }
        Ok(ExcessPattern { h1, h2, v1, v2 })
    }

    /// The loss-free arrival pattern (1,0,0,1).
    pub fn leading() -> Self {
        ExcessPattern {
            h1: 1,
            h2: 0,
            v1: 0,
            v2: 1,
        }
    }

    /// The four one-excess-photon patterns, ordered by the detector
    /// carrying the extra photon: H1, H2, V1, V2.
    pub fn one_loss_patterns() -> [Self; 4] {
        [
            ExcessPattern {
                h1: 2,
                h2: 0,
                v1: 0,
                v2: 1,
            },
            ExcessPattern {
                h1: 1,
                h2: 1,
                v1: 0,
                v2: 1,
            },
            ExcessPattern {
                h1: 1,
                h2: 0,
                v1: 1,
                v2: 1,
            },
            ExcessPattern {
                h1: 1,
                h2: 0,
                v1: 0,
                v2: 2,
            },
        ]
    }

    /// Counts in (H1, H2, V1, V2) order.
    pub fn counts(&self) -> [usize; 4] {
        [self.h1, self.h2, self.v1, self.v2]
    }

    pub fn total(&self) -> usize {
        self.h1 + self.h2 + self.v1 + self.v2
    }
}

impl std::fmt::Display for ExcessPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{},{})", self.h1, self.h2, self.v1, self.v2)
    }
}

/// Solution of one branch's index-matching equations for a given arrival
/// pattern. `branch` numbers the four operator-term branches of the
/// circuit expansion (1: +h, 2: −h, 3: −v, 4: +v). Unphysical solutions
/// (negative indices or binomial indices out of range) contribute nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexSet {
    pub branch: usize,
    pub k: i64,
    pub y: i64,
    pub j: i64,
    pub x: i64,
    pub physical: bool,
}

/// Solve the four branch-matching systems for an arrival pattern. The
/// expansion writes every term as a tap monomial of order `k` split `y`
/// photons to H1, times a pair-creation order `j` split `x` photons to V1
/// (with branch-specific shifts from the programme-qubit photon), and the
/// detector counts pin (k, y, j, x) uniquely per branch.
pub fn enumerate_index_sets(e: &ExcessPattern) -> Vec<IndexSet> {
    let a = e.h1 as i64;
    let b = e.h2 as i64;
    let g = e.v1 as i64;
    let d = e.v2 as i64;
    let raw = [
        (1, a + b - 1, a, g, g + d),
        (2, a + b - 1, a - 1, g, g + d),
        (3, a + b, a, g - 1, g + d - 1),
        (4, a + b, a, g, g + d - 1),
    ];
    raw.iter()
        .map(|&(branch, k, y, x, j)| IndexSet {
            branch,
            k,
            y,
            j,
            x,
            physical: k >= 0 && j >= 0 && (0..=k).contains(&y) && (0..=j).contains(&x),
        })
        .collect()
}

/// The probability amplitude carried by detector loss for an arrival
/// pattern: `αδ η (1−η)^{(α+β+γ+δ−2)/2} √((α−1)!) √(β!) √(γ!) √((δ−1)!)`
/// with (α,β,γ,δ) the (H1,H2,V1,V2) arrival counts. Requires at least one
/// photon at H1 and at V2 — the clicks that define the herald.
pub fn loss_prefactor(e: &ExcessPattern, eta: f64) -> Result<f64> {
    if e.h1 == 0 || e.v2 == 0 {
        return Err(Error::InvalidPattern(format!(
            "pattern {e} cannot produce the herald: H1 and V2 must each receive a photon"
        )));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParams(format!(
            "efficiency must lie in [0,1], got {eta}"
        )));
    }
    let fact = |n: usize| -> f64 { (1..=n).map(|i| i as f64).product() };
    let half = (e.total() - 2) as f64 / 2.0;
    Ok((e.h1 * e.v2) as f64
        * eta
        * (1.0 - eta).powf(half)
        * fact(e.h1 - 1).sqrt()
        * fact(e.h2).sqrt()
        * fact(e.v1).sqrt()
        * fact(e.v2 - 1).sqrt())
}

/// A single-mode operator on the truncated signal space, stored dense
/// with `entry(l, n)` the amplitude for `|n⟩ → |l⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl MapMatrix {
    pub fn zeros(dim: usize) -> Self {
        MapMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); (dim + 1) * (dim + 1)],
        }
    }

    /// Highest occupation number; the matrix is (dim+1)×(dim+1).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, l: usize, n: usize) -> Complex64 {
        self.data[l * (self.dim + 1) + n]
    }

    pub(crate) fn set(&mut self, l: usize, n: usize, value: Complex64) {
        self.data[l * (self.dim + 1) + n] = value;
    }

    /// Apply to an amplitude vector of length dim+1.
    pub fn apply(&self, amps: &[Complex64]) -> Result<Vec<Complex64>> {
        if amps.len() != self.dim + 1 {
            return Err(Error::InvalidParams(format!(
                "amplitude vector has length {}, matrix expects {}",
                amps.len(),
                self.dim + 1
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim + 1];
        for (l, slot) in out.iter_mut().enumerate() {
            for (n, a) in amps.iter().enumerate() {
                *slot += self.entry(l, n) * a;
            }
        }
        Ok(out)
    }

    /// Scale every entry.
    pub fn scaled(&self, c: Complex64) -> Self {
        MapMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&v| v * c).collect(),
        }
    }
}

/// The lossless conditional map in closed form: acting on `|n⟩` the gate
/// yields `C^{−(n+1)} t^{n−1} (v r â − h Γ t² â†)|n⟩ / 2`, i.e.
/// `M[n−1,n] = C^{−(n+1)} t^{n−1} v r √n / 2` and
/// `M[n+1,n] = −C^{−(n+1)} t^{n−1} h Γ t² √(n+1) / 2`.
pub fn conditional_map_matrix(p: &GateParams, q: &Qubit, dim: usize) -> MapMatrix {
    let t = p.bs.t();
    let r = p.bs.r();
    let gamma = p.gamma();
    let c_inv = (1.0 - gamma * gamma).sqrt(); // C^{−1} = sech g
    let mut m = MapMatrix::zeros(dim);
    for n in 0..=dim {
        let common = c_inv.powi(n as i32 + 1) * t.powi(n as i32 - 1) / 2.0;
        if n >= 1 {
            m.set(n - 1, n, q.v() * (common * r * (n as f64).sqrt()));
        }
        if n + 1 <= dim {
            m.set(
                n + 1,
                n,
                -q.h() * (common * gamma * t * t * ((n + 1) as f64).sqrt()),
            );
        }
    }
    m
}

/// The four one-photon-loss correction vectors for input `|n⟩`, each an
/// unnormalized state on the signal mode at cap n+2, paired with its
/// arrival pattern:
///
/// * (2,0,0,1): `η√(1−η)/√2 · C^{−(n+1)} t^{n−2} r (−h t²Γ(n̂+1) + (vr/2)â²)|n⟩`
/// * (1,1,0,1): `η√(1−η)/(2√2) · C^{−(n+1)} t^{n−2} r² v â²|n⟩`
/// * (1,0,1,1): `−η√(1−η)/(2√2) · C^{−(n+1)} t^{n+2} Γ² h (â†)²|n⟩`
/// * (1,0,0,2): `η√(1−η)/√2 · C^{−(n+1)} tⁿ Γ (vr(n̂+1) − (ht²Γ/2)(â†)²)|n⟩`
pub fn correction_states(
    n: usize,
    p: &GateParams,
    q: &Qubit,
    eta: f64,
) -> Result<Vec<(ExcessPattern, FockVector)>> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParams(format!(
            "loss corrections require η ∈ (0,1), got {eta}"
        )));
    }
    let t = p.bs.t();
    let r = p.bs.r();
    let gamma = p.gamma();
    let c_inv = (1.0 - gamma * gamma).sqrt();
    let loss = eta * (1.0 - eta).sqrt();
    let sqrt2 = std::f64::consts::SQRT_2;
    let c_pow = c_inv.powi(n as i32 + 1);
    let nf = n as f64;
    let down2 = if n >= 2 { (nf * (nf - 1.0)).sqrt() } else { 0.0 };
    let up2 = ((nf + 1.0) * (nf + 2.0)).sqrt();

    let cap = n + 2;
    let mut out = Vec::with_capacity(4);
    let patterns = ExcessPattern::one_loss_patterns();

    // (2,0,0,1)
    let mut s = FockVector::zeros(&[(ModeLabel::S, cap)])?;
    {
        let pref = loss / sqrt2 * c_pow * t.powi(n as i32 - 2) * r;
        let amps = s.amps_mut();
        amps[n] = -q.h() * (pref * t * t * gamma * (nf + 1.0));
        if n >= 2 {
            amps[n - 2] += q.v() * (pref * r / 2.0 * down2);
        }
    }
    out.push((patterns[0], s));

    // (1,1,0,1)
    let mut s = FockVector::zeros(&[(ModeLabel::S, cap)])?;
    if n >= 2 {
        let pref = loss / (2.0 * sqrt2) * c_pow * t.powi(n as i32 - 2) * r * r;
        s.amps_mut()[n - 2] = q.v() * (pref * down2);
    }
    out.push((patterns[1], s));

    // (1,0,1,1)
    let mut s = FockVector::zeros(&[(ModeLabel::S, cap)])?;
    {
        let pref = loss / (2.0 * sqrt2) * c_pow * t.powi(n as i32 + 2) * gamma * gamma;
        s.amps_mut()[n + 2] = -q.h() * (pref * up2);
    }
    out.push((patterns[2], s));

    // (1,0,0,2)
    let mut s = FockVector::zeros(&[(ModeLabel::S, cap)])?;
    {
        let pref = loss / sqrt2 * c_pow * t.powi(n as i32) * gamma;
        let amps = s.amps_mut();
        amps[n] = q.v() * (pref * r * (nf + 1.0));
        amps[n + 2] += -q.h() * (pref * t * t * gamma / 2.0 * up2);
    }
    out.push((patterns[3], s));

    Ok(out)
}

/// The first-order operator set for detector efficiency η ∈ (0,1]: the
/// leading map scaled by η together with the four one-photon-loss
/// correction matrices. The induced process is ρ → Σ_μ A_μ ρ A_μ†; the
/// members are incoherent detection events and are never summed in
/// amplitude. At η = 1 the set is the single lossless map.
pub fn first_order_map(
    p: &GateParams,
    q: &Qubit,
    eta: f64,
    dim: usize,
) -> Result<Vec<MapMatrix>> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "first-order map requires η ∈ (0,1], got {eta}"
        )));
    }
    let leading = conditional_map_matrix(p, q, dim);
    if eta == 1.0 {
        return Ok(vec![leading]);
    }
    let mut set = vec![leading.scaled(Complex64::new(eta, 0.0))];
    let mut corrections = vec![MapMatrix::zeros(dim); 4];
    for n in 0..=dim {
        for (i, (_, state)) in correction_states(n, p, q, eta)?.iter().enumerate() {
            for l in 0..=dim.min(n + 2) {
                let amp = state.amplitude(&[(ModeLabel::S, l)])?;
                corrections[i].set(l, n, amp);
            }
        }
    }
    set.extend(corrections);
    Ok(set)
}

/// Assemble a correction state directly from the branch expansion: for
/// every physical index solution, the term
/// `s_b · 2^{−(j+k+1)/2} · binom(k,y) binom(j,x) · C^{−(n+1)} (Γ^j/j!)
///  · binom(n+j,k) t^{n+j−k} r^k √((n+j−k)!/n!)` on `|n+j−k⟩`,
/// with branch signs (+h, −h, −v, +v), all scaled by the loss prefactor.
/// This is the independent route the printed correction formulas must
/// reproduce.
#[cfg(test)]
pub(crate) fn assemble_from_index_sets(
    e: &ExcessPattern,
    n: usize,
    p: &GateParams,
    q: &Qubit,
    eta: f64,
) -> Result<FockVector> {
    let t = p.bs.t();
    let r = p.bs.r();
    let gamma = p.gamma();
    let c_inv = (1.0 - gamma * gamma).sqrt();
    let cap = n + 2;
    let lnf = ln_factorials(n + 4);
    let mut state = FockVector::zeros(&[(ModeLabel::S, cap)])?;
    for set in enumerate_index_sets(e) {
        if !set.physical {
            continue;
        }
        let (k, y, j, x) = (set.k as usize, set.y as usize, set.j as usize, set.x as usize);
        let target = n + j;
        if target < k {
            continue; // binom(n+j,k) = 0: more tapped than present
        }
        let m = target - k;
        let sign = match set.branch {
            1 => q.h(),
            2 => -q.h(),
            3 => -q.v(),
            4 => q.v(),
            _ => unreachable!(),
        };
        let mut mag = 0.5f64.powf((j + k + 1) as f64 / 2.0);
        mag *= binomial(k as u64, y as u64) * binomial(j as u64, x as u64);
        mag *= c_inv.powi(n as i32 + 1);
        mag *= gamma.powi(j as i32) / (1..=j).map(|i| i as f64).product::<f64>().max(1.0);
        mag *= binomial(target as u64, k as u64);
        mag *= t.powi(m as i32) * r.powi(k as i32);
        mag *= (0.5 * (lnf[m] - lnf[n])).exp();
        if m <= cap {
            state.amps_mut()[m] += sign * mag;
        }
    }
    let mut state = state;
    state.scale(Complex64::new(loss_prefactor(e, eta)?, 0.0));
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ModeLabel::S;

    const TOLERANCE: f64 = 1e-12;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Every branch solution for every one-excess pattern, in
    /// (k, y, x, j) order with its physicality flag.
    #[test]
    fn index_solutions_match_the_frozen_table() {
        let expected: [(usize, [(i64, i64, i64, i64, bool); 4]); 4] = [
            // pattern index, rows for branches 1..4
            (
                0, // (2,0,0,1)
                [
                    (1, 2, 0, 1, false),
                    (1, 1, 0, 1, true),
                    (2, 2, -1, 0, false),
                    (2, 2, 0, 0, true),
                ],
            ),
            (
                1, // (1,1,0,1)
                [
                    (1, 1, 0, 1, true),
                    (1, 0, 0, 1, true),
                    (2, 1, -1, 0, false),
                    (2, 1, 0, 0, true),
                ],
            ),
            (
                2, // (1,0,1,1)
                [
                    (0, 1, 1, 2, false),
                    (0, 0, 1, 2, true),
                    (1, 1, 0, 1, true),
                    (1, 1, 1, 1, true),
                ],
            ),
            (
                3, // (1,0,0,2)
                [
                    (0, 1, 0, 2, false),
                    (0, 0, 0, 2, true),
                    (1, 1, -1, 1, false),
                    (1, 1, 0, 1, true),
                ],
            ),
        ];
        let patterns = ExcessPattern::one_loss_patterns();
        let mut physical_count = 0;
        for &(pi, rows) in &expected {
            let sets = enumerate_index_sets(&patterns[pi]);
            assert_eq!(sets.len(), 4);
            for (bi, &(k, y, x, j, physical)) in rows.iter().enumerate() {
                let s = sets[bi];
                assert_eq!(s.branch, bi + 1);
                assert_eq!(
                    (s.k, s.y, s.x, s.j, s.physical),
                    (k, y, x, j, physical),
                    "pattern {} branch {}",
                    patterns[pi],
                    bi + 1
                );
                if s.physical {
                    physical_count += 1;
                }
            }
        }
        assert_eq!(physical_count, 10);
    }

    #[test]
    fn leading_pattern_keeps_one_branch_per_quadrature() {
        let sets = enumerate_index_sets(&ExcessPattern::leading());
        // branch 2 realizes the photon-addition term, branch 4 the
        // subtraction term; branches 1 and 3 are unphysical here
        assert!(!sets[0].physical);
        assert!(sets[1].physical);
        assert_eq!((sets[1].k, sets[1].y, sets[1].x, sets[1].j), (0, 0, 0, 1));
        assert!(!sets[2].physical);
        assert!(sets[3].physical);
        assert_eq!((sets[3].k, sets[3].y, sets[3].x, sets[3].j), (1, 1, 0, 0));
    }

    #[test]
    fn loss_prefactor_evaluates_the_printed_values() {
        let eta = 0.9;
        let lead = ExcessPattern::leading();
        assert!((loss_prefactor(&lead, eta).unwrap() - eta).abs() < TOLERANCE);
        let [h1x, h2x, v1x, v2x] = ExcessPattern::one_loss_patterns();
        assert!(
            (loss_prefactor(&h1x, eta).unwrap() - 1.8 * 0.1f64.sqrt()).abs() < TOLERANCE
        );
        assert!(
            (loss_prefactor(&h2x, eta).unwrap() - eta * 0.1f64.sqrt()).abs() < TOLERANCE
        );
        assert!(
            (loss_prefactor(&v1x, eta).unwrap() - eta * 0.1f64.sqrt()).abs() < TOLERANCE
        );
        assert!(
            (loss_prefactor(&v2x, eta).unwrap() - 2.0 * eta * 0.1f64.sqrt()).abs() < TOLERANCE
        );
        // the herald clicks themselves cannot be absent
        assert!(matches!(
            loss_prefactor(&ExcessPattern::new(0, 1, 1, 1).unwrap(), eta),
            Err(Error::InvalidPattern(_))
        ));
        assert!(matches!(
            loss_prefactor(&ExcessPattern::new(1, 1, 1, 0).unwrap(), eta),
            Err(Error::InvalidPattern(_))
        ));
        assert!(ExcessPattern::new(2, 2, 0, 0).is_err());
    }

    #[test]
    fn subtraction_programme_gives_a_strictly_lowering_matrix() {
        let p = GateParams::tuned(0.95).unwrap();
        let m = conditional_map_matrix(&p, &Qubit::subtraction(), 6);
        for n in 0..=6usize {
            for l in 0..=6usize {
                let v = m.entry(l, n);
                if n >= 1 && l == n - 1 {
                    assert!(v.norm() > 0.0);
                } else {
                    assert_eq!(v, c(0.0, 0.0));
                }
            }
        }
        // M[0,1] = r·C^{−2}/2 at t = 0.95 (gain-matched)
        let r = p.bs.r();
        let gamma = p.gamma();
        assert!((r - 0.312249899919920).abs() < 1e-14);
        let expect = r * (1.0 - gamma * gamma) / 2.0;
        assert!((m.entry(0, 1) - c(expect, 0.0)).norm() < TOLERANCE);
    }

    #[test]
    fn gain_matching_fixes_the_branch_ratio() {
        // with Γt² = r the two off-diagonals satisfy
        // |M[n+1,n] / M[n−1,n]| = |h/v| √((n+1)/n)
        let p = GateParams::tuned(0.9).unwrap();
        let q = Qubit::normalized(c(0.6, 0.2), c(-0.4, 0.66)).unwrap();
        let m = conditional_map_matrix(&p, &q, 8);
        for n in 1..=6usize {
            let ratio = m.entry(n + 1, n).norm() / m.entry(n - 1, n).norm();
            let expect =
                (q.h().norm() / q.v().norm()) * (((n + 1) as f64) / n as f64).sqrt();
            assert!((ratio - expect).abs() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn matrix_apply_multiplies_columns() {
        let p = GateParams::tuned(0.95).unwrap();
        let m = conditional_map_matrix(&p, &Qubit::position(), 3);
        let amps = vec![c(0.5, 0.0), c(0.0, 0.5), c(0.5, 0.0), c(0.0, -0.5)];
        let out = m.apply(&amps).unwrap();
        for l in 0..=3usize {
            let mut expect = c(0.0, 0.0);
            for (n, a) in amps.iter().enumerate() {
                expect += m.entry(l, n) * a;
            }
            assert!((out[l] - expect).norm() < TOLERANCE);
        }
        assert!(m.apply(&amps[..3]).is_err());
    }

    #[test]
    fn printed_corrections_match_the_branch_assembly() {
        let p = GateParams::tuned(0.9).unwrap();
        let q = Qubit::normalized(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let eta = 0.85;
        for n in 0..=4usize {
            let printed = correction_states(n, &p, &q, eta).unwrap();
            for (pattern, state) in &printed {
                let assembled = assemble_from_index_sets(pattern, n, &p, &q, eta).unwrap();
                assert!(
                    state.max_component_diff(&assembled).unwrap() < TOLERANCE,
                    "pattern {pattern}, n = {n}"
                );
            }
        }
    }

    #[test]
    fn assembled_leading_pattern_reproduces_the_scaled_map() {
        let p = GateParams::tuned(0.9).unwrap();
        let q = Qubit::momentum();
        let eta = 0.85;
        let m = conditional_map_matrix(&p, &q, 8);
        for n in 0..=4usize {
            let lead = assemble_from_index_sets(&ExcessPattern::leading(), n, &p, &q, eta)
                .unwrap();
            for l in 0..=(n + 2).min(8) {
                let expect = m.entry(l, n) * eta;
                let got = lead.amplitude(&[(S, l)]).unwrap();
                assert!((got - expect).norm() < TOLERANCE, "n = {n}, l = {l}");
            }
        }
    }

    #[test]
    fn unit_efficiency_collapses_to_the_single_map() {
        let p = GateParams::tuned(0.95).unwrap();
        let q = Qubit::position();
        let set = first_order_map(&p, &q, 1.0, 5).unwrap();
        assert_eq!(set.len(), 1);
        let m = conditional_map_matrix(&p, &q, 5);
        for n in 0..=5usize {
            for l in 0..=5usize {
                assert_eq!(set[0].entry(l, n), m.entry(l, n));
            }
        }
    }

    #[test]
    fn lossy_operator_set_collects_the_corrections_as_columns() {
        let p = GateParams::tuned(0.95).unwrap();
        let q = Qubit::momentum();
        let eta = 0.9;
        let dim = 5;
        let set = first_order_map(&p, &q, eta, dim).unwrap();
        assert_eq!(set.len(), 5);
        let m = conditional_map_matrix(&p, &q, dim);
        for n in 0..=dim {
            for l in 0..=dim {
                assert!((set[0].entry(l, n) - m.entry(l, n) * eta).norm() < TOLERANCE);
            }
        }
        for n in 0..=dim {
            let states = correction_states(n, &p, &q, eta).unwrap();
            for (i, (_, state)) in states.iter().enumerate() {
                for l in 0..=dim.min(n + 2) {
                    let amp = state.amplitude(&[(S, l)]).unwrap();
                    assert!((set[1 + i].entry(l, n) - amp).norm() < TOLERANCE);
                }
            }
        }
    }

    #[test]
    fn degenerate_inputs_kill_the_expected_corrections() {
        let p = GateParams::tuned(0.95).unwrap();
        let q = Qubit::subtraction(); // h = 0
        let states = correction_states(0, &p, &q, 0.9).unwrap();
        // (1,1,0,1): â²|0⟩ = 0; (1,0,1,1): proportional to h = 0
        assert!(states[1].1.norm_sqr() < 1e-30);
        assert!(states[2].1.norm_sqr() < 1e-30);
        // (2,0,0,1) keeps only its â² part, which also dies on |0⟩ with h = 0
        assert!(states[0].1.norm_sqr() < 1e-30);
        // (1,0,0,2) survives through vr(n̂+1)
        assert!(states[3].1.norm_sqr() > 0.0);
    }

    #[test]
    fn correction_norms_scale_as_the_loss_amplitude() {
        let p = GateParams::tuned(0.9).unwrap();
        let q = Qubit::position();
        let (e1, e2) = (0.85, 0.97);
        let s1 = correction_states(2, &p, &q, e1).unwrap();
        let s2 = correction_states(2, &p, &q, e2).unwrap();
        let expect = (e1 * (1.0 - e1).sqrt()) / (e2 * (1.0 - e2).sqrt());
        for (a, b) in s1.iter().zip(&s2) {
            if b.1.norm_sqr() > 0.0 {
                let ratio = (a.1.norm_sqr() / b.1.norm_sqr()).sqrt();
                assert!((ratio - expect).abs() < 1e-10);
            }
        }
        assert!(correction_states(2, &p, &q, 1.0).is_err());
        assert!(first_order_map(&p, &q, 0.0, 3).is_err());
    }
}
