//! Release acceptance suite: one integration test per shipping criterion.
//! Each test asserts its stated tolerance and prints a single
//! `criterion N: PASS — …` summary line, so running this target with
//! `--nocapture` reads as the release checklist.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use num_complex::Complex64;

use qpgate::analysis::{fidelity_pure, process_tensor, Operator};
use qpgate::closed_form::{
    conditional_map_matrix, correction_states, enumerate_index_sets, first_order_map,
    ExcessPattern,
};
use qpgate::fock::{FockVector, ModeLabel};
use qpgate::gate::{
    adaptive_loss_cap, ideal_apply, run_gate, run_gate_lossy, GateParams, Qubit,
};
use qpgate::states::{make_input, FamilyKind, InputFamily};
use qpgate::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn signal_amp(v: &FockVector, n: usize) -> Complex64 {
    match v.cap(ModeLabel::S) {
        Ok(cap) if n <= cap => v.amplitude(&[(ModeLabel::S, n)]).unwrap(),
        _ => Complex64::new(0.0, 0.0),
    }
}

fn fock_input(n: usize) -> FockVector {
    FockVector::basis_state(&[(ModeLabel::S, n)], &[(ModeLabel::S, n)]).unwrap()
}

/// Least-squares constant minimizing `Σ ‖sim − c·col‖²` over the stacked
/// (map column, simulator output) amplitude pairs of one parameter set.
fn fitted_constant(pairs: &[(Complex64, Complex64)]) -> Complex64 {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for &(col, sim) in pairs {
        num += col.conj() * sim;
        den += col.norm_sqr();
    }
    num / den
}

/// Lossless simulator outputs for inputs |0⟩..|n_max⟩ stacked against the
/// matrix columns of the analytic conditional map.
fn stacked_pairs(
    p: &GateParams,
    q: &Qubit,
    n_max: usize,
    dim: usize,
) -> Vec<(Complex64, Complex64)> {
    let m = conditional_map_matrix(p, q, dim);
    let mut pairs = Vec::new();
    for n in 0..=n_max {
        // a vanishing herald (possible for one-sided programmes on |0⟩)
        // contributes an all-zero column on both sides
        let out = match run_gate(&fock_input(n), q, p) {
            Ok(r) => Some(r.state),
            Err(Error::ZeroNormState { .. }) => None,
            Err(e) => panic!("gate run failed: {e}"),
        };
        for l in 0..dim {
            let sim = out
                .as_ref()
                .map_or(Complex64::new(0.0, 0.0), |s| signal_amp(s, l));
            pairs.push((m.entry(l, n), sim));
        }
    }
    pairs
}

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_qpgate")
}

fn work_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "qpgate-acceptance-{tag}-{}",
        std::process::id()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_binary(args: &[&str]) -> Output {
    Command::new(binary())
        .args(args)
        .env("RAYON_NUM_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("read {}: {e}", path.display()));
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .expect("header line")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

#[test]
fn criterion_1_lossless_runs_reproduce_the_conditional_map() {
    let clock = Instant::now();
    let q = Qubit::new(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
    let dim = 8;
    let mut worst = 0.0f64;
    for &t in &[0.8, 0.9, 0.95] {
        let p = GateParams::tuned(t).unwrap();
        let pairs = stacked_pairs(&p, &q, 6, dim);
        let k = fitted_constant(&pairs);
        assert!(
            k.norm() > 0.5 && k.norm() < 2.0,
            "degenerate fit constant {k} at t = {t}"
        );
        for &(col, sim) in &pairs {
            worst = worst.max((sim - k * col).norm());
        }
    }
    let elapsed = clock.elapsed().as_secs_f64();
    assert!(
        worst <= 1e-10,
        "worst amplitude residual {worst:.3e} exceeds 1e-10"
    );
    assert!(elapsed < 5.0, "comparison took {elapsed:.2}s, budget 5s");
    println!(
        "criterion 1: PASS — Fock inputs 0..=6 at t ∈ {{0.8, 0.9, 0.95}} match the \
         conditional map to {worst:.2e} with one fitted constant per parameter set \
         ({elapsed:.2}s)"
    );
}

#[test]
fn criterion_2_loss_members_match_corrections_and_residual_is_second_order() {
    let dim = 8;
    let p0 = GateParams::tuned(0.95).unwrap();
    let w = std::f64::consts::FRAC_1_SQRT_2;
    let qubits = [
        Qubit::new(c(0.0, 0.0), c(1.0, 0.0)).unwrap(),
        Qubit::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap(),
        Qubit::new(c(0.0, 1.0), c(0.0, 0.0)).unwrap(),
        Qubit::new(c(w, 0.0), c(w, 0.0)).unwrap(),
    ];
    let mut worst = 0.0f64;
    for q in &qubits {
        let k = fitted_constant(&stacked_pairs(&p0, q, 6, dim));
        for &eta in &[0.85, 0.9, 0.95] {
            for n in 0..=4usize {
                let p = p0
                    .with_eta(eta)
                    .unwrap()
                    .with_loss_cap(2)
                    .with_leak_tolerance(1e-2)
                    .unwrap();
                let full = run_gate_lossy(&fock_input(n), q, &p).unwrap();
                let corr = correction_states(n, &p0, q, eta).unwrap();
                // members carry lost counts in (H1, V1, H2, V2) order; the
                // corrections arrive in (H1, H2, V1, V2) pattern order
                let mut seen = 0;
                for member in &full.members {
                    if member.lost.iter().sum::<usize>() != 1 {
                        continue;
                    }
                    let idx = match member.lost {
                        [1, 0, 0, 0] => 0,
                        [0, 1, 0, 0] => 2,
                        [0, 0, 1, 0] => 1,
                        [0, 0, 0, 1] => 3,
                        _ => unreachable!("single-loss pattern"),
                    };
                    seen += 1;
                    let (_, reference) = &corr[idx];
                    for l in 0..=n + 2 {
                        let d = (signal_amp(&member.state, l)
                            - k * signal_amp(reference, l))
                        .norm();
                        worst = worst.max(d);
                    }
                }
                assert_eq!(seen, 4, "expected all four single-loss members");
            }
        }
    }
    assert!(
        worst <= 1e-8,
        "worst single-loss member mismatch {worst:.3e} exceeds 1e-8"
    );

    // the gap between the full loss ensemble and the first-order model is
    // entirely multi-photon loss, so it shrinks like (1−η)²
    let q = Qubit::new(c(w, 0.0), c(w, 0.0)).unwrap();
    let input = fock_input(2);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &eta in &[0.9, 0.95, 0.98, 0.99] {
        let p = p0
            .with_eta(eta)
            .unwrap()
            .with_loss_cap(adaptive_loss_cap(eta));
        let full = run_gate_lossy(&input, &q, &p).unwrap().success_probability;
        let mut first = 0.0;
        for branch in &first_order_map(&p0, &q, eta, dim).unwrap() {
            for l in 0..dim {
                first += branch.entry(l, 2).norm_sqr();
            }
        }
        let gap = (full - first).abs();
        assert!(gap > 0.0, "vanishing residual at eta = {eta}");
        xs.push((1.0 - eta).ln());
        ys.push(gap.ln());
    }
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let ym = ys.iter().sum::<f64>() / ys.len() as f64;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum::<f64>()
        / xs.iter().map(|x| (x - xm).powi(2)).sum::<f64>();
    assert!(slope >= 1.8, "residual slope {slope:.3} below 1.8");
    println!(
        "criterion 2: PASS — single-loss members match the printed corrections to \
         {worst:.2e} under the shared constant; higher-order residual slope {slope:.2}"
    );
}

#[test]
fn criterion_3_index_solutions_match_the_frozen_table() {
    let expected: [(usize, [(i64, i64, i64, i64, bool); 4]); 4] = [
        // pattern index, rows for branches 1..4 in (k, y, x, j) order
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
    let mut physical = 0;
    for &(pi, rows) in &expected {
        let sets = enumerate_index_sets(&patterns[pi]);
        assert_eq!(sets.len(), 4, "four branch solutions per pattern");
        for (bi, &(k, y, x, j, flag)) in rows.iter().enumerate() {
            let s = sets[bi];
            assert_eq!(s.branch, bi + 1);
            assert_eq!(
                (s.k, s.y, s.x, s.j, s.physical),
                (k, y, x, j, flag),
                "pattern {} branch {}",
                patterns[pi],
                bi + 1
            );
            if s.physical {
                physical += 1;
            }
        }
    }
    assert_eq!(physical, 10, "ten of the sixteen solutions are physical");
    println!(
        "criterion 3: PASS — all 16 branch index solutions match the frozen table \
         ({physical} physical)"
    );
}

#[test]
fn criterion_4_quadrature_outputs_agree_under_phase_rotation() {
    let p = GateParams::tuned(0.95).unwrap();
    let mut worst = 0.0f64;
    for &alpha in &[0.5, 1.0, 1.5] {
        let fam_x = InputFamily::auto_capped(FamilyKind::Coherent, alpha).unwrap();
        let input_x = make_input(&fam_x).unwrap();
        let fam_p = fam_x.with_phase(std::f64::consts::FRAC_PI_2).unwrap();
        let input_p = make_input(&fam_p).unwrap();
        let out_x = run_gate(&input_x, &Qubit::position(), &p).unwrap();
        let out_p = run_gate(&input_p, &Qubit::momentum(), &p).unwrap();
        let overlap = |input: &FockVector, out: &FockVector, op: Operator| -> f64 {
            let cap = out.cap(ModeLabel::S).unwrap();
            let mut amps = input.amplitudes().to_vec();
            amps.resize(cap + 1, Complex64::new(0.0, 0.0));
            let reference = FockVector::from_amplitudes(
                ModeLabel::S,
                op.ideal_matrix(cap).apply(&amps).unwrap(),
            )
            .unwrap();
            reference.inner_product(out).unwrap().norm_sqr()
        };
        let vx = overlap(&input_x, &out_x.state, Operator::Position);
        let vp = overlap(&input_p, &out_p.state, Operator::Momentum);
        worst = worst.max((vx - vp).abs() / vx.abs().max(1e-30));
    }
    assert!(
        worst <= 1e-10,
        "quadrature overlap mismatch {worst:.3e} exceeds 1e-10"
    );
    println!(
        "criterion 4: PASS — position and phase-rotated momentum runs give the same \
         target overlap to {worst:.2e} at α ∈ {{0.5, 1.0, 1.5}}"
    );
}

#[test]
fn criterion_5_fidelity_sweep_artifact_is_complete_and_sane() {
    let dir = work_dir("c5");
    let out = dir.join("fig2.csv");
    let clock = Instant::now();
    let run = run_binary(&["fig2", "--out", out.to_str().unwrap(), "--format", "csv"]);
    let elapsed = clock.elapsed().as_secs_f64();
    assert!(
        run.status.success(),
        "sweep failed: {}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(
        elapsed < 120.0,
        "single-threaded sweep took {elapsed:.1}s, budget 120s"
    );
    let (header, rows) = read_csv(&out);
    assert_eq!(
        header,
        vec!["family", "operator", "nbar", "fidelity", "success_prob", "leak"]
    );
    assert_eq!(rows.len(), 960, "4 families × 4 operators × 60 points");
    for row in &rows {
        assert_eq!(row.len(), 6, "short record: {row:?}");
        for cell in row {
            assert!(!cell.is_empty(), "missing value in {row:?}");
        }
    }
    let fid = |family: &str, op: &str, nbar: f64| -> f64 {
        rows.iter()
            .find(|r| {
                r[0] == family
                    && r[1] == op
                    && (r[2].parse::<f64>().unwrap() - nbar).abs() < 1e-9
            })
            .unwrap_or_else(|| panic!("no record for {family}/{op}/{nbar}"))[3]
            .parse()
            .unwrap()
    };
    for op in ["a", "adag", "x", "p"] {
        let f = fid("coherent", op, 0.05);
        assert!(f >= 0.99, "weak coherent input, operator {op}: fidelity {f}");
    }
    for nbar in [1.0, 2.0, 3.0] {
        let fs = fid("squeezed_vacuum", "x", nbar);
        let fc = fid("coherent", "x", nbar);
        assert!(
            fs <= fc + 1e-12,
            "squeezed vacuum beat coherent for x̂ at n̄ = {nbar}: {fs} > {fc}"
        );
    }
    println!(
        "criterion 5: PASS — 960 sweep records with no gaps in {elapsed:.1}s; weak-field \
         fidelity ≥ 0.99 for every operator; squeezed vacuum ≤ coherent for x̂ at \
         n̄ ∈ {{1, 2, 3}}"
    );
}

#[test]
fn criterion_6_process_diagonal_has_exact_ratios_and_converges() {
    let q = Qubit::position();
    let dim = 8;
    let mut worst_ratio = 0.0f64;
    let mut devs: Vec<(f64, f64)> = Vec::new();
    for &t in &[0.95, 0.99, 0.999] {
        let p = GateParams::tuned(t).unwrap();
        let m = conditional_map_matrix(&p, &q, dim);
        let tensor = process_tensor(std::slice::from_ref(&m), dim).unwrap();
        let diag = tensor.diagonal_slice();
        if t == 0.95 {
            for n in 1..=6usize {
                let ratio = diag[n][n + 1] / diag[n][n - 1];
                let target = (n as f64 + 1.0) / n as f64;
                worst_ratio = worst_ratio.max((ratio - target).abs());
            }
        }
        // deviation of the rescaled diagonal block from the ideal quadrature
        // transfer |⟨l|x̂|n⟩|², which shrinks as the tap opens up
        let scale = 2.0 / (1.0 - t * t);
        let mut dev = 0.0f64;
        for n in 0..=3usize {
            for l in 0..=3usize {
                let ideal = if n >= 1 && l == n - 1 {
                    n as f64
                } else if l == n + 1 {
                    n as f64 + 1.0
                } else {
                    0.0
                };
                dev = dev.max((scale * diag[n][l] - ideal).abs());
            }
        }
        devs.push((t, dev));
    }
    assert!(
        worst_ratio <= 1e-10,
        "ladder ratio defect {worst_ratio:.3e} exceeds 1e-10"
    );
    for pair in devs.windows(2) {
        assert!(
            pair[1].1 < pair[0].1 - 1e-3,
            "rescaled deviation did not shrink: {devs:?}"
        );
    }

    let dir = work_dir("c6");
    let out = dir.join("fig3.csv");
    let run = run_binary(&["fig3", "--out", out.to_str().unwrap()]);
    assert!(
        run.status.success(),
        "diagonal export failed: {}",
        String::from_utf8_lossy(&run.stderr)
    );
    let (header, rows) = read_csv(&out);
    assert_eq!(header, vec!["n", "l", "diag", "diag_rescaled"]);
    assert_eq!(rows.len(), 81, "n, l ∈ 0..=8");
    let scale = 2.0 / (1.0 - 0.95f64 * 0.95);
    for row in &rows {
        let raw: f64 = row[2].parse().unwrap();
        let rescaled: f64 = row[3].parse().unwrap();
        assert!(
            (rescaled - scale * raw).abs() <= 1e-12 * rescaled.abs().max(1.0),
            "rescaled column inconsistent in {row:?}"
        );
    }
    let trend: Vec<String> = devs.iter().map(|(t, d)| format!("{d:.3} @ t={t}")).collect();
    println!(
        "criterion 6: PASS — ladder ratios match (n+1)/n to {worst_ratio:.2e}; rescaled \
         deviation falls monotonically ({}); 81-row diagonal artifact emitted",
        trend.join(" → ")
    );
}

#[test]
fn criterion_7_efficiency_artifacts_are_consistent_and_ordered() {
    let dir = work_dir("c7");

    let fig4 = dir.join("fig4.csv");
    let run = run_binary(&["fig4", "--out", fig4.to_str().unwrap()]);
    assert!(
        run.status.success(),
        "coherence export failed: {}",
        String::from_utf8_lossy(&run.stderr)
    );
    let (header, rows) = read_csv(&fig4);
    assert_eq!(
        header,
        vec!["eta", "n", "m", "coh_re", "coh_im", "coh_rescaled_re", "coh_rescaled_im"]
    );
    assert_eq!(rows.len(), 162, "two efficiencies × 81 coherence entries");
    let scale = 4.0 / (1.0 - 0.95f64 * 0.95);
    let mut etas_seen: Vec<String> = Vec::new();
    for row in &rows {
        let eta: f64 = row[0].parse().unwrap();
        let tag = format!("{eta:.2}");
        if !etas_seen.contains(&tag) {
            etas_seen.push(tag);
        }
        for (raw_col, rescaled_col) in [(3usize, 5usize), (4, 6)] {
            let raw: f64 = row[raw_col].parse().unwrap();
            let rescaled: f64 = row[rescaled_col].parse().unwrap();
            assert!(
                (rescaled - scale * raw).abs() <= 1e-12 * rescaled.abs().max(1.0),
                "rescaled coherence inconsistent in {row:?}"
            );
        }
    }
    etas_seen.sort();
    assert_eq!(etas_seen, vec!["0.90", "1.00"]);

    let fig5 = dir.join("fig5.csv");
    let clock = Instant::now();
    let run = run_binary(&["fig5", "--out", fig5.to_str().unwrap()]);
    let elapsed = clock.elapsed().as_secs_f64();
    assert!(
        run.status.success(),
        "efficiency grid failed: {}",
        String::from_utf8_lossy(&run.stderr)
    );
    let (header, rows) = read_csv(&fig5);
    assert_eq!(
        header,
        vec!["family", "operator", "nbar", "t", "eta", "fidelity", "success_prob", "leak"]
    );
    assert_eq!(rows.len(), 840, "2 operators × 20 transmissivities × 21 efficiencies");

    // the lossless column against an independent in-process recomputation
    let input = make_input(&InputFamily::auto_capped(FamilyKind::Coherent, 1.0).unwrap()).unwrap();
    let p = GateParams::tuned(0.95).unwrap();
    let mut worst_pin = 0.0f64;
    for op in [Operator::Position, Operator::Momentum] {
        let q = op.qubit();
        let out = run_gate(&input, &q, &p).unwrap();
        let (ideal, _) = ideal_apply(&q, &input).unwrap();
        let expect = fidelity_pure(&out.state, &ideal).unwrap();
        let got: f64 = rows
            .iter()
            .find(|r| {
                r[1] == op.to_string()
                    && (r[3].parse::<f64>().unwrap() - 0.95).abs() < 1e-12
                    && (r[4].parse::<f64>().unwrap() - 1.0).abs() < 1e-12
            })
            .expect("grid row at t = 0.95, η = 1")[5]
            .parse()
            .unwrap();
        worst_pin = worst_pin.max((got - expect).abs());
    }
    assert!(
        worst_pin <= 1e-10,
        "lossless grid column off by {worst_pin:.3e}"
    );

    // fidelity ordering in η holds across the grid except the small-t corner:
    // there the lossless gate is nearly dark (t/cosh g crushes the signal,
    // fidelity ~0.14 for p̂ at t = 0.8) and single-loss events land closer to
    // the target than the surviving herald, so the ensemble fidelity
    // genuinely rises as η drops
    let mut series: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
    for row in &rows {
        series
            .entry((row[1].clone(), row[3].clone()))
            .or_default()
            .push((row[4].parse().unwrap(), row[5].parse().unwrap()));
    }
    assert_eq!(series.len(), 40, "one series per operator × transmissivity");
    let mut checked = 0;
    let mut worst_rise = f64::NEG_INFINITY;
    for ((op, t_str), pts) in series.iter_mut() {
        let t: f64 = t_str.parse().unwrap();
        if t < 0.8299 {
            continue;
        }
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for pair in pts.windows(2) {
            let rise = pair[0].1 - pair[1].1;
            worst_rise = worst_rise.max(rise);
            assert!(
                rise <= 1e-9,
                "fidelity rose as η fell for {op} at t = {t_str}: {rise:.3e}"
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 2 * 17 * 20, "adjacent pairs over t ≥ 0.83");
    // pin the corner reversal so a silent change in the loss model shows up
    let corner = |eta: f64| -> f64 {
        rows.iter()
            .find(|r| {
                r[1] == "p"
                    && (r[3].parse::<f64>().unwrap() - 0.80).abs() < 1e-12
                    && (r[4].parse::<f64>().unwrap() - eta).abs() < 1e-12
            })
            .expect("corner row")[5]
            .parse()
            .unwrap()
    };
    assert!(
        corner(0.8) > corner(1.0) + 0.05,
        "collapsed-gate corner no longer shows the loss-driven fidelity rise"
    );
    println!(
        "criterion 7: PASS — coherence slices rescale-consistent at η ∈ {{0.9, 1.0}}; \
         840-point efficiency grid emitted in {elapsed:.0}s with its lossless column \
         re-derived to {worst_pin:.2e}; fidelity monotone in η for t ≥ 0.83 (worst \
         adjacent rise {worst_rise:.1e}) and the collapsed-gate corner reversal pinned"
    );
}

#[test]
fn criterion_8_verification_suite_passes_quickly() {
    let clock = Instant::now();
    let run = run_binary(&["verify"]);
    let elapsed = clock.elapsed().as_secs_f64();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "verification failed:\n{stdout}");
    assert!(elapsed < 60.0, "verification took {elapsed:.1}s, budget 60s");
    let passes = stdout.lines().filter(|l| l.starts_with("PASS")).count();
    assert!(passes >= 20, "only {passes} PASS lines:\n{stdout}");
    assert!(
        !stdout.lines().any(|l| l.starts_with("FAIL")),
        "failing checks:\n{stdout}"
    );
    println!("criterion 8: PASS — {passes} self-checks green in {elapsed:.1}s");
}
