//! Fidelities, process tensors, and parameter sweeps.
//!
//! Everything here compares heralded circuit output against the ideal
//! programmed operator applied directly to the input, and packages grid
//! scans of that comparison for the plotting front end.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

use crate::closed_form::MapMatrix;
use crate::error::{Error, Result};
use crate::fock::{FockVector, ModeLabel, ZERO_NORM_THRESHOLD};
use crate::gate::{
    adaptive_loss_cap, ideal_apply, run_gate, run_gate_lossy, GateParams, Qubit,
};
use crate::math::hermitian_eigen;
use crate::states::{make_input, parameter_for_nbar, FamilyKind, InputFamily};

/// The single-mode operations the programme qubit can dial in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    /// Photon subtraction, `â`.
    Subtract,
    /// Photon addition, `â†`.
    Add,
    /// The position quadrature, `x̂ = â + â†` (realized up to scale).
    Position,
    /// The momentum quadrature, `p̂ = i(â − â†)` (realized up to scale and phase).
    Momentum,
}

impl Operator {
    pub fn all() -> [Operator; 4] {
        [
            Operator::Subtract,
            Operator::Add,
            Operator::Position,
            Operator::Momentum,
        ]
    }

    /// The programme qubit realizing this operator, up to the global scale
    /// and phase that fidelities quotient out.
    pub fn qubit(self) -> Qubit {
        match self {
            Operator::Subtract => Qubit::subtraction(),
            Operator::Add => Qubit::addition(),
            Operator::Position => Qubit::position(),
            Operator::Momentum => Qubit::momentum(),
        }
    }

    /// Matrix of the target operator on occupations `0..=dim`: the bare
    /// ladder operators for subtraction/addition and the unnormalized
    /// quadratures `x̂ = â + â†`, `p̂ = i(â − â†)`.
    pub fn ideal_matrix(self, dim: usize) -> MapMatrix {
        let mut m = MapMatrix::zeros(dim);
        let i = Complex64::new(0.0, 1.0);
        for n in 0..=dim {
            let down = Complex64::new((n as f64).sqrt(), 0.0);
            let up = Complex64::new((n as f64 + 1.0).sqrt(), 0.0);
            match self {
                Operator::Subtract => {
                    if n > 0 {
                        m.set(n - 1, n, down);
                    }
                }
                Operator::Add => {
                    if n < dim {
                        m.set(n + 1, n, up);
                    }
                }
                Operator::Position => {
                    if n > 0 {
                        m.set(n - 1, n, down);
                    }
                    if n < dim {
                        m.set(n + 1, n, up);
                    }
                }
                Operator::Momentum => {
                    if n > 0 {
                        m.set(n - 1, n, i * down);
                    }
                    if n < dim {
                        m.set(n + 1, n, -i * up);
                    }
                }
            }
        }
        m
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            Operator::Subtract => "a",
            Operator::Add => "adag",
            Operator::Position => "x",
            Operator::Momentum => "p",
        };
        write!(f, "{label}")
    }
}

impl FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(Operator::Subtract),
            "adag" => Ok(Operator::Add),
            "x" => Ok(Operator::Position),
            "p" => Ok(Operator::Momentum),
            other => Err(Error::InvalidParams(format!(
                "unknown operator '{other}' (expected a, adag, x, or p)"
            ))),
        }
    }
}

/// Grow both states to a common set of truncation caps. They must carry the
/// same modes in the same order.
fn aligned_pair(a: &FockVector, b: &FockVector) -> Result<(FockVector, FockVector)> {
    if a.modes() != b.modes() {
        return Err(Error::ModeMismatch(format!(
            "{:?} vs {:?}",
            a.modes(),
            b.modes()
        )));
    }
    let mut ga = a.clone();
    let mut gb = b.clone();
    for &mode in a.modes() {
        let ca = ga.cap(mode)?;
        let cb = gb.cap(mode)?;
        if ca < cb {
            ga = ga.grow_cap(mode, cb)?;
        } else if cb < ca {
            gb = gb.grow_cap(mode, ca)?;
        }
    }
    Ok((ga, gb))
}

/// Overlap fidelity `|⟨ideal|out⟩|² / (‖ideal‖² ‖out‖²)` between two pure
/// states, after aligning truncation caps. Insensitive to the scale and
/// global phase of either argument; errors if either is numerically zero.
pub fn fidelity_pure(out: &FockVector, ideal: &FockVector) -> Result<f64> {
    let (o, i) = aligned_pair(out, ideal)?;
    let no = o.norm_sqr();
    let ni = i.norm_sqr();
    if no < ZERO_NORM_THRESHOLD || ni < ZERO_NORM_THRESHOLD {
        return Err(Error::ZeroNormState {
            norm_sqr: no.min(ni),
        });
    }
    Ok(i.inner_product(&o)?.norm_sqr() / (no * ni))
}

/// Fidelity of a heralded ensemble `{ψ_k}` (weights carried in the member
/// norms) against a pure target: `Σ_k |⟨ideal|ψ_k⟩|²` over the total
/// ensemble weight. Zero-weight members are skipped.
pub fn fidelity_mixed<'a, I>(members: I, ideal: &FockVector) -> Result<f64>
where
    I: IntoIterator<Item = &'a FockVector>,
{
    let mut overlap = 0.0;
    let mut total = 0.0;
    let mut target = ideal.clone();
    for m in members {
        let n2 = m.norm_sqr();
        if n2 == 0.0 {
            continue;
        }
        total += n2;
        let (gm, gi) = aligned_pair(m, &target)?;
        target = gi;
        overlap += target.inner_product(&gm)?.norm_sqr();
    }
    let ni = target.norm_sqr();
    if ni < ZERO_NORM_THRESHOLD || total < ZERO_NORM_THRESHOLD {
        return Err(Error::ZeroNormState {
            norm_sqr: ni.min(total),
        });
    }
    Ok(overlap / (ni * total))
}

/// Accumulate `ρ[i][j] += Σ_rest ψ(i, rest) ψ*(j, rest)` for the kept mode
/// into a d×d row-major matrix.
fn accumulate_reduced(
    state: &FockVector,
    keep: ModeLabel,
    out: &mut [Complex64],
    d: usize,
) -> Result<()> {
    let ax = state.axis_of(keep)?;
    let stride = state.stride(ax);
    let dim = state.dims()[ax];
    let amps = state.amplitudes();
    let zero = Complex64::new(0.0, 0.0);
    for f in 0..amps.len() {
        if (f / stride) % dim != 0 {
            continue;
        }
        for i in 0..dim {
            let ai = amps[f + i * stride];
            if ai == zero {
                continue;
            }
            for j in 0..dim {
                out[i * d + j] += ai * amps[f + j * stride].conj();
            }
        }
    }
    Ok(())
}

fn mat_mul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![zero; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == zero {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// `F(ρ, σ) = (Tr √(√ρ σ √ρ))²` for trace-one Hermitian matrices.
fn uhlmann_fidelity(rho: &[Complex64], sigma: &[Complex64], n: usize) -> f64 {
    let (w, v) = hermitian_eigen(rho, n);
    let zero = Complex64::new(0.0, 0.0);
    let mut sqrt_rho = vec![zero; n * n];
    for c in 0..n {
        let s = w[c].max(0.0).sqrt();
        if s == 0.0 {
            continue;
        }
        for i in 0..n {
            let vic = s * v[i * n + c];
            for j in 0..n {
                sqrt_rho[i * n + j] += vic * v[j * n + c].conj();
            }
        }
    }
    let mut m = mat_mul(&mat_mul(&sqrt_rho, sigma, n), &sqrt_rho, n);
    // symmetrize away the roundoff before diagonalizing
    for i in 0..n {
        for j in (i + 1)..n {
            let h = 0.5 * (m[i * n + j] + m[j * n + i].conj());
            m[i * n + j] = h;
            m[j * n + i] = h.conj();
        }
        m[i * n + i] = Complex64::new(m[i * n + i].re, 0.0);
    }
    let (wm, _) = hermitian_eigen(&m, n);
    let root_sum: f64 = wm.iter().map(|&x| x.max(0.0).sqrt()).sum();
    root_sum * root_sum
}

/// Fidelity between the reduced occupation-basis density matrices of an
/// ensemble and of a pure target on one kept mode, via the Uhlmann formula.
/// This discards any correlation with companion modes, unlike
/// [`fidelity_mixed`] which compares joint states.
pub fn fidelity_reduced<'a, I>(members: I, ideal: &FockVector, keep: ModeLabel) -> Result<f64>
where
    I: IntoIterator<Item = &'a FockVector>,
{
    let members: Vec<&FockVector> = members.into_iter().collect();
    let mut d = ideal.cap(keep)? + 1;
    for m in &members {
        d = d.max(m.cap(keep)? + 1);
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut rho = vec![zero; d * d];
    for m in &members {
        if m.norm_sqr() == 0.0 {
            continue;
        }
        accumulate_reduced(m, keep, &mut rho, d)?;
    }
    let mut sigma = vec![zero; d * d];
    accumulate_reduced(ideal, keep, &mut sigma, d)?;
    let tr_rho: f64 = (0..d).map(|i| rho[i * d + i].re).sum();
    let tr_sigma: f64 = (0..d).map(|i| sigma[i * d + i].re).sum();
    if tr_rho < ZERO_NORM_THRESHOLD || tr_sigma < ZERO_NORM_THRESHOLD {
        return Err(Error::ZeroNormState {
            norm_sqr: tr_rho.min(tr_sigma),
        });
    }
    for v in &mut rho {
        *v /= tr_rho;
    }
    for v in &mut sigma {
        *v /= tr_sigma;
    }
    Ok(uhlmann_fidelity(&rho, &sigma, d))
}

/// Dense process tensor `E[n][m][l][k] = Σ_μ A_μ[l,n] conj(A_μ[k,m])` of a
/// set of branch matrices, tabulating how every input coherence `|n⟩⟨m|`
/// maps onto every output coherence `|l⟩⟨k|`.
#[derive(Debug, Clone)]
pub struct ProcessTensor {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ProcessTensor {
    /// Highest occupation number covered by each index.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, n: usize, m: usize, l: usize, k: usize) -> Complex64 {
        let d = self.dim + 1;
        self.entries[((n * d + m) * d + l) * d + k]
    }

    /// Largest violation of `E[n][m][l][k] = conj(E[m][n][k][l])`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim + 1;
        let mut worst = 0.0f64;
        for n in 0..d {
            for m in 0..d {
                for l in 0..d {
                    for k in 0..d {
                        let diff = (self.entry(n, m, l, k) - self.entry(m, n, k, l).conj()).norm();
                        worst = worst.max(diff);
                    }
                }
            }
        }
        worst
    }

    /// `E[n][n][l][l]`: the photon-number transfer table, indexed `[n][l]`.
    /// Real by construction.
    pub fn diagonal_slice(&self) -> Vec<Vec<f64>> {
        (0..=self.dim)
            .map(|n| (0..=self.dim).map(|l| self.entry(n, n, l, l).re).collect())
            .collect()
    }

    /// `E[n][m][n−1][m+1]`: the coherence-transfer amplitudes probed by
    /// interference between neighbouring number states, indexed `[n][m]`
    /// and zero where the output indices leave the table.
    pub fn coherence_slice(&self) -> Vec<Vec<Complex64>> {
        let zero = Complex64::new(0.0, 0.0);
        (0..=self.dim)
            .map(|n| {
                (0..=self.dim)
                    .map(|m| {
                        if n == 0 || m + 1 > self.dim {
                            zero
                        } else {
                            self.entry(n, m, n - 1, m + 1)
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Both standard views of a process tensor at once: the photon-number
/// transfer table and the coherence-transfer amplitudes.
pub fn tensor_slices(t: &ProcessTensor) -> (Vec<Vec<f64>>, Vec<Vec<Complex64>>) {
    (t.diagonal_slice(), t.coherence_slice())
}

/// Assemble the process tensor of a branch set on occupations `0..=dim`.
/// Branch matrices may be larger than `dim`; entries above it are ignored.
pub fn process_tensor(branches: &[MapMatrix], dim: usize) -> Result<ProcessTensor> {
    if branches.is_empty() {
        return Err(Error::InvalidParams(
            "process tensor needs at least one branch matrix".into(),
        ));
    }
    for b in branches {
        if b.dim() < dim {
            return Err(Error::InvalidParams(format!(
                "branch matrix covers occupations up to {}, tensor needs {dim}",
                b.dim()
            )));
        }
    }
    let d = dim + 1;
    let mut entries = vec![Complex64::new(0.0, 0.0); d * d * d * d];
    for b in branches {
        for n in 0..d {
            for l in 0..d {
                let a_ln = b.entry(l, n);
                if a_ln == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for m in 0..d {
                    for k in 0..d {
                        entries[((n * d + m) * d + l) * d + k] += a_ln * b.entry(k, m).conj();
                    }
                }
            }
        }
    }
    Ok(ProcessTensor { dim, entries })
}

/// One point of a parameter sweep, ready for serialization.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub family: String,
    pub operator: String,
    pub nbar: f64,
    pub t: f64,
    pub eta: f64,
    pub fidelity: f64,
    pub success_prob: f64,
    pub leak: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Scan input families × programmed operators × mean photon numbers at fixed
/// gate parameters, comparing each heralded output against the ideal
/// operator applied to the same input. Points where the herald cannot fire,
/// or where the ideal output vanishes, record NaN fidelity and a reason
/// instead of failing the scan. Records are ordered family → operator → n̄.
pub fn fidelity_sweep(
    families: &[FamilyKind],
    operators: &[Operator],
    nbars: &[f64],
    p: &GateParams,
) -> Result<Vec<SweepRecord>> {
    let mut points = Vec::new();
    for &family in families {
        for &op in operators {
            for &nbar in nbars {
                points.push((family, op, nbar));
            }
        }
    }
    points
        .into_par_iter()
        .map(|(family, op, nbar)| sweep_point(family, op, nbar, p))
        .collect()
}

fn sweep_point(kind: FamilyKind, op: Operator, nbar: f64, p: &GateParams) -> Result<SweepRecord> {
    let parameter = parameter_for_nbar(kind, nbar)?;
    let family = InputFamily::auto_capped(kind, parameter)?;
    let input = make_input(&family)?;
    let q = op.qubit();
    let mut record = SweepRecord {
        family: kind.to_string(),
        operator: op.to_string(),
        nbar,
        t: p.bs.t(),
        eta: p.eta,
        fidelity: f64::NAN,
        success_prob: 0.0,
        leak: 0.0,
        reason: None,
    };
    let ideal = match ideal_apply(&q, &input) {
        Ok((state, _)) => state,
        Err(Error::ZeroNormState { .. }) => {
            record.reason = Some("ideal output vanishes".into());
            return Ok(record);
        }
        Err(e) => return Err(e),
    };
    if p.eta >= 1.0 {
        match run_gate(&input, &q, p) {
            Ok(res) => {
                record.fidelity = fidelity_pure(&res.state, &ideal)?;
                record.success_prob = res.success_probability;
                record.leak = res.truncation_leak;
            }
            Err(Error::ZeroNormState { .. }) => {
                record.reason = Some("herald unreachable".into());
            }
            Err(e) => return Err(e),
        }
    } else {
        match run_gate_lossy(&input, &q, p) {
            Ok(res) => {
                record.fidelity = fidelity_mixed(res.members.iter().map(|m| &m.state), &ideal)?;
                record.success_prob = res.success_probability;
                record.leak = res.truncation_leak;
            }
            Err(Error::ZeroNormState { .. }) => {
                record.reason = Some("herald unreachable".into());
            }
            Err(e) => return Err(e),
        }
    }
    Ok(record)
}

/// Scan tap transmissivity × detector efficiency for a coherent input of
/// amplitude `alpha`, with gain matching at every tap and a loss window
/// adapted to each efficiency. Records are ordered operator → t → η.
pub fn efficiency_grid(
    alpha: f64,
    operators: &[Operator],
    ts: &[f64],
    etas: &[f64],
) -> Result<Vec<SweepRecord>> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidParams(format!(
            "coherent amplitude must be finite and non-negative, got {alpha}"
        )));
    }
    let family = InputFamily::auto_capped(FamilyKind::Coherent, alpha)?;
    let input = make_input(&family)?;
    let nbar = alpha * alpha;
    let mut points = Vec::new();
    for &op in operators {
        for &t in ts {
            for &eta in etas {
                points.push((op, t, eta));
            }
        }
    }
    points
        .into_par_iter()
        .map(|(op, t, eta)| grid_point(&input, nbar, op, t, eta))
        .collect()
}

fn grid_point(
    input: &FockVector,
    nbar: f64,
    op: Operator,
    t: f64,
    eta: f64,
) -> Result<SweepRecord> {
    let p = GateParams::tuned(t)?
        .with_eta(eta)?
        .with_loss_cap(adaptive_loss_cap(eta));
    let q = op.qubit();
    let mut record = SweepRecord {
        family: FamilyKind::Coherent.to_string(),
        operator: op.to_string(),
        nbar,
        t,
        eta,
        fidelity: f64::NAN,
        success_prob: 0.0,
        leak: 0.0,
        reason: None,
    };
    let ideal = match ideal_apply(&q, input) {
        Ok((state, _)) => state,
        Err(Error::ZeroNormState { .. }) => {
            record.reason = Some("ideal output vanishes".into());
            return Ok(record);
        }
        Err(e) => return Err(e),
    };
    match run_gate_lossy(input, &q, &p) {
        Ok(res) => {
            record.fidelity = fidelity_mixed(res.members.iter().map(|m| &m.state), &ideal)?;
            record.success_prob = res.success_probability;
            record.leak = res.truncation_leak;
        }
        Err(Error::ZeroNormState { .. }) => {
            record.reason = Some("herald unreachable".into());
        }
        Err(e) => return Err(e),
    }
    Ok(record)
}
