//! Small numeric tables shared by the optics kernels and the analytic maps.
//!
//! Factorials above 170! overflow `f64`, so ratios of factorials are always
//! combined in log space before exponentiating.

/// `table[n] = ln(n!)` for `n = 0..=n_max`, by cumulative summation.
pub(crate) fn ln_factorials(n_max: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(n_max + 1);
    t.push(0.0);
    let mut acc = 0.0;
    for n in 1..=n_max {
        acc += (n as f64).ln();
        t.push(acc);
    }
    t
}

/// Pascal triangle `rows[n][k] = C(n, k)` for `n = 0..=n_max`, as `f64`.
pub(crate) fn pascal_triangle(n_max: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
    rows.push(vec![1.0]);
    for n in 1..=n_max {
        let prev = &rows[n - 1];
        let mut row = vec![1.0; n + 1];
        for k in 1..n {
            row[k] = prev[k - 1] + prev[k];
        }
        rows.push(row);
    }
    rows
}

/// `table[k] = x^k` for `k = 0..=k_max`. `0^0 = 1`.
pub(crate) fn powers(x: f64, k_max: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(k_max + 1);
    let mut acc = 1.0;
    for _ in 0..=k_max {
        t.push(acc);
        acc *= x;
    }
    t
}

/// Binomial coefficient for small arguments, exact in `f64`.
pub(crate) fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// `√(a! / b!)` for `a ≥ b` via the log table.
#[cfg(test)]
pub(crate) fn sqrt_factorial_ratio(lnf: &[f64], a: usize, b: usize) -> f64 {
    (0.5 * (lnf[a] - lnf[b])).exp()
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. `a` is row-major n×n. Returns eigenvalues and eigenvectors;
/// eigenvector `c` is the column `v[i*n + c]` and satisfies `A v = λ_c v`.
/// Intended for the small density matrices of the reduced-state fidelity;
/// cost is O(n³) per sweep.
pub(crate) fn hermitian_eigen(
    a: &[num_complex::Complex64],
    n: usize,
) -> (Vec<f64>, Vec<num_complex::Complex64>) {
    use num_complex::Complex64;
    assert_eq!(a.len(), n * n, "matrix must be n×n");
    let mut m = a.to_vec();
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let scale: f64 = m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if n > 1 && scale > 0.0 {
        for _sweep in 0..128 {
            let off: f64 = (0..n)
                .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
                .map(|(p, q)| m[p * n + q].norm_sqr())
                .sum();
            if off.sqrt() <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[p * n + q];
                    let abs = apq.norm();
                    if abs <= 1e-300 {
                        continue;
                    }
                    // absorb the phase so the 2×2 block is real symmetric,
                    // then rotate with the smaller-angle root
                    let u = apq.conj() / abs;
                    let app = m[p * n + p].re;
                    let aqq = m[q * n + q].re;
                    let tau = (aqq - app) / (2.0 * abs);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for i in 0..n {
                        let aip = m[i * n + p];
                        let aiq = m[i * n + q] * u;
                        m[i * n + p] = aip * c - aiq * s;
                        m[i * n + q] = aip * s + aiq * c;
                    }
                    for j in 0..n {
                        let apj = m[p * n + j];
                        let aqj = m[q * n + j] * u.conj();
                        m[p * n + j] = apj * c - aqj * s;
                        m[q * n + j] = apj * s + aqj * c;
                    }
                    for i in 0..n {
                        let vip = v[i * n + p];
                        let viq = v[i * n + q] * u;
                        v[i * n + p] = vip * c - viq * s;
                        v[i * n + q] = vip * s + viq * c;
                    }
                }
            }
        }
    }
    let w = (0..n).map(|i| m[i * n + i].re).collect();
    (w, v)
}
