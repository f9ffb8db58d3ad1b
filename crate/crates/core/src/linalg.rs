//! Small dense complex linear algebra: Gaussian elimination with partial
//! pivoting and eigenvalues through the characteristic polynomial.

use num_complex::Complex64 as C64;
use thiserror::Error;

pub type CMatrix<const N: usize> = [[C64; N]; N];
pub type CVector<const N: usize> = [C64; N];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is singular to working precision (pivot ratio estimate {condition:.3e})")]
    Singular { condition: f64 },
    #[error("matrix is ill-conditioned (pivot ratio estimate {condition:.3e})")]
    IllConditioned { condition: f64 },
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}

/// Pivot-ratio estimates above this are rejected as ill-conditioned.
pub const MAX_CONDITION: f64 = 1e13;

pub fn mat_vec<const N: usize>(m: &CMatrix<N>, v: &CVector<N>) -> CVector<N> {
    std::array::from_fn(|i| m[i].iter().zip(v).map(|(a, b)| a * b).sum())
}

pub fn norm<const N: usize>(v: &CVector<N>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves `m · x = rhs`.
///
/// The condition figure reported on failure is max|pivot| / min|pivot| of
/// the row-equilibrated elimination, a cheap lower bound on κ(M).
pub fn solve<const N: usize>(m: &CMatrix<N>, rhs: &CVector<N>) -> Result<CVector<N>, LinalgError> {
    let mut a = *m;
    let mut b = *rhs;

    // row equilibration so pivot magnitudes are comparable
    for i in 0..N {
        let scale = a[i].iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(LinalgError::Singular { condition: f64::INFINITY });
        }
        for z in a[i].iter_mut() {
            *z /= scale;
        }
        b[i] /= scale;
    }

    let mut pivot_max = 0.0f64;
    let mut pivot_min = f64::INFINITY;
    for col in 0..N {
        let (piv, mag) =
            (col..N)
                .map(|r| (r, a[r][col].norm()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        pivot_max = pivot_max.max(mag);
        pivot_min = pivot_min.min(mag);
        if mag <= f64::EPSILON * N as f64 {
            return Err(LinalgError::Singular { condition: f64::INFINITY });
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].inv();
        for r in col + 1..N {
            let f = a[r][col] * inv;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for c in col..N {
                let t = a[col][c];
                a[r][c] -= f * t;
            }
            let t = b[col];
            b[r] -= f * t;
        }
    }
    let condition = pivot_max / pivot_min;
    if condition > MAX_CONDITION {
        return Err(LinalgError::IllConditioned { condition });
    }

    let mut x = [C64::new(0.0, 0.0); N];
    for i in (0..N).rev() {
        let s: C64 = (i + 1..N).map(|c| a[i][c] * x[c]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Ok(x)
}

/// Coefficients c_0..c_N of det(λI − M) = λ^N + c_1 λ^{N−1} + ... + c_N
/// (Faddeev–LeVerrier).
fn characteristic_polynomial<const N: usize>(m: &CMatrix<N>) -> Vec<C64> {
    let zero = C64::new(0.0, 0.0);
    let mut coeffs = vec![C64::new(1.0, 0.0)];
    let mut mk = [[zero; N]; N];
    let mut c_prev = C64::new(1.0, 0.0);
    for k in 1..=N {
        // M_k = M·M_{k−1} + c_{k−1} I, with M_0 = 0
        let mut next = [[zero; N]; N];
        for i in 0..N {
            for j in 0..N {
                next[i][j] = (0..N).map(|l| m[i][l] * mk[l][j]).sum();
            }
            next[i][i] += c_prev;
        }
        mk = next;
        let trace: C64 = (0..N).map(|i| (0..N).map(|l| m[i][l] * mk[l][i]).sum::<C64>()).sum();
        let c = -trace / k as f64;
        coeffs.push(c);
        c_prev = c;
    }
    coeffs
}

fn horner(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All eigenvalues of `m`, unordered.
pub fn eigenvalues<const N: usize>(m: &CMatrix<N>) -> Result<Vec<C64>, LinalgError> {
    let scale = m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(vec![C64::new(0.0, 0.0); N]);
    }
    let scaled: CMatrix<N> = m.map(|row| row.map(|z| z / scale));
    let coeffs = characteristic_polynomial(&scaled);

    // Aberth–Ehrlich, starting points spread on a circle inside the Cauchy bound
    let radius = 1.0 + coeffs[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut roots: Vec<C64> =
        (0..N).map(|k| C64::from_polar(0.5 * radius, 0.4 + std::f64::consts::TAU * k as f64 / N as f64)).collect();
    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for i in 0..N {
            let (p, dp) = horner(&coeffs, roots[i]);
            if p == C64::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let repulsion: C64 = (0..N).filter(|&j| j != i).map(|j| (roots[i] - roots[j]).inv()).sum();
            let step = ratio / (C64::new(1.0, 0.0) - ratio * repulsion);
            roots[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step <= 1e-15 * radius {
            break;
        }
    }
    // clustered roots stall at the rounding floor; accept any root whose
    // residual is at the backward-error level of the polynomial evaluation
    let accepted = roots.iter().all(|&z| {
        let floor: f64 = coeffs.iter().rev().enumerate().map(|(k, c)| c.norm() * z.norm().powi(k as i32)).sum();
        z.is_finite() && horner(&coeffs, z).0.norm() <= 1e3 * f64::EPSILON * floor
    });
    if !accepted {
        return Err(LinalgError::NoConvergence);
    }
    Ok(roots.into_iter().map(|z| z * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn solves_small_complex_system() {
        // (1+i) x + 2 y = 3+i ; i x + y = 1+2i  →  x = 1, y = 1+i
        let m = [[c(1.0, 1.0), c(2.0, 0.0)], [c(0.0, 1.0), c(1.0, 0.0)]];
        let x = solve(&m, &[c(3.0, 3.0), c(1.0, 2.0)]).unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((x[1] - c(1.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let m = [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]];
        let x = solve(&m, &[c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert_eq!(x, [c(3.0, 0.0), c(2.0, 0.0)]);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let m = [[c(1.0, 0.0), c(2.0, 0.0)], [c(2.0, 0.0), c(4.0, 0.0)]];
        assert!(matches!(solve(&m, &[c(1.0, 0.0), c(1.0, 0.0)]), Err(LinalgError::Singular { .. })));
        let m = [[c(1.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(1.0 + 1e-15, 0.0)]];
        assert!(solve(&m, &[c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        let z = [[c(0.0, 0.0); 2]; 2];
        assert!(solve(&z, &[c(1.0, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn eigenvalues_of_triangular_matrix() {
        let m = [
            [c(-1.0, 2.0), c(5.0, 1.0), c(0.3, 0.0)],
            [c(0.0, 0.0), c(-3.0, -1.0), c(2.0, 2.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)],
        ];
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let expected = [c(-3.0, -1.0), c(-1.0, 2.0), c(-0.5, 0.0)];
        for (e, x) in ev.iter().zip(expected) {
            assert!((e - x).norm() < 1e-9, "{e} vs {x}");
        }
    }

    #[test]
    fn eigenvalues_satisfy_trace_and_determinant() {
        let m = [
            [c(-1.0, 0.3), c(0.0, -2.0), c(0.1, 0.0)],
            [c(0.0, -2.0), c(-0.2, 1.0), c(0.0, 0.7)],
            [c(0.4, 0.0), c(0.0, 0.7), c(-3.0, -0.5)],
        ];
        let ev = eigenvalues(&m).unwrap();
        let trace: C64 = (0..3).map(|i| m[i][i]).sum();
        assert!((ev.iter().sum::<C64>() - trace).norm() < 1e-10);
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        assert!((ev.iter().product::<C64>() - det).norm() < 1e-10);
    }
}
