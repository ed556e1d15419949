//! Reference computations written independently of the library numerics.

#![allow(dead_code)]

use std::f64::consts::TAU;

use witsamp_core::{ComplexMatrix, Complex64, PolySystem};

pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Dense row-major matrix as nested vectors.
pub fn to_rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Gaussian elimination with partial pivoting.
pub fn solve(a: &[Vec<Complex64>], b: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = a.len();
    let mut m: Vec<Vec<Complex64>> = a.iter().zip(b).map(|(r, &y)| {
        let mut r = r.clone();
        r.push(y);
        r
    }).collect();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))?;
        if m[p][col].norm() == 0.0 {
            return None;
        }
        m.swap(col, p);
        for r in col + 1..n {
            let factor = m[r][col] / m[col][col];
            for k in col..=n {
                let t = m[col][k];
                m[r][k] -= factor * t;
            }
        }
    }
    let mut x = vec![ZERO; n];
    for i in (0..n).rev() {
        let mut s = m[i][n];
        for k in i + 1..n {
            s -= m[i][k] * x[k];
        }
        x[i] = s / m[i][i];
    }
    Some(x)
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>().max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Singular values through the real embedding of `AᴴA`, descending.
///
/// Each eigenvalue of the embedding appears twice; one copy is kept.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    let mut g = vec![vec![ZERO; n]; n];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = (0..m).map(|k| a[(k, i)].conj() * a[(k, j)]).sum();
        }
    }
    let mut real = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            real[i][j] = g[i][j].re;
            real[i + n][j + n] = g[i][j].re;
            real[i][j + n] = -g[i][j].im;
            real[i + n][j] = g[i][j].im;
        }
    }
    let mut ev = symmetric_eigenvalues(real);
    ev.sort_by(|a, b| b.total_cmp(a));
    ev.iter().step_by(2).map(|&l| l.max(0.0).sqrt()).collect()
}

pub fn condition_number(a: &ComplexMatrix) -> f64 {
    let s = singular_values(a);
    s[0] / s[s.len() - 1]
}

/// Companion matrix of a monic polynomial with ascending coefficients.
pub fn companion(coeffs: &[Complex64]) -> Vec<Vec<Complex64>> {
    let d = coeffs.len() - 1;
    let mut m = vec![vec![ZERO; d]; d];
    for i in 0..d - 1 {
        m[i][i + 1] = ONE;
    }
    for j in 0..d {
        m[d - 1][j] = -coeffs[j] / coeffs[d];
    }
    m
}

fn inverse_iteration(m: &[Vec<Complex64>], lambda: Complex64) -> Vec<Complex64> {
    let d = m.len();
    let shift = lambda + c(1e-10, 1e-10) * (1.0 + lambda.norm());
    let shifted: Vec<Vec<Complex64>> = (0..d)
        .map(|i| (0..d).map(|j| m[i][j] - if i == j { shift } else { ZERO }).collect())
        .collect();
    let mut x: Vec<Complex64> = (0..d).map(|i| c(1.0, 0.1 * i as f64)).collect();
    for _ in 0..8 {
        x = solve(&shifted, &x).expect("shifted matrix is invertible");
        let s = norm(&x);
        x.iter_mut().for_each(|z| *z /= s);
    }
    x
}

/// `||x||·||y|| / |yᴴx|` with both eigenvectors from inverse iteration on
/// the explicit companion matrix.
pub fn eigenvalue_condition(coeffs: &[Complex64], lambda: Complex64) -> f64 {
    let m = companion(coeffs);
    let d = m.len();
    let x = inverse_iteration(&m, lambda);
    let adj: Vec<Vec<Complex64>> = (0..d).map(|i| (0..d).map(|j| m[j][i].conj()).collect()).collect();
    let y = inverse_iteration(&adj, lambda.conj());
    let yx: Complex64 = y.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
    norm(&x) * norm(&y) / yx.norm()
}

pub fn horner(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, &a| acc * x + a)
}

/// Durand–Kerner iteration for all roots of a polynomial (ascending
/// coefficients, nonzero leading term).
pub fn durand_kerner(coeffs: &[Complex64]) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    let lead = coeffs[d];
    let monic: Vec<Complex64> = coeffs.iter().map(|a| a / lead).collect();
    let radius = 1.0 + monic[..d].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(radius * 0.9, TAU * k as f64 / d as f64 + 0.3))
        .collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..d {
            let mut den = ONE;
            for j in 0..d {
                if j != i {
                    den *= z[i] - z[j];
                }
            }
            let step = horner(&monic, z[i]) / den;
            z[i] -= step;
            moved = moved.max(step.norm() / (1.0 + z[i].norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    // Newton polish on the original coefficients.
    let deriv: Vec<Complex64> = (1..=d).map(|i| monic[i] * i as f64).collect();
    for r in z.iter_mut() {
        for _ in 0..3 {
            let dp = horner(&deriv, *r);
            if dp.norm() > 0.0 {
                *r -= horner(&monic, *r) / dp;
            }
        }
    }
    z
}

/// Coefficients of a polynomial of degree at most `d` from its values on
/// `d + 1` points of the circle of radius `r` (inverse DFT).
pub fn interpolate<F: Fn(Complex64) -> Complex64>(p: F, d: usize, r: f64) -> Vec<Complex64> {
    let n = d + 1;
    let nodes: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(r, TAU * k as f64 / n as f64)).collect();
    let values: Vec<Complex64> = nodes.iter().map(|&z| p(z)).collect();
    (0..n)
        .map(|j| {
            let s: Complex64 = (0..n)
                .map(|k| values[k] * Complex64::from_polar(1.0, -TAU * (j * k) as f64 / n as f64))
                .sum();
            s / (n as f64 * r.powi(j as i32))
        })
        .collect()
}

/// Smallest total distance over all bijections between two equal-size
/// point lists, by exhaustive search; returns the worst matched distance.
pub fn assignment_distance(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    assert!(a.len() <= 9, "exhaustive matching is for small sets");
    let mut perm: Vec<usize> = (0..a.len()).collect();
    let mut best = (f64::INFINITY, f64::INFINITY);
    permute(&mut perm, 0, &mut |p| {
        let ds: Vec<f64> = p.iter().enumerate().map(|(i, &j)| dist(&a[i], &b[j])).collect();
        let total: f64 = ds.iter().sum();
        if total < best.0 {
            best = (total, ds.iter().cloned().fold(0.0, f64::max));
        }
    });
    best.1
}

fn permute(p: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

/// Central differences along the real axis of each variable; for
/// holomorphic maps this is the complex derivative.
pub fn finite_difference_jacobian(f: &PolySystem, x: &[Complex64], h: f64) -> Vec<Vec<Complex64>> {
    let m = f.m();
    let n = f.n();
    let mut j = vec![vec![ZERO; n]; m];
    for k in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        let fp = f.evaluate(&xp).unwrap();
        let fm = f.evaluate(&xm).unwrap();
        for i in 0..m {
            j[i][k] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    j
}

/// Witness points of a 2-equation, 2-unknown quadratic system by the
/// Sylvester resultant in `ξ₂`, then back-substitution.
///
/// `q` evaluates both equations at `(ξ₁, ξ₂)`.
pub fn quadric_pair_solutions<Q>(q: Q) -> Vec<[Complex64; 2]>
where
    Q: Fn(Complex64, Complex64) -> [Complex64; 2],
{
    // Coefficients in ξ₂ of each equation for fixed ξ₁.
    let coeffs_in_y = |x: Complex64| -> [[Complex64; 3]; 2] {
        let q0 = q(x, ZERO);
        let qp = q(x, ONE);
        let qm = q(x, -ONE);
        let mut out = [[ZERO; 3]; 2];
        for e in 0..2 {
            out[e][0] = q0[e];
            out[e][1] = (qp[e] - qm[e]) / 2.0;
            out[e][2] = (qp[e] + qm[e]) / 2.0 - q0[e];
        }
        out
    };
    let resultant = |x: Complex64| -> Complex64 {
        let [a, b] = coeffs_in_y(x);
        // Sylvester determinant of a2 y² + a1 y + a0 and b2 y² + b1 y + b0.
        let s = vec![
            vec![a[2], a[1], a[0], ZERO],
            vec![ZERO, a[2], a[1], a[0]],
            vec![b[2], b[1], b[0], ZERO],
            vec![ZERO, b[2], b[1], b[0]],
        ];
        determinant(s)
    };
    let r = interpolate(resultant, 4, 1.0);
    let xs = durand_kerner(&r);
    xs.into_iter()
        .map(|x| {
            let [a, b] = coeffs_in_y(x);
            let ys = durand_kerner(&a);
            let y = ys
                .into_iter()
                .min_by(|u, v| {
                    horner(&b, *u).norm().total_cmp(&horner(&b, *v).norm())
                })
                .unwrap();
            [x, y]
        })
        .collect()
}

pub fn determinant(mut m: Vec<Vec<Complex64>>) -> Complex64 {
    let n = m.len();
    let mut det = ONE;
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm())).unwrap();
        if m[p][col].norm() == 0.0 {
            return ZERO;
        }
        if p != col {
            m.swap(col, p);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..n {
            let factor = m[r][col] / m[col][col];
            for k in col..n {
                let t = m[col][k];
                m[r][k] -= factor * t;
            }
        }
    }
    det
}
