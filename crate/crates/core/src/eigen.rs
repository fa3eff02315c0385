//! Dense nonsymmetric eigenvalues: balancing, Householder reduction to
//! Hessenberg form, then shifted QR (Francis double shift for real input,
//! Wilkinson single shift for complex input).

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues of a real square matrix. Conjugate pairs come out exactly
/// conjugate and isolated real eigenvalues come out exactly real.
pub fn eigenvalues_real(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    assert!(a.is_square(), "eigenvalues need a square matrix");
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg_real(&mut h);
    hqr(&mut h)
}

/// Eigenvalues of a complex square matrix. Purely real or purely imaginary
/// inputs are routed through the real solver.
pub fn eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    assert!(a.is_square(), "eigenvalues need a square matrix");
    if a.iter().all(|z| z.im == 0.0) {
        return eigenvalues_real(&a.map(|z| z.re));
    }
    if a.iter().all(|z| z.re == 0.0) {
        let mu = eigenvalues_real(&a.map(|z| z.im))?;
        return Ok(mu.into_iter().map(|m| Complex64::new(-m.im, m.re)).collect());
    }
    eigenvalues_complex(a)
}

/// Eigenvalues through the complex QR path, regardless of structure.
pub fn eigenvalues_complex(a: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    assert!(a.is_square(), "eigenvalues need a square matrix");
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg_complex(&mut h);
    complex_qr(&mut h)
}

/// Unit eigenvector for an (approximate) eigenvalue by inverse iteration.
pub fn eigenvector(a: &DMatrix<Complex64>, lambda: Complex64) -> Option<DVector<Complex64>> {
    let n = a.nrows();
    let scale = a.norm().max(1.0);
    let mut shift = lambda;
    for attempt in 0..4 {
        let shifted = a - DMatrix::<Complex64>::identity(n, n) * shift;
        let lu = shifted.lu();
        let mut v = DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.37 * i as f64, 0.11 * i as f64));
        v /= Complex64::new(v.norm(), 0.0);
        let mut ok = true;
        for _ in 0..3 {
            match lu.solve(&v) {
                Some(w) if w.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => {
                    let nrm = w.norm();
                    if nrm == 0.0 {
                        ok = false;
                        break;
                    }
                    v = w / Complex64::new(nrm, 0.0);
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Some(v);
        }
        let bump = 1e-13 * scale * 10f64.powi(attempt);
        shift = lambda + Complex64::new(bump, bump);
    }
    None
}

/// Companion matrix of the monic polynomial `x^n + c[n-1] x^{n-1} + … + c[0]`.
pub fn companion_matrix(c: &[Complex64]) -> DMatrix<Complex64> {
    let n = c.len();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i];
    }
    m
}

fn balance<T: ComplexField<RealField = f64>>(a: &mut DMatrix<T>) {
    let n = a.nrows();
    let radix = 2.0f64;
    let sqrdx = radix * radix;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].clone().abs();
                    r += a[(i, j)].clone().abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut g = r / radix;
            let mut f = 1.0;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let gi = T::from_real(1.0 / f);
                let fi = T::from_real(f);
                for j in 0..n {
                    a[(i, j)] *= gi.clone();
                    a[(j, i)] *= fi.clone();
                }
            }
        }
        if done {
            break;
        }
    }
}

fn hessenberg_real(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    let negligible = f64::EPSILON * a.norm();
    for k in 0..n.saturating_sub(2) {
        let x = DVector::from_iterator(n - k - 1, (k + 1..n).map(|i| a[(i, k)]));
        // dropping a subcolumn below eps·‖A‖ is within backward error and
        // keeps nearly diagonal matrices from being mixed
        if x.rows(1, x.len() - 1).norm() <= negligible {
            for i in k + 2..n {
                a[(i, k)] = 0.0;
            }
            continue;
        }
        let xnorm = x.norm();
        let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.norm();
        if vnorm == 0.0 {
            continue;
        }
        v /= vnorm;
        // rows k+1.. , all columns k..
        let mut rows = a.view_mut((k + 1, k), (n - k - 1, n - k));
        let w = rows.tr_mul(&v);
        rows.ger(-2.0, &v, &w, 1.0);
        let mut cols = a.view_mut((0, k + 1), (n, n - k - 1));
        let w = &cols * &v;
        cols.ger(-2.0, &w, &v, 1.0);
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

fn hessenberg_complex(a: &mut DMatrix<Complex64>) {
    let n = a.nrows();
    let negligible = f64::EPSILON * a.norm();
    for k in 0..n.saturating_sub(2) {
        let x = DVector::from_iterator(n - k - 1, (k + 1..n).map(|i| a[(i, k)]));
        if x.rows(1, x.len() - 1).norm() <= negligible {
            for i in k + 2..n {
                a[(i, k)] = Complex64::new(0.0, 0.0);
            }
            continue;
        }
        let xnorm = x.norm();
        let phase = if x[0].norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.norm();
        if vnorm == 0.0 {
            continue;
        }
        v /= Complex64::new(vnorm, 0.0);
        let two = Complex64::new(2.0, 0.0);
        let mut rows = a.view_mut((k + 1, k), (n - k - 1, n - k));
        let w = rows.ad_mul(&v);
        rows.gerc(-two, &v, &w, Complex64::new(1.0, 0.0));
        let mut cols = a.view_mut((0, k + 1), (n, n - k - 1));
        let w = &cols * &v;
        cols.gerc(-two, &w, &v, Complex64::new(1.0, 0.0));
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (destroys `a`).
fn hqr(a: &mut DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }
    let eps = f64::EPSILON;
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    let (mut p, mut q, mut r): (f64, f64, f64);
    let (mut x, mut y, mut z, mut w);
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l >= 1 {
                let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[(l, l - 1)].abs() <= eps * s {
                    a[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[(nu, nu)];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            y = a[(nu - 1, nu - 1)];
            w = a[(nu, nu - 1)] * a[(nu - 1, nu)];
            if l == nu - 1 {
                p = 0.5 * (y - x);
                q = p * p + w;
                z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    wr[nu - 1] = x + z;
                    wr[nu] = x + z;
                    if z != 0.0 {
                        wr[nu] = x - w / z;
                    }
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if its == MAX_SWEEPS_PER_EIGENVALUE {
                return Err(Error::QrFailed);
            }
            if its > 0 && its % 10 == 0 {
                t += x;
                for i in 0..=nu {
                    a[(i, i)] -= x;
                }
                let s = a[(nu, nu - 1)].abs() + a[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let mut m = nu - 2;
            loop {
                z = a[(m, m)];
                r = x - z;
                let s0 = y - z;
                p = (r * s0 - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - r - s0;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[(i, i - 3)] = 0.0;
                }
            }
            let mut k = m;
            while k < nu {
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = if k != nu - 1 { a[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[(k, k - 1)] = -a[(k, k - 1)];
                        }
                    } else {
                        a[(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                        if k != nu - 1 {
                            pp += r * a[(k + 2, j)];
                            a[(k + 2, j)] -= pp * z;
                        }
                        a[(k + 1, j)] -= pp * y;
                        a[(k, j)] -= pp * x;
                    }
                    let mmin = nu.min(k + 3);
                    for i in l..=mmin {
                        let mut pp = x * a[(i, k)] + y * a[(i, k + 1)];
                        if k != nu - 1 {
                            pp += z * a[(i, k + 2)];
                            a[(i, k + 2)] -= pp * r;
                        }
                        a[(i, k + 1)] -= pp * q;
                        a[(i, k)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex64::new(re, im)).collect())
}

/// Single-shift QR with Givens rotations on a complex upper Hessenberg matrix.
fn complex_qr(h: &mut DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let n = h.nrows();
    let eps = f64::EPSILON;
    let zero = Complex64::new(0.0, 0.0);
    let mut eig = vec![zero; n];
    let mut hi = n - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    loop {
        let mut l = hi;
        while l > 0 {
            let s = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
            if h[(l, l - 1)].norm() <= eps * s.max(f64::MIN_POSITIVE) {
                h[(l, l - 1)] = zero;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            its = 0;
            if hi == 0 {
                break;
            }
            hi -= 1;
            continue;
        }
        its += 1;
        total += 1;
        if its > MAX_SWEEPS_PER_EIGENVALUE || total > 100 * n.max(10) {
            return Err(Error::QrFailed);
        }
        let a = h[(hi - 1, hi - 1)];
        let b = h[(hi - 1, hi)];
        let c = h[(hi, hi - 1)];
        let d = h[(hi, hi)];
        let mu = if its.is_multiple_of(11) {
            d + Complex64::new(h[(hi, hi - 1)].norm() * 0.75, h[(hi, hi - 1)].norm() * 0.4375)
        } else {
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m1 = (a + d) * 0.5 + disc;
            let m2 = (a + d) * 0.5 - disc;
            if (m1 - d).norm() < (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (cs, sn) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * cs + sn * y;
                h[(k + 1, j)] = -sn.conj() * x + y * cs;
            }
            rots.push((cs, sn));
        }
        for (idx, &(cs, sn)) in rots.iter().enumerate() {
            let k = l + idx;
            for i in l..=hi.min(k + 2) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * cs + y * sn.conj();
                h[(i, k + 1)] = -x * sn + y * cs;
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }
    Ok(eig)
}

fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sort(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        v
    }

    #[test]
    fn companion_roots() {
        // (x-1)(x-2i)(x+3) = x^3 + (2-2i)x^2 + (-3-4i)x + 6i
        let m = companion_matrix(&[c(0.0, 6.0), c(-3.0, -4.0), c(2.0, -2.0)]);
        let got = sort(eigenvalues(&m).unwrap());
        let want = sort(vec![c(1.0, 0.0), c(0.0, 2.0), c(-3.0, 0.0)]);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-10, "{g} vs {w}");
        }
    }

    #[test]
    fn real_rotation_block() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 2.0, 0.0]);
        let got = sort(eigenvalues_real(&a).unwrap());
        assert_eq!(got, vec![c(0.0, -2.0), c(0.0, 2.0)]);
    }

    #[test]
    fn diagonal_is_exact() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -1.5, 0.25, 7.0]));
        let got = sort(eigenvalues_real(&d).unwrap());
        assert_eq!(got, sort(vec![c(3.0, 0.0), c(-1.5, 0.0), c(0.25, 0.0), c(7.0, 0.0)]));
    }

    #[test]
    fn agrees_with_nalgebra_schur() {
        let n = 40;
        let a = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 13) % 17) as f64 / 17.0 - 0.5 + if i == j { i as f64 * 0.1 } else { 0.0 });
        let ours = sort(eigenvalues_real(&a).unwrap());
        let theirs = sort(a.clone().complex_eigenvalues().iter().copied().collect());
        for (x, y) in ours.iter().zip(&theirs) {
            assert!((x - y).norm() < 1e-9, "{x} vs {y}");
        }
        let ac = a.map(|x| c(x, 0.3 * x * x));
        let ours = sort(eigenvalues_complex(&ac).unwrap());
        let mut worst: f64 = 0.0;
        for lam in &ours {
            let s = (&ac - DMatrix::<Complex64>::identity(n, n) * *lam).svd(false, false);
            worst = worst.max(s.singular_values.min());
        }
        assert!(worst < 1e-10, "smallest singular value {worst}");
    }

    #[test]
    fn eigenvector_residual() {
        let m = companion_matrix(&[c(0.0, 6.0), c(-3.0, -4.0), c(2.0, -2.0)]);
        let v = eigenvector(&m, c(0.0, 2.0)).unwrap();
        let r = &m * &v - &v * c(0.0, 2.0);
        assert!(r.norm() < 1e-10);
        assert!((v.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn empty_and_scalar() {
        assert!(eigenvalues_real(&DMatrix::zeros(0, 0)).unwrap().is_empty());
        assert_eq!(eigenvalues_real(&DMatrix::from_element(1, 1, 4.0)).unwrap(), vec![c(4.0, 0.0)]);
        let one = DMatrix::from_element(1, 1, c(1.0, -2.0));
        assert_eq!(eigenvalues_complex(&one).unwrap(), vec![c(1.0, -2.0)]);
    }
}
