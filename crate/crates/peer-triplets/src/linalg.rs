//! Small dense linear algebra used throughout the crate.
//!
//! Everything here targets tiny systems (stage counts s <= 4, blocks of a
//! few dozen rows at most), so plain row-major storage, LU with partial
//! pivoting and characteristic-polynomial eigenvalue solvers are entirely
//! adequate. No external linear algebra dependency is used.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let nr = rows.len();
        let nc = rows.first().map_or(0, |r| r.len());
        let mut m = Mat::zeros(nr, nc);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), nc, "ragged rows");
            m.data[i * nc..(i + 1) * nc].copy_from_slice(r);
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Mat::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Column vector from a slice.
    pub fn col_vec(v: &[f64]) -> Self {
        Mat {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matmul");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "dimension mismatch in matvec");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut s = 0.0;
            for j in 0..self.cols {
                s += self[(i, j)] * x[j];
            }
            out[i] = s;
        }
        out
    }

    /// y = A^T x without forming the transpose.
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, x.len(), "dimension mismatch in matvec_t");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..self.cols {
                out[j] += self[(i, j)] * xi;
            }
        }
        out
    }

    pub fn add(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, a: f64) -> Mat {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v *= a;
        }
        out
    }

    /// Entrywise absolute value.
    pub fn abs(&self) -> Mat {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v = v.abs();
        }
        out
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Row-sum norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max)
    }

    /// Column-sum norm.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0_f64, f64::max)
    }

    /// Strictly upper triangular part identically zero (exact check).
    pub fn is_lower_triangular(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self[(i, j)] == 0.0))
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.is_square() && (1..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == 0.0))
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Result<Lu, LinalgError> {
        assert!(self.is_square(), "lu requires a square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].abs();
            for i in k + 1..n {
                let v = a[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(LinalgError::Singular { pivot: k });
            }
            if p != k {
                for j in 0..n {
                    let t = a[(k, j)];
                    a[(k, j)] = a[(p, j)];
                    a[(p, j)] = t;
                }
                piv.swap(k, p);
                sign = -sign;
            }
            let d = a[(k, k)];
            for i in k + 1..n {
                let l = a[(i, k)] / d;
                a[(i, k)] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        a[(i, j)] -= l * a[(k, j)];
                    }
                }
            }
        }
        Ok(Lu { lu: a, piv, sign })
    }

    /// LU factorization without pivoting; fails with the pivot index when a
    /// zero (or numerically negligible) pivot is met.
    pub fn lu_nopivot(&self) -> Result<(Mat, Mat), LinalgError> {
        assert!(self.is_square());
        let n = self.rows;
        let mut u = self.clone();
        let mut l = Mat::identity(n);
        let scale = self.max_abs().max(1.0);
        for k in 0..n {
            let d = u[(k, k)];
            if d.abs() <= 1e-14 * scale {
                return Err(LinalgError::Singular { pivot: k });
            }
            for i in k + 1..n {
                let f = u[(i, k)] / d;
                l[(i, k)] = f;
                for j in k..n {
                    u[(i, j)] -= f * u[(k, j)];
                }
            }
        }
        Ok((l, u))
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        Ok(self.lu()?.solve(b))
    }

    pub fn inverse(&self) -> Result<Mat, LinalgError> {
        let lu = self.lu()?;
        let n = self.rows;
        let mut inv = Mat::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = lu.solve(&e);
            e[j] = 0.0;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }

    /// Eigenvalues of a small square matrix.
    ///
    /// Triangular matrices are read off the diagonal exactly; otherwise the
    /// characteristic polynomial (Faddeev-LeVerrier) is solved by the
    /// Durand-Kerner iteration with a Newton polish.
    pub fn eigenvalues(&self) -> Vec<Cx> {
        assert!(self.is_square());
        if self.is_lower_triangular() || self.is_upper_triangular() {
            return (0..self.rows).map(|i| Cx::new(self[(i, i)], 0.0)).collect();
        }
        let cm = CMat::from_real(self);
        cm.eigenvalues()
    }

    /// Spectral radius, scaling-normalized for conditioning.
    pub fn spectral_radius(&self) -> f64 {
        let s = self.max_abs();
        if s == 0.0 {
            return 0.0;
        }
        let n = self.scale(1.0 / s);
        s * n
            .eigenvalues()
            .iter()
            .map(|z| z.abs())
            .fold(0.0_f64, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factors of a square matrix with row pivoting.
pub struct Lu {
    lu: Mat,
    piv: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    /// Solve A X = B columnwise.
    pub fn solve_mat(&self, b: &Mat) -> Mat {
        let n = self.lu.rows;
        assert_eq!(b.rows(), n);
        let mut out = Mat::zeros(n, b.cols());
        let mut col = vec![0.0; n];
        for j in 0..b.cols() {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            let x = self.solve(&col);
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    pub fn det(&self) -> f64 {
        let mut d = self.sign;
        for i in 0..self.lu.rows {
            d *= self.lu[(i, i)];
        }
        d
    }
}

/// Complex scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

impl Cx {
    pub const ZERO: Cx = Cx { re: 0.0, im: 0.0 };
    pub const ONE: Cx = Cx { re: 1.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Cx { re, im }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Cx {
            re: r * theta.cos(),
            im: r * theta.sin(),
        }
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn conj(self) -> Cx {
        Cx {
            re: self.re,
            im: -self.im,
        }
    }
}

impl Add for Cx {
    type Output = Cx;
    fn add(self, o: Cx) -> Cx {
        Cx::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Cx {
    type Output = Cx;
    fn sub(self, o: Cx) -> Cx {
        Cx::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Cx {
    type Output = Cx;
    fn mul(self, o: Cx) -> Cx {
        Cx::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl Div for Cx {
    type Output = Cx;
    fn div(self, o: Cx) -> Cx {
        // Smith's algorithm to avoid overflow.
        if o.re.abs() >= o.im.abs() {
            let r = o.im / o.re;
            let d = o.re + o.im * r;
            Cx::new((self.re + self.im * r) / d, (self.im - self.re * r) / d)
        } else {
            let r = o.re / o.im;
            let d = o.re * r + o.im;
            Cx::new((self.re * r + self.im) / d, (self.im * r - self.re) / d)
        }
    }
}

impl Neg for Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx::new(-self.re, -self.im)
    }
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Cx>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![Cx::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Cx::ONE;
        }
        m
    }

    pub fn from_real(m: &Mat) -> Self {
        let mut c = CMat::zeros(m.rows(), m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                c[(i, j)] = Cx::new(m[(i, j)], 0.0);
            }
        }
        c
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn matmul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows);
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Cx {
        (0..self.rows).fold(Cx::ZERO, |s, i| s + self[(i, i)])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, z| m.max(z.abs()))
    }

    pub fn scale(&self, a: f64) -> CMat {
        let mut out = self.clone();
        for z in out.data.iter_mut() {
            *z = Cx::new(z.re * a, z.im * a);
        }
        out
    }

    /// Solve A X = B by complex LU with partial pivoting.
    pub fn solve_mat(&self, b: &CMat) -> Result<CMat, LinalgError> {
        assert!(self.rows == self.cols && b.rows == self.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut x = b.clone();
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].abs();
            for i in k + 1..n {
                if a[(i, k)].abs() > best {
                    best = a[(i, k)].abs();
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(LinalgError::Singular { pivot: k });
            }
            if p != k {
                for j in 0..n {
                    let t = a[(k, j)];
                    a[(k, j)] = a[(p, j)];
                    a[(p, j)] = t;
                }
                for j in 0..x.cols {
                    let t = x[(k, j)];
                    x[(k, j)] = x[(p, j)];
                    x[(p, j)] = t;
                }
            }
            let d = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / d;
                if f.abs() != 0.0 {
                    for j in k + 1..n {
                        a[(i, j)] = a[(i, j)] - f * a[(k, j)];
                    }
                    for j in 0..x.cols {
                        x[(i, j)] = x[(i, j)] - f * x[(k, j)];
                    }
                }
            }
        }
        for i in (0..n).rev() {
            for j in 0..x.cols {
                let mut s = x[(i, j)];
                for k in i + 1..n {
                    s = s - a[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = s / a[(i, i)];
            }
        }
        Ok(x)
    }

    /// Monic characteristic polynomial coefficients by Faddeev-LeVerrier:
    /// p(z) = z^n + c\[0\] z^(n-1) + ... + c\[n-1\].
    pub fn char_poly(&self) -> Vec<Cx> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut coeffs = Vec::with_capacity(n);
        let mut b = CMat::identity(n);
        for k in 1..=n {
            let ab = self.matmul(&b);
            let ck = -(ab.trace()) / Cx::new(k as f64, 0.0);
            coeffs.push(ck);
            b = ab;
            for i in 0..n {
                b[(i, i)] = b[(i, i)] + ck;
            }
        }
        coeffs
    }

    pub fn eigenvalues(&self) -> Vec<Cx> {
        poly_roots(&self.char_poly())
    }

    pub fn spectral_radius(&self) -> f64 {
        let s = self.max_abs();
        if s == 0.0 {
            return 0.0;
        }
        let m = self.scale(1.0 / s);
        s * m
            .eigenvalues()
            .iter()
            .map(|z| z.abs())
            .fold(0.0_f64, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Cx;
    fn index(&self, (i, j): (usize, usize)) -> &Cx {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx {
        &mut self.data[i * self.cols + j]
    }
}

fn poly_eval(coeffs: &[Cx], z: Cx) -> Cx {
    // Monic: p(z) = z^n + coeffs[0] z^(n-1) + ... + coeffs[n-1]
    let mut p = Cx::ONE;
    for &c in coeffs {
        p = p * z + c;
    }
    p
}

fn poly_eval_deriv(coeffs: &[Cx], z: Cx) -> Cx {
    let n = coeffs.len();
    let mut d = Cx::new(n as f64, 0.0);
    for (k, &c) in coeffs.iter().take(n - 1).enumerate() {
        let deg = (n - 1 - k) as f64;
        d = d * z + Cx::new(deg, 0.0) * c;
    }
    d
}

/// All complex roots of a monic polynomial by the Durand-Kerner iteration,
/// followed by a short Newton polish of each root.
pub fn poly_roots(coeffs: &[Cx]) -> Vec<Cx> {
    let n = coeffs.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![-coeffs[0]];
    }
    // Cauchy bound for the root moduli.
    let radius = 1.0 + coeffs.iter().map(|c| c.abs()).fold(0.0_f64, f64::max);
    let seed = Cx::new(0.4, 0.9);
    let mut z: Vec<Cx> = Vec::with_capacity(n);
    let mut p = Cx::ONE;
    for _ in 0..n {
        p = p * seed;
        z.push(Cx::new(radius * p.re, radius * p.im));
    }
    for _ in 0..600 {
        let mut max_step = 0.0_f64;
        for i in 0..n {
            let mut denom = Cx::ONE;
            for j in 0..n {
                if j != i {
                    denom = denom * (z[i] - z[j]);
                }
            }
            if denom.abs() == 0.0 {
                // Coincident iterates: nudge and continue.
                z[i] = z[i] + Cx::new(1e-8 * radius, 1e-8 * radius);
                continue;
            }
            let step = poly_eval(coeffs, z[i]) / denom;
            z[i] = z[i] - step;
            max_step = max_step.max(step.abs());
        }
        if max_step < 1e-15 * radius.max(1.0) {
            break;
        }
    }
    // Newton polish for simple roots.
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let d = poly_eval_deriv(coeffs, *zi);
            if d.abs() < 1e-300 {
                break;
            }
            let step = poly_eval(coeffs, *zi) / d;
            if step.abs() > 0.1 * radius {
                break;
            }
            *zi = *zi - step;
        }
    }
    z
}

/// Block-tridiagonal system with uniform square blocks, solved by block LU
/// (forward elimination over the block rows, partial pivoting inside each
/// diagonal block).
pub struct BlockTridiag {
    nb: usize,
    /// Sub-diagonal blocks, length n-1 (block row i couples to row i-1).
    pub lower: Vec<Mat>,
    /// Diagonal blocks, length n.
    pub diag: Vec<Mat>,
    /// Super-diagonal blocks, length n-1 (block row i couples to row i+1).
    pub upper: Vec<Mat>,
}

impl BlockTridiag {
    pub fn new(lower: Vec<Mat>, diag: Vec<Mat>, upper: Vec<Mat>) -> Self {
        let n = diag.len();
        assert!(n >= 1 && lower.len() == n - 1 && upper.len() == n - 1);
        let nb = diag[0].rows();
        for d in &diag {
            assert!(d.rows() == nb && d.cols() == nb);
        }
        BlockTridiag {
            nb,
            lower,
            diag,
            upper,
        }
    }

    pub fn nblocks(&self) -> usize {
        self.diag.len()
    }

    /// Solve in place; returns the solution or the index of the block whose
    /// pivot broke down.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.nblocks();
        let nb = self.nb;
        assert_eq!(b.len(), n * nb);
        let mut lus: Vec<Lu> = Vec::with_capacity(n);
        let mut xs: Vec<Mat> = Vec::with_capacity(n - 1);
        let mut g: Vec<Vec<f64>> = Vec::with_capacity(n);

        let mut dk = self.diag[0].clone();
        for k in 0..n {
            let lu = dk
                .lu()
                .map_err(|_| LinalgError::SingularBlock { block: k })?;
            if k < n - 1 {
                // X_k = D~_k^{-1} U_k, used by both elimination and back substitution.
                let x = lu.solve_mat(&self.upper[k]);
                dk = self.diag[k + 1].sub(&self.lower[k].matmul(&x));
                xs.push(x);
            }
            lus.push(lu);
        }
        for k in 0..n {
            let mut rhs = b[k * nb..(k + 1) * nb].to_vec();
            if k > 0 {
                let prev = self.lower[k - 1].matvec(&g[k - 1]);
                for i in 0..nb {
                    rhs[i] -= prev[i];
                }
            }
            g.push(lus[k].solve(&rhs));
        }
        let mut x = vec![0.0; n * nb];
        x[(n - 1) * nb..].copy_from_slice(&g[n - 1]);
        for k in (0..n - 1).rev() {
            let corr = xs[k].matvec(&x[(k + 1) * nb..(k + 2) * nb]);
            for i in 0..nb {
                x[k * nb + i] = g[k][i] - corr[i];
            }
        }
        Ok(x)
    }

    /// Assemble the full dense matrix (test oracle and cross-checks only).
    pub fn to_dense(&self) -> Mat {
        let n = self.nblocks();
        let nb = self.nb;
        let mut m = Mat::zeros(n * nb, n * nb);
        for k in 0..n {
            for i in 0..nb {
                for j in 0..nb {
                    m[(k * nb + i, k * nb + j)] = self.diag[k][(i, j)];
                    if k > 0 {
                        m[(k * nb + i, (k - 1) * nb + j)] = self.lower[k - 1][(i, j)];
                    }
                    if k < n - 1 {
                        m[(k * nb + i, (k + 1) * nb + j)] = self.upper[k][(i, j)];
                    }
                }
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    Singular { pivot: usize },
    SingularBlock { block: usize },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::Singular { pivot } => {
                write!(f, "singular matrix (pivot {} broke down)", pivot)
            }
            LinalgError::SingularBlock { block } => {
                write!(f, "singular pivot in block {}", block)
            }
        }
    }
}

impl std::error::Error for LinalgError {}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0_f64, f64::max)
}

pub fn norm_inf_vec(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat4() -> Mat {
        Mat::from_rows(&[
            &[4.0, 1.0, 0.5, -1.0],
            &[1.0, 3.0, -0.5, 2.0],
            &[0.0, -1.0, 5.0, 1.0],
            &[2.0, 0.0, 1.0, 6.0],
        ])
    }

    #[test]
    fn lu_solve_roundtrip() {
        let a = mat4();
        let x_true = [1.0, -2.0, 3.0, 0.5];
        let b = a.matvec(&x_true);
        let x = a.solve(&b).unwrap();
        assert!(max_abs_diff(&x, &x_true) < 1e-12);
    }

    #[test]
    fn inverse_identity() {
        let a = mat4();
        let inv = a.inverse().unwrap();
        let prod = a.matmul(&inv);
        assert!(prod.sub(&Mat::identity(4)).max_abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_reports_pivot() {
        let a = Mat::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(a.lu(), Err(LinalgError::Singular { .. })));
    }

    #[test]
    fn eigenvalues_of_triangular() {
        let a = Mat::from_rows(&[&[2.0, 0.0, 0.0], &[1.0, -3.0, 0.0], &[0.5, 0.5, 7.0]]);
        let mut ev: Vec<f64> = a.eigenvalues().iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(max_abs_diff(&ev, &[-3.0, 2.0, 7.0]) < 1e-14);
    }

    #[test]
    fn eigenvalues_complex_pair() {
        // Rotation-like block has eigenvalues 1 +- 2i; appended diagonal 4.
        let a = Mat::from_rows(&[&[1.0, -2.0, 0.0], &[2.0, 1.0, 0.0], &[0.3, 0.0, 4.0]]);
        let ev = a.eigenvalues();
        let mut moduli: Vec<f64> = ev.iter().map(|z| z.abs()).collect();
        moduli.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((moduli[2] - 4.0).abs() < 1e-9);
        assert!((moduli[0] - 5.0_f64.sqrt()).abs() < 1e-9);
        assert!((moduli[1] - 5.0_f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn char_poly_matches_known_quartic() {
        // Companion matrix of z^4 - 10z^3 + 35z^2 - 50z + 24 = (z-1)(z-2)(z-3)(z-4)
        let a = Mat::from_rows(&[
            &[10.0, -35.0, 50.0, -24.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        let mut ev: Vec<f64> = a.eigenvalues().iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(max_abs_diff(&ev, &[1.0, 2.0, 3.0, 4.0]) < 1e-8);
    }

    #[test]
    fn complex_solve() {
        let mut a = CMat::zeros(2, 2);
        a[(0, 0)] = Cx::new(1.0, 1.0);
        a[(0, 1)] = Cx::new(2.0, 0.0);
        a[(1, 0)] = Cx::new(0.0, -1.0);
        a[(1, 1)] = Cx::new(3.0, 0.5);
        let mut b = CMat::zeros(2, 1);
        b[(0, 0)] = Cx::new(1.0, 0.0);
        b[(1, 0)] = Cx::new(0.0, 1.0);
        let x = a.solve_mat(&b).unwrap();
        let r0 = a[(0, 0)] * x[(0, 0)] + a[(0, 1)] * x[(1, 0)] - b[(0, 0)];
        let r1 = a[(1, 0)] * x[(0, 0)] + a[(1, 1)] * x[(1, 0)] - b[(1, 0)];
        assert!(r0.abs() < 1e-13 && r1.abs() < 1e-13);
    }

    #[test]
    fn block_tridiag_matches_dense() {
        // Deterministic pseudo-random well-conditioned blocks.
        let mut state = 0x9E3779B97F4A7C15_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let nb = 6;
        let n = 5;
        let mut diag = Vec::new();
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for k in 0..n {
            let mut d = Mat::zeros(nb, nb);
            for i in 0..nb {
                for j in 0..nb {
                    d[(i, j)] = next();
                }
                d[(i, i)] += 4.0; // diagonal dominance
            }
            diag.push(d);
            if k < n - 1 {
                let mut l = Mat::zeros(nb, nb);
                let mut u = Mat::zeros(nb, nb);
                for i in 0..nb {
                    for j in 0..nb {
                        l[(i, j)] = next();
                        u[(i, j)] = next();
                    }
                }
                lower.push(l);
                upper.push(u);
            }
        }
        let bt = BlockTridiag::new(lower, diag, upper);
        let b: Vec<f64> = (0..n * nb).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = bt.solve(&b).unwrap();
        let dense = bt.to_dense();
        let x_dense = dense.solve(&b).unwrap();
        let scale = norm_inf_vec(&x_dense).max(1.0);
        assert!(max_abs_diff(&x, &x_dense) / scale < 1e-10);
    }
}
