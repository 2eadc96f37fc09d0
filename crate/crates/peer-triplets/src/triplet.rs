//! Peer triplet coefficient data and the sigma-dependent matrices built
//! from it.
//!
//! A triplet bundles a starting method (A0, K0), a standard method
//! (A, B(sigma), K) for the interior steps and an end method (AN, KN).
//! Only the matrix B changes with the stepsize ratio sigma = h_n/h_{n-1};
//! it is reconstructed from a sparse transformed matrix Bhat whose free
//! entries are Laurent polynomials in sigma, via B(sigma) solving
//! V^T B V = Bhat(sigma) with the Vandermonde matrix V of the nodes.

use crate::linalg::Mat;
use std::fmt;

/// Laurent polynomial in sigma: sum of coeff * sigma^exponent terms.
///
/// Exponents stay in a small window (-2..=3 covers all built-in methods).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Laurent {
    /// (exponent, coefficient) pairs, sorted by exponent, no duplicates.
    terms: Vec<(i32, f64)>,
}

impl Laurent {
    pub fn new(mut terms: Vec<(i32, f64)>) -> Self {
        terms.sort_by_key(|&(e, _)| e);
        terms.dedup_by(|later, first| {
            if later.0 == first.0 {
                first.1 += later.1;
                true
            } else {
                false
            }
        });
        terms.retain(|&(_, c)| c != 0.0);
        Laurent { terms }
    }

    pub fn zero() -> Self {
        Laurent { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Laurent::new(vec![(0, c)])
    }

    pub fn eval(&self, sigma: f64) -> f64 {
        self.terms.iter().map(|&(e, c)| c * sigma.powi(e)).sum()
    }

    pub fn terms(&self) -> &[(i32, f64)] {
        &self.terms
    }
}

/// Sparse transformed matrix Bhat(sigma) = V^T B(sigma) V.
///
/// The first row is (1, ..., 1, a_1s) and the first column (1, 0, ..., 0,
/// a_s1)^T, both constant in sigma; the remaining nonzeros sit in the last
/// column (rows 2..s-1), the last row (columns 2..s-1) and the corner
/// (s, s), each a Laurent polynomial in sigma.
#[derive(Debug, Clone, PartialEq)]
pub struct BHat {
    pub a_1s: f64,
    pub a_s1: f64,
    /// Entries (i, s) for i = 2..=s-1.
    pub east: Vec<Laurent>,
    /// Entries (s, j) for j = 2..=s-1.
    pub south: Vec<Laurent>,
    /// Entry (s, s).
    pub corner: Laurent,
}

impl BHat {
    pub fn stage_count(&self) -> usize {
        self.east.len() + 2
    }

    /// Evaluate the full s x s matrix at a stepsize ratio.
    pub fn eval(&self, sigma: f64) -> Mat {
        let s = self.stage_count();
        let mut m = Mat::zeros(s, s);
        for j in 0..s - 1 {
            m[(0, j)] = 1.0;
        }
        m[(0, s - 1)] = self.a_1s;
        m[(s - 1, 0)] = self.a_s1;
        for (i, p) in self.east.iter().enumerate() {
            m[(i + 1, s - 1)] = p.eval(sigma);
        }
        for (j, p) in self.south.iter().enumerate() {
            m[(s - 1, j + 1)] = p.eval(sigma);
        }
        m[(s - 1, s - 1)] = self.corner.eval(sigma);
        m
    }
}

/// Declared local orders of a triplet: (r, q) hold for all sigma, r1 at
/// sigma = 1 only, and q_b is the one-leg order of the boundary methods
/// (`None` marks diagonal K0/KN, where the condition holds for every order).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orders {
    pub r: usize,
    pub q: usize,
    pub r1: usize,
    pub q_b: Option<usize>,
}

/// Which of the three methods of a triplet a query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Start,
    Standard,
    End,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Start => write!(f, "start"),
            Step::Standard => write!(f, "standard"),
            Step::End => write!(f, "end"),
        }
    }
}

/// Full coefficient set of one implicit Peer triplet.
#[derive(Debug, Clone, PartialEq)]
pub struct PeerTriplet {
    pub name: String,
    /// Stage count.
    pub s: usize,
    /// Node vector.
    pub c: Vec<f64>,
    pub a0: Mat,
    pub k0: Mat,
    pub a: Mat,
    pub k: Mat,
    pub an: Mat,
    pub kn: Mat,
    pub bhat: BHat,
    /// Weight matrix of the zero-stability norm.
    pub w: Mat,
    pub orders: Orders,
    /// Certified interval of uniform zero stability.
    pub sigma_interval: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TripletError {
    UnknownTriplet(String),
    NonPositiveSigma(f64),
    SingularVandermonde,
    SingularMatrix { what: &'static str },
    Invalid(String),
}

impl fmt::Display for TripletError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TripletError::UnknownTriplet(name) => write!(f, "unknown triplet '{}'", name),
            TripletError::NonPositiveSigma(s) => {
                write!(f, "stepsize ratio must be positive, got {}", s)
            }
            TripletError::SingularVandermonde => {
                write!(f, "singular Vandermonde matrix (repeated nodes)")
            }
            TripletError::SingularMatrix { what } => write!(f, "singular matrix {}", what),
            TripletError::Invalid(msg) => write!(f, "invalid triplet: {}", msg),
        }
    }
}

impl std::error::Error for TripletError {}

impl PeerTriplet {
    /// Start weight vector a = A0 * 1.
    pub fn a_vec(&self) -> Vec<f64> {
        self.a0.matvec(&vec![1.0; self.s])
    }

    /// End weight vector w = AN^T * 1.
    pub fn w_vec(&self) -> Vec<f64> {
        self.an.matvec_t(&vec![1.0; self.s])
    }

    /// Adjoint weight matrix Wdag = (A W)^-T.
    pub fn wdag(&self) -> Result<Mat, TripletError> {
        self.a
            .matmul(&self.w)
            .transpose()
            .inverse()
            .map_err(|_| TripletError::SingularMatrix { what: "A*W" })
    }

    /// Coefficient matrices (A_n, K_n) of the requested step.
    pub fn step_matrices(&self, step: Step) -> (&Mat, &Mat) {
        match step {
            Step::Start => (&self.a0, &self.k0),
            Step::Standard => (&self.a, &self.k),
            Step::End => (&self.an, &self.kn),
        }
    }

    /// Evaluate the sparse transformed matrix Bhat(sigma).
    pub fn b_hat(&self, sigma: f64) -> Result<Mat, TripletError> {
        if !(sigma > 0.0) {
            return Err(TripletError::NonPositiveSigma(sigma));
        }
        Ok(self.bhat.eval(sigma))
    }

    /// Reconstruct B(sigma) from Bhat(sigma) by solving V^T B V = Bhat.
    pub fn b_matrix(&self, sigma: f64) -> Result<Mat, TripletError> {
        let bh = self.b_hat(sigma)?;
        let vt = StructuralMatrices::vandermonde(&self.c, self.s).transpose();
        let lu = vt.lu().map_err(|_| TripletError::SingularVandermonde)?;
        // X = V^-T Bhat, then B^T = V^-T X^T, i.e. B = X V^-1.
        let x = lu.solve_mat(&bh);
        let bt = lu.solve_mat(&x.transpose());
        Ok(bt.transpose())
    }

    /// Stability matrices of the forward and adjoint standard step:
    /// (A^-1 B(sigma), A^-T B(sigma)^T).
    pub fn stability_matrices(&self, sigma: f64) -> Result<(Mat, Mat), TripletError> {
        let b = self.b_matrix(sigma)?;
        let lu = self
            .a
            .lu()
            .map_err(|_| TripletError::SingularMatrix { what: "A" })?;
        let fwd = lu.solve_mat(&b);
        let lut = self
            .a
            .transpose()
            .lu()
            .map_err(|_| TripletError::SingularMatrix { what: "A^T" })?;
        let adj = lut.solve_mat(&b.transpose());
        Ok((fwd, adj))
    }

    /// Structural sanity checks on the stored coefficients.
    pub fn validate(&self) -> Result<(), TripletError> {
        let s = self.s;
        if s < 2 {
            return Err(TripletError::Invalid(
                "stage count must be at least 2".into(),
            ));
        }
        if self.c.len() != s {
            return Err(TripletError::Invalid("node vector length != s".into()));
        }
        for (label, m) in [
            ("A0", &self.a0),
            ("K0", &self.k0),
            ("A", &self.a),
            ("K", &self.k),
            ("AN", &self.an),
            ("KN", &self.kn),
            ("W", &self.w),
        ] {
            if m.rows() != s || m.cols() != s {
                return Err(TripletError::Invalid(format!(
                    "{} is not {}x{}",
                    label, s, s
                )));
            }
        }
        if self.bhat.stage_count() != s {
            return Err(TripletError::Invalid(
                "bhat sparsity does not match s".into(),
            ));
        }
        for (label, m) in [("A", &self.a), ("A0", &self.a0), ("AN", &self.an)] {
            if m.lu().is_err() {
                return Err(TripletError::Invalid(format!("{} is singular", label)));
            }
        }
        let ones = vec![1.0; s];
        let norm: f64 = self.a.matvec(&ones).iter().sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(TripletError::Invalid(format!(
                "normalization 1^T A 1 = {} differs from 1",
                norm
            )));
        }
        // W e1 = 1 and 1^T A W = e1^T.
        for i in 0..s {
            if (self.w[(i, 0)] - 1.0).abs() > 1e-10 {
                return Err(TripletError::Invalid("W e1 != ones".into()));
            }
        }
        let col_sums_aw = self.a.matmul(&self.w).matvec_t(&ones);
        for (j, v) in col_sums_aw.iter().enumerate() {
            let target = if j == 0 { 1.0 } else { 0.0 };
            if (v - target).abs() > 1e-10 {
                return Err(TripletError::Invalid(format!(
                    "1^T A W differs from e1^T in column {}",
                    j + 1
                )));
            }
        }
        Ok(())
    }
}

/// Vandermonde, Pascal, nilpotent shift and sigma-scaling matrices used in
/// the order conditions.
pub struct StructuralMatrices;

impl StructuralMatrices {
    /// V_q = (1, c, ..., c^(q-1)), an s x q matrix.
    pub fn vandermonde(c: &[f64], q: usize) -> Mat {
        let s = c.len();
        let mut v = Mat::zeros(s, q);
        for i in 0..s {
            let mut p = 1.0;
            for j in 0..q {
                v[(i, j)] = p;
                p *= c[i];
            }
        }
        v
    }

    /// Pascal matrix P_q with entries binom(j-1, i-1); equals exp(Etilde_q).
    pub fn pascal(q: usize) -> Mat {
        let mut p = Mat::zeros(q, q);
        for i in 0..q {
            for j in 0..q {
                p[(i, j)] = binom(j, i);
            }
        }
        p
    }

    /// Nilpotent matrix Etilde_q with entries i * delta_{i+1,j} (1-based).
    pub fn etilde(q: usize) -> Mat {
        let mut e = Mat::zeros(q, q);
        for i in 0..q.saturating_sub(1) {
            e[(i, i + 1)] = (i + 1) as f64;
        }
        e
    }

    /// Scaling matrix S(sigma, r) = diag(sigma^(i-1)).
    pub fn scaling(sigma: f64, r: usize) -> Mat {
        Mat::diag(&(0..r).map(|i| sigma.powi(i as i32)).collect::<Vec<_>>())
    }
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

pub(crate) fn vec_powi(c: &[f64], k: usize) -> Vec<f64> {
    c.iter().map(|&x| x.powi(k as i32)).collect()
}
