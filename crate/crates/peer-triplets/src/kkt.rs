//! Assembly and Newton solution of the coupled discrete KKT boundary value
//! problem on a stage grid.
//!
//! Unknowns are ordered per time index as z_n = (Y_n, P_n) with stage-major
//! state blocks, giving a block-tridiagonal Jacobian with 2*m*s square
//! diagonal blocks: the forward step couples to Y_{n-1} through B(sigma_n),
//! the adjoint step to P_{n+1} through B(sigma_{n+1})^T, and the terminal
//! block carries the rank-structured coupling of P_N to Y_N through the
//! objective Hessian.

use crate::grid::StageGrid;
use crate::linalg::{norm_inf_vec, BlockTridiag, Mat};
use crate::problems::{fd, ControlProblem, ProblemError};
use crate::triplet::PeerTriplet;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    Dimension { expected: usize, got: usize },
    NonConvergence { residual: f64, iterations: usize },
    SingularBlock { index: usize },
    LineSearchStalled { residual: f64, iterations: usize },
    ComponentOutOfRange { component: usize, dim: usize },
    Problem(ProblemError),
    MissingExactSolution,
    InvalidRecords(&'static str),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Dimension { expected, got } => {
                write!(f, "state vector has {} entries, expected {}", got, expected)
            }
            SolveError::NonConvergence {
                residual,
                iterations,
            } => write!(
                f,
                "Newton did not converge after {} iterations (residual {:.3e})",
                iterations, residual
            ),
            SolveError::SingularBlock { index } => {
                write!(f, "singular pivot in time block {}", index)
            }
            SolveError::LineSearchStalled {
                residual,
                iterations,
            } => write!(
                f,
                "line search found no descent at iteration {} (residual {:.3e}; for \
                 problems with large state values this can be the f64 rounding floor \
                 of the residual, where a larger tolerance is appropriate)",
                iterations, residual
            ),
            SolveError::ComponentOutOfRange { component, dim } => {
                write!(f, "component index {} outside 0..{}", component, dim)
            }
            SolveError::Problem(e) => write!(f, "{}", e),
            SolveError::MissingExactSolution => write!(f, "problem has no exact solution"),
            SolveError::InvalidRecords(msg) => write!(f, "invalid convergence records: {}", msg),
        }
    }
}

impl std::error::Error for SolveError {}

impl From<ProblemError> for SolveError {
    fn from(e: ProblemError) -> Self {
        SolveError::Problem(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianMode {
    Analytic,
    FiniteDifference,
}

/// Newton iteration controls.
#[derive(Debug, Clone)]
pub struct NewtonConfig {
    /// Residual max-norm required for success.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Armijo backtracking on the residual norm (up to 20 halvings).
    pub damping: bool,
    pub jacobian: JacobianMode,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tolerance: 1e-12,
            max_iterations: 60,
            damping: true,
            jacobian: JacobianMode::Analytic,
        }
    }
}

/// Converged stage values of a discrete KKT solve.
#[derive(Debug, Clone)]
pub struct KKTSolution {
    pub s: usize,
    pub m: usize,
    /// Node vector of the triplet that produced the solution.
    pub nodes: Vec<f64>,
    /// Stacked (Y_n, P_n) blocks in unknown order.
    pub z: Vec<f64>,
    /// Extrapolated terminal state w^T Y_N.
    pub y_terminal: Vec<f64>,
    /// Terminal multiplier gradient nabla_y C(y_h(T))^T.
    pub p_terminal: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
}

impl KKTSolution {
    pub fn state_stage(&self, n: usize, i: usize) -> &[f64] {
        let nb = 2 * self.s * self.m;
        let base = n * nb + i * self.m;
        &self.z[base..base + self.m]
    }

    pub fn adjoint_stage(&self, n: usize, i: usize) -> &[f64] {
        let nb = 2 * self.s * self.m;
        let base = n * nb + self.s * self.m + i * self.m;
        &self.z[base..base + self.m]
    }
}

struct System<'a> {
    t: &'a PeerTriplet,
    grid: &'a StageGrid,
    prob: &'a dyn ControlProblem,
    /// B(sigma_n) per step (index 0 unused).
    b_mats: Vec<Mat>,
}

impl<'a> System<'a> {
    fn new(
        t: &'a PeerTriplet,
        grid: &'a StageGrid,
        prob: &'a dyn ControlProblem,
    ) -> Result<Self, SolveError> {
        let steps = grid.num_steps();
        let mut b_mats = Vec::with_capacity(steps);
        b_mats.push(Mat::zeros(t.s, t.s));
        for n in 1..steps {
            let sigma = grid.sigma[n];
            let b = t.b_matrix(sigma).map_err(|_| SolveError::NonConvergence {
                residual: f64::NAN,
                iterations: 0,
            })?;
            b_mats.push(b);
        }
        Ok(System {
            t,
            grid,
            prob,
            b_mats,
        })
    }

    fn unknowns(&self) -> usize {
        2 * self.t.s * self.prob.dim() * self.grid.num_steps()
    }

    fn step_mats(&self, n: usize) -> (&Mat, &Mat) {
        if n == 0 {
            (&self.t.a0, &self.t.k0)
        } else if n == self.grid.last_step() {
            (&self.t.an, &self.t.kn)
        } else {
            (&self.t.a, &self.t.k)
        }
    }

    /// Weighted adjoint argument q_ni = sum_j K_n[j][i] P_nj.
    fn weighted_multiplier(&self, k_n: &Mat, p_block: &[f64], i: usize, out: &mut [f64]) {
        let (s, m) = (self.t.s, self.prob.dim());
        for c in 0..m {
            out[c] = 0.0;
        }
        for j in 0..s {
            let kji = k_n[(j, i)];
            if kji != 0.0 {
                for c in 0..m {
                    out[c] += kji * p_block[j * m + c];
                }
            }
        }
    }

    fn residual(&self, z: &[f64], out: &mut [f64]) -> Result<(), SolveError> {
        let (s, m) = (self.t.s, self.prob.dim());
        let sm = s * m;
        let nb = 2 * sm;
        let steps = self.grid.num_steps();
        if z.len() != nb * steps {
            return Err(SolveError::Dimension {
                expected: nb * steps,
                got: z.len(),
            });
        }
        let y0 = self.prob.initial_state();
        let a_vec = self.t.a_vec();
        let w_vec = self.t.w_vec();
        let last = self.grid.last_step();

        let mut gval = vec![0.0; m];
        let mut q = vec![0.0; m];

        for n in 0..steps {
            let (a_n, k_n) = self.step_mats(n);
            let h_n = self.grid.h[n];
            let y_block = &z[n * nb..n * nb + sm];
            let p_block = &z[n * nb + sm..(n + 1) * nb];
            let out_state = n * nb;
            let out_adj = n * nb + sm;

            // State rows: A_n Y_n - (coupling) - h_n K_n G(Y_n, P_n).
            for i in 0..s {
                for c in 0..m {
                    let mut acc = 0.0;
                    for j in 0..s {
                        acc += a_n[(i, j)] * y_block[j * m + c];
                    }
                    out[out_state + i * m + c] = acc;
                }
            }
            if n == 0 {
                for i in 0..s {
                    for c in 0..m {
                        out[out_state + i * m + c] -= a_vec[i] * y0[c];
                    }
                }
            } else {
                let b = &self.b_mats[n];
                let y_prev = &z[(n - 1) * nb..(n - 1) * nb + sm];
                for i in 0..s {
                    for c in 0..m {
                        let mut acc = 0.0;
                        for j in 0..s {
                            acc += b[(i, j)] * y_prev[j * m + c];
                        }
                        out[out_state + i * m + c] -= acc;
                    }
                }
            }
            for j in 0..s {
                let t_nj = self.grid.stage_time(n, self.t.c[j]);
                self.prob.g(
                    t_nj,
                    &y_block[j * m..(j + 1) * m],
                    &p_block[j * m..(j + 1) * m],
                    &mut gval,
                )?;
                for i in 0..s {
                    let knij = k_n[(i, j)];
                    if knij != 0.0 {
                        for c in 0..m {
                            out[out_state + i * m + c] -= h_n * knij * gval[c];
                        }
                    }
                }
            }

            // Adjoint rows: A_n^T P_n - (coupling) + h_n Phi(Y_n, K_n^T P_n).
            for i in 0..s {
                for c in 0..m {
                    let mut acc = 0.0;
                    for j in 0..s {
                        acc += a_n[(j, i)] * p_block[j * m + c];
                    }
                    out[out_adj + i * m + c] = acc;
                }
            }
            if n == last {
                let mut y_term = vec![0.0; m];
                for j in 0..s {
                    for c in 0..m {
                        y_term[c] += w_vec[j] * y_block[j * m + c];
                    }
                }
                let mut grad = vec![0.0; m];
                self.prob.grad_c(&y_term, &mut grad);
                for i in 0..s {
                    for c in 0..m {
                        out[out_adj + i * m + c] -= w_vec[i] * grad[c];
                    }
                }
            } else {
                let b_next = &self.b_mats[n + 1];
                let p_next = &z[(n + 1) * nb + sm..(n + 2) * nb];
                for i in 0..s {
                    for c in 0..m {
                        let mut acc = 0.0;
                        for j in 0..s {
                            acc += b_next[(j, i)] * p_next[j * m + c];
                        }
                        out[out_adj + i * m + c] -= acc;
                    }
                }
            }
            for i in 0..s {
                let t_ni = self.grid.stage_time(n, self.t.c[i]);
                self.weighted_multiplier(k_n, p_block, i, &mut q);
                let mut phi = vec![0.0; m];
                self.prob
                    .phi(t_ni, &y_block[i * m..(i + 1) * m], &q, &mut phi)?;
                for c in 0..m {
                    out[out_adj + i * m + c] += h_n * phi[c];
                }
            }
        }
        Ok(())
    }

    fn jacobian(&self, z: &[f64], mode: JacobianMode) -> Result<BlockTridiag, SolveError> {
        let (s, m) = (self.t.s, self.prob.dim());
        let sm = s * m;
        let nb = 2 * sm;
        let steps = self.grid.num_steps();
        if z.len() != nb * steps {
            return Err(SolveError::Dimension {
                expected: nb * steps,
                got: z.len(),
            });
        }
        let last = self.grid.last_step();
        let w_vec = self.t.w_vec();
        let hess = self.prob.hess_c();

        let mut diag = Vec::with_capacity(steps);
        let mut lower = Vec::with_capacity(steps - 1);
        let mut upper = Vec::with_capacity(steps - 1);
        let mut q = vec![0.0; m];

        for n in 0..steps {
            let (a_n, k_n) = self.step_mats(n);
            let h_n = self.grid.h[n];
            let y_block = &z[n * nb..n * nb + sm];
            let p_block = &z[n * nb + sm..(n + 1) * nb];
            let mut d = Mat::zeros(nb, nb);

            // Per-stage problem Jacobians.
            let mut jgy = Vec::with_capacity(s);
            let mut jgp = Vec::with_capacity(s);
            let mut jpy = Vec::with_capacity(s);
            let mut jpq = Vec::with_capacity(s);
            for j in 0..s {
                let t_nj = self.grid.stage_time(n, self.t.c[j]);
                let y_j = &y_block[j * m..(j + 1) * m];
                let p_j = &p_block[j * m..(j + 1) * m];
                self.weighted_multiplier(k_n, p_block, j, &mut q);
                match mode {
                    JacobianMode::Analytic => {
                        let mut gy = Mat::zeros(m, m);
                        let mut gp = Mat::zeros(m, m);
                        let mut py = Mat::zeros(m, m);
                        let mut pq = Mat::zeros(m, m);
                        self.prob.g_jac_y(t_nj, y_j, p_j, &mut gy)?;
                        self.prob.g_jac_p(t_nj, y_j, p_j, &mut gp)?;
                        self.prob.phi_jac_y(t_nj, y_j, &q, &mut py)?;
                        self.prob.phi_jac_q(t_nj, y_j, &q, &mut pq)?;
                        jgy.push(gy);
                        jgp.push(gp);
                        jpy.push(py);
                        jpq.push(pq);
                    }
                    JacobianMode::FiniteDifference => {
                        jgy.push(fd::g_jac_y(self.prob, t_nj, y_j, p_j)?);
                        jgp.push(fd::g_jac_p(self.prob, t_nj, y_j, p_j)?);
                        jpy.push(fd::phi_jac_y(self.prob, t_nj, y_j, &q)?);
                        jpq.push(fd::phi_jac_q(self.prob, t_nj, y_j, &q)?);
                    }
                }
            }

            for i in 0..s {
                for j in 0..s {
                    let a_ij = a_n[(i, j)];
                    let k_ij = k_n[(i, j)];
                    let a_ji = a_n[(j, i)];
                    let k_ji = k_n[(j, i)];
                    for r in 0..m {
                        for c in 0..m {
                            // State rows vs Y.
                            let mut v = -h_n * k_ij * jgy[j][(r, c)];
                            if r == c {
                                v += a_ij;
                            }
                            d[(i * m + r, j * m + c)] = v;
                            // State rows vs P.
                            d[(i * m + r, sm + j * m + c)] = -h_n * k_ij * jgp[j][(r, c)];
                            // Adjoint rows vs P.
                            let mut v = h_n * jpq[i][(r, c)] * k_ji;
                            if r == c {
                                v += a_ji;
                            }
                            d[(sm + i * m + r, sm + j * m + c)] = v;
                            // Adjoint rows vs Y (diagonal in the stage index).
                            let mut v = if i == j { h_n * jpy[i][(r, c)] } else { 0.0 };
                            if n == last {
                                v -= w_vec[i] * w_vec[j] * hess[(r, c)];
                            }
                            d[(sm + i * m + r, j * m + c)] = v;
                        }
                    }
                }
            }
            diag.push(d);

            if n > 0 {
                let b = &self.b_mats[n];
                let mut l = Mat::zeros(nb, nb);
                for i in 0..s {
                    for j in 0..s {
                        for r in 0..m {
                            l[(i * m + r, j * m + r)] = -b[(i, j)];
                        }
                    }
                }
                lower.push(l);
            }
            if n < last {
                let b_next = &self.b_mats[n + 1];
                let mut u = Mat::zeros(nb, nb);
                for i in 0..s {
                    for j in 0..s {
                        for r in 0..m {
                            u[(sm + i * m + r, sm + j * m + r)] = -b_next[(j, i)];
                        }
                    }
                }
                upper.push(u);
            }
        }
        Ok(BlockTridiag::new(lower, diag, upper))
    }
}

/// Assemble the discrete KKT residual at the stacked unknowns `z`.
pub fn assemble_residual(
    t: &PeerTriplet,
    grid: &StageGrid,
    prob: &dyn ControlProblem,
    z: &[f64],
) -> Result<Vec<f64>, SolveError> {
    let sys = System::new(t, grid, prob)?;
    let mut out = vec![0.0; sys.unknowns()];
    sys.residual(z, &mut out)?;
    Ok(out)
}

/// Assemble the block-tridiagonal Jacobian at `z`.
pub fn assemble_jacobian(
    t: &PeerTriplet,
    grid: &StageGrid,
    prob: &dyn ControlProblem,
    z: &[f64],
    mode: JacobianMode,
) -> Result<BlockTridiag, SolveError> {
    System::new(t, grid, prob)?.jacobian(z, mode)
}

/// Initial guess: constant extension of the boundary data,
/// Y_ni = y0 and P_ni = grad C(y0).
pub fn initial_guess(t: &PeerTriplet, grid: &StageGrid, prob: &dyn ControlProblem) -> Vec<f64> {
    let (s, m) = (t.s, prob.dim());
    let nb = 2 * s * m;
    let y0 = prob.initial_state();
    let mut p0 = vec![0.0; m];
    prob.grad_c(&y0, &mut p0);
    let mut z = vec![0.0; nb * grid.num_steps()];
    for n in 0..grid.num_steps() {
        for i in 0..s {
            for c in 0..m {
                z[n * nb + i * m + c] = y0[c];
                z[n * nb + s * m + i * m + c] = p0[c];
            }
        }
    }
    z
}

/// Damped Newton iteration on the discrete KKT system.
pub fn newton_solve(
    t: &PeerTriplet,
    grid: &StageGrid,
    prob: &dyn ControlProblem,
    cfg: &NewtonConfig,
) -> Result<KKTSolution, SolveError> {
    let sys = System::new(t, grid, prob)?;
    let n_unknowns = sys.unknowns();
    let mut z = initial_guess(t, grid, prob);
    let mut res = vec![0.0; n_unknowns];
    sys.residual(&z, &mut res)?;
    let mut res_norm = norm_inf_vec(&res);
    let mut history = vec![res_norm];

    for iter in 0..cfg.max_iterations {
        if res_norm <= cfg.tolerance {
            return Ok(finish(t, grid, prob, z, res_norm, iter, history));
        }
        let jac = sys.jacobian(&z, cfg.jacobian)?;
        let neg_res: Vec<f64> = res.iter().map(|v| -v).collect();
        let delta = jac.solve(&neg_res).map_err(|e| match e {
            crate::linalg::LinalgError::SingularBlock { block } => {
                SolveError::SingularBlock { index: block }
            }
            crate::linalg::LinalgError::Singular { pivot } => {
                SolveError::SingularBlock { index: pivot }
            }
        })?;

        let mut accepted = false;
        let mut lambda = 1.0;
        let mut trial = vec![0.0; n_unknowns];
        let mut trial_res = vec![0.0; n_unknowns];
        let halvings = if cfg.damping { 20 } else { 0 };
        for _ in 0..=halvings {
            for k in 0..n_unknowns {
                trial[k] = z[k] + lambda * delta[k];
            }
            match sys.residual(&trial, &mut trial_res) {
                Ok(()) => {
                    let trial_norm = norm_inf_vec(&trial_res);
                    if trial_norm.is_finite() && trial_norm < (1.0 - 1e-4 * lambda) * res_norm {
                        std::mem::swap(&mut z, &mut trial);
                        std::mem::swap(&mut res, &mut trial_res);
                        res_norm = trial_norm;
                        accepted = true;
                        break;
                    }
                }
                // Evaluation failures (degenerate control) reject the trial.
                Err(SolveError::Problem(_)) => {}
                Err(e) => return Err(e),
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(SolveError::LineSearchStalled {
                residual: res_norm,
                iterations: iter,
            });
        }
        history.push(res_norm);
    }
    if res_norm <= cfg.tolerance {
        let iters = cfg.max_iterations;
        return Ok(finish(t, grid, prob, z, res_norm, iters, history));
    }
    Err(SolveError::NonConvergence {
        residual: res_norm,
        iterations: cfg.max_iterations,
    })
}

fn finish(
    t: &PeerTriplet,
    grid: &StageGrid,
    prob: &dyn ControlProblem,
    z: Vec<f64>,
    residual_norm: f64,
    iterations: usize,
    history: Vec<f64>,
) -> KKTSolution {
    let (s, m) = (t.s, prob.dim());
    let nb = 2 * s * m;
    let last = grid.last_step();
    let w_vec = t.w_vec();
    let mut y_terminal = vec![0.0; m];
    for j in 0..s {
        for c in 0..m {
            y_terminal[c] += w_vec[j] * z[last * nb + j * m + c];
        }
    }
    let mut p_terminal = vec![0.0; m];
    prob.grad_c(&y_terminal, &mut p_terminal);
    KKTSolution {
        s,
        m,
        nodes: t.c.clone(),
        z,
        y_terminal,
        p_terminal,
        residual_norm,
        iterations,
        residual_history: history,
    }
}

/// Max-norm stage errors (state, adjoint) of one solution component against
/// the problem's exact solution, over all steps and stages.
pub fn solution_errors(
    sol: &KKTSolution,
    prob: &dyn ControlProblem,
    grid: &StageGrid,
    component: usize,
) -> Result<(f64, f64), SolveError> {
    if prob.exact(0.0).is_none() {
        return Err(SolveError::MissingExactSolution);
    }
    let c = component;
    if c >= prob.dim() {
        return Err(SolveError::ComponentOutOfRange {
            component: c,
            dim: prob.dim(),
        });
    }
    let mut err_state = 0.0_f64;
    let mut err_adjoint = 0.0_f64;
    let s = sol.s;
    for n in 0..grid.num_steps() {
        for i in 0..s {
            let t_ni = grid.stage_time(n, stage_node(sol, i));
            let (ye, pe) = prob.exact(t_ni).ok_or(SolveError::MissingExactSolution)?;
            err_state = err_state.max((sol.state_stage(n, i)[c] - ye[c]).abs());
            err_adjoint = err_adjoint.max((sol.adjoint_stage(n, i)[c] - pe[c]).abs());
        }
    }
    Ok((err_state, err_adjoint))
}

fn stage_node(sol: &KKTSolution, i: usize) -> f64 {
    sol.nodes[i]
}

/// Consecutive-pair observed orders log(e_i/e_{i+1}) / log(N_{i+1}/N_i).
pub fn observed_orders(records: &[(usize, f64)]) -> Result<Vec<f64>, SolveError> {
    if records.len() < 2 {
        return Ok(Vec::new());
    }
    for w in records.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(SolveError::InvalidRecords("duplicate step counts"));
        }
    }
    for &(_, e) in records {
        if !(e > 0.0) {
            return Err(SolveError::InvalidRecords("errors must be positive"));
        }
    }
    Ok(records
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[1].0 as f64 / w[0].0 as f64).ln())
        .collect())
}
