//! Reduced optimal control problems y' = g(y, p), p' = phi(y, q) with the
//! control eliminated analytically, plus the two benchmark instances with
//! known exact solutions.

use crate::linalg::Mat;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemError {
    /// |p3| fell below the guard while eliminating the control.
    DegenerateControl {
        t: f64,
        p3: f64,
    },
    /// The problem carries no exact solution.
    MissingExactSolution,
    InvalidParameter {
        name: &'static str,
        value: f64,
    },
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemError::DegenerateControl { t, p3 } => {
                write!(
                    f,
                    "degenerate control at t = {}: |p3| = {:e} too small",
                    t, p3
                )
            }
            ProblemError::MissingExactSolution => write!(f, "problem has no exact solution"),
            ProblemError::InvalidParameter { name, value } => {
                write!(f, "invalid problem parameter {} = {}", name, value)
            }
        }
    }
}

impl std::error::Error for ProblemError {}

/// Reduced two-point boundary value problem of an ODE-constrained optimal
/// control problem after analytic control elimination.
///
/// The forward right-hand side g takes the raw stage multiplier, the
/// adjoint right-hand side phi takes the K^T-weighted multiplier argument,
/// matching the compact form of the discrete KKT system. Both may depend
/// on time through tracking data.
pub trait ControlProblem {
    /// State dimension m.
    fn dim(&self) -> usize;
    /// Final time T.
    fn final_time(&self) -> f64;
    fn initial_state(&self) -> Vec<f64>;

    /// Forward right-hand side g(t, y, p).
    fn g(&self, t: f64, y: &[f64], p: &[f64], out: &mut [f64]) -> Result<(), ProblemError>;
    /// Adjoint right-hand side phi(t, y, q) with the weighted argument q.
    fn phi(&self, t: f64, y: &[f64], q: &[f64], out: &mut [f64]) -> Result<(), ProblemError>;

    fn g_jac_y(&self, t: f64, y: &[f64], p: &[f64], out: &mut Mat) -> Result<(), ProblemError>;
    fn g_jac_p(&self, t: f64, y: &[f64], p: &[f64], out: &mut Mat) -> Result<(), ProblemError>;
    fn phi_jac_y(&self, t: f64, y: &[f64], q: &[f64], out: &mut Mat) -> Result<(), ProblemError>;
    fn phi_jac_q(&self, t: f64, y: &[f64], q: &[f64], out: &mut Mat) -> Result<(), ProblemError>;

    /// Gradient of the terminal objective, nabla_y C(y)^T.
    fn grad_c(&self, y_terminal: &[f64], out: &mut [f64]);
    /// Constant Hessian of the (at most quadratic) terminal objective.
    fn hess_c(&self) -> Mat {
        Mat::zeros(self.dim(), self.dim())
    }

    /// Exact solution (y*(t), p*(t)) when available.
    fn exact(&self, _t: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        None
    }
}

const P3_GUARD: f64 = 1e-8;

/// Nonlinear tracking problem: minimize y3(0.5) subject to a three-state
/// system whose first component follows y_d(t) = exp(lambda t) + 1/(1-t);
/// the control is eliminated by u = u_d - lambda p1 / (alpha p3). The exact
/// solution is y = (y_d, exp(lambda t), 0), p = (0, 0, 1).
pub struct TrackingProblem {
    pub lambda: f64,
    pub alpha: f64,
}

/// Build the tracking benchmark; alpha must be positive (the control
/// elimination divides by it).
pub fn problem_tracking(lambda: f64, alpha: f64) -> Result<TrackingProblem, ProblemError> {
    if !(alpha > 0.0) {
        return Err(ProblemError::InvalidParameter {
            name: "alpha",
            value: alpha,
        });
    }
    Ok(TrackingProblem { lambda, alpha })
}

impl TrackingProblem {
    fn y_d(&self, t: f64) -> f64 {
        (self.lambda * t).exp() + 1.0 / (1.0 - t)
    }

    fn u_d(&self, t: f64) -> f64 {
        (self.lambda * t).exp()
    }

    fn guard_p3(&self, t: f64, p3: f64) -> Result<(), ProblemError> {
        if p3.abs() < P3_GUARD {
            Err(ProblemError::DegenerateControl { t, p3 })
        } else {
            Ok(())
        }
    }
}

impl ControlProblem for TrackingProblem {
    fn dim(&self) -> usize {
        3
    }

    fn final_time(&self) -> f64 {
        0.5
    }

    fn initial_state(&self) -> Vec<f64> {
        vec![2.0, 1.0, 0.0]
    }

    fn g(&self, t: f64, y: &[f64], p: &[f64], out: &mut [f64]) -> Result<(), ProblemError> {
        self.guard_p3(t, p[2])?;
        let (l, a) = (self.lambda, self.alpha);
        let u = self.u_d(t) - l / a * p[0] / p[2];
        let diff = y[0] - y[1];
        out[0] = diff * diff + l * u;
        out[1] = l * y[1];
        let track = y[0] - self.y_d(t);
        let du = l / a * p[0] / p[2];
        out[2] = 0.5 * track * track + 0.5 * a * du * du;
        Ok(())
    }

    fn phi(&self, t: f64, y: &[f64], q: &[f64], out: &mut [f64]) -> Result<(), ProblemError> {
        out[0] = -2.0 * (y[0] - y[1]) * q[0] - y[0] + self.y_d(t);
        out[1] = -2.0 * (y[1] - y[0]) * q[0] - self.lambda * q[1];
        out[2] = 0.0;
        Ok(())
    }

    fn g_jac_y(&self, t: f64, y: &[f64], _p: &[f64], out: &mut Mat) -> Result<(), ProblemError> {
        let diff = y[0] - y[1];
        *out = Mat::zeros(3, 3);
        out[(0, 0)] = 2.0 * diff;
        out[(0, 1)] = -2.0 * diff;
        out[(1, 1)] = self.lambda;
        out[(2, 0)] = y[0] - self.y_d(t);
        Ok(())
    }

    fn g_jac_p(&self, t: f64, _y: &[f64], p: &[f64], out: &mut Mat) -> Result<(), ProblemError> {
        self.guard_p3(t, p[2])?;
        let (l, a) = (self.lambda, self.alpha);
        *out = Mat::zeros(3, 3);
        out[(0, 0)] = -l * l / (a * p[2]);
        out[(0, 2)] = l * l * p[0] / (a * p[2] * p[2]);
        out[(2, 0)] = l * l / a * p[0] / (p[2] * p[2]);
        out[(2, 2)] = -l * l / a * p[0] * p[0] / (p[2] * p[2] * p[2]);
        Ok(())
    }

    fn phi_jac_y(&self, _t: f64, _y: &[f64], q: &[f64], out: &mut Mat) -> Result<(), ProblemError> {
        *out = Mat::zeros(3, 3);
        out[(0, 0)] = -2.0 * q[0] - 1.0;
        out[(0, 1)] = 2.0 * q[0];
        out[(1, 0)] = 2.0 * q[0];
        out[(1, 1)] = -2.0 * q[0];
        Ok(())
    }

    fn phi_jac_q(&self, _t: f64, y: &[f64], _q: &[f64], out: &mut Mat) -> Result<(), ProblemError> {
        *out = Mat::zeros(3, 3);
        out[(0, 0)] = -2.0 * (y[0] - y[1]);
        out[(1, 0)] = -2.0 * (y[1] - y[0]);
        out[(1, 1)] = -self.lambda;
        Ok(())
    }

    fn grad_c(&self, _y_terminal: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&[0.0, 0.0, 1.0]);
    }

    fn exact(&self, t: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let e = (self.lambda * t).exp();
        Some((vec![e + 1.0 / (1.0 - t), e, 0.0], vec![0.0, 0.0, 1.0]))
    }
}

/// Catenary tracking problem: minimize y3(2) for the hanging-rope system
/// with y_d(t) = cosh(a1 t + a2)/a1; the control is eliminated by
/// u = u_d - p2/p3. The exact solution is y = (y_d, sinh(a1 t + a2), 0),
/// p = (0, 0, 1).
pub struct CatenaryProblem {
    pub a1: f64,
    pub a2: f64,
}

/// Build the catenary benchmark; a1 must be nonzero (the initial state
/// divides by it).
pub fn problem_catenary(a1: f64, a2: f64) -> Result<CatenaryProblem, ProblemError> {
    if a1 == 0.0 {
        return Err(ProblemError::InvalidParameter {
            name: "a1",
            value: a1,
        });
    }
    Ok(CatenaryProblem { a1, a2 })
}

impl CatenaryProblem {
    fn theta(&self, t: f64) -> f64 {
        self.a1 * t + self.a2
    }

    fn y_d(&self, t: f64) -> f64 {
        self.theta(t).cosh() / self.a1
    }

    fn u_d(&self, t: f64) -> f64 {
        0.5 * self.a1 * self.theta(t).cosh()
    }

    fn guard_p3(&self, t: f64, p3: f64) -> Result<(), ProblemError> {
        if p3.abs() < P3_GUARD {
            Err(ProblemError::DegenerateControl { t, p3 })
        } else {
            Ok(())
        }
    }
}

impl ControlProblem for CatenaryProblem {
    fn dim(&self) -> usize {
        3
    }

    fn final_time(&self) -> f64 {
        2.0
    }

    fn initial_state(&self) -> Vec<f64> {
        vec![self.a2.cosh() / self.a1, self.a2.sinh(), 0.0]
    }

    fn g(&self, t: f64, y: &[f64], p: &[f64], out: &mut [f64]) -> Result<(), ProblemError> {
        self.guard_p3(t, p[2])?;
        let root = (1.0 + y[1] * y[1]).sqrt();
        let du = p[1] / p[2];
        out[0] = y[1];
        out[1] = 0.5 * self.a1 * root + self.u_d(t) - du;
        let track = y[0] - self.y_d(t);
        out[2] = 0.5 * track * track + 0.5 * du * du;
        Ok(())
    }

    fn phi(&self, t: f64, y: &[f64], q: &[f64], out: &mut [f64]) -> Result<(), ProblemError> {
        let root = (1.0 + y[1] * y[1]).sqrt();
        out[0] = -(y[0] - self.y_d(t)) * q[2];
        out[1] = -q[0] - 0.5 * self.a1 * y[1] / root * q[1];
        out[2] = 0.0;
        Ok(())
    }

    fn g_jac_y(&self, t: f64, y: &[f64], _p: &[f64], out: &mut Mat) -> Result<(), ProblemError> {
        let root = (1.0 + y[1] * y[1]).sqrt();
        *out = Mat::zeros(3, 3);
        out[(0, 1)] = 1.0;
        out[(1, 1)] = 0.5 * self.a1 * y[1] / root;
        out[(2, 0)] = y[0] - self.y_d(t);
        Ok(())
    }

    fn g_jac_p(&self, t: f64, _y: &[f64], p: &[f64], out: &mut Mat) -> Result<(), ProblemError> {
        self.guard_p3(t, p[2])?;
        let du = p[1] / p[2];
        *out = Mat::zeros(3, 3);
        out[(1, 1)] = -1.0 / p[2];
        out[(1, 2)] = p[1] / (p[2] * p[2]);
        out[(2, 1)] = du / p[2];
        out[(2, 2)] = -du * p[1] / (p[2] * p[2]);
        Ok(())
    }

    fn phi_jac_y(&self, _t: f64, y: &[f64], q: &[f64], out: &mut Mat) -> Result<(), ProblemError> {
        let root2 = 1.0 + y[1] * y[1];
        *out = Mat::zeros(3, 3);
        out[(0, 0)] = -q[2];
        out[(1, 1)] = -0.5 * self.a1 * q[1] / (root2 * root2.sqrt());
        Ok(())
    }

    fn phi_jac_q(&self, t: f64, y: &[f64], _q: &[f64], out: &mut Mat) -> Result<(), ProblemError> {
        let root = (1.0 + y[1] * y[1]).sqrt();
        *out = Mat::zeros(3, 3);
        out[(0, 2)] = -(y[0] - self.y_d(t));
        out[(1, 0)] = -1.0;
        out[(1, 1)] = -0.5 * self.a1 * y[1] / root;
        Ok(())
    }

    fn grad_c(&self, _y_terminal: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&[0.0, 0.0, 1.0]);
    }

    fn exact(&self, t: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let theta = self.theta(t);
        Some((
            vec![theta.cosh() / self.a1, theta.sinh(), 0.0],
            vec![0.0, 0.0, 1.0],
        ))
    }
}

/// Central finite-difference Jacobians of g and phi (cross-check oracle and
/// fallback for problems without analytic derivatives).
pub mod fd {
    use super::*;

    fn step(v: f64) -> f64 {
        f64::EPSILON.sqrt() * (1.0 + v.abs())
    }

    fn jac(
        m: usize,
        base: &[f64],
        mut eval: impl FnMut(&[f64], &mut [f64]) -> Result<(), ProblemError>,
    ) -> Result<Mat, ProblemError> {
        let mut out = Mat::zeros(m, m);
        let mut plus = vec![0.0; m];
        let mut minus = vec![0.0; m];
        let mut arg = base.to_vec();
        for j in 0..m {
            let h = step(base[j]);
            arg[j] = base[j] + h;
            eval(&arg, &mut plus)?;
            arg[j] = base[j] - h;
            eval(&arg, &mut minus)?;
            arg[j] = base[j];
            for i in 0..m {
                out[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
            }
        }
        Ok(out)
    }

    pub fn g_jac_y(
        p: &dyn ControlProblem,
        t: f64,
        y: &[f64],
        pv: &[f64],
    ) -> Result<Mat, ProblemError> {
        jac(p.dim(), y, |arg, out| p.g(t, arg, pv, out))
    }

    pub fn g_jac_p(
        p: &dyn ControlProblem,
        t: f64,
        y: &[f64],
        pv: &[f64],
    ) -> Result<Mat, ProblemError> {
        jac(p.dim(), pv, |arg, out| p.g(t, y, arg, out))
    }

    pub fn phi_jac_y(
        p: &dyn ControlProblem,
        t: f64,
        y: &[f64],
        q: &[f64],
    ) -> Result<Mat, ProblemError> {
        jac(p.dim(), y, |arg, out| p.phi(t, arg, q, out))
    }

    pub fn phi_jac_q(
        p: &dyn ControlProblem,
        t: f64,
        y: &[f64],
        q: &[f64],
    ) -> Result<Mat, ProblemError> {
        jac(p.dim(), q, |arg, out| p.phi(t, y, arg, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::SplitMix;

    fn problems() -> Vec<Box<dyn ControlProblem>> {
        vec![
            Box::new(problem_tracking(-50.0, 1.0).unwrap()),
            Box::new(problem_catenary(10.0, -10.0).unwrap()),
        ]
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(matches!(
            problem_tracking(-50.0, 0.0),
            Err(ProblemError::InvalidParameter { name: "alpha", .. })
        ));
        assert!(matches!(
            problem_catenary(0.0, -10.0),
            Err(ProblemError::InvalidParameter { name: "a1", .. })
        ));
    }

    #[test]
    fn tracking_rhs_at_initial_point() {
        // g(y0, p*) at t = 0: first component (2-1)^2 + lambda*1 = lambda + 1,
        // which equals y1'(0) of the exact solution.
        let p = problem_tracking(-50.0, 1.0).unwrap();
        let y0 = p.initial_state();
        let mut out = vec![0.0; 3];
        p.g(0.0, &y0, &[0.0, 0.0, 1.0], &mut out).unwrap();
        assert!((out[0] - (-49.0)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_control_guard() {
        let p = problem_tracking(-50.0, 1.0).unwrap();
        let mut out = vec![0.0; 3];
        match p.g(0.1, &[1.0, 1.0, 0.0], &[0.0, 0.0, 1e-12], &mut out) {
            Err(ProblemError::DegenerateControl { .. }) => {}
            other => panic!("expected degenerate-control error, got {:?}", other),
        }
    }

    #[test]
    fn catenary_initial_state() {
        let p = problem_catenary(10.0, -10.0).unwrap();
        let y0 = p.initial_state();
        assert!((y0[0] - (-10.0f64).cosh() / 10.0).abs() < 1e-9);
        assert!((y0[0] - 1101.32).abs() < 0.005);
        assert!((y0[1] - (-10.0f64).sinh()).abs() < 1e-9);
    }

    #[test]
    fn exact_solution_satisfies_reduced_odes() {
        // Insert (y*, p*) into (g, phi) and compare against closed-form
        // derivatives at 50 sample times.
        let t = problem_tracking(-50.0, 1.0).unwrap();
        for k in 0..50 {
            let time = 0.5 * (k as f64 + 0.5) / 50.0;
            let (y, p) = t.exact(time).unwrap();
            let mut gy = vec![0.0; 3];
            t.g(time, &y, &p, &mut gy).unwrap();
            let e = (-50.0 * time).exp();
            let dy = [
                -50.0 * e + 1.0 / ((1.0 - time) * (1.0 - time)),
                -50.0 * e,
                0.0,
            ];
            for i in 0..3 {
                let scale = dy[i].abs().max(1.0);
                assert!(
                    (gy[i] - dy[i]).abs() / scale < 1e-9,
                    "tracking g[{}] at t={}",
                    i,
                    time
                );
            }
            // phi on the exact pair must vanish (constant multipliers).
            let q = [0.0, 0.0, 1.0];
            let mut ph = vec![0.0; 3];
            t.phi(time, &y, &q, &mut ph).unwrap();
            for (i, v) in ph.iter().enumerate() {
                assert!(v.abs() < 1e-9, "tracking phi[{}] = {} at t={}", i, v, time);
            }
        }

        let c = problem_catenary(10.0, -10.0).unwrap();
        for k in 0..50 {
            let time = 2.0 * (k as f64 + 0.5) / 50.0;
            let (y, p) = c.exact(time).unwrap();
            let mut gy = vec![0.0; 3];
            c.g(time, &y, &p, &mut gy).unwrap();
            let theta = 10.0 * time - 10.0;
            let dy = [theta.sinh(), 10.0 * theta.cosh(), 0.0];
            for i in 0..3 {
                let scale = dy[i].abs().max(1.0);
                assert!(
                    (gy[i] - dy[i]).abs() / scale < 1e-9,
                    "catenary g[{}] at t={}",
                    i,
                    time
                );
            }
            let q = [0.0, 0.0, 1.0];
            let mut ph = vec![0.0; 3];
            c.phi(time, &y, &q, &mut ph).unwrap();
            for (i, v) in ph.iter().enumerate() {
                assert!(v.abs() < 1e-9, "catenary phi[{}] = {} at t={}", i, v, time);
            }
        }
    }

    #[test]
    fn analytic_jacobians_match_finite_differences() {
        // 20 random points near the exact solution, 1e-6 relative.
        let mut rng = SplitMix::new(7);
        for p in problems() {
            let t_end = p.final_time();
            for _ in 0..20 {
                let time = t_end * (0.05 + 0.9 * rng.next_f64());
                let (ye, pe) = p.exact(time).unwrap();
                let y: Vec<f64> = ye
                    .iter()
                    .map(|v| v + 0.05 * (rng.next_f64() - 0.5) * (1.0 + v.abs()))
                    .collect();
                let pv: Vec<f64> = pe
                    .iter()
                    .map(|v| v + 0.05 * (rng.next_f64() - 0.5))
                    .collect();
                let q = pv.clone();
                let m = p.dim();
                let mut analytic = Mat::zeros(m, m);
                // The sqrt(eps) central difference carries roundoff of
                // order eps * |g| / step, so the comparison is relative to
                // the magnitude of the differenced values as well.
                let mut gv = vec![0.0; m];
                p.g(time, &y, &pv, &mut gv).unwrap();
                let mut pv_out = vec![0.0; m];
                p.phi(time, &y, &q, &mut pv_out).unwrap();
                let fscale = crate::linalg::norm_inf_vec(&gv)
                    .max(crate::linalg::norm_inf_vec(&pv_out))
                    .max(1.0);
                let scale = |mat: &Mat| mat.max_abs().max(fscale);

                p.g_jac_y(time, &y, &pv, &mut analytic).unwrap();
                let numeric = fd::g_jac_y(p.as_ref(), time, &y, &pv).unwrap();
                assert!(analytic.sub(&numeric).max_abs() / scale(&analytic) < 1e-6);

                p.g_jac_p(time, &y, &pv, &mut analytic).unwrap();
                let numeric = fd::g_jac_p(p.as_ref(), time, &y, &pv).unwrap();
                assert!(analytic.sub(&numeric).max_abs() / scale(&analytic) < 1e-6);

                p.phi_jac_y(time, &y, &q, &mut analytic).unwrap();
                let numeric = fd::phi_jac_y(p.as_ref(), time, &y, &q).unwrap();
                assert!(analytic.sub(&numeric).max_abs() / scale(&analytic) < 1e-6);

                p.phi_jac_q(time, &y, &q, &mut analytic).unwrap();
                let numeric = fd::phi_jac_q(p.as_ref(), time, &y, &q).unwrap();
                assert!(analytic.sub(&numeric).max_abs() / scale(&analytic) < 1e-6);
            }
        }
    }

    #[test]
    fn hessian_is_symmetric_and_zero_for_linear_objectives() {
        for p in problems() {
            let h = p.hess_c();
            assert!(h.sub(&h.transpose()).max_abs() == 0.0);
            assert!(h.max_abs() == 0.0);
        }
    }
}
