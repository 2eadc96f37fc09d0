//! Slower end-to-end properties of the benchmark runs that do not belong
//! to the acceptance criteria: documented error-ratio and slope examples.

use peer_triplets::study::{run_convergence_study, GridFamily, ProblemSpec, StudySpec};

#[test]
fn fourth_order_triplet_on_adapted_meshes_beats_order_three_five() {
    // Error at 320 steps at most 1/12 of the error at 160 steps.
    let spec = StudySpec {
        triplet: "AP4o43vs".to_string(),
        problem: ProblemSpec::Tracking {
            lambda: -50.0,
            alpha: 1.0,
        },
        grid: GridFamily::Equidistributed { r: Some(4) },
        component: 0,
        n_list: vec![160, 320],
        tolerance: 1e-12,
    };
    let rec = run_convergence_study(&spec).unwrap();
    let ratio = rec.err_state[0] / rec.err_state[1];
    assert!(
        ratio >= 12.0,
        "error ratio {:.1} between 160 and 320 steps (want >= 12)",
        ratio
    );
}

#[test]
fn pulcherrima_terminal_slope_three_on_constant_steps() {
    let spec = StudySpec {
        triplet: "AP4o33vg".to_string(),
        problem: ProblemSpec::Tracking {
            lambda: -50.0,
            alpha: 1.0,
        },
        grid: GridFamily::Alternating { sigma: 1.0 },
        component: 0,
        n_list: vec![40, 80, 160, 320],
        tolerance: 1e-12,
    };
    let rec = run_convergence_study(&spec).unwrap();
    let slope = rec.terminal_order_state().unwrap();
    assert!((slope - 3.0).abs() <= 0.4, "terminal slope {:.2}", slope);
    // The adjoint component converges with nearly fourth order (its local
    // truncation vanishes identically on this problem).
    let adj = rec.terminal_order_adjoint().unwrap();
    assert!(adj >= 3.4, "adjoint terminal slope {:.2}", adj);
}

#[test]
fn smooth_grid_study_runs_end_to_end() {
    // The smoothly varying sequence h_n = h_{n-1}/(1 - eta h_{n-1}) keeps
    // sigma_n = 1 + eta h_n; errors on it converge with order three.
    let spec = StudySpec {
        triplet: "AP4o33vg".to_string(),
        problem: ProblemSpec::Tracking {
            lambda: -50.0,
            alpha: 1.0,
        },
        grid: GridFamily::Smooth {
            h0: 0.004,
            eta: 0.3,
        },
        component: 0,
        n_list: vec![40, 80, 160],
        tolerance: 1e-12,
    };
    // Halving h0 halves every step of the sequence, so scale it with N.
    let mut errs = Vec::new();
    for (k, &n) in spec.n_list.iter().enumerate() {
        let sub = StudySpec {
            grid: GridFamily::Smooth {
                h0: 0.004 / (1 << k) as f64,
                eta: 0.3,
            },
            n_list: vec![n],
            ..spec.clone()
        };
        let rec = run_convergence_study(&sub).unwrap();
        errs.push(rec.err_state[0]);
    }
    let slope = (errs[1] / errs[2]).log2();
    assert!(slope > 2.5, "smooth-grid slope {:.2}", slope);
}
