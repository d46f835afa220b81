//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured margin. Run with
//!   cargo test -p ballspectral --test acceptance -- --nocapture

use ballspectral::ballbasis::{self, BallAlpha, BallPolySpec, BasisLayout};
use ballspectral::diagnostics;
use ballspectral::harmonics::{self, AngularGrid, HarmonicIndex, SphericalPoint};
use ballspectral::jacobi::{self, JacobiParams, QuadratureRule1D};
use ballspectral::report::ErrorReport;
use ballspectral::solver::{
    self, manufactured_case, run_convergence_study, CaseId, ManufacturedCase, Stage2Operator,
};
use ballspectral::transform::{self, BallGrid, GridSpec};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

const DEGREES: [usize; 4] = [4, 8, 12, 16];

/// Reference error tables: rows N = 4, 8, 12, 16; columns
/// [sigma_h1, u_h1, sigma_l2, u_l2].
const REF_CASE1: [[f64; 4]; 4] = [
    [8.182848e-01, 9.950927e-02, 2.259174e-01, 2.428087e-02],
    [1.857498e-03, 1.949815e-04, 1.884392e-04, 1.941540e-05],
    [6.497892e-07, 6.664685e-08, 3.650210e-08, 3.727417e-09],
    [6.151159e-11, 7.033383e-12, 2.469976e-12, 2.499720e-13],
];
const REF_CASE2: [[f64; 4]; 4] = [
    [1.222364e+00, 3.533737e-02, 3.205838e-01, 1.417889e-02],
    [1.330501e-02, 4.220701e-04, 1.309173e-03, 4.418767e-05],
    [4.421004e-05, 1.165379e-06, 2.431017e-06, 6.526781e-08],
    [6.996362e-08, 1.543859e-09, 2.536715e-09, 5.630076e-11],
];
/// Reference rates at N = 8, 12, 16: [sigma, u] per degree.
const REF_RATES1: [[f64; 2]; 3] = [[1.7723, 1.7828], [2.1373, 2.1395], [2.4002, 2.4025]];
const REF_RATES2: [[f64; 2]; 3] = [[1.3752, 1.4420], [1.5722, 1.6294], [1.7163, 1.7639]];

fn studies() -> &'static (ErrorReport, ErrorReport) {
    static STUDIES: OnceLock<(ErrorReport, ErrorReport)> = OnceLock::new();
    STUDIES.get_or_init(|| {
        let (r1, _) = run_convergence_study(CaseId::Case1, &DEGREES, None).unwrap();
        let (r2, _) = run_convergence_study(CaseId::Case2, &DEGREES, None).unwrap();
        (r1, r2)
    })
}

fn columns(report: &ErrorReport, row: usize) -> [f64; 4] {
    let r = &report.rows[row];
    [r.h1_sigma, r.h1_u, r.l2_sigma, r.l2_u]
}

const COLUMN_NAMES: [&str; 4] = ["sigma_h1", "u_h1", "sigma_l2", "u_l2"];

/// Worst multiplicative deviation ours/reference over the given rows/columns.
fn worst_factor(report: &ErrorReport, reference: &[[f64; 4]; 4], rows: &[usize]) -> (f64, String) {
    let mut worst = 1.0f64;
    let mut at = String::new();
    for &i in rows {
        let ours = columns(report, i);
        for j in 0..4 {
            let f = (ours[j] / reference[i][j]).max(reference[i][j] / ours[j]);
            if f > worst {
                worst = f;
                at = format!("N={} {}", DEGREES[i], COLUMN_NAMES[j]);
            }
        }
    }
    (worst, at)
}

#[test]
fn criterion_1_case1_table_reproduction() {
    let (r1, _) = studies();
    let (f_all, at_all) = worst_factor(r1, &REF_CASE1, &[0, 1, 2, 3]);
    assert!(
        f_all <= 100.0,
        "column off by {f_all:.2}x at {at_all} (limit 100)"
    );
    let (f_low, at_low) = worst_factor(r1, &REF_CASE1, &[0, 1]);
    assert!(
        f_low <= 3.0,
        "column off by {f_low:.2}x at {at_low} (limit 3 at N in {{4,8}})"
    );
    println!(
        "criterion 1 (case-1 table): PASS — worst factor {f_all:.3} overall ({at_all}), {f_low:.3} at N in {{4,8}} ({at_low})"
    );
}

#[test]
fn criterion_2_case2_table_reproduction() {
    let (_, r2) = studies();
    let (f_all, at_all) = worst_factor(r2, &REF_CASE2, &[0, 1, 2, 3]);
    assert!(
        f_all <= 100.0,
        "column off by {f_all:.2}x at {at_all} (limit 100)"
    );
    let ours = r2.rows[1].l2_sigma;
    let f_named = (ours / REF_CASE2[1][2]).max(REF_CASE2[1][2] / ours);
    assert!(
        f_named <= 3.0,
        "sigma_l2 at N=8 off by {f_named:.2}x (limit 3)"
    );
    println!(
        "criterion 2 (case-2 table): PASS — worst factor {f_all:.3} overall ({at_all}), sigma_l2@8 factor {f_named:.3}"
    );
}

#[test]
fn criterion_3_rate_reproduction() {
    let (r1, r2) = studies();
    let mut worst = 0.0f64;
    for (report, refs) in [(r1, &REF_RATES1), (r2, &REF_RATES2)] {
        for (i, pair) in refs.iter().enumerate() {
            let row = &report.rows[i + 1];
            let ds = (row.rate_sigma.unwrap() - pair[0]).abs();
            let du = (row.rate_u.unwrap() - pair[1]).abs();
            worst = worst.max(ds).max(du);
            assert!(
                ds <= 0.15 && du <= 0.15,
                "case {} N={}: rates ({:.4}, {:.4}) vs ({}, {})",
                report.case,
                row.degree,
                row.rate_sigma.unwrap(),
                row.rate_u.unwrap(),
                pair[0],
                pair[1]
            );
        }
    }
    println!("criterion 3 (rates): PASS — worst |rate - reference| = {worst:.4} (limit 0.15)");
}

#[test]
fn criterion_4_stiffness_diagonality() {
    let report = diagnostics::basis_check(6).unwrap();
    assert!(
        report.stiffness_offdiag <= 1e-10,
        "off-diagonal {} of max diagonal",
        report.stiffness_offdiag
    );
    assert!(
        report.stiffness_diag_dev <= 1e-10,
        "diagonal deviates from 2n+4k+1 by {} relative",
        report.stiffness_diag_dev
    );
    println!(
        "criterion 4 (stiffness diagonality): PASS — off-diag {:.2e} (of max diag), diag dev {:.2e} from 2n+4k+1",
        report.stiffness_offdiag, report.stiffness_diag_dev
    );
}

#[test]
fn criterion_5_orthogonality_suites() {
    // (a) Jacobi discrete orthogonality against h_n
    let mut params = vec![(0.0, 0.0), (0.0, 0.5), (1.0, 1.0)];
    for n in 0..=6 {
        params.push((0.0, n as f64 + 0.5));
    }
    let mut jac_worst = 0.0f64;
    for &(a, b) in &params {
        let p = JacobiParams::new(a, b).unwrap();
        for &m in &[10usize, 25, 40] {
            let rule = QuadratureRule1D::gauss(m, p).unwrap();
            let mut seq = vec![Vec::new(); m];
            for (q, &t) in rule.nodes().iter().enumerate() {
                jacobi::eval_sequence(m - 1, &p, t, &mut seq[q]);
            }
            for i in 0..m {
                for j in i..m {
                    let s: f64 = (0..m)
                        .map(|q| rule.weights()[q] * seq[q][i] * seq[q][j])
                        .sum();
                    let expect = if i == j { jacobi::norm(i, &p) } else { 0.0 };
                    let dev = (s - expect).abs() / jacobi::norm(i, &p).max(jacobi::norm(j, &p));
                    jac_worst = jac_worst.max(dev);
                }
            }
        }
    }
    assert!(jac_worst <= 1e-12, "jacobi orthogonality dev {jac_worst}");

    // (b) spherical-harmonic Gram is the identity for n <= 8
    let grid = AngularGrid::new(10, 20).unwrap();
    let mut sh_idx = Vec::new();
    for n in 0..=8usize {
        for l in 1..=2 * n + 1 {
            sh_idx.push(HarmonicIndex::new(n, l).unwrap());
        }
    }
    let mut samples = vec![vec![0.0; grid.len()]; sh_idx.len()];
    for (a, &idx) in sh_idx.iter().enumerate() {
        for (i, &th) in grid.theta().iter().enumerate() {
            for k in 0..grid.phi_count() {
                samples[a][i * grid.phi_count() + k] =
                    harmonics::eval(idx, SphericalPoint::new(th, grid.phi(k)).unwrap());
            }
        }
    }
    let wp = grid.phi_weight();
    let mut sh_worst = 0.0f64;
    for a in 0..sh_idx.len() {
        for b in a..sh_idx.len() {
            let mut s = 0.0;
            for (i, &wt) in grid.theta_weights().iter().enumerate() {
                for k in 0..grid.phi_count() {
                    let q = i * grid.phi_count() + k;
                    s += wt * wp * samples[a][q] * samples[b][q];
                }
            }
            let expect = if a == b { 1.0 } else { 0.0 };
            sh_worst = sh_worst.max((s - expect).abs());
        }
    }
    assert!(sh_worst <= 1e-12, "harmonic Gram dev {sh_worst}");

    // (c) ball polynomials against h_k^{0,n} = 1/(2n+4k+3) for 2k+n <= 8
    let ball_grid = BallGrid::new(10, 10, 20).unwrap();
    let mut specs = Vec::new();
    for k in 0..=4usize {
        for n in 0..=(8 - 2 * k) {
            for l in 1..=2 * n + 1 {
                specs.push(BallPolySpec::new(BallAlpha::Zero, k, n, l).unwrap());
            }
        }
    }
    let ang = ball_grid.angular();
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    for q in 0..ball_grid.radial_count() {
        for i in 0..ang.theta_count() {
            let w = ball_grid.weight(q, i);
            for k in 0..ang.phi_count() {
                pts.push(ball_grid.point(q, i, k));
                wts.push(w);
            }
        }
    }
    let vals: Vec<Vec<f64>> = specs
        .iter()
        .map(|s| {
            pts.iter()
                .map(|&p| ballbasis::eval_ball(s, p).unwrap())
                .collect()
        })
        .collect();
    let mut ball_worst = 0.0f64;
    for a in 0..specs.len() {
        for b in a..specs.len() {
            let s: f64 = (0..pts.len())
                .map(|q| wts[q] * vals[a][q] * vals[b][q])
                .sum();
            let same = specs[a].k() == specs[b].k()
                && specs[a].n() == specs[b].n()
                && specs[a].l() == specs[b].l();
            let expect = if same {
                1.0 / (2 * specs[a].n() + 4 * specs[a].k() + 3) as f64
            } else {
                0.0
            };
            ball_worst = ball_worst.max((s - expect).abs());
        }
    }
    assert!(ball_worst <= 1e-12, "ball orthogonality dev {ball_worst}");

    println!(
        "criterion 5 (orthogonality suites): PASS — jacobi {jac_worst:.2e}, harmonics {sh_worst:.2e}, ball {ball_worst:.2e}"
    );
}

/// Dense Galerkin oracle: assemble the full gradient and mass Grams by
/// quadrature (finite-difference gradients, no lambda shortcut), solve the
/// two stages densely, compare coefficient vectors.
fn dense_oracle(case: &ManufacturedCase, degree: usize) -> f64 {
    use nalgebra::{DMatrix, DVector};
    let spec = GridSpec::for_degree(degree);
    let grid = spec.build().unwrap();
    let layout = BasisLayout::new(degree).unwrap();
    let indices = layout.indices();
    let dim = layout.dim();

    let ang = grid.angular();
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    for q in 0..grid.radial_count() {
        for i in 0..ang.theta_count() {
            let w = grid.weight(q, i);
            for k in 0..ang.phi_count() {
                pts.push(grid.point(q, i, k));
                wts.push(w);
            }
        }
    }
    let stencil = (degree + 3) | 1;
    let grads: Vec<Vec<[f64; 3]>> = indices
        .iter()
        .map(|&idx| {
            pts.iter()
                .map(|&p| {
                    diagnostics::fd_gradient(
                        &|q| diagnostics::eval_extended(idx, q),
                        p,
                        0.04,
                        stencil,
                    )
                })
                .collect()
        })
        .collect();
    let vals: Vec<Vec<f64>> = indices
        .iter()
        .map(|&idx| {
            pts.iter()
                .map(|&p| diagnostics::eval_extended(idx, p))
                .collect()
        })
        .collect();

    let stiff: DMatrix<f64> = DMatrix::from_fn(dim, dim, |i, j| {
        (0..pts.len())
            .map(|q| {
                let a = grads[i][q];
                let b = grads[j][q];
                wts[q] * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
            })
            .sum()
    });
    let mass: DMatrix<f64> = DMatrix::from_fn(dim, dim, |i, j| {
        (0..pts.len())
            .map(|q| wts[q] * vals[i][q] * vals[j][q])
            .sum()
    });
    let rhs: DVector<f64> = DVector::from_fn(dim, |i, _| {
        (0..pts.len())
            .map(|q| {
                let p = pts[q];
                wts[q] * case.f((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()) * vals[i][q]
            })
            .sum()
    });

    let lu = stiff.lu();
    let sigma_dense = lu.solve(&rhs).expect("dense stage 1");
    let u_dense = lu.solve(&(&mass * &sigma_dense)).expect("dense stage 2");

    let result = solver::solve_biharmonic(case.f_field(), degree, &spec).unwrap();
    let scale = result.sigma_hat.max_abs().max(result.u_hat.max_abs());
    let mut worst = 0.0f64;
    for i in 0..dim {
        worst = worst.max((result.sigma_hat.values()[i] - sigma_dense[i]).abs() / scale);
        worst = worst.max((result.u_hat.values()[i] - u_dense[i]).abs() / scale);
    }
    worst
}

#[test]
fn criterion_6_dense_oracle_equivalence() {
    let mut worst = 0.0f64;
    for id in [CaseId::Case1, CaseId::Case2] {
        let case = manufactured_case(id);
        for degree in [4usize, 6] {
            let dev = dense_oracle(&case, degree);
            assert!(
                dev <= 1e-9,
                "{} at N={degree}: coefficient deviation {dev:.3e}",
                id.name()
            );
            worst = worst.max(dev);
        }
    }
    println!(
        "criterion 6 (dense-oracle equivalence): PASS — worst coefficient deviation {worst:.2e} (limit 1e-9)"
    );
}

#[test]
fn criterion_7_boundary_conditions() {
    let pts = diagnostics::sphere_points(50, 0xb0a7);
    let mut worst = 0.0f64;
    for id in [CaseId::Case1, CaseId::Case2] {
        let case = manufactured_case(id);
        let result =
            solver::solve_biharmonic(case.f_field(), 16, &GridSpec::for_degree(16)).unwrap();
        for hat in [&result.u_hat, &result.sigma_hat] {
            let vals = transform::synthesize(hat, &pts).unwrap();
            for v in vals {
                worst = worst.max(v.abs());
            }
        }
    }
    assert!(worst <= 1e-10, "boundary value {worst:.3e}");
    println!(
        "criterion 7 (boundary conditions): PASS — max |u_N|, |sigma_N| on the sphere {worst:.2e} (limit 1e-10)"
    );
}

#[test]
fn criterion_8_manufactured_data_oracle() {
    // sigma and f closed forms vs finite-difference radial (bi-)Laplacian:
    //   -Delta g = -(g'' + 2 g'/r),  Delta^2 g = g'''' + 4 g'''/r
    let mut state = 0x8eedu64;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let h = 0.02;
    let points = 13;
    let mut worst = 0.0f64;
    for id in [CaseId::Case1, CaseId::Case2] {
        let case = manufactured_case(id);
        let u = |r: f64| case.u(r);
        for _ in 0..50 {
            let r = 0.15 + 0.75 * next();
            let d1 = diagnostics::fd_derivative_1d(&u, r, h, points, 1);
            let d2 = diagnostics::fd_derivative_1d(&u, r, h, points, 2);
            let d3 = diagnostics::fd_derivative_1d(&u, r, h, points, 3);
            let d4 = diagnostics::fd_derivative_1d(&u, r, h, points, 4);
            let sigma_fd = -(d2 + 2.0 * d1 / r);
            let f_fd = d4 + 4.0 * d3 / r;
            let ds = (sigma_fd - case.sigma(r)).abs() / case.sigma(r).abs();
            let df = (f_fd - case.f(r)).abs() / case.f(r).abs();
            assert!(
                ds <= 1e-7 && df <= 1e-7,
                "{} at r={r}: sigma rel {ds:.2e}, f rel {df:.2e}",
                id.name()
            );
            worst = worst.max(ds).max(df);
        }
    }
    println!(
        "criterion 8 (manufactured-data oracle): PASS — worst relative deviation {worst:.2e} (limit 1e-7)"
    );
}

fn time_stage2(degree: usize) -> (usize, f64) {
    let layout = BasisLayout::new(degree).unwrap();
    let op = Stage2Operator::new(&layout);
    let dim = layout.dim();
    let sigma: Vec<f64> = (0..dim)
        .map(|i| (i.wrapping_mul(2654435761) % 1000) as f64 / 500.0 - 1.0)
        .collect();
    let mut out = vec![0.0; dim];
    for _ in 0..16 {
        op.apply(&sigma, &mut out);
    }
    let mut best = f64::INFINITY;
    for _ in 0..5 {
        let mut reps = 64usize;
        let per_apply = loop {
            let t0 = Instant::now();
            for _ in 0..reps {
                op.apply(std::hint::black_box(&sigma), std::hint::black_box(&mut out));
            }
            let dt = t0.elapsed();
            if dt >= Duration::from_millis(40) {
                break dt.as_secs_f64() / reps as f64;
            }
            reps *= 4;
        };
        best = best.min(per_apply);
    }
    (dim, best)
}

#[test]
fn criterion_9_stage2_linear_scaling() {
    // the coefficient-space algebra is a banded multiply plus a diagonal
    // divide; its cost must grow like dim V_N
    let samples: Vec<(usize, f64)> = [16usize, 32, 64].iter().map(|&n| time_stage2(n)).collect();
    let xs: Vec<f64> = samples.iter().map(|s| (s.0 as f64).ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let ym = ys.iter().sum::<f64>() / ys.len() as f64;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum::<f64>()
        / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();
    let detail: Vec<String> = samples
        .iter()
        .map(|(d, t)| format!("dim {d}: {:.2} us", t * 1e6))
        .collect();
    assert!(
        (0.8..=1.3).contains(&slope),
        "fit exponent {slope:.3} outside [0.8, 1.3] ({})",
        detail.join(", ")
    );
    println!(
        "criterion 9 (O(dof) stage-2 algebra): PASS — fit exponent {slope:.3} in [0.8, 1.3] ({})",
        detail.join(", ")
    );
}
