//! Agreement between independent routes to the same quantity.

use std::f64::consts::{FRAC_PI_2, PI};

use nematic_core::harmonic::{self, StateKind};
use nematic_core::ldg::{self, LdgParams};
use nematic_core::of_strong::{self, ElasticParams};
use nematic_core::of_weak::{self, AnchoringParams};
use nematic_core::pde::{self, BoundaryCondition, DirectorField, PolarGrid, SolveOptions};

/// The 2D solver started off the radial state lands on the spiral built
/// from the 1D first integral, with second-order grid convergence.
#[test]
fn pde_branch_is_the_spiral() {
    let (b, delta) = (0.2, 0.85);
    let spiral = of_strong::spiral_solve(delta, b).unwrap();
    let energy =
        of_strong::spiral_energy(&spiral, &ElasticParams::new(delta, 1.0).unwrap()).unwrap();
    let errors: Vec<(f64, f64)> = [81, 161]
        .iter()
        .map(|&nr| {
            let grid = PolarGrid::annulus(b, nr, 16).unwrap();
            let init = DirectorField::from_fn(grid, BoundaryCondition::Dirichlet, |r, phi| {
                phi + FRAC_PI_2 + 0.05 * (PI * r.ln() / b.ln()).sin()
            })
            .unwrap();
            let (field, report) = pde::solve_el(
                &init,
                delta,
                &SolveOptions {
                    tol: 1e-10,
                    max_iter: 400,
                },
            )
            .unwrap();
            assert!(report.converged);
            let e = pde::discrete_energy(&field, delta).unwrap();
            (
                (field.deviation_from_defect_free() - spiral.u0).abs(),
                (e - energy).abs(),
            )
        })
        .collect();
    assert!(errors[1].0 < 1e-4 && errors[1].1 < 5e-5, "{errors:?}");
    assert!(
        errors[0].0 / errors[1].0 > 3.0 && errors[0].1 / errors[1].1 > 3.0,
        "{errors:?}"
    );
    let radial = of_strong::defect_free_energy(
        &of_strong::AnnulusGeometry::new(b).unwrap(),
        &ElasticParams::new(delta, 1.0).unwrap(),
    );
    assert!(energy < radial);
}

#[test]
fn strong_anchoring_is_the_weak_limit() {
    for b in [0.2, 0.5, 0.8] {
        let d = of_weak::delta_weak(1e8, b, 0).unwrap();
        assert!((d - of_strong::delta_n(b, 1)).abs() < 1e-6, "b = {b}: {d}");
        let lo = of_weak::delta_weak(0.5, b, 0).unwrap();
        assert!(lo < d);
    }
}

/// The discrete Hessian about θ* under weak anchoring loses positivity in
/// the axisymmetric sector exactly where the compatibility root says.
#[test]
fn weak_probe_sign_change_at_root() {
    let (alpha, b) = (2.0, 0.4);
    let root = of_weak::delta_weak(alpha, b, 0).unwrap();
    let grid = PolarGrid::annulus(b, 161, 16).unwrap();
    let base = DirectorField::defect_free(
        grid,
        BoundaryCondition::Weak(AnchoringParams::tangent(alpha).unwrap()),
    )
    .unwrap();
    let below = pde::stability_probe(&base, root - 0.01, 0).unwrap();
    let above = pde::stability_probe(&base, root + 0.01, 0).unwrap();
    assert!(below > 0.0 && above < 0.0, "{below} {above}");
}

/// Beyond the crossover the diagonal state stays below U2.
#[test]
fn crossover_is_persistent() {
    for b in [0.3, 0.5, 0.7] {
        let n0 = harmonic::crossover_n(b, 400)
            .unwrap()
            .expect("crossover below N = 400");
        for n in (n0..n0 + 20).step_by(2) {
            let d = harmonic::normalized_energy(StateKind::D, n, b).unwrap();
            let u2 = harmonic::normalized_energy(StateKind::U2, n, b).unwrap();
            assert!(d < u2, "b = {b}, N = {n}");
        }
    }
}

/// Above the sufficient threshold the `L_0` minimum stays positive and the
/// profile satisfies the qualitative bounds on the same grid.
#[test]
fn ldg_threshold_and_propositions_agree() {
    for b in [0.3, 0.6] {
        let params = LdgParams::new(1.1 * ldg::stability_threshold(b)).unwrap();
        let s = ldg::solve_s(b, params, 401).unwrap();
        assert!(ldg::min_eig_ln_for(0, &s).unwrap() > 0.0);
        let report = ldg::check_propositions(b, params, 401).unwrap();
        assert!(report.golovaty_bound && report.u_below_s && report.u_monotone);
        assert_eq!(report.s_min, s.minimum().1);
    }
}
