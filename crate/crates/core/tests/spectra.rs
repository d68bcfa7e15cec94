mod common;

use std::f64::consts::PI;

use steklov_core::domain::{boundary_points, clip_ball, DomainSpec};
use steklov_core::mesh::{triangulate, triangulate_domain, MarkedPolygon};
use steklov_core::mixed::{lemma1_check, psi, rayleigh_quotient, solve_mixed, solve_mixed_with};
use steklov_core::oracles::{disk_eigenpair, sloshing_eigenvalue, square_xy, ExactEigenpair, Parity};
use steklov_core::steklov::{assemble_stiffness, cluster_indices, solve_steklov, solve_steklov_with, MassKind};
use steklov_core::Error;

use common::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn disk_spectrum_matches_separation_of_variables() {
    let mesh = triangulate_domain(&DomainSpec::unit_disk(128), 0.1).unwrap();
    for mass in [MassKind::Lumped, MassKind::Consistent] {
        let spec = solve_steklov_with(&mesh, 7, mass).unwrap();
        assert!(spec.eigenvalues[0].abs() < 1e-8);
        for (l, e) in spec.eigenvalues.iter().zip(disk_spectrum(7)).skip(1) {
            assert!(rel(*l, e) < 0.03, "{mass:?}: {l} vs {e}");
        }
        assert!(spec.residuals.iter().all(|r| *r < 1e-8), "{:?}", spec.residuals);
    }
}

#[test]
fn traces_are_mass_orthonormal_and_clustered_in_pairs() {
    let mesh = triangulate_domain(&DomainSpec::unit_disk(128), 0.1).unwrap();
    let spec = solve_steklov(&mesh, 5).unwrap();
    for (i, u) in spec.boundary_traces.iter().enumerate() {
        for (j, v) in spec.boundary_traces.iter().enumerate() {
            let g: f64 = u.iter().zip(v).zip(&spec.mass).map(|((a, b), m)| a * b * m).sum();
            assert!((g - (i == j) as u8 as f64).abs() < 1e-9);
        }
    }
    assert_eq!(spec.clusters(0.05), vec![vec![0], vec![1, 2], vec![3, 4]]);
}

#[test]
fn extensions_are_discrete_harmonic() {
    let mesh = triangulate_domain(&DomainSpec::by_id("l_shape").unwrap(), 0.1).unwrap();
    let spec = solve_steklov(&mesh, 4).unwrap();
    let k = assemble_stiffness(&mesh);
    let on_boundary = mesh.is_boundary_vertex();
    for u in &spec.interior_extensions {
        let ku = k.mul_vec(u);
        for (v, r) in ku.iter().enumerate() {
            if !on_boundary[v] {
                assert!(r.abs() < 1e-10);
            }
        }
    }
}

#[test]
fn eigenvalues_scale_inversely_with_the_domain() {
    let base = DomainSpec::by_id("rectangle").unwrap();
    let a = solve_steklov(&triangulate_domain(&base, 0.1).unwrap(), 5).unwrap();
    let b = solve_steklov(&triangulate_domain(&base.clone().scaled(2.0), 0.2).unwrap(), 5).unwrap();
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues).skip(1) {
        assert!(rel(2.0 * y, *x) < 1e-6, "{x} {y}");
    }
}

#[test]
fn square_has_the_xy_mode() {
    let mesh = triangulate_domain(&DomainSpec::by_id("square").unwrap(), 0.1).unwrap();
    let spec = solve_steklov(&mesh, 8).unwrap();
    let exact: Vec<f64> = spec.boundary_vertices.iter().map(|&v| square_xy().eval(mesh.vertices[v])).collect();
    let best = spec
        .boundary_traces
        .iter()
        .zip(&spec.eigenvalues)
        .map(|(u, l)| (correlation(u, &exact).abs(), *l))
        .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    assert!(best.0 > 0.99 && rel(best.1, 1.0) < 0.02, "{best:?}");
}

#[test]
fn too_many_eigenpairs_is_invalid() {
    let mesh = triangulate_domain(&DomainSpec::by_id("square").unwrap(), 0.5).unwrap();
    assert!(matches!(solve_steklov(&mesh, 10_000), Err(Error::InvalidInput(_))));
}

/// Checks an exact eigenpair numerically: harmonic by the five-point stencil,
/// and `∂u/∂n = λu` on the boundary by a centred difference.
fn check_pair(e: ExactEigenpair, boundary: &[(f64, f64, f64, f64)], interior: &[(f64, f64)]) {
    let d = 1e-4;
    for &(x, y) in interior {
        let f = |a: f64, b: f64| e.eval(p(a, b));
        let lap = (f(x + d, y) + f(x - d, y) + f(x, y + d) + f(x, y - d) - 4.0 * f(x, y)) / (d * d);
        assert!(lap.abs() < 1e-4, "{}: {lap}", e.description());
    }
    for &(x, y, nx, ny) in boundary {
        let dn = (e.eval(p(x + d * nx, y + d * ny)) - e.eval(p(x - d * nx, y - d * ny))) / (2.0 * d);
        assert!((dn - e.lambda() * e.eval(p(x, y))).abs() < 1e-5, "{}", e.description());
    }
}

#[test]
fn closed_form_pairs_satisfy_the_steklov_problem() {
    let interior = [(0.1, 0.2), (-0.3, 0.4), (0.5, -0.1)];
    for n in 1..6 {
        for parity in [Parity::Cos, Parity::Sin] {
            let bd: Vec<_> = (0..7).map(|i| {
                let t = 0.9 * i as f64;
                (t.cos(), t.sin(), t.cos(), t.sin())
            }).collect();
            check_pair(disk_eigenpair(n, parity), &bd, &interior);
        }
    }
    check_pair(square_xy(), &[(1.0, 0.3, 1.0, 0.0), (-0.2, 1.0, 0.0, 1.0), (-1.0, -0.7, -1.0, 0.0)], &interior);
    let tank = ExactEigenpair::Sloshing { length: PI, depth: 2.0, k: 2 };
    check_pair(tank, &[(0.7, 0.0, 0.0, 1.0), (2.1, 0.0, 0.0, 1.0)], &[(1.0, -0.5), (2.0, -1.5)]);
    assert!(rel(sloshing_eigenvalue(PI, PI, 2), sloshing(PI, PI, 2)) < 1e-14);
    assert!(rel(sloshing_eigenvalue(PI, PI, 2), 2.0000139) < 1e-7);
}

#[test]
fn sloshing_tank_matches_the_closed_form() {
    let mesh = triangulate(&MarkedPolygon::sloshing_tank(PI, PI), 0.08).unwrap();
    let spec = solve_mixed(&mesh, 3).unwrap();
    for (k, l) in spec.eigenvalues.iter().enumerate() {
        let e = sloshing(PI, PI, k as u32 + 1);
        assert!(rel(*l, e) < 0.02, "{l} vs {e}");
    }
    assert!(spec.ground_state_sign_ratio() >= -1e-6);
    let cons = solve_mixed_with(&mesh, 1, MassKind::Consistent).unwrap();
    assert!(rel(cons.eigenvalues[0], sloshing(PI, PI, 1)) < 0.02);
}

#[test]
fn mixed_solver_needs_a_dirichlet_part() {
    let mesh = triangulate_domain(&DomainSpec::by_id("square").unwrap(), 0.3).unwrap();
    assert!(matches!(solve_mixed(&mesh, 1), Err(Error::EmptyBoundary(_))));
}

#[test]
fn ground_state_minimizes_the_rayleigh_quotient() {
    let mesh = triangulate(&MarkedPolygon::sloshing_tank(2.0, 1.0), 0.08).unwrap();
    let spec = solve_mixed(&mesh, 2).unwrap();
    let sigma1 = spec.eigenvalues[0];
    assert!(rel(rayleigh_quotient(&mesh, &spec.eigenvectors[0]).unwrap(), sigma1) < 1e-9);
    let trial: Vec<f64> = mesh.vertices.iter().map(|&v| psi(v, p(1.0, 0.0), 1.0)).collect();
    assert!(rayleigh_quotient(&mesh, &trial).unwrap() >= sigma1);
}

#[test]
fn bump_is_clamped_outside_the_ball() {
    assert_eq!(psi(p(2.0, 0.0), p(0.0, 0.0), 1.0), 0.0);
    assert!((psi(p(0.5, 0.0), p(0.0, 0.0), 1.0) - 0.75).abs() < 1e-15);
}

#[test]
fn flat_half_disk_has_sigma_times_s_constant() {
    let spec = DomainSpec::flat_graph();
    let x0 = p(0.0, 0.0);
    let rows: Vec<_> = [0.5, 0.25]
        .iter()
        .map(|&s| lemma1_check(&clip_ball(&spec, x0, s).unwrap(), 0.05 * s).unwrap())
        .collect();
    for r in &rows {
        assert!(r.bound_holds);
        assert!(r.sigma1 <= 15.0 * PI / 16.0 * (1.0 + 5.0 * r.h / r.s) / r.s);
    }
    assert!(rel(rows[0].sigma1_s, rows[1].sigma1_s) < 0.01);
}

#[test]
fn ball_larger_than_the_domain_is_reported() {
    let spec = DomainSpec::by_id("unit_disk").unwrap();
    let x0 = boundary_points(&spec, 64).unwrap()[0].point;
    assert!(matches!(clip_ball(&spec, x0, 2.5), Err(Error::BallCoversDomain { .. })));
}

#[test]
fn cluster_indices_group_near_ties() {
    assert_eq!(cluster_indices(&[0.0, 1.0, 1.0005, 2.0], 1e-3), vec![vec![0], vec![1, 2], vec![3]]);
}
