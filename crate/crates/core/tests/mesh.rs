use steklov_core::domain::{boundary_points, clip_ball, DomainSpec};
use steklov_core::mesh::{triangulate, triangulate_domain, triangulate_region, Mark, MarkedPolygon, PlanarMesh};

#[test]
fn catalog_meshes_are_valid_and_cover_the_area() {
    for spec in DomainSpec::catalog() {
        let mesh = triangulate_domain(&spec, 0.1).unwrap();
        mesh.validate().unwrap();
        let q = mesh.quality();
        assert!(q.min_angle_deg >= 20.0, "{}: {q:?}", spec.id);
        assert!(q.max_circumradius <= 3.0 * 0.1, "{}: {q:?}", spec.id);
        let rel = (mesh.area() - spec.area()).abs() / spec.area();
        assert!(rel < 1e-9, "{}: area {} vs {}", spec.id, mesh.area(), spec.area());
        assert!(!mesh.has_mark(Mark::Dirichlet));
    }
}

#[test]
fn boundary_loop_matches_domain_perimeter() {
    let spec = DomainSpec::by_id("l_shape").unwrap();
    let mesh = triangulate_domain(&spec, 0.05).unwrap();
    let loop_len = steklov_core::geom::perimeter(&mesh.boundary_polygon());
    assert!((loop_len - spec.perimeter()).abs() < 1e-9);
}

#[test]
fn edge_length_shrinks_with_h() {
    let spec = DomainSpec::by_id("square").unwrap();
    let coarse = triangulate_domain(&spec, 0.2).unwrap();
    let fine = triangulate_domain(&spec, 0.05).unwrap();
    assert!(fine.n_vertices() > 8 * coarse.n_vertices());
    assert!(fine.quality().max_edge < coarse.quality().max_edge);
}

#[test]
fn refinement_keeps_curved_boundary_on_the_circle() {
    let mesh = triangulate_domain(&DomainSpec::by_id("unit_disk").unwrap(), 0.2).unwrap();
    let fine = mesh.refine();
    fine.validate().unwrap();
    assert_eq!(fine.n_triangles(), 4 * mesh.n_triangles());
    for v in fine.boundary_vertices() {
        let r = fine.vertices[v].norm();
        assert!((r - 1.0).abs() < 1e-3, "{r}");
    }
}

#[test]
fn text_format_round_trips() {
    let mesh = triangulate(&MarkedPolygon::sloshing_tank(2.0, 1.0), 0.2).unwrap();
    let back = PlanarMesh::from_text(&mesh.to_text()).unwrap();
    assert_eq!(back.vertices, mesh.vertices);
    assert_eq!(back.triangles, mesh.triangles);
    assert_eq!(back.boundary_edges.len(), mesh.boundary_edges.len());
    assert_eq!(back.vertices_with_mark(Mark::Dirichlet), mesh.vertices_with_mark(Mark::Dirichlet));
}

#[test]
fn malformed_text_is_rejected() {
    assert!(PlanarMesh::from_text("not a mesh").is_err());
}

#[test]
fn sloshing_tank_marks_only_the_surface_steklov() {
    let mesh = triangulate(&MarkedPolygon::sloshing_tank(3.0, 1.0), 0.1).unwrap();
    for e in &mesh.boundary_edges {
        let (a, b) = (mesh.vertices[e.a], mesh.vertices[e.b]);
        let on_surface = a.y.abs() < 1e-12 && b.y.abs() < 1e-12;
        assert_eq!(e.mark == Mark::Steklov, on_surface);
    }
}

#[test]
fn ball_region_mesh_has_both_marks_inside_the_ball() {
    let spec = DomainSpec::by_id("square").unwrap();
    let x0 = boundary_points(&spec, 64).unwrap()[5].point;
    let region = clip_ball(&spec, x0, 0.3).unwrap();
    let mesh = triangulate_region(&region, 0.02).unwrap();
    mesh.validate().unwrap();
    assert!(mesh.has_mark(Mark::Steklov) && mesh.has_mark(Mark::Dirichlet));
    for v in &mesh.vertices {
        assert!(v.dist(x0) <= 0.3 + 1e-9);
    }
    assert!((mesh.area() - region.area()).abs() / region.area() < 0.01);
}
