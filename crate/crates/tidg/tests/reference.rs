use tidg::verify::{isotropic_reference_matrix, mixed_boundary_mesh, relative_difference};
use tidg_core::assembly::{dg_bilinear_matrix, Method, MethodConfig};
use tidg_core::femspace::{FunctionSpace, SpaceKind};
use tidg_core::material::{FiberDirection, MaterialParams};
use tidg_core::mesh::cook_mesh;

#[test]
fn reference_matches_on_a_distorted_mesh() {
    let mesh = tidg::verify::clamped_square(3).unwrap();
    let cook = cook_mesh(3).unwrap();
    for mesh in [&mesh, &cook] {
        let space = FunctionSpace::new(SpaceKind::Dg1, mesh);
        let params = MaterialParams::isotropic(7.0, 2.5);
        for method in Method::DG {
            let config = MethodConfig::new(method);
            let a = dg_bilinear_matrix(&space, &params, &FiberDirection::from_angle(0.9), &config).unwrap();
            let r = isotropic_reference_matrix(&space, params.lambda, params.mu_t, &config);
            assert!(relative_difference(&a, &r) <= 1e-13, "{method:?}");
        }
    }
}

#[test]
fn reference_detects_a_wrong_adjoint_weight() {
    let mesh = mixed_boundary_mesh().unwrap();
    let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
    let params = MaterialParams::isotropic(2.0, 1.0);
    let fiber = FiberDirection::from_angle(0.0);
    let a = dg_bilinear_matrix(&space, &params, &fiber, &MethodConfig::new(Method::Sipg)).unwrap();
    let r = isotropic_reference_matrix(&space, params.lambda, params.mu_t, &MethodConfig::new(Method::Iipg));
    assert!(relative_difference(&a, &r) > 1e-3);
}

#[test]
fn reference_detects_anisotropy() {
    let mesh = mixed_boundary_mesh().unwrap();
    let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
    let params = MaterialParams::new(2.0, 1.0, 1.0, 0.0, 0.5);
    let config = MethodConfig::new(Method::Nipg);
    let a = dg_bilinear_matrix(&space, &params, &FiberDirection::from_angle(0.4), &config).unwrap();
    let r = isotropic_reference_matrix(&space, params.lambda, params.mu_t, &config);
    assert!(relative_difference(&a, &r) > 1e-3);
}
