use std::f64::consts::PI;

use tidg_core::assembly::{check_coercivity_params, numeric_coercivity, CoercivityEstimate, Method, MethodConfig, StabilizationParams};
use tidg_core::bench::{material_from, DEFAULT_NU};
use tidg_core::femspace::{FunctionSpace, SpaceKind};
use tidg_core::material::{EngineeringConstants, FiberDirection, MaterialParams};
use tidg_core::mesh::{classify_edges, rect_mesh, Components, Mesh};
use tidg_core::Error;

fn clamped_square(n: usize) -> Mesh {
    let mesh = rect_mesh(1.0, 1.0, n, n, 0.0).unwrap();
    classify_edges(mesh, |a, b| (a[0] == 0.0 && b[0] == 0.0).then_some(Components::Both), |a, b| !(a[0] == 0.0 && b[0] == 0.0))
        .unwrap()
}

#[test]
fn positive_over_material_grid() {
    let mesh = clamped_square(3);
    assert!(mesh.num_triangles() <= 128);
    let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
    for (p, nu) in [1.0, 3.0, 1e4].into_iter().flat_map(|p| [(p, 0.3), (p, DEFAULT_NU)]) {
        let params = material_from(&EngineeringConstants::equal_poisson(1.0, p, nu)).unwrap();
        for angle in [0.0, PI / 8.0, PI / 3.0, PI / 2.0, 5.0 * PI / 6.0] {
            let fiber = FiberDirection::from_angle(angle);
            let nipg = MethodConfig { stab: StabilizationParams::uniform(10.0), ..MethodConfig::new(Method::Nipg) };
            for config in [nipg, MethodConfig::new(Method::Sipg), MethodConfig::new(Method::Iipg)] {
                let k = numeric_coercivity(&space, &params, &fiber, &config, CoercivityEstimate::Eigen).unwrap();
                assert!(k > 0.0, "{} p={p} nu={nu} angle={angle}: {k}", config.label());
            }
        }
    }
}

#[test]
fn isotropic_nipg_lower_bound() {
    let mesh = clamped_square(2);
    let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
    let params = MaterialParams::isotropic(1.0, 1.0);
    let fiber = FiberDirection::from_angle(0.3);
    let config = MethodConfig { stab: StabilizationParams::uniform(10.0), ..MethodConfig::new(Method::Nipg) };
    let k = numeric_coercivity(&space, &params, &fiber, &config, CoercivityEstimate::Eigen).unwrap();
    let sampled =
        numeric_coercivity(&space, &params, &fiber, &config, CoercivityEstimate::Sampled { samples: 200, seed: 7 }).unwrap();
    assert!(k > 0.0);
    assert!(sampled >= k * (1.0 - 1e-9));
}

#[test]
fn weak_symmetric_penalty_is_detected() {
    let mesh = clamped_square(2);
    let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
    let params = MaterialParams::isotropic(1.0, 1.0);
    let fiber = FiberDirection::from_angle(0.0);
    let config = MethodConfig { stab: StabilizationParams::uniform(1e-3), ..MethodConfig::new(Method::Sipg) };
    let result = numeric_coercivity(&space, &params, &fiber, &config, CoercivityEstimate::Eigen);
    assert!(matches!(result, Err(Error::NonPositive { .. })), "{result:?}");
    assert!(!check_coercivity_params(&config, &params, 10.0).full_sufficient);
}

#[test]
fn ui_sufficient_condition_is_advisory() {
    let params = material_from(&EngineeringConstants::equal_poisson(1.0, 1e4, DEFAULT_NU)).unwrap();
    let report = check_coercivity_params(&MethodConfig::under_integrated(Method::Sipg), &params, 10.0);
    assert!(report.full_sufficient);
    assert_eq!(report.ui_sufficient, Some(false));
    assert!(!report.admissible());
}

#[test]
fn negative_penalty_is_rejected() {
    let mesh = clamped_square(1);
    let space = FunctionSpace::new(SpaceKind::Dg1, &mesh);
    let params = MaterialParams::isotropic(1.0, 1.0);
    let fiber = FiberDirection::from_angle(0.0);
    let mut config = MethodConfig::new(Method::Sipg);
    config.stab.k_beta = -1.0;
    let result = numeric_coercivity(&space, &params, &fiber, &config, CoercivityEstimate::Eigen);
    assert!(matches!(result, Err(Error::InvalidStabilization { .. })), "{result:?}");
}
