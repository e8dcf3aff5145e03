mod common;

use common::rigid;
use sphscat::fieldeval::{evaluate, EvalRequest, Quantity};
use sphscat::modal::{modal_sweep, Unknown};
use sphscat::{presets, BoundaryCondition, IncidentField};
use std::f64::consts::PI;

#[test]
fn exterior_coefficients_match_single_equation() {
    let model = presets::s5(Some(BoundaryCondition::Shbc)).unwrap();
    let a = model.outer_radius();
    for ka in [1.0, 5.0, 15.0] {
        let omega = ka / a * model.exterior().sound_speed;
        let sweep = modal_sweep(&model, &IncidentField::along_z(), omega).unwrap();
        for (n, sol) in sweep.take(61).enumerate() {
            let sol = sol.unwrap();
            assert_eq!(sol.unknowns, vec![Unknown::Exterior]);
            let got = sol.get(Unknown::Exterior);
            let want = rigid::coefficient(n, ka);
            assert!((got - want).norm() <= 1e-12 * want.norm(), "kR={ka} n={n}: {got} vs {want}");
        }
    }
}

#[test]
fn oblique_incidence_is_a_rotation() {
    let model = presets::s5(Some(BoundaryCondition::Shbc)).unwrap();
    let a = model.outer_radius();
    let k = 3.0 / a;
    let omega = k * model.exterior().sound_speed;
    let inc = IncidentField::plane_wave(1.1, -0.7);
    let d = inc.direction();
    let pts: Vec<[f64; 3]> = (0..12)
        .map(|i| {
            let t = PI * (i as f64 + 0.3) / 12.0;
            let p = 0.5 * i as f64;
            let r = a * (1.0 + 0.2 * i as f64);
            [r * t.sin() * p.cos(), r * t.sin() * p.sin(), r * t.cos()]
        })
        .collect();
    let got = evaluate(&model, &inc, omega, &EvalRequest::new(pts.clone(), &[Quantity::TotalPressure])).unwrap();
    for (x, s) in pts.iter().zip(&got) {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let cos_g = (x[0] * d[0] + x[1] * d[1] + x[2] * d[2]) / r;
        let g = cos_g.clamp(-1.0, 1.0).acos();
        let y = [r * g.sin(), 0.0, r * g.cos()];
        let z =
            evaluate(&model, &IncidentField::along_z(), omega, &EvalRequest::new(vec![y], &[Quantity::TotalPressure]))
                .unwrap();
        let (p, q) = (s.total_pressure.unwrap(), z[0].total_pressure.unwrap());
        assert!((p - q).norm() < 1e-10 * q.norm().max(1e-3), "{x:?}: {p} vs {q}");
    }
}

#[test]
fn surface_pressure_under_oblique_incidence() {
    let model = presets::s5(Some(BoundaryCondition::Shbc)).unwrap();
    let a = model.outer_radius();
    let k = 2.0 / a;
    let omega = k * model.exterior().sound_speed;
    let inc = IncidentField::plane_wave(2.0, 0.4);
    let d = inc.direction();
    let pts: Vec<[f64; 3]> = (0..20)
        .map(|i| {
            let (t, p) = (PI * (i as f64 + 0.5) / 20.0, 0.9 * i as f64);
            [a * t.sin() * p.cos(), a * t.sin() * p.sin(), a * t.cos()]
        })
        .collect();
    let got = evaluate(&model, &inc, omega, &EvalRequest::new(pts.clone(), &[Quantity::TotalPressure])).unwrap();
    for (x, s) in pts.iter().zip(&got) {
        let g = ((x[0] * d[0] + x[1] * d[1] + x[2] * d[2]) / a).clamp(-1.0, 1.0).acos();
        let want = rigid::surface(k, a, g);
        assert!((s.total_pressure.unwrap() - want).norm() < 1e-10 * want.norm());
    }
}
