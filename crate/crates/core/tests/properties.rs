use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use sphscat::farfield::{farfield_pattern, target_strength};
use sphscat::fieldeval::{evaluate, EvalRequest, Quantity};
use sphscat::incident::{point_source_coeffs, wavelet_spectrum};
use sphscat::io::{fmt_f64, read_binary, write_binary};
use sphscat::timesynth::{synthesize, SynthesisPlan};
use sphscat::{presets, BoundaryCondition, FluidMaterial, Layer, ScattererModel, SolidLayer, SolidMaterial};

type C = Complex64;

fn bc_strategy() -> impl Strategy<Value = BoundaryCondition> {
    prop::sample::select(BoundaryCondition::ALL.to_vec())
}

/// A valid layered model with up to three shells.
fn model_strategy() -> impl Strategy<Value = ScattererModel> {
    (1usize..=3, bc_strategy(), prop::collection::vec((0.05f64..0.95, 0.05f64..0.95), 3), 0.5f64..10.0).prop_map(
        |(m, bc, fr, r0)| {
            let mut layers = vec![Layer::Fluid(FluidMaterial { density: 1000.0, sound_speed: 1500.0 })];
            let steel = SolidMaterial { density: 7850.0, youngs_modulus: 2.1e11, poisson_ratio: 0.3 };
            let mut outer = r0;
            for (i, (a, b)) in fr.iter().take(m).enumerate() {
                let last = i + 1 == m;
                let inner = outer * (1.0 - 0.5 * a);
                let inner_r = if last && bc == BoundaryCondition::Esbc { None } else { Some(inner) };
                layers.push(Layer::Solid(SolidLayer::new(steel, outer, inner_r)));
                if !last || bc == BoundaryCondition::Nnbc {
                    layers.push(Layer::Fluid(FluidMaterial {
                        density: 1.2 + 1000.0 * b,
                        sound_speed: 340.0 + 1000.0 * b,
                    }));
                }
                outer = inner * (1.0 - 0.5 * b);
            }
            ScattererModel::new(layers, bc, "random").unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn model_json_roundtrip(m in model_strategy()) {
        let back = ScattererModel::from_json(&m.to_json()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn fields_are_linear_in_amplitude(
        name in prop::sample::select(vec!["s1", "s13", "fender"]),
        bc in bc_strategy(),
        frac in 0.05f64..0.6,
        mag in 1e-3f64..1e4,
        phase in -PI..PI,
    ) {
        let p = presets::by_name(name, Some(bc)).unwrap();
        let omega = 2.0 * PI * frac * p.model.frequency_bound();
        let a = C::from_polar(mag, phase);
        let pts = vec![[0.0, 0.0, 1.5 * p.model.outer_radius()], [0.3, 0.2, -0.97 * p.model.outer_radius()]];
        let q = [Quantity::TotalPressure, Quantity::Displacement, Quantity::Stress];
        let base = evaluate(&p.model, &p.incident, omega, &EvalRequest::new(pts.clone(), &q).fixed_modes(60)).unwrap();
        let inc2 = p.incident.with_amplitude(a);
        let scaled = evaluate(&p.model, &inc2, omega, &EvalRequest::new(pts, &q).fixed_modes(60)).unwrap();
        for (u, v) in base.iter().zip(&scaled) {
            if let (Some(x), Some(y)) = (u.total_pressure, v.total_pressure) {
                prop_assert!((x * a - y).norm() <= 1e-12 * y.norm().max(1e-300));
            }
            if let (Some(x), Some(y)) = (u.stress, v.stress) {
                let scale = y.iter().flatten().fold(0.0f64, |m, s| m.max(s.norm()));
                for (r, s) in x.iter().flatten().zip(y.iter().flatten()) {
                    prop_assert!((r * a - s).norm() <= 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn target_strength_ignores_amplitude(
        frac in 0.01f64..0.9,
        mag in 1e-6f64..1e6,
        phase in -PI..PI,
        bc in bc_strategy(),
    ) {
        let p = presets::by_name("s3", Some(bc)).unwrap();
        let omega = 2.0 * PI * frac * p.model.frequency_bound();
        let angles: Vec<(f64, f64)> = (0..13).map(|i| (PI * i as f64 / 12.0, 0.3)).collect();
        let inc2 = p.incident.with_amplitude(C::from_polar(mag, phase));
        let a = farfield_pattern(&p.model, &p.incident, omega, &angles, f64::EPSILON).unwrap();
        let b = farfield_pattern(&p.model, &inc2, omega, &angles, f64::EPSILON).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let (t1, t2) = (target_strength(x.value, p.incident.amplitude), target_strength(y.value, inc2.amplitude));
            prop_assert!((t1 - t2).abs() < 1e-12, "{} vs {}", t1, t2);
        }
    }

    #[test]
    fn csv_numbers_roundtrip(bits in any::<u64>()) {
        let v = f64::from_bits(bits);
        let s = fmt_f64(v);
        let back: f64 = s.parse().unwrap();
        if v.is_nan() {
            prop_assert!(back.is_nan());
        } else {
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn binary_dump_roundtrip(rows in 0usize..6, cols in 1usize..5, seed in any::<u64>()) {
        let data: Vec<f64> = (0..rows * cols).map(|i| f64::from_bits(seed.rotate_left(i as u32) >> 2)).collect();
        let path = std::env::temp_dir().join(format!("sphscat-prop-{}-{seed}.bin", std::process::id()));
        write_binary(&path, rows, cols, &data).unwrap();
        let (r, c, back) = read_binary(&path).unwrap();
        std::fs::remove_file(&path).ok();
        prop_assert_eq!((r, c), (rows, cols));
        prop_assert_eq!(back.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), data.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn parseval_and_periodicity(
        log_n in 2u32..10,
        period in 1e-3f64..10.0,
        seed in any::<u64>(),
    ) {
        let plan = SynthesisPlan::new(period, 1 << log_n).unwrap();
        let mut s = seed | 1;
        let mut rnd = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let spec: Vec<C> = (0..plan.frequency_count()).map(|_| C::new(rnd(), rnd())).collect();
        let x = synthesize(&spec, &plan).unwrap();
        prop_assert_eq!(x.len(), plan.samples);
        // Σ x_m² = (2/T)² · Ň/2 · Σ |Ψ_n|²
        let lhs: f64 = x.iter().map(|v| v * v).sum();
        let rhs = (2.0 / period).powi(2) * plan.samples as f64 / 2.0 * spec.iter().map(|v| v.norm_sqr()).sum::<f64>();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-300), "{} vs {}", lhs, rhs);
        // the series is periodic: the sample at t_Ň equals the one at t_0
        let t_end: C = spec.iter().enumerate().map(|(i, v)| v * C::new(0.0, -2.0 * PI * (i + 1) as f64).exp()).sum();
        let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!((2.0 / period * t_end.re - x[0]).abs() <= 1e-12 * peak.max(1e-300));
    }

    #[test]
    // the true slope alone moves the value by about 2π·rel, so rel stays below 1e-7
    fn wavelet_spectrum_is_continuous_near_special_points(fc in 10.0f64..1e5, m in 1usize..3, rel in 1e-13f64..1e-7) {
        let wc = 2.0 * PI * fc;
        let w0 = m as f64 * wc;
        let exact = wavelet_spectrum(w0, fc);
        for w in [w0 + rel * wc, (w0 - rel * wc).abs()] {
            let near = wavelet_spectrum(w, fc);
            prop_assert!((near - exact).norm() < 1e-6 * exact.norm(), "{} vs {}", near, exact);
        }
    }

    #[test]
    fn point_source_coefficients_approach_plane_wave(n in 0usize..20, kr in 0.5f64..20.0) {
        let (k, r) = (kr, 1.0);
        let rs = 1e7;
        let one = C::new(1.0, 0.0);
        let (a, b) = point_source_coeffs(n, k, r, rs, one, 1e-12).unwrap();
        let (pa, pb) = sphscat::incident::plane_wave_coeffs(n, k, r, one).unwrap();
        let ph = C::new(0.0, -k * rs).exp();
        prop_assert!((a * ph - pa).norm() <= 1e-4 * pa.norm() + 1e-10);
        prop_assert!((b * ph - pb).norm() <= 1e-4 * pb.norm() + 1e-10);
    }
}
