//! Build a two-shell model by hand, save it as JSON, load it back and look at
//! the stress state inside the outer shell.

use sphscat::fieldeval::{evaluate, von_mises, EvalRequest, Quantity};
use sphscat::{BoundaryCondition, FluidMaterial, IncidentField, Layer, ScattererModel, SolidLayer, SolidMaterial};
use std::f64::consts::PI;

fn main() -> sphscat::Result<()> {
    let water = FluidMaterial::new(1025.0, 1500.0)?;
    let air = FluidMaterial::new(1.2, 340.0)?;
    let aluminium = SolidMaterial::new(2700.0, 7.0e10, 0.33)?;
    let steel = SolidMaterial::new(7850.0, 2.1e11, 0.3)?;
    let model = ScattererModel::new(
        vec![
            Layer::Fluid(water),
            Layer::Solid(SolidLayer::new(aluminium, 2.0, Some(1.96))),
            Layer::Fluid(water),
            Layer::Solid(SolidLayer::new(steel, 0.8, Some(0.78))),
            Layer::Fluid(air),
        ],
        BoundaryCondition::Nnbc,
        "aluminium over steel",
    )?;
    let path = std::env::temp_dir().join("sphscat-custom-model.json");
    std::fs::write(&path, model.to_json())?;
    let model = ScattererModel::from_json(&std::fs::read_to_string(&path)?)?;
    println!(
        "{} written to {}, frequency bound {:.0} Hz",
        model.description(),
        path.display(),
        model.frequency_bound()
    );

    let inc = IncidentField::plane_wave(PI / 3.0, 0.0);
    let omega = 2.0 * PI * 2000.0;
    let pts: Vec<[f64; 3]> =
        (0..=8).map(|i| PI * i as f64 / 8.0).map(|t| [1.98 * t.sin(), 0.0, 1.98 * t.cos()]).collect();
    let s = evaluate(&model, &inc, omega, &EvalRequest::new(pts, &[Quantity::Stress, Quantity::Displacement]))?;
    for v in &s {
        let stress = v.stress.unwrap();
        let re = stress.map(|row| row.map(|c| c.re));
        let u = v.displacement.unwrap();
        println!(
            "x = ({:6.3}, {:6.3})  |u| = {:.3e} m  von Mises (Re) = {:.3e} Pa",
            v.point[0],
            v.point[2],
            u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            von_mises(&re)
        );
    }
    Ok(())
}
