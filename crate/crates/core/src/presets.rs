//! Built-in benchmark models.
//!
//! Every constructor takes an optional boundary-condition override. SHBC and
//! SSBC drop the innermost fill; ESBC also makes the innermost shell solid
//! down to the origin.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::incident::IncidentField;
use crate::media::{
    elastic_from_speeds, BoundaryCondition, FluidMaterial, Layer, ScattererModel, SolidLayer, SolidMaterial,
};

pub const NAMES: [&str; 10] = ["chang", "ihlenburg", "fender", "s1", "s3", "s5", "s13", "s15", "s35", "s135"];

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: String,
    pub model: ScattererModel,
    pub incident: IncidentField,
}

impl Preset {
    /// Default sweep band in Hz: from 1% of the frequency bound up to the bound.
    pub fn band(&self) -> (f64, f64) {
        let f = self.model.frequency_bound();
        (0.01 * f, f)
    }
}

struct Shell {
    outer: f64,
    inner: f64,
    fill: FluidMaterial,
}

fn water() -> FluidMaterial {
    FluidMaterial { density: 1000.0, sound_speed: 1500.0 }
}

fn air() -> FluidMaterial {
    FluidMaterial { density: 1.2, sound_speed: 340.0 }
}

fn steel() -> SolidMaterial {
    SolidMaterial { density: 7850.0, youngs_modulus: 2.1e11, poisson_ratio: 0.3 }
}

fn build(
    exterior: FluidMaterial,
    material: SolidMaterial,
    shells: &[Shell],
    bc: BoundaryCondition,
    description: &str,
) -> Result<ScattererModel> {
    let mut layers = vec![Layer::Fluid(exterior)];
    for (i, s) in shells.iter().enumerate() {
        let last = i + 1 == shells.len();
        let inner = if last && bc == BoundaryCondition::Esbc { None } else { Some(s.inner) };
        layers.push(Layer::Solid(SolidLayer::new(material, s.outer, inner)));
        if !last || bc == BoundaryCondition::Nnbc {
            layers.push(Layer::Fluid(s.fill));
        }
    }
    ScattererModel::new(layers, bc, description)
}

fn s_shell(outer: f64) -> Shell {
    match outer as i32 {
        1 => Shell { outer: 1.0, inner: 0.95, fill: air() },
        3 => Shell { outer: 3.0, inner: 2.98, fill: air() },
        _ => Shell { outer: 5.0, inner: 4.992, fill: water() },
    }
}

fn s_family(outers: &[f64], bc: Option<BoundaryCondition>, name: &str) -> Result<ScattererModel> {
    let shells: Vec<Shell> = outers.iter().map(|&r| s_shell(r)).collect();
    build(water(), steel(), &shells, bc.unwrap_or(BoundaryCondition::Nnbc), name)
}

pub fn chang(bc: Option<BoundaryCondition>) -> Result<ScattererModel> {
    let water = FluidMaterial { density: 1000.0, sound_speed: 1460.0 };
    let mat = SolidMaterial { density: 7800.0, youngs_modulus: 2.0e11, poisson_ratio: 0.3 };
    let shell = Shell { outer: 1.005, inner: 0.995, fill: water };
    build(water, mat, &[shell], bc.unwrap_or(BoundaryCondition::Ssbc), "Chang")
}

pub fn ihlenburg(bc: Option<BoundaryCondition>) -> Result<ScattererModel> {
    let water = FluidMaterial { density: 1000.0, sound_speed: 1524.0 };
    let mat = SolidMaterial { density: 7669.0, youngs_modulus: 2.07e11, poisson_ratio: 0.3 };
    let shell = Shell { outer: 5.075, inner: 4.925, fill: water };
    build(water, mat, &[shell], bc.unwrap_or(BoundaryCondition::Ssbc), "Ihlenburg")
}

pub fn fender(bc: Option<BoundaryCondition>) -> Result<ScattererModel> {
    let water = FluidMaterial { density: 1026.0, sound_speed: 1500.0 };
    let air = FluidMaterial { density: 1.21, sound_speed: 343.0 };
    let mat = elastic_from_speeds(6412.0, 3043.0, 2700.0)?;
    let shell = Shell { outer: 1.0, inner: 0.95, fill: air };
    build(water, mat, &[shell], bc.unwrap_or(BoundaryCondition::Nnbc), "Fender")
}

pub fn s1(bc: Option<BoundaryCondition>) -> Result<ScattererModel> {
    s_family(&[1.0], bc, "S1")
}

pub fn s3(bc: Option<BoundaryCondition>) -> Result<ScattererModel> {
    s_family(&[3.0], bc, "S3")
}

pub fn s5(bc: Option<BoundaryCondition>) -> Result<ScattererModel> {
    s_family(&[5.0], bc, "S5")
}

pub fn s13(bc: Option<BoundaryCondition>) -> Result<ScattererModel> {
    s_family(&[3.0, 1.0], bc, "S13")
}

pub fn s15(bc: Option<BoundaryCondition>) -> Result<ScattererModel> {
    s_family(&[5.0, 1.0], bc, "S15")
}

pub fn s35(bc: Option<BoundaryCondition>) -> Result<ScattererModel> {
    s_family(&[5.0, 3.0], bc, "S35")
}

pub fn s135(bc: Option<BoundaryCondition>) -> Result<ScattererModel> {
    s_family(&[5.0, 3.0, 1.0], bc, "S135")
}

/// Model plus the incident wave the benchmark uses.
pub fn by_name(name: &str, bc: Option<BoundaryCondition>) -> Result<Preset> {
    let key = name.to_ascii_lowercase();
    let model = match key.as_str() {
        "chang" => chang(bc)?,
        "ihlenburg" => ihlenburg(bc)?,
        "fender" => fender(bc)?,
        "s1" => s1(bc)?,
        "s3" => s3(bc)?,
        "s5" => s5(bc)?,
        "s13" => s13(bc)?,
        "s15" => s15(bc)?,
        "s35" => s35(bc)?,
        "s135" => s135(bc)?,
        _ => return Err(Error::Config(format!("unknown preset '{name}', expected one of {NAMES:?}"))),
    };
    // Fender's wave travels along -x3, the others along +x3.
    let incident =
        if key == "fender" { IncidentField::plane_wave(0.0, 0.0) } else { IncidentField::plane_wave(PI, 0.0) };
    Ok(Preset { name: key, model, incident })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_build_with_every_condition() {
        for name in NAMES {
            for bc in BoundaryCondition::ALL {
                let p = by_name(name, Some(bc)).unwrap();
                assert_eq!(p.model.innermost_condition(), bc);
                assert_eq!(p.model.core().is_some(), bc == BoundaryCondition::Nnbc);
            }
        }
    }

    #[test]
    fn tables_reproduced() {
        let c = chang(None).unwrap();
        assert_eq!(c.innermost_condition(), BoundaryCondition::Ssbc);
        let s = c.shells()[0];
        assert_eq!((s.outer_radius, s.inner_radius), (1.005, Some(0.995)));
        assert_eq!((s.youngs_modulus, s.poisson_ratio, s.density), (2.0e11, 0.3, 7800.0));
        assert_eq!(c.exterior().sound_speed, 1460.0);

        let i = ihlenburg(Some(BoundaryCondition::Nnbc)).unwrap();
        assert_eq!(i.core().unwrap().sound_speed, 1524.0);
        assert_eq!(i.shells()[0].density, 7669.0);

        let f = fender(None).unwrap();
        let (c1, c2) = f.shells()[0].material().wave_speeds();
        assert!((c1 - 6412.0).abs() < 1e-9 && (c2 - 3043.0).abs() < 1e-9);
        assert_eq!(f.core().unwrap().density, 1.21);
        assert_eq!(f.exterior().density, 1026.0);

        let m = s135(None).unwrap();
        let radii: Vec<_> = m.shells().iter().map(|s| (s.outer_radius, s.inner_radius.unwrap())).collect();
        assert_eq!(radii, vec![(5.0, 4.992), (3.0, 2.98), (1.0, 0.95)]);
        let fills: Vec<_> = m.fluids().iter().map(|f| f.sound_speed).collect();
        assert_eq!(fills, vec![1500.0, 1500.0, 340.0, 340.0]);
        let s15 = s15(None).unwrap();
        assert_eq!(s15.fluids()[1].sound_speed, 1500.0);
    }

    #[test]
    fn directions() {
        assert!((by_name("chang", None).unwrap().incident.direction()[2] - 1.0).abs() < 1e-15);
        assert!((by_name("fender", None).unwrap().incident.direction()[2] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_name() {
        assert!(by_name("s7", None).is_err());
    }
}
