//! Materials, layered scatterer models and derived quantities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidMaterial {
    pub density: f64,
    pub sound_speed: f64,
}

impl FluidMaterial {
    pub fn new(density: f64, sound_speed: f64) -> Result<Self> {
        let f = FluidMaterial { density, sound_speed };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.density > 0.0 && self.density.is_finite())
            || !(self.sound_speed > 0.0 && self.sound_speed.is_finite())
        {
            return Err(Error::InvalidModel(format!("fluid needs positive density and sound speed, got {self:?}")));
        }
        Ok(())
    }

    pub fn wavenumber(&self, omega: f64) -> f64 {
        omega / self.sound_speed
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolidMaterial {
    pub density: f64,
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
}

impl SolidMaterial {
    pub fn new(density: f64, youngs_modulus: f64, poisson_ratio: f64) -> Result<Self> {
        let s = SolidMaterial { density, youngs_modulus, poisson_ratio };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.density > 0.0
            && self.density.is_finite()
            && self.youngs_modulus > 0.0
            && self.youngs_modulus.is_finite()
            && self.poisson_ratio > -1.0
            && self.poisson_ratio < 0.5;
        if !ok {
            return Err(Error::InvalidModel(format!("invalid solid material {self:?}")));
        }
        Ok(())
    }

    pub fn bulk_modulus(&self) -> f64 {
        self.youngs_modulus / (3.0 * (1.0 - 2.0 * self.poisson_ratio))
    }

    pub fn shear_modulus(&self) -> f64 {
        self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }

    /// `(c_s1, c_s2)`, longitudinal and transverse speeds.
    pub fn wave_speeds(&self) -> (f64, f64) {
        wave_speeds(self)
    }

    /// `½ (b/a)²`, the coefficient multiplying `ξ²` in the stress functions.
    pub fn half_speed_ratio_sq(&self) -> f64 {
        2.0 / 3.0 + self.bulk_modulus() / (2.0 * self.shear_modulus())
    }
}

pub fn wave_speeds(mat: &SolidMaterial) -> (f64, f64) {
    let k = mat.bulk_modulus();
    let g = mat.shear_modulus();
    (((3.0 * k + 4.0 * g) / (3.0 * mat.density)).sqrt(), (g / mat.density).sqrt())
}

/// Inverse of [`wave_speeds`].
pub fn elastic_from_speeds(c_s1: f64, c_s2: f64, density: f64) -> Result<SolidMaterial> {
    if !(c_s2 > 0.0 && c_s1 > 2.0 / 3f64.sqrt() * c_s2 && density > 0.0) {
        return Err(Error::InvalidModel(format!("invalid speeds c_s1 = {c_s1}, c_s2 = {c_s2}, density = {density}")));
    }
    let (c1, c2) = (c_s1 * c_s1, c_s2 * c_s2);
    let e = density * c2 * (3.0 * c1 - 4.0 * c2) / (c1 - c2);
    let nu = 0.5 * (c1 - 2.0 * c2) / (c1 - c2);
    SolidMaterial::new(density, e, nu)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryCondition {
    /// Fluid inside the innermost shell.
    #[serde(rename = "NNBC")]
    Nnbc,
    /// Rigid innermost shell.
    #[serde(rename = "SHBC")]
    Shbc,
    /// Void inside the innermost shell.
    #[serde(rename = "SSBC")]
    Ssbc,
    /// Innermost shell solid down to the origin.
    #[serde(rename = "ESBC")]
    Esbc,
}

impl BoundaryCondition {
    pub const ALL: [BoundaryCondition; 4] =
        [BoundaryCondition::Nnbc, BoundaryCondition::Shbc, BoundaryCondition::Ssbc, BoundaryCondition::Esbc];

    pub fn name(&self) -> &'static str {
        match self {
            BoundaryCondition::Nnbc => "NNBC",
            BoundaryCondition::Shbc => "SHBC",
            BoundaryCondition::Ssbc => "SSBC",
            BoundaryCondition::Esbc => "ESBC",
        }
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NNBC" => Ok(BoundaryCondition::Nnbc),
            "SHBC" => Ok(BoundaryCondition::Shbc),
            "SSBC" => Ok(BoundaryCondition::Ssbc),
            "ESBC" => Ok(BoundaryCondition::Esbc),
            _ => Err(Error::Config(format!("unknown boundary condition '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolidLayer {
    pub density: f64,
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub outer_radius: f64,
    /// Absent when the solid extends to the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_radius: Option<f64>,
}

impl SolidLayer {
    pub fn new(material: SolidMaterial, outer_radius: f64, inner_radius: Option<f64>) -> Self {
        SolidLayer {
            density: material.density,
            youngs_modulus: material.youngs_modulus,
            poisson_ratio: material.poisson_ratio,
            outer_radius,
            inner_radius,
        }
    }

    pub fn material(&self) -> SolidMaterial {
        SolidMaterial { density: self.density, youngs_modulus: self.youngs_modulus, poisson_ratio: self.poisson_ratio }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Layer {
    Fluid(FluidMaterial),
    Solid(SolidLayer),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    layers: Vec<Layer>,
    innermost_condition: BoundaryCondition,
    #[serde(default)]
    description: String,
}

/// Validated layered scatterer. Layers run from the unbounded exterior fluid inwards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct ScattererModel {
    layers: Vec<Layer>,
    innermost_condition: BoundaryCondition,
    description: String,
    shells: Vec<SolidLayer>,
    fluids: Vec<FluidMaterial>,
}

impl TryFrom<RawModel> for ScattererModel {
    type Error = Error;
    fn try_from(raw: RawModel) -> Result<Self> {
        ScattererModel::new(raw.layers, raw.innermost_condition, raw.description)
    }
}

impl From<ScattererModel> for RawModel {
    fn from(m: ScattererModel) -> Self {
        RawModel { layers: m.layers, innermost_condition: m.innermost_condition, description: m.description }
    }
}

impl ScattererModel {
    pub fn new(
        layers: Vec<Layer>,
        innermost_condition: BoundaryCondition,
        description: impl Into<String>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        let mut shells = Vec::new();
        let mut fluids = Vec::new();
        for (i, layer) in layers.iter().enumerate() {
            let expect_fluid = i % 2 == 0;
            match layer {
                Layer::Fluid(f) if expect_fluid => {
                    f.validate()?;
                    fluids.push(*f);
                }
                Layer::Solid(s) if !expect_fluid => {
                    s.material().validate()?;
                    shells.push(*s);
                }
                _ => return bad(format!("layer {i} breaks the fluid/solid alternation")),
            }
        }
        if shells.is_empty() {
            return bad("a model needs at least one solid shell".into());
        }
        let has_core = fluids.len() == shells.len() + 1;
        match (innermost_condition, has_core) {
            (BoundaryCondition::Nnbc, false) => return bad("NNBC requires an innermost fluid".into()),
            (BoundaryCondition::Nnbc, true) => {}
            (bc, true) => return bad(format!("{} forbids an innermost fluid", bc.name())),
            _ => {}
        }
        let m = shells.len();
        let mut prev_inner = f64::INFINITY;
        for (i, s) in shells.iter().enumerate() {
            let last = i + 1 == m;
            if !(s.outer_radius.is_finite() && s.outer_radius > 0.0) {
                return bad(format!("shell {} has invalid outer radius {}", i + 1, s.outer_radius));
            }
            if s.outer_radius > prev_inner {
                return bad(format!("shell {} overlaps the shell outside it", i + 1));
            }
            match s.inner_radius {
                None if last && innermost_condition == BoundaryCondition::Esbc => {}
                None => return bad(format!("shell {} needs an inner radius", i + 1)),
                Some(_) if last && innermost_condition == BoundaryCondition::Esbc => {
                    return bad("ESBC requires the innermost shell to have no inner radius".into())
                }
                Some(r1) => {
                    if !(r1 > 0.0 && r1 < s.outer_radius) {
                        return bad(format!("shell {} needs 0 < R1 < R0, got R1 = {r1}", i + 1));
                    }
                    prev_inner = r1;
                }
            }
        }
        Ok(ScattererModel { layers, innermost_condition, description: description.into(), shells, fluids })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialisation cannot fail")
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn innermost_condition(&self) -> BoundaryCondition {
        self.innermost_condition
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Solid shells, outermost first.
    pub fn shells(&self) -> &[SolidLayer] {
        &self.shells
    }

    pub fn shell_count(&self) -> usize {
        self.shells.len()
    }

    /// Fluids, index 0 being the unbounded exterior and index m the fluid inside shell m.
    pub fn fluids(&self) -> &[FluidMaterial] {
        &self.fluids
    }

    pub fn exterior(&self) -> &FluidMaterial {
        &self.fluids[0]
    }

    pub fn core(&self) -> Option<&FluidMaterial> {
        self.fluids.get(self.shells.len())
    }

    pub fn outer_radius(&self) -> f64 {
        self.shells[0].outer_radius
    }

    /// Empirical upper frequency (Hz) for which round-off stays harmless.
    pub fn frequency_bound(&self) -> f64 {
        frequency_bound(self)
    }
}

pub fn frequency_bound(model: &ScattererModel) -> f64 {
    let shells = model.shells();
    let mut upsilon = f64::INFINITY;
    for (m, s) in shells.iter().enumerate() {
        let (c1, c2) = s.material().wave_speeds();
        if let Some(r1) = s.inner_radius {
            upsilon = upsilon.min(r1 / c1.max(c2));
        }
        upsilon = upsilon.min(s.outer_radius / model.fluids()[m].sound_speed);
    }
    let c = (model.outer_radius() / model.exterior().sound_speed).powf(1.5) / upsilon.sqrt();
    100.0 / c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn steel() -> SolidMaterial {
        SolidMaterial::new(7850.0, 2.1e11, 0.3).unwrap()
    }

    fn water() -> FluidMaterial {
        FluidMaterial::new(1000.0, 1500.0).unwrap()
    }

    #[test]
    fn steel_speeds() {
        let (c1, c2) = steel().wave_speeds();
        assert!((c1 - 6001.0).abs() < 1.0, "{c1}");
        assert!((c2 - 3208.0).abs() < 1.0, "{c2}");
    }

    #[test]
    fn chang_steel_speeds_match_direct_formula() {
        // E = 2e11, nu = 0.3: K = 2e11/1.2, G = 2e11/2.6; 40-digit evaluation.
        let (c1, c2) = SolidMaterial::new(7800.0, 2.0e11, 0.3).unwrap().wave_speeds();
        assert!((c1 - 5875.097044815179).abs() / c1 < 1e-14, "{c1}");
        assert!((c2 - 3140.3714651066384).abs() / c2 < 1e-14, "{c2}");
    }

    #[test]
    fn zero_poisson_ratio() {
        let m = SolidMaterial::new(2000.0, 1e9, 0.0).unwrap();
        assert!((m.wave_speeds().0 - (1e9f64 / 2000.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn fender_conversion() {
        let m = elastic_from_speeds(6412.0, 3043.0, 2700.0).unwrap();
        assert!((m.poisson_ratio - 0.3546).abs() < 1e-4, "{}", m.poisson_ratio);
        assert!(elastic_from_speeds(3000.0, 3000.0, 1.0).is_err());
    }

    fn shell(r0: f64, r1: Option<f64>) -> Layer {
        Layer::Solid(SolidLayer::new(steel(), r0, r1))
    }

    #[test]
    fn validation() {
        let w = Layer::Fluid(water());
        assert!(ScattererModel::new(vec![w, shell(1.0, Some(0.9)), w], BoundaryCondition::Nnbc, "").is_ok());
        assert!(ScattererModel::new(vec![w, shell(1.0, Some(0.9))], BoundaryCondition::Nnbc, "").is_err());
        assert!(ScattererModel::new(vec![w, shell(1.0, Some(0.9)), w], BoundaryCondition::Ssbc, "").is_err());
        assert!(ScattererModel::new(vec![w, shell(1.0, Some(1.1))], BoundaryCondition::Ssbc, "").is_err());
        assert!(ScattererModel::new(vec![w, shell(1.0, None)], BoundaryCondition::Esbc, "").is_ok());
        assert!(ScattererModel::new(vec![w, shell(1.0, None)], BoundaryCondition::Ssbc, "").is_err());
        assert!(ScattererModel::new(vec![w, shell(1.0, Some(0.5))], BoundaryCondition::Esbc, "").is_err());
        let overlap = vec![w, shell(1.0, Some(0.9)), w, shell(0.95, Some(0.5))];
        assert!(ScattererModel::new(overlap, BoundaryCondition::Ssbc, "").is_err());
        let touching = vec![w, shell(1.0, Some(0.9)), w, shell(0.9, Some(0.5))];
        assert!(ScattererModel::new(touching, BoundaryCondition::Ssbc, "").is_ok());
    }

    #[test]
    fn json_roundtrip_and_unknown_fields() {
        let w = Layer::Fluid(water());
        let m = ScattererModel::new(vec![w, shell(1.0, Some(0.9)), w], BoundaryCondition::Nnbc, "t").unwrap();
        let back = ScattererModel::from_json(&m.to_json()).unwrap();
        assert_eq!(m, back);
        let bad = m.to_json().replace("\"description\"", "\"extra\": 1, \"description\"");
        assert!(ScattererModel::from_json(&bad).is_err());
        let bad_layer = m.to_json().replacen("\"sound_speed\"", "\"colour\": 2, \"sound_speed\"", 1);
        assert!(ScattererModel::from_json(&bad_layer).is_err());
    }

    #[test]
    fn frequency_bound_s5_and_s1() {
        let w = Layer::Fluid(water());
        let s5 = ScattererModel::new(vec![w, shell(5.0, Some(4.992)), w], BoundaryCondition::Nnbc, "").unwrap();
        let (c1, _) = steel().wave_speeds();
        let upsilon: f64 = 4.992 / c1;
        assert!((upsilon - 8.318e-4).abs() < 1e-6);
        let expect = 100.0 * upsilon.sqrt() / (5.0f64 / 1500.0).powf(1.5);
        assert!((s5.frequency_bound() - expect).abs() < 1e-9 * expect);
        assert!((s5.frequency_bound() - 14986.0).abs() < 5.0, "{}", s5.frequency_bound());
        let s1 = ScattererModel::new(vec![w, shell(1.0, Some(0.95)), w], BoundaryCondition::Nnbc, "").unwrap();
        let u1: f64 = 0.95 / c1;
        assert!((u1 - 1.583e-4).abs() < 1e-6);
        assert!((s1.frequency_bound() - 100.0 * u1.sqrt() / (1.0f64 / 1500.0).powf(1.5)).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn speed_roundtrip(e in 1e8f64..1e12, nu in -0.9f64..0.49, rho in 100.0f64..20000.0) {
            let m = SolidMaterial::new(rho, e, nu).unwrap();
            let (c1, c2) = m.wave_speeds();
            let back = elastic_from_speeds(c1, c2, rho).unwrap();
            prop_assert!((back.youngs_modulus - e).abs() <= 1e-12 * e);
            prop_assert!((back.poisson_ratio - nu).abs() <= 1e-12 * (1.0 + nu.abs()));
            let (d1, d2) = back.wave_speeds();
            prop_assert!((d1 - c1).abs() <= 1e-12 * c1 && (d2 - c2).abs() <= 1e-12 * c2);
        }

        #[test]
        fn bound_monotone_in_upsilon(r1 in 0.1f64..0.99) {
            let w = Layer::Fluid(water());
            let a = ScattererModel::new(vec![w, shell(1.0, Some(r1))], BoundaryCondition::Ssbc, "").unwrap();
            let b = ScattererModel::new(vec![w, shell(1.0, Some(r1 * 0.5))], BoundaryCondition::Ssbc, "").unwrap();
            prop_assert!(a.frequency_bound() >= b.frequency_bound());
        }
    }
}
