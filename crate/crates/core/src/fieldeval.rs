//! Summation of the truncated series for pressure, displacement and stress.
//!
//! Points are grouped by domain and radius so that each distinct radial
//! argument is tabulated once. Terms are added in fixed order `n = 0, 1, …`
//! per point, and summation stops once every requested channel at every
//! point has seen two consecutive terms below `ε` relative to its partial sum.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::incident::{IncidentField, Mat3, Vec3};
use crate::media::{BoundaryCondition, ScattererModel};
use crate::modal::{FrequencyContext, ModalSolution, ModalSweep, RadialST, Unknown};
use crate::specfun::{derivatives, ldexp, Angular, AngularTable, BesselTable, RadialKind};

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    ScatteredPressure,
    TotalPressure,
    Displacement,
    Stress,
    GradientPressure,
}

/// Region a point falls in. Indices follow [`ScatteredModel::fluids`] and
/// [`ScattererModel::shells`].
///
/// [`ScatteredModel::fluids`]: ScattererModel::fluids
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    Fluid(usize),
    Solid(usize),
    /// Inside a rigid or void inner boundary.
    Excluded,
}

/// Relative distance within which a radius counts as lying on an interface.
const INTERFACE_TOL: f64 = 8.0 * f64::EPSILON;

/// Domain of a point at radius `r`; points on an interface go to the outer side.
/// Radii a few ulps below an interface, as produced by `R·(sin ϑ, 0, cos ϑ)`,
/// count as on it.
pub fn classify(model: &ScattererModel, r: f64) -> Domain {
    let on_or_above = |radius: f64| r >= radius * (1.0 - INTERFACE_TOL);
    let bc = model.innermost_condition();
    let shells = model.shells();
    for (m, s) in shells.iter().enumerate() {
        let last = m + 1 == shells.len();
        if on_or_above(s.outer_radius) {
            return Domain::Fluid(m);
        }
        if last && bc == BoundaryCondition::Shbc {
            return Domain::Excluded;
        }
        match s.inner_radius {
            None => return Domain::Solid(m),
            Some(r1) if on_or_above(r1) => return Domain::Solid(m),
            _ => {}
        }
    }
    if bc == BoundaryCondition::Nnbc {
        Domain::Fluid(shells.len())
    } else {
        Domain::Excluded
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    /// One `N` for all points (two consecutive small terms everywhere).
    Joint,
    /// Each point stops on its own; results do not depend on batching.
    PerPoint,
}

#[derive(Clone, Debug)]
pub struct EvalRequest {
    pub points: Vec<Vec3>,
    pub quantities: Vec<Quantity>,
    pub epsilon: f64,
    pub truncation: Truncation,
    /// Hard cap on the number of modes.
    pub max_modes: usize,
    /// Sum exactly modes `0..=N` instead of testing convergence.
    pub fixed_modes: Option<usize>,
}

impl EvalRequest {
    pub fn new(points: Vec<Vec3>, quantities: &[Quantity]) -> Self {
        EvalRequest {
            points,
            quantities: quantities.to_vec(),
            epsilon: f64::EPSILON,
            truncation: Truncation::Joint,
            max_modes: 20_000,
            fixed_modes: None,
        }
    }

    pub fn epsilon(mut self, eps: f64) -> Self {
        self.epsilon = eps;
        self
    }

    pub fn truncation(mut self, t: Truncation) -> Self {
        self.truncation = t;
        self
    }

    pub fn fixed_modes(mut self, n: usize) -> Self {
        self.fixed_modes = Some(n);
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SphericalStress {
    pub rr: C,
    pub tt: C,
    pub pp: C,
    pub rt: C,
}

impl SphericalStress {
    pub fn tensor(&self) -> [[C; 3]; 3] {
        [[self.rr, self.rt, ZERO], [self.rt, self.tt, ZERO], [ZERO, ZERO, self.pp]]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub point: Vec3,
    pub domain: Domain,
    pub scattered_pressure: Option<C>,
    pub total_pressure: Option<C>,
    /// Gradient of the total pressure, Cartesian.
    pub pressure_gradient: Option<[C; 3]>,
    /// `(u_r, u_ϑ, u_φ)` in the canonical frame.
    pub displacement_spherical: Option<[C; 3]>,
    /// Cartesian displacement.
    pub displacement: Option<[C; 3]>,
    pub stress_spherical: Option<SphericalStress>,
    /// Cartesian stress tensor.
    pub stress: Option<[[C; 3]; 3]>,
    pub n_used: usize,
    pub converged: bool,
}

/// Series channels; each is summed separately.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Pressure series of the domain (scattered part in the exterior).
    P,
    /// `∂p/∂r`
    DrP,
    /// `(1/r) ∂p/∂ϑ`
    DtP,
    /// `∇²p`
    LapP,
    /// `p_0`, exterior only.
    FarField,
    Ur,
    Ut,
    Srr,
    Stt,
    Spp,
    Srt,
    /// `∂σ_rr/∂r`
    DrSrr,
    /// `∂σ_ϑϑ/∂ϑ`
    DtStt,
    /// `∂σ_rϑ/∂r`
    DrSrt,
    /// `∂σ_rϑ/∂ϑ`
    DtSrt,
    /// `σ_rϑ cot ϑ`
    SrtCot,
    /// `(σ_ϑϑ − σ_φφ) cot ϑ`
    SttSppCot,
}

impl Channel {
    pub fn is_fluid(self) -> bool {
        matches!(self, Channel::P | Channel::DrP | Channel::DtP | Channel::LapP | Channel::FarField)
    }
}

/// One evaluation site for [`sum_series`].
#[derive(Clone, Debug)]
pub struct Probe {
    pub r: f64,
    pub theta: f64,
    pub domain: Domain,
    pub channels: Vec<Channel>,
}

#[derive(Clone, Debug)]
pub struct ProbeSums {
    pub sums: Vec<C>,
    pub n_used: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, Default)]
pub struct SeriesStats {
    /// Largest `N` used by any probe.
    pub n_used: usize,
    pub converged: bool,
    pub overflow: bool,
    pub singular_modes: Vec<usize>,
    pub resonance_suspect: Vec<usize>,
    pub max_condition: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SeriesOptions {
    pub epsilon: f64,
    pub truncation: Truncation,
    pub max_modes: usize,
    pub fixed_modes: Option<usize>,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions { epsilon: f64::EPSILON, truncation: Truncation::Joint, max_modes: 20_000, fixed_modes: None }
    }
}

/// Radial values of one fluid basis function at one mode, all scaled by `2^{-e}`.
#[derive(Clone, Copy, Debug, Default)]
struct FluidRadial {
    z: C,
    z1: C,
    dz: C,
    d2z: C,
    e: i32,
}

/// `2^{d}` for the exponent gap between a radial value and its coefficient.
fn shift(d: i32) -> f64 {
    ldexp(1.0, d)
}

#[derive(Clone, Debug)]
enum GroupValues {
    Fluid {
        zeta: f64,
        k: f64,
        kinds: Vec<(Unknown, RadialKind)>,
        vals: Vec<FluidRadial>,
    },
    /// `st[i]` holds `S` scaled by `2^{-ea[i]}` and `T` by `2^{-eb[i]}`.
    Solid {
        kinds: Vec<u8>,
        st: Vec<RadialST>,
        ea: Vec<i32>,
        eb: Vec<i32>,
    },
    Origin,
    /// `r = ∞`; only [`Channel::FarField`].
    Far,
}

/// Probes sharing a domain and radius share their radial tables.
struct Group {
    domain: Domain,
    r: f64,
    tables: Vec<BesselTable>,
    values: GroupValues,
    overflow: bool,
}

fn fluid_kinds(model: &ScattererModel, f: usize) -> Vec<(Unknown, RadialKind)> {
    if f == 0 {
        vec![(Unknown::Exterior, RadialKind::Hankel)]
    } else if f == model.shell_count() {
        vec![(Unknown::Core, RadialKind::First)]
    } else {
        vec![
            (Unknown::Fluid { fluid: f, kind: 1 }, RadialKind::First),
            (Unknown::Fluid { fluid: f, kind: 2 }, RadialKind::Second),
        ]
    }
}

impl Group {
    fn new(model: &ScattererModel, ctx: &FrequencyContext, domain: Domain, r: f64) -> Result<Group> {
        if r == 0.0 {
            return Ok(Group { domain, r, tables: vec![], values: GroupValues::Origin, overflow: false });
        }
        if r.is_infinite() {
            if domain != Domain::Fluid(0) {
                return Err(Error::InvalidRequest("far-field probes must lie in the exterior fluid".into()));
            }
            return Ok(Group { domain, r, tables: vec![], values: GroupValues::Far, overflow: false });
        }
        match domain {
            Domain::Fluid(f) => {
                let k = ctx.fluids[f].0;
                let zeta = k * r;
                let kinds = fluid_kinds(model, f);
                let needs_y = kinds.iter().any(|(_, k)| *k != RadialKind::First);
                let tables = vec![BesselTable::new(zeta, needs_y)?];
                let vals = vec![FluidRadial::default(); kinds.len()];
                Ok(Group { domain, r, tables, values: GroupValues::Fluid { zeta, k, kinds, vals }, overflow: false })
            }
            Domain::Solid(m) => {
                let sc = ctx.shells[m];
                let esbc_core = sc.inner.is_none();
                let kinds = if esbc_core { vec![1u8] } else { vec![1, 2] };
                let tables = vec![BesselTable::new(sc.a * r, !esbc_core)?, BesselTable::new(sc.b * r, !esbc_core)?];
                Ok(Group {
                    domain,
                    r,
                    tables,
                    values: GroupValues::Solid { kinds, st: vec![], ea: vec![], eb: vec![] },
                    overflow: false,
                })
            }
            Domain::Excluded => Err(Error::InvalidRequest("no field inside an excluded region".into())),
        }
    }

    fn update(&mut self, ctx: &FrequencyContext, n: usize) {
        for t in &mut self.tables {
            t.ensure(n + 2);
            if !t.usable(n + 1) {
                self.overflow = true;
            }
        }
        let r = self.r;
        match &mut self.values {
            GroupValues::Fluid { zeta, kinds, vals, .. } => {
                let t = &self.tables[0];
                for (v, (_, kind)) in vals.iter_mut().zip(kinds.iter()) {
                    let e = first_exponent(t, *kind, n);
                    let z = t.value_scaled(*kind, n, e);
                    let z1 = t.value_scaled(*kind, n + 1, e);
                    let [dz, d2z] = derivatives(n, *zeta, z, z1);
                    *v = FluidRadial { z, z1, dz, d2z, e };
                }
            }
            GroupValues::Solid { kinds, st, ea, eb } => {
                let Domain::Solid(m) = self.domain else { unreachable!() };
                let sc = ctx.shells[m];
                let (tx, te) = (&self.tables[0], &self.tables[1]);
                st.clear();
                ea.clear();
                eb.clear();
                for &k in kinds.iter() {
                    let rk = if k == 1 { RadialKind::First } else { RadialKind::Second };
                    let (xa, xb) = (first_exponent(tx, rk, n), first_exponent(te, rk, n));
                    st.push(RadialST::from_values(
                        n,
                        rk,
                        sc.a * r,
                        tx.value_scaled(rk, n, xa).re,
                        tx.value_scaled(rk, n + 1, xa).re,
                        sc.b * r,
                        te.value_scaled(rk, n, xb).re,
                        te.value_scaled(rk, n + 1, xb).re,
                        sc.half_ratio,
                    ));
                    ea.push(xa);
                    eb.push(xb);
                }
            }
            GroupValues::Origin | GroupValues::Far => {}
        }
    }
}

struct ProbeState {
    group: usize,
    angular: AngularTable,
    channels: Vec<Channel>,
    sums: Vec<C>,
    streak: u32,
    n_used: usize,
    active: bool,
    converged: bool,
}

fn first_exponent(t: &BesselTable, kind: RadialKind, n: usize) -> i32 {
    if kind == RadialKind::First && t.j_parts(n).0 != 0.0 {
        t.j_exponent(n)
    } else {
        0
    }
}

fn i_pow_neg(n: usize) -> C {
    // i^{-n-1}
    match (n + 1) % 4 {
        0 => C::new(1.0, 0.0),
        1 => C::new(0.0, -1.0),
        2 => C::new(-1.0, 0.0),
        _ => C::new(0.0, 1.0),
    }
}

fn term(ch: Channel, n: usize, g: &Group, a: &Angular, sol: &ModalSolution) -> C {
    match &g.values {
        GroupValues::Fluid { zeta, k, kinds, vals } => {
            let nf = n as f64;
            let mut acc = ZERO;
            for ((u, _), v) in kinds.iter().zip(vals) {
                let (c, ce) = sol.get_scaled(*u);
                if c == ZERO {
                    continue;
                }
                let c = c * shift(v.e - ce);
                acc += c * match ch {
                    Channel::P => v.z * a.q0,
                    Channel::DrP => (v.z * nf - v.z1 * *zeta) * a.q0,
                    Channel::DtP => v.z * a.q1,
                    Channel::LapP => (v.d2z + v.dz * (2.0 / zeta)) * (k * k * a.q0) + v.z * (a.lap / (g.r * g.r)),
                    _ => ZERO,
                };
            }
            acc
        }
        GroupValues::Solid { kinds, st, ea, eb } => {
            let Domain::Solid(m) = g.domain else { unreachable!() };
            let coeffs: Vec<(C, C)> = kinds
                .iter()
                .enumerate()
                .map(|(i, k)| {
                    let (a_c, a_e) = sol.get_scaled(Unknown::A { shell: m, kind: *k });
                    let (b_c, b_e) = sol.get_scaled(Unknown::B { shell: m, kind: *k });
                    (a_c * shift(ea[i] - a_e), b_c * shift(eb[i] - b_e))
                })
                .collect();
            let comb = |j: usize| -> C {
                let mut acc = ZERO;
                for ((a_c, b_c), s) in coeffs.iter().zip(st) {
                    acc += a_c * s.s[j - 1] + b_c * s.t[j - 1];
                }
                acc
            };
            match ch {
                Channel::Ur => comb(1) * a.q0,
                Channel::Ut => comb(2) * a.q1,
                Channel::Srr => comb(5) * a.q0,
                Channel::Stt => comb(6) * a.q0 + comb(2) * a.q2,
                Channel::Spp => comb(6) * a.q0 + comb(2) * a.q1_cot,
                Channel::Srt => comb(7) * a.q1,
                Channel::DrSrr => comb(8) * a.q0,
                Channel::DtStt => comb(6) * a.q1 + comb(2) * a.q3,
                Channel::DrSrt => comb(9) * a.q1,
                Channel::DtSrt => comb(7) * a.q2,
                Channel::SrtCot => comb(7) * a.q1_cot,
                Channel::SttSppCot => comb(2) * a.shear_cot,
                _ => ZERO,
            }
        }
        GroupValues::Far => match ch {
            Channel::FarField => i_pow_neg(n) * a.q0 * sol.get(Unknown::Exterior),
            _ => ZERO,
        },
        GroupValues::Origin => ZERO,
    }
}

fn prefactor(ch: Channel, g: &Group, ctx: &FrequencyContext) -> f64 {
    let r = g.r;
    match g.domain {
        Domain::Fluid(f) => match ch {
            Channel::DrP | Channel::DtP => 1.0 / r,
            Channel::FarField => 1.0 / ctx.fluids[f].0,
            _ => 1.0,
        },
        Domain::Solid(m) => {
            let two_g = 2.0 * ctx.shells[m].shear;
            match ch {
                Channel::Ur | Channel::Ut => 1.0 / r,
                Channel::DrSrr | Channel::DrSrt => two_g / (r * r * r),
                _ => two_g / (r * r),
            }
        }
        Domain::Excluded => 0.0,
    }
}

/// Closed-form limits at the origin, in the canonical frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OriginFields {
    Solid { displacement: [C; 3], stress: [[C; 3]; 3] },
    Fluid { pressure: C, gradient: [C; 3], laplacian: C },
}

fn origin_from_solutions(
    model: &ScattererModel,
    ctx: &FrequencyContext,
    sols: &[ModalSolution],
) -> Result<OriginFields> {
    let get = |n: usize, u: Unknown| sols.get(n).map_or(ZERO, |s| s.get(u));
    let m = model.shell_count() - 1;
    match model.innermost_condition() {
        BoundaryCondition::Esbc => {
            let sc = ctx.shells[m];
            let (a, b, g) = (sc.a, sc.b, sc.shear);
            let a_ = |n| get(n, Unknown::A { shell: m, kind: 1 });
            let b_ = |n| get(n, Unknown::B { shell: m, kind: 1 });
            let u3 = (a_(1) * a - b_(1) * (2.0 * b)) / 3.0;
            let base = a_(0) * (5.0 * (4.0 * a * a - 3.0 * b * b));
            let s11 = (base - a_(2) * (2.0 * a * a) + b_(2) * (6.0 * b * b)) * (g / 15.0);
            let s33 = (base + a_(2) * (4.0 * a * a) - b_(2) * (12.0 * b * b)) * (g / 15.0);
            Ok(OriginFields::Solid {
                displacement: [ZERO, ZERO, u3],
                stress: [[s11, ZERO, ZERO], [ZERO, s11, ZERO], [ZERO, ZERO, s33]],
            })
        }
        BoundaryCondition::Nnbc => {
            let k = ctx.fluids[m + 1].0;
            let c0 = get(0, Unknown::Core);
            let c1 = get(1, Unknown::Core);
            Ok(OriginFields::Fluid { pressure: c0, gradient: [ZERO, ZERO, c1 * (k / 3.0)], laplacian: -c0 * (k * k) })
        }
        bc => Err(Error::InvalidRequest(format!("{} has no field at the origin", bc.name()))),
    }
}

/// Origin limits of the innermost domain (ESBC solid or NNBC fluid core).
pub fn origin_fields(model: &ScattererModel, incident: &IncidentField, omega: f64) -> Result<OriginFields> {
    if !matches!(model.innermost_condition(), BoundaryCondition::Esbc | BoundaryCondition::Nnbc) {
        return Err(Error::InvalidRequest("innermost domain does not reach the origin".into()));
    }
    let sweep = ModalSweep::new(model, incident, omega)?;
    let ctx = sweep.context().clone();
    let sols: Vec<ModalSolution> = sweep.take(3).collect::<Result<_>>()?;
    origin_from_solutions(model, &ctx, &sols)
}

fn origin_channel(ch: Channel, o: &OriginFields) -> C {
    // spherical components with ϑ = 0: e_r = e3, e_ϑ = e1, e_φ = e2
    match (ch, o) {
        (Channel::P, OriginFields::Fluid { pressure, .. }) => *pressure,
        (Channel::DrP, OriginFields::Fluid { gradient, .. }) => gradient[2],
        (Channel::DtP, OriginFields::Fluid { gradient, .. }) => gradient[0],
        (Channel::LapP, OriginFields::Fluid { laplacian, .. }) => *laplacian,
        (Channel::Ur, OriginFields::Solid { displacement, .. }) => displacement[2],
        (Channel::Ut, OriginFields::Solid { displacement, .. }) => displacement[0],
        (Channel::Srr, OriginFields::Solid { stress, .. }) => stress[2][2],
        (Channel::Stt, OriginFields::Solid { stress, .. }) => stress[0][0],
        (Channel::Spp, OriginFields::Solid { stress, .. }) => stress[1][1],
        (Channel::Srt, OriginFields::Solid { stress, .. }) => stress[0][2],
        _ => C::new(f64::NAN, f64::NAN),
    }
}

/// Sum the requested channels at every probe.
pub fn sum_series(
    model: &ScattererModel,
    incident: &IncidentField,
    omega: f64,
    probes: &[Probe],
    opts: &SeriesOptions,
) -> Result<(Vec<ProbeSums>, SeriesStats)> {
    let mut sweep = ModalSweep::new(model, incident, omega)?;
    let ctx = sweep.context().clone();

    let mut groups: Vec<Group> = Vec::new();
    let mut index: HashMap<(Domain, u64), usize> = HashMap::new();
    let mut states = Vec::with_capacity(probes.len());
    for p in probes {
        if p.domain == Domain::Excluded {
            return Err(Error::InvalidRequest("probe inside an excluded region".into()));
        }
        let key = (p.domain, p.r.to_bits());
        let gi = match index.get(&key) {
            Some(&i) => i,
            None => {
                groups.push(Group::new(model, &ctx, p.domain, p.r)?);
                index.insert(key, groups.len() - 1);
                groups.len() - 1
            }
        };
        let origin = p.r == 0.0;
        states.push(ProbeState {
            group: gi,
            angular: AngularTable::new(p.theta, 2)?,
            channels: p.channels.clone(),
            sums: vec![ZERO; p.channels.len()],
            streak: 0,
            n_used: 0,
            active: !origin,
            converged: origin,
        });
    }

    let mut stats = SeriesStats { max_condition: 0.0, ..Default::default() };
    let mut first: Vec<ModalSolution> = Vec::new();
    let eps = opts.epsilon;
    let mut n = 0usize;
    let any_active = |s: &[ProbeState]| s.iter().any(|p| p.active);
    while any_active(&states) {
        if n > opts.max_modes || opts.fixed_modes.map_or(false, |f| n > f) {
            break;
        }
        let sol = match sweep.next() {
            None => break,
            Some(Ok(s)) => s,
            Some(Err(Error::SingularSystem { n: bad, .. })) => {
                stats.singular_modes.push(bad);
                n += 1;
                continue;
            }
            Some(Err(e)) => return Err(e),
        };
        if sol.overflow_flag && sol.coefficients.iter().all(|c| *c == ZERO) {
            stats.overflow = true;
            break;
        }
        stats.max_condition = stats.max_condition.max(sol.condition_estimate);
        if sol.resonance_suspect {
            stats.resonance_suspect.push(n);
        }
        groups.par_iter_mut().for_each(|g| g.update(&ctx, n));
        if groups.iter().any(|g| g.overflow) {
            stats.overflow = true;
            break;
        }
        let fixed = opts.fixed_modes.is_some();
        let per_point = opts.truncation == Truncation::PerPoint;
        states.par_iter_mut().filter(|s| s.active).for_each(|s| {
            let g = &groups[s.group];
            let a = s.angular.get(n);
            let mut small = true;
            for (sum, ch) in s.sums.iter_mut().zip(&s.channels) {
                let t = term(*ch, n, g, &a, &sol);
                *sum += t;
                let tn = t.norm();
                if !(tn < eps * sum.norm() || (tn == 0.0 && sum.norm() == 0.0)) {
                    small = false;
                }
            }
            s.streak = if small { s.streak + 1 } else { 0 };
            s.n_used = n;
            if !fixed && per_point && s.streak >= 2 {
                s.active = false;
                s.converged = true;
            }
        });
        if n < 3 {
            first.push(sol.clone());
        }
        let stop_flag = sol.overflow_flag;
        if !fixed && !per_point && states.iter().all(|s| !s.active || s.streak >= 2) {
            for s in states.iter_mut().filter(|s| s.active) {
                s.active = false;
                s.converged = true;
            }
        }
        if fixed && opts.fixed_modes == Some(n) {
            for s in states.iter_mut() {
                s.active = false;
                s.converged = true;
            }
        }
        if stop_flag {
            stats.overflow = true;
            break;
        }
        n += 1;
    }

    let origin = if groups.iter().any(|g| matches!(g.values, GroupValues::Origin)) {
        while first.len() < 3 {
            match sweep.next() {
                Some(Ok(s)) => first.push(s),
                _ => break,
            }
        }
        Some(origin_from_solutions(model, &ctx, &first)?)
    } else {
        None
    };

    let mut out = Vec::with_capacity(states.len());
    for s in states {
        let g = &groups[s.group];
        let sums = if let (GroupValues::Origin, Some(o)) = (&g.values, &origin) {
            s.channels.iter().map(|c| origin_channel(*c, o)).collect()
        } else {
            s.sums.iter().zip(&s.channels).map(|(v, c)| v * prefactor(*c, g, &ctx)).collect()
        };
        stats.n_used = stats.n_used.max(s.n_used);
        out.push(ProbeSums { sums, n_used: s.n_used, converged: s.converged });
    }
    stats.converged = out.iter().all(|p| p.converged);
    Ok((out, stats))
}

/// Canonical-frame spherical coordinates `(r, ϑ, φ)`.
pub fn spherical(x: Vec3) -> (f64, f64, f64) {
    let rho = x[0].hypot(x[1]);
    let r = rho.hypot(x[2]);
    if r == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    (r, rho.atan2(x[2]), x[1].atan2(x[0]))
}

/// Rows `e_r, e_ϑ, e_φ` in Cartesian components.
pub fn spherical_basis(theta: f64, phi: f64) -> Mat3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [[st * cp, st * sp, ct], [ct * cp, ct * sp, -st], [-sp, cp, 0.0]]
}

/// `J_eᵀ v`: spherical components to Cartesian.
pub fn vector_to_cartesian(theta: f64, phi: f64, v: [C; 3]) -> [C; 3] {
    let j = spherical_basis(theta, phi);
    let mut out = [ZERO; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = v[0] * j[0][i] + v[1] * j[1][i] + v[2] * j[2][i];
    }
    out
}

/// `J_eᵀ σ J_e`: spherical stress to Cartesian.
pub fn tensor_to_cartesian(theta: f64, phi: f64, s: [[C; 3]; 3]) -> [[C; 3]; 3] {
    let j = spherical_basis(theta, phi);
    let mut out = [[ZERO; 3]; 3];
    for i in 0..3 {
        for l in 0..3 {
            let mut acc = ZERO;
            for a in 0..3 {
                for b in 0..3 {
                    acc += s[a][b] * (j[a][i] * j[b][l]);
                }
            }
            out[i][l] = acc;
        }
    }
    out
}

/// 6×6 Voigt-order (11, 22, 33, 23, 13, 12) matrix of `σ' = R σ Rᵀ`.
pub fn voigt_transform(r: &Mat3) -> [[f64; 6]; 6] {
    const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];
    let mut d = [[0.0; 6]; 6];
    for (row, &(i, j)) in PAIRS.iter().enumerate() {
        for (col, &(k, l)) in PAIRS.iter().enumerate() {
            d[row][col] = if k == l { r[i][k] * r[j][l] } else { r[i][k] * r[j][l] + r[i][l] * r[j][k] };
        }
    }
    d
}

/// The Cartesian-to-spherical stress map `D` and its inverse at `(ϑ, φ)`.
pub fn stress_transform_pair(theta: f64, phi: f64) -> ([[f64; 6]; 6], [[f64; 6]; 6]) {
    let j = spherical_basis(theta, phi);
    let mut jt = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            jt[i][k] = j[k][i];
        }
    }
    (voigt_transform(&j), voigt_transform(&jt))
}

/// Fill the Cartesian vector and tensor of a sample from its spherical parts.
pub fn to_cartesian(mut sample: FieldSample, incident: &IncidentField) -> FieldSample {
    let frame = incident.frame();
    let (_, theta, phi) = spherical(frame.to_canonical(sample.point));
    if let Some(u) = sample.displacement_spherical {
        sample.displacement = Some(frame.vector_to_physical(vector_to_cartesian(theta, phi, u)));
    }
    if let Some(s) = sample.stress_spherical {
        sample.stress = Some(frame.tensor_to_physical(tensor_to_cartesian(theta, phi, s.tensor())));
    }
    sample
}

/// Von Mises stress of a real symmetric tensor.
pub fn von_mises(s: &[[f64; 3]; 3]) -> f64 {
    let d1 = s[0][0] - s[1][1];
    let d2 = s[1][1] - s[2][2];
    let d3 = s[0][0] - s[2][2];
    let shear = s[1][2] * s[1][2] + s[0][2] * s[0][2] + s[0][1] * s[0][1];
    ((d1 * d1 + d2 * d2 + d3 * d3 + 6.0 * shear) / 2.0).sqrt()
}

fn channels_for(domain: Domain, quantities: &[Quantity]) -> Vec<Channel> {
    let mut ch = Vec::new();
    let mut push = |c: Channel| {
        if !ch.contains(&c) {
            ch.push(c)
        }
    };
    for q in quantities {
        match (domain, q) {
            (Domain::Fluid(_), Quantity::ScatteredPressure | Quantity::TotalPressure) => push(Channel::P),
            (Domain::Fluid(_), Quantity::GradientPressure) => {
                push(Channel::DrP);
                push(Channel::DtP);
            }
            (Domain::Solid(_), Quantity::Displacement) => {
                push(Channel::Ur);
                push(Channel::Ut);
            }
            (Domain::Solid(_), Quantity::Stress) => {
                for c in [Channel::Srr, Channel::Stt, Channel::Spp, Channel::Srt] {
                    push(c);
                }
            }
            _ => {}
        }
    }
    ch
}

/// Evaluate the requested fields at arbitrary points.
pub fn evaluate(
    model: &ScattererModel,
    incident: &IncidentField,
    omega: f64,
    request: &EvalRequest,
) -> Result<Vec<FieldSample>> {
    Ok(evaluate_with_stats(model, incident, omega, request)?.0)
}

pub fn evaluate_with_stats(
    model: &ScattererModel,
    incident: &IncidentField,
    omega: f64,
    request: &EvalRequest,
) -> Result<(Vec<FieldSample>, SeriesStats)> {
    if !(omega >= 0.0 && omega.is_finite()) {
        return Err(Error::Domain(format!("angular frequency {omega} must be non-negative")));
    }
    incident.validate(model.outer_radius())?;
    let frame = incident.frame();
    let k1 = model.exterior().wavenumber(omega);
    let canon: Vec<(f64, f64, f64)> = request.points.iter().map(|x| spherical(frame.to_canonical(*x))).collect();
    let domains: Vec<Domain> = canon.iter().map(|c| classify(model, c.0)).collect();

    let mut probes = Vec::new();
    let mut probe_of = Vec::with_capacity(request.points.len());
    for ((r, theta, _), d) in canon.iter().zip(&domains) {
        let channels = channels_for(*d, &request.quantities);
        if *d == Domain::Excluded || channels.is_empty() {
            probe_of.push(None);
            continue;
        }
        probe_of.push(Some(probes.len()));
        probes.push(Probe { r: *r, theta: *theta, domain: *d, channels });
    }

    let (sums, stats) = if omega == 0.0 || probes.is_empty() {
        let zeros = probes
            .iter()
            .map(|p| ProbeSums { sums: vec![ZERO; p.channels.len()], n_used: 0, converged: true })
            .collect();
        (zeros, SeriesStats { converged: true, ..Default::default() })
    } else {
        let opts = SeriesOptions {
            epsilon: request.epsilon,
            truncation: request.truncation,
            max_modes: request.max_modes,
            fixed_modes: request.fixed_modes,
        };
        sum_series(model, incident, omega, &probes, &opts)?
    };

    let wants = |q: Quantity| request.quantities.contains(&q);
    let mut out = Vec::with_capacity(request.points.len());
    for (i, x) in request.points.iter().enumerate() {
        let (r, theta, phi) = canon[i];
        let domain = domains[i];
        let mut s = FieldSample {
            point: *x,
            domain,
            scattered_pressure: None,
            total_pressure: None,
            pressure_gradient: None,
            displacement_spherical: None,
            displacement: None,
            stress_spherical: None,
            stress: None,
            n_used: 0,
            converged: true,
        };
        if let Some(pi) = probe_of[i] {
            let ps = &sums[pi];
            let chans = &probes[pi].channels;
            let get = |c: Channel| chans.iter().position(|&v| v == c).map(|j| ps.sums[j]);
            s.n_used = ps.n_used;
            s.converged = ps.converged;
            let xc = frame.to_canonical(*x);
            let exterior = domain == Domain::Fluid(0);
            let (pinc, ginc) = if exterior { incident.pressure_and_gradient(k1, xc) } else { (ZERO, [ZERO; 3]) };
            if let Some(p) = get(Channel::P) {
                if wants(Quantity::ScatteredPressure) {
                    s.scattered_pressure = Some(p);
                }
                if wants(Quantity::TotalPressure) {
                    s.total_pressure = Some(p + pinc);
                }
            }
            if let (Some(dr), Some(dt)) = (get(Channel::DrP), get(Channel::DtP)) {
                let g = vector_to_cartesian(theta, phi, [dr, dt, ZERO]);
                let g = [g[0] + ginc[0], g[1] + ginc[1], g[2] + ginc[2]];
                s.pressure_gradient = Some(frame.vector_to_physical(g));
            }
            if let (Some(ur), Some(ut)) = (get(Channel::Ur), get(Channel::Ut)) {
                s.displacement_spherical = Some([ur, ut, ZERO]);
            }
            if let (Some(rr), Some(tt), Some(pp), Some(rt)) =
                (get(Channel::Srr), get(Channel::Stt), get(Channel::Spp), get(Channel::Srt))
            {
                s.stress_spherical = Some(SphericalStress { rr, tt, pp, rt });
            }
            let _ = r;
            s = to_cartesian(s, incident);
        }
        out.push(s);
    }
    Ok((out, stats))
}

/// Spherical stress components at one point inside a solid layer.
pub fn stress_spherical(
    model: &ScattererModel,
    incident: &IncidentField,
    omega: f64,
    point: Vec3,
) -> Result<SphericalStress> {
    let req = EvalRequest::new(vec![point], &[Quantity::Stress]);
    let s = evaluate(model, incident, omega, &req)?.remove(0);
    s.stress_spherical.ok_or_else(|| Error::InvalidRequest("point is not inside a solid layer".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use std::f64::consts::PI;

    #[test]
    fn classification() {
        let m = presets::s13(None).unwrap();
        assert_eq!(classify(&m, 4.0), Domain::Fluid(0));
        assert_eq!(classify(&m, 3.0), Domain::Fluid(0));
        assert_eq!(classify(&m, 2.99), Domain::Solid(0));
        assert_eq!(classify(&m, 2.98), Domain::Solid(0));
        assert_eq!(classify(&m, 2.0), Domain::Fluid(1));
        assert_eq!(classify(&m, 0.97), Domain::Solid(1));
        assert_eq!(classify(&m, 0.5), Domain::Fluid(2));
        let shbc = presets::s13(Some(BoundaryCondition::Shbc)).unwrap();
        assert_eq!(classify(&shbc, 0.97), Domain::Excluded);
        let esbc = presets::s1(Some(BoundaryCondition::Esbc)).unwrap();
        assert_eq!(classify(&esbc, 0.0), Domain::Solid(0));
    }

    #[test]
    fn von_mises_examples() {
        let s = 3.5;
        assert!(von_mises(&[[s, 0.0, 0.0], [0.0, s, 0.0], [0.0, 0.0, s]]).abs() < 1e-15);
        assert!((von_mises(&[[s, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]) - s).abs() < 1e-15);
        let shear = [[0.0, s, 0.0], [s, 0.0, 0.0], [0.0, 0.0, 0.0]];
        assert!((von_mises(&shear) - 3f64.sqrt() * s).abs() < 1e-14);
    }

    #[test]
    fn cartesian_conversion() {
        let u = vector_to_cartesian(0.0, 0.7, [C::new(2.0, 1.0), ZERO, ZERO]);
        assert!(u[0].norm() < 1e-16 && u[1].norm() < 1e-16 && (u[2] - C::new(2.0, 1.0)).norm() < 1e-16);
        let s = C::new(1.5, -0.5);
        let hydro = tensor_to_cartesian(1.1, 2.3, [[s, ZERO, ZERO], [ZERO, s, ZERO], [ZERO, ZERO, s]]);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { s } else { ZERO };
                assert!((hydro[i][j] - e).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn stress_transform_inverse() {
        for &(t, p) in &[(0.3, 1.2), (2.0, -0.4), (PI / 2.0, PI)] {
            let (d, dinv) = stress_transform_pair(t, p);
            for i in 0..6 {
                for j in 0..6 {
                    let v: f64 = (0..6).map(|k| dinv[i][k] * d[k][j]).sum();
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((v - e).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn stress_map_rows() {
        // first row of D: σ_rr from Cartesian components
        let (t, p) = (0.8, 0.3);
        let (d, _) = stress_transform_pair(t, p);
        let (st, ct, sp, cp) = (t.sin(), t.cos(), p.sin(), p.cos());
        let row = [
            st * st * cp * cp,
            st * st * sp * sp,
            ct * ct,
            2.0 * st * ct * sp,
            2.0 * st * ct * cp,
            2.0 * st * st * sp * cp,
        ];
        for j in 0..6 {
            assert!((d[0][j] - row[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_frequency_is_trivial() {
        let p = presets::by_name("s1", None).unwrap();
        let req = EvalRequest::new(
            vec![[0.0, 0.0, 2.0], [0.0, 0.0, 0.97]],
            &[Quantity::ScatteredPressure, Quantity::Displacement],
        );
        let out = evaluate(&p.model, &p.incident, 0.0, &req).unwrap();
        assert_eq!(out[0].scattered_pressure, Some(ZERO));
        assert!(out[1].displacement.unwrap().iter().all(|v| *v == ZERO));
        assert!(out.iter().all(|s| s.converged));
    }

    #[test]
    fn azimuthal_displacement_vanishes() {
        let p = presets::by_name("s1", None).unwrap();
        let omega = 2.0 * PI * 2000.0;
        let req = EvalRequest::new(vec![[0.4, 0.5, 0.76]], &[Quantity::Displacement]);
        let s = evaluate(&p.model, &p.incident, omega, &req).unwrap().remove(0);
        assert_eq!(s.domain, Domain::Solid(0));
        assert_eq!(s.displacement_spherical.unwrap()[2], ZERO);
    }
}
