//! Per-mode global linear systems `H_n C_n = D_n` for every boundary
//! condition variant, their preconditioned solution and the mode sweep.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::incident::{Forcing, IncidentField};
use crate::linalg::{Lu, Matrix};
use crate::media::{BoundaryCondition, ScattererModel};
use crate::specfun::{ldexp, BesselTable, RadialKind};

/// Radial factors of the displacement and stress series at `ξ = a r`, `η = b r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialST {
    pub n: usize,
    pub xi: f64,
    pub eta: f64,
    pub kind: RadialKind,
    /// `s[j-1]` is `S_j`.
    pub s: [f64; 9],
    /// `t[j-1]` is `T_j`.
    pub t: [f64; 9],
}

impl RadialST {
    /// Build from `Z_n`, `Z_{n+1}` at both arguments; `half_ratio` is `½(b/a)²`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_values(
        n: usize,
        kind: RadialKind,
        xi: f64,
        zx: f64,
        zx1: f64,
        eta: f64,
        ze: f64,
        ze1: f64,
        half_ratio: f64,
    ) -> Self {
        let nf = n as f64;
        let nn1 = nf * (nf + 1.0);
        let x2 = xi * xi;
        let hx2 = half_ratio * x2;
        let e2 = eta * eta;
        let s = [
            nf * zx - xi * zx1,
            zx,
            (nf * nf - nf - x2) * zx + 2.0 * xi * zx1,
            (nf - 1.0) * zx - xi * zx1,
            (nf * nf - nf - hx2) * zx + 2.0 * xi * zx1,
            (nf - hx2 + x2) * zx - xi * zx1,
            (nf - 1.0) * zx - xi * zx1,
            (nf * nf * nf - 3.0 * nf * nf + 2.0 * nf - nf * hx2 + 2.0 * x2) * zx
                + (-nf * nf - nf - 6.0 + hx2) * xi * zx1,
            (nf * nf - 3.0 * nf + 2.0 - x2) * zx + 4.0 * xi * zx1,
        ];
        let t3 = -nn1 * ((nf - 1.0) * ze - eta * ze1);
        let t = [
            -nn1 * ze,
            -(nf + 1.0) * ze + eta * ze1,
            t3,
            (e2 - nf * nf + 1.0) * ze - eta * ze1,
            t3,
            -nn1 * ze,
            -(nf * nf - 1.0 - 0.5 * e2) * ze - eta * ze1,
            nn1 * ((-nf * nf + 3.0 * nf - 2.0 + e2) * ze - 4.0 * eta * ze1),
            (-nf * nf * nf + 2.0 * nf * nf + nf - 2.0 + 0.5 * nf * e2 - e2) * ze
                + (nf * nf + nf + 2.0 - 0.5 * e2) * eta * ze1,
        ];
        RadialST { n, xi, eta, kind, s, t }
    }
}

pub fn radial_st(n: usize, xi: f64, eta: f64, kind: RadialKind, half_ratio: f64) -> Result<RadialST> {
    if kind == RadialKind::Hankel {
        return Err(Error::Domain("solid radial functions use kinds 1 and 2 only".into()));
    }
    let with_y = kind == RadialKind::Second;
    let mut tx = BesselTable::new(xi, with_y)?;
    let mut te = BesselTable::new(eta, with_y)?;
    tx.ensure(n + 1);
    te.ensure(n + 1);
    Ok(RadialST::from_values(
        n,
        kind,
        xi,
        tx.real(kind, n),
        tx.real(kind, n + 1),
        eta,
        te.real(kind, n),
        te.real(kind, n + 1),
        half_ratio,
    ))
}

/// Identity of one unknown coefficient. Shell and fluid indices are 0-based,
/// fluid 0 being the exterior and fluid `m` the fluid inside shell `m - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Unknown {
    /// `C_1`, multiplying `h_n(k_1 r)`.
    Exterior,
    A {
        shell: usize,
        kind: u8,
    },
    B {
        shell: usize,
        kind: u8,
    },
    /// Intermediate fluid coefficient.
    Fluid {
        fluid: usize,
        kind: u8,
    },
    /// `C_{M+1}`, multiplying `j_n(k r)` in the core.
    Core,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    Displacement,
    Pressure,
    Traction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Equation {
    pub condition: Condition,
    pub shell: usize,
    /// True at `R_0`, false at `R_1`.
    pub outer: bool,
}

fn kind_of(k: u8) -> RadialKind {
    if k == 1 {
        RadialKind::First
    } else {
        RadialKind::Second
    }
}

/// Unknowns and equations for one mode, in the global ordering.
pub fn layout(model: &ScattererModel, n: usize) -> (Vec<Unknown>, Vec<Equation>) {
    let bc = model.innermost_condition();
    let m_count = model.shell_count();
    let mut unknowns = vec![Unknown::Exterior];
    let mut equations = Vec::new();
    for m in 0..m_count {
        let last = m + 1 == m_count;
        let rigid = last && bc == BoundaryCondition::Shbc;
        let solid_to_origin = last && bc == BoundaryCondition::Esbc;
        if !rigid {
            let kinds: &[u8] = if solid_to_origin { &[1] } else { &[1, 2] };
            for &k in kinds {
                unknowns.push(Unknown::A { shell: m, kind: k });
            }
            if n > 0 {
                for &k in kinds {
                    unknowns.push(Unknown::B { shell: m, kind: k });
                }
            }
            if !last {
                unknowns.push(Unknown::Fluid { fluid: m + 1, kind: 1 });
                unknowns.push(Unknown::Fluid { fluid: m + 1, kind: 2 });
            }
        }
        let eq = |condition, outer| Equation { condition, shell: m, outer };
        equations.push(eq(Condition::Displacement, true));
        if rigid {
            break;
        }
        equations.push(eq(Condition::Pressure, true));
        if n > 0 {
            equations.push(eq(Condition::Traction, true));
        }
        if solid_to_origin {
            break;
        }
        if n > 0 {
            equations.push(eq(Condition::Traction, false));
        }
        equations.push(eq(Condition::Pressure, false));
        if !(last && bc == BoundaryCondition::Ssbc) {
            equations.push(eq(Condition::Displacement, false));
        }
    }
    if bc == BoundaryCondition::Nnbc {
        unknowns.push(Unknown::Core);
    }
    (unknowns, equations)
}

/// Wavenumbers and material constants at one frequency.
#[derive(Clone, Debug)]
pub struct FrequencyContext {
    pub omega: f64,
    /// Per shell: `(a, b, G, ½(b/a)², ρ)`.
    pub shells: Vec<ShellConstants>,
    /// Per fluid: `(k, ρ)`.
    pub fluids: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug)]
pub struct ShellConstants {
    pub a: f64,
    pub b: f64,
    pub shear: f64,
    pub half_ratio: f64,
    pub density: f64,
    pub outer: f64,
    pub inner: Option<f64>,
}

impl FrequencyContext {
    pub fn new(model: &ScattererModel, omega: f64) -> Self {
        let shells = model
            .shells()
            .iter()
            .map(|s| {
                let mat = s.material();
                let (c1, c2) = mat.wave_speeds();
                ShellConstants {
                    a: omega / c1,
                    b: omega / c2,
                    shear: mat.shear_modulus(),
                    half_ratio: mat.half_speed_ratio_sq(),
                    density: mat.density,
                    outer: s.outer_radius,
                    inner: s.inner_radius,
                }
            })
            .collect();
        let fluids = model.fluids().iter().map(|f| (f.wavenumber(omega), f.density)).collect();
        FrequencyContext { omega, shells, fluids }
    }
}

/// Shared Bessel tables keyed by argument.
#[derive(Clone, Debug, Default)]
pub struct BesselCache {
    tables: HashMap<(u64, bool), BesselTable>,
}

impl BesselCache {
    pub fn table(&mut self, x: f64, with_y: bool, n_max: usize) -> Result<&BesselTable> {
        let key = (x.to_bits(), with_y);
        if !self.tables.contains_key(&key) {
            self.tables.insert(key, BesselTable::new(x, with_y)?);
        }
        let t = self.tables.get_mut(&key).expect("inserted above");
        t.ensure(n_max);
        Ok(t)
    }
}

#[derive(Clone, Debug)]
pub struct ModalSystem {
    pub n: usize,
    pub omega: f64,
    pub h: Matrix,
    pub d: Vec<Complex64>,
    pub unknowns: Vec<Unknown>,
    /// Per column: the solved value is the coefficient times `2^e`.
    pub exponents: Vec<i32>,
    pub equations: Vec<Equation>,
    /// True when some radial table overflowed at order `n + 1`.
    pub overflow: bool,
    /// True when mode `n + 1` would overflow.
    pub overflow_next: bool,
}

impl ModalSystem {
    pub fn size(&self) -> usize {
        self.unknowns.len()
    }
}

/// Fluid terms at radius `r` bordering fluid `f`: `(unknown, kind)` pairs.
fn fluid_terms(model: &ScattererModel, f: usize) -> Vec<(Unknown, RadialKind)> {
    if f == 0 {
        vec![(Unknown::Exterior, RadialKind::Hankel)]
    } else if f == model.shell_count() {
        if model.innermost_condition() == BoundaryCondition::Nnbc {
            vec![(Unknown::Core, RadialKind::First)]
        } else {
            vec![]
        }
    } else {
        vec![
            (Unknown::Fluid { fluid: f, kind: 1 }, RadialKind::First),
            (Unknown::Fluid { fluid: f, kind: 2 }, RadialKind::Second),
        ]
    }
}

/// `Z_n`, `Z_{n+1}` at `x`, first-kind values scaled by `2^{-e}`.
fn z_pair(
    cache: &mut BesselCache,
    x: f64,
    kind: RadialKind,
    n: usize,
    e: i32,
    overflow: &mut [bool; 2],
) -> Result<(Complex64, Complex64)> {
    let t = cache.table(x, kind != RadialKind::First, n + 2)?;
    overflow[0] |= !t.usable(n + 1);
    overflow[1] |= !t.usable(n + 2);
    Ok((t.value_scaled(kind, n, e), t.value_scaled(kind, n + 1, e)))
}

/// Binary exponent carried by the coefficient of `u`.
///
/// First-kind columns are scaled by `j_n` at the outer radius of their
/// domain so that they stay representable when `j_n` underflows there.
fn column_exponent(
    model: &ScattererModel,
    ctx: &FrequencyContext,
    cache: &mut BesselCache,
    n: usize,
    u: Unknown,
) -> Result<i32> {
    let arg = match u {
        Unknown::A { shell, kind: 1 } => ctx.shells[shell].a * ctx.shells[shell].outer,
        Unknown::B { shell, kind: 1 } => ctx.shells[shell].b * ctx.shells[shell].outer,
        Unknown::Fluid { fluid, kind: 1 } => ctx.fluids[fluid].0 * ctx.shells[fluid - 1].inner.unwrap_or(0.0),
        Unknown::Core => {
            let m = model.shell_count() - 1;
            ctx.fluids[m + 1].0 * ctx.shells[m].inner.unwrap_or(0.0)
        }
        _ => return Ok(0),
    };
    let t = cache.table(arg, false, n + 2)?;
    Ok(if t.j_parts(n).0 == 0.0 { 0 } else { t.j_exponent(n) })
}

/// Assemble mode `n` using shared tables.
pub fn assemble_with(
    model: &ScattererModel,
    ctx: &FrequencyContext,
    cache: &mut BesselCache,
    n: usize,
    f1: Complex64,
    f2: Complex64,
) -> Result<ModalSystem> {
    let omega = ctx.omega;
    let (unknowns, equations) = layout(model, n);
    if unknowns.len() != equations.len() {
        return Err(Error::InvalidModel(format!(
            "layout mismatch: {} unknowns, {} equations",
            unknowns.len(),
            equations.len()
        )));
    }
    let col: HashMap<Unknown, usize> = unknowns.iter().enumerate().map(|(i, u)| (*u, i)).collect();
    let exponents = unknowns.iter().map(|u| column_exponent(model, ctx, cache, n, *u)).collect::<Result<Vec<i32>>>()?;
    let size = unknowns.len();
    let mut h = Matrix::zeros(size, size);
    let mut d = vec![Complex64::new(0.0, 0.0); size];
    let mut overflow = [false; 2];
    let nf = n as f64;

    for (row, eq) in equations.iter().enumerate() {
        let sc = ctx.shells[eq.shell];
        let r = if eq.outer { sc.outer } else { sc.inner.expect("inner equation needs an inner radius") };
        let fluid = if eq.outer { eq.shell } else { eq.shell + 1 };
        // solid contributions
        for kind in [1u8, 2] {
            for (is_a, u) in
                [(true, Unknown::A { shell: eq.shell, kind }), (false, Unknown::B { shell: eq.shell, kind })]
            {
                let Some(&c) = col.get(&u) else { continue };
                let rk = kind_of(kind);
                let arg = if is_a { sc.a * r } else { sc.b * r };
                let (z, z1) = z_pair(cache, arg, rk, n, exponents[c], &mut overflow)?;
                let st = if is_a {
                    RadialST::from_values(n, rk, arg, z.re, z1.re, 0.0, 0.0, 0.0, sc.half_ratio)
                } else {
                    RadialST::from_values(n, rk, 0.0, 0.0, 0.0, arg, z.re, z1.re, sc.half_ratio)
                };
                let idx = match eq.condition {
                    Condition::Displacement => 0,
                    Condition::Pressure => 4,
                    Condition::Traction => 6,
                };
                let v = if is_a { st.s[idx] } else { st.t[idx] };
                h.set(row, c, Complex64::new(v, 0.0));
            }
        }
        // fluid contributions
        if eq.condition != Condition::Traction && fluid < ctx.fluids.len() {
            let (k, rho) = ctx.fluids[fluid];
            for (u, rk) in fluid_terms(model, fluid) {
                let Some(&c) = col.get(&u) else { continue };
                let zeta = k * r;
                let (z, z1) = z_pair(cache, zeta, rk, n, exponents[c], &mut overflow)?;
                let v = match eq.condition {
                    Condition::Displacement => -(z * nf - z1 * zeta) / (rho * omega * omega),
                    _ => z * (r * r / (2.0 * sc.shear)),
                };
                h.set(row, c, v);
            }
            if eq.shell == 0 && eq.outer {
                let (_, rho) = ctx.fluids[0];
                d[row] = match eq.condition {
                    Condition::Displacement => f2 * (r / (rho * omega * omega)),
                    _ => -f1 * (r * r / (2.0 * sc.shear)),
                };
            }
        }
    }
    Ok(ModalSystem {
        n,
        omega,
        h,
        d,
        unknowns,
        exponents,
        equations,
        overflow: overflow[0],
        overflow_next: overflow[1],
    })
}

/// Assemble the mode-`n` system from scratch.
pub fn assemble(model: &ScattererModel, omega: f64, n: usize, f1: Complex64, f2: Complex64) -> Result<ModalSystem> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Domain(format!("angular frequency {omega} must be positive")));
    }
    let ctx = FrequencyContext::new(model, omega);
    assemble_with(model, &ctx, &mut BesselCache::default(), n, f1, f2)
}

#[derive(Clone, Debug)]
pub struct ModalSolution {
    pub n: usize,
    pub omega: f64,
    pub unknowns: Vec<Unknown>,
    /// Coefficients scaled by `2^{exponents[i]}`; see [`ModalSolution::get`].
    pub coefficients: Vec<Complex64>,
    pub exponents: Vec<i32>,
    /// 1-norm condition number of the column-scaled matrix.
    pub condition_estimate: f64,
    /// Ratio of the largest to the smallest unscaled column max-modulus.
    pub column_spread: f64,
    /// Set on the last solution a sweep can produce.
    pub overflow_flag: bool,
    pub resonance_suspect: bool,
}

impl ModalSolution {
    /// The coefficient of `u`, zero when absent. May overflow for
    /// first-kind coefficients deep in the evanescent range; use
    /// [`ModalSolution::get_scaled`] there.
    pub fn get(&self, u: Unknown) -> Complex64 {
        let (c, e) = self.get_scaled(u);
        Complex64::new(ldexp(c.re, -e), ldexp(c.im, -e))
    }

    /// `(c, e)` with the coefficient equal to `c·2^{-e}`.
    pub fn get_scaled(&self, u: Unknown) -> (Complex64, i32) {
        self.unknowns
            .iter()
            .position(|&v| v == u)
            .map_or((Complex64::new(0.0, 0.0), 0), |i| (self.coefficients[i], self.exponents[i]))
    }

    pub fn has(&self, u: Unknown) -> bool {
        self.unknowns.contains(&u)
    }

    /// A zero solution, used in place of a singular mode.
    pub fn zero(n: usize, omega: f64, unknowns: Vec<Unknown>) -> Self {
        let c = vec![Complex64::new(0.0, 0.0); unknowns.len()];
        ModalSolution {
            n,
            omega,
            exponents: vec![0; unknowns.len()],
            unknowns,
            coefficients: c,
            condition_estimate: f64::INFINITY,
            column_spread: f64::NAN,
            overflow_flag: false,
            resonance_suspect: true,
        }
    }
}

const GROWTH_SUSPECT: f64 = 1e8;

/// Column-scaled LU solve.
pub fn precondition_solve(sys: &ModalSystem) -> Result<ModalSolution> {
    let size = sys.size();
    let singular = || Error::SingularSystem { n: sys.n, omega: sys.omega };
    let p: Vec<f64> = (0..size).map(|j| sys.h.column_max(j)).collect();
    if p.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(singular());
    }
    let mut scaled = sys.h.clone();
    for i in 0..size {
        for j in 0..size {
            let v = scaled.get(i, j) / p[j];
            scaled.set(i, j, v);
        }
    }
    let lu = Lu::factor(&scaled).ok_or_else(singular)?;
    let ct = lu.solve(&sys.d);
    let coefficients: Vec<Complex64> = ct.iter().zip(&p).map(|(c, p)| c / p).collect();
    if coefficients.iter().any(|c| !c.is_finite()) {
        return Err(singular());
    }
    let condition_estimate = scaled.norm1() * lu.inverse_norm1();
    let pmax = p.iter().cloned().fold(0.0, f64::max);
    let pmin = p.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ModalSolution {
        n: sys.n,
        omega: sys.omega,
        unknowns: sys.unknowns.clone(),
        coefficients,
        exponents: sys.exponents.clone(),
        condition_estimate,
        column_spread: pmax / pmin,
        overflow_flag: sys.overflow,
        resonance_suspect: lu.growth > GROWTH_SUSPECT || !condition_estimate.is_finite(),
    })
}

/// Plain LU solve without column scaling, for comparison.
pub fn unscaled_solve(sys: &ModalSystem) -> Result<Vec<Complex64>> {
    let lu = Lu::factor(&sys.h).ok_or(Error::SingularSystem { n: sys.n, omega: sys.omega })?;
    Ok(lu.solve(&sys.d))
}

/// Mode-by-mode solutions at one frequency.
pub struct ModalSweep<'a> {
    model: &'a ScattererModel,
    ctx: FrequencyContext,
    cache: BesselCache,
    /// Forcing for unit amplitude; solutions are scaled by `amplitude`.
    forcing: Forcing,
    amplitude: Complex64,
    next: usize,
    done: bool,
}

impl<'a> ModalSweep<'a> {
    pub fn new(model: &'a ScattererModel, incident: &IncidentField, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Domain(format!("angular frequency {omega} must be positive")));
        }
        incident.validate(model.outer_radius())?;
        let ctx = FrequencyContext::new(model, omega);
        let k1 = ctx.fluids[0].0;
        Ok(ModalSweep {
            model,
            forcing: Forcing::new(incident.with_amplitude(Complex64::new(1.0, 0.0)), k1, model.outer_radius()),
            amplitude: incident.amplitude,
            ctx,
            cache: BesselCache::default(),
            next: 0,
            done: false,
        })
    }

    pub fn context(&self) -> &FrequencyContext {
        &self.ctx
    }

    /// Solve mode `n`, also reporting whether mode `n + 1` would overflow.
    fn solve_mode(&mut self, n: usize) -> Result<(ModalSolution, bool)> {
        let r01 = self.model.outer_radius();
        let k1 = self.ctx.fluids[0].0;
        let ext = self.cache.table(k1 * r01, true, n + 2)?;
        let (f1, f2) = self.forcing.get(n, ext)?;
        let sys = assemble_with(self.model, &self.ctx, &mut self.cache, n, f1, f2)?;
        if sys.overflow {
            return Ok((ModalSolution::zero(n, self.ctx.omega, sys.unknowns), true));
        }
        let ahead = sys.overflow_next;
        let mut sol = precondition_solve(&sys)?;
        // exact linearity in the amplitude, independent of solver rounding
        sol.coefficients.iter_mut().for_each(|c| *c *= self.amplitude);
        sol.overflow_flag = ahead;
        Ok((sol, ahead))
    }
}

impl Iterator for ModalSweep<'_> {
    type Item = Result<ModalSolution>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let n = self.next;
        self.next += 1;
        match self.solve_mode(n) {
            Ok((sol, stop)) => {
                if stop {
                    self.done = true;
                }
                Some(Ok(sol))
            }
            Err(e @ Error::SingularSystem { .. }) => Some(Err(e)),
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

pub fn modal_sweep<'a>(model: &'a ScattererModel, incident: &IncidentField, omega: f64) -> Result<ModalSweep<'a>> {
    ModalSweep::new(model, incident, omega)
}
