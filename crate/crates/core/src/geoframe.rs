//! The geometric moving frame `{x, y, b, l}` at general-type points, the
//! eight geometric functions, class predicates and the integrability
//! residuals of the frame equations.
//!
//! With `Z = (x, y, b, l)` the frame equations read
//!
//! ```text
//! ∇'_x x = −γ₁ y + εν₁ b           ∇'_y x = −γ₂ y + ελ b − εμ l
//! ∇'_x y = −γ₁ x + ελ b − εμ l     ∇'_y y = −γ₂ x + εν₂ b
//! ∇'_x b = −ν₁ x + λ y − εβ₁ l     ∇'_y b = −λ x + ν₂ y − εβ₂ l
//! ∇'_x l = μ y − εβ₁ b             ∇'_y l = −μ x − εβ₂ b
//! ```
//!
//! with `⟨x,x⟩ = 1`, `⟨y,y⟩ = −1`, `⟨b,b⟩ = ε`, `⟨l,l⟩ = −ε`.
//!
//! Coordinates need not be principal. The tangent coframe is stored as
//! `z_u = p x + q y`, `z_v = r x + s y`; in principal coordinates
//! `p = √E`, `s = √−G` and `q = r = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Domain, Field2, GridSpec};
use crate::invariants::{second_order_invariants, PointType};
use crate::jets::{evaluate_jet, FundamentalData, JetSource, SurfaceSpec, DEFAULT_FD_STEP};
use crate::pe4::{gram_residual, inner, orientation, Frame4, Vec4};

/// Relative threshold below which μ or ν₁ − ν₂ count as vanishing.
pub const GENERAL_TYPE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GfValues {
    pub gamma1: f64,
    pub gamma2: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub lambda: f64,
    pub mu: f64,
    pub beta1: f64,
    pub beta2: f64,
}

/// Components of `z_u, z_v` in the tangent frame: `z_u = p x + q y`,
/// `z_v = r x + s y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coframe {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

impl Coframe {
    pub fn principal(sqrt_e: f64, sqrt_neg_g: f64) -> Self {
        Self { p: sqrt_e, q: 0.0, r: 0.0, s: sqrt_neg_g }
    }

    pub fn det(&self) -> f64 {
        self.p * self.s - self.q * self.r
    }

    /// Directional derivatives `(x(f), y(f))` from coordinate ones.
    pub fn directional(&self, f_u: f64, f_v: f64) -> (f64, f64) {
        let det = self.det();
        ((self.s * f_u - self.q * f_v) / det, (self.p * f_v - self.r * f_u) / det)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricFunctions {
    pub values: GfValues,
    pub eps: i8,
    /// `e = [x, y, b, l]` with signature `(1, −1, ε, −ε)`.
    pub frame: Frame4,
    pub coframe: Coframe,
}

impl GeometricFunctions {
    pub fn gauss_curvature(&self) -> f64 {
        let v = &self.values;
        self.eps as f64 * (v.lambda * v.lambda - v.mu * v.mu - v.nu1 * v.nu2)
    }

    pub fn normal_curvature(&self) -> f64 {
        self.values.mu * (self.values.nu1 + self.values.nu2)
    }

    pub fn k_invariant(&self) -> f64 {
        let v = &self.values;
        4.0 * v.mu * v.mu * v.nu1 * v.nu2
    }

    pub fn mean_curvature(&self) -> Vec4 {
        let v = &self.values;
        self.frame.e[2] * (self.eps as f64 * 0.5 * (v.nu1 - v.nu2))
    }
}

/// Frame signature `(1, −1, ε, −ε)`.
pub fn frame_signature(eps: i8) -> [f64; 4] {
    let e = eps as f64;
    [1.0, -1.0, e, -e]
}

/// Pointwise data of the principal frame.
#[derive(Debug, Clone, Copy)]
struct PrincipalPoint {
    frame: [Vec4; 4],
    eps: i8,
    /// Components of x and y in the basis {z_u, z_v}.
    x_c: (f64, f64),
    y_c: (f64, f64),
    nu1: f64,
    nu2: f64,
    lambda: f64,
    mu: f64,
    coframe: Coframe,
    /// Typical size of σ on unit vectors; scale for zero tests.
    sigma_scale: f64,
}

fn not_general(reason: impl Into<String>) -> Error {
    Error::NotGeneralType { reason: reason.into() }
}

fn principal_point(fund: &FundamentalData) -> Result<PrincipalPoint> {
    let report = second_order_invariants(fund);
    match report.point_class.kind {
        PointType::Flat => return Err(not_general("flat point")),
        PointType::UmbilicalMinimal => return Err(not_general("umbilical (minimal) point")),
        PointType::QuasiMinimal => return Err(not_general("quasi-minimal point")),
        _ => {}
    }
    if report.point_class.discriminant_sign <= 0 {
        return Err(Error::NoPrincipalTangents { discriminant: report.kappa * report.kappa - report.k });
    }
    let (e, f) = (fund.e, fund.f);
    let det = fund.e * fund.g - f * f;
    // pseudo-orthonormal tangent basis: e_t spacelike along z_u, f_t timelike
    let e_c = (1.0 / e.sqrt(), 0.0);
    let sf = (-det / e).sqrt();
    let f_c = (-f / e / sf, 1.0 / sf);
    let form = |a: (f64, f64), b: (f64, f64)| {
        report.l * a.0 * b.0 + report.m * (a.0 * b.1 + a.1 * b.0) + report.n * a.1 * b.1
    };
    let (l2, m2, n2) = (form(e_c, e_c), form(e_c, f_c), form(f_c, f_c));
    // x = cosh t e + sinh t f, y = sinh t e + cosh t f diagonalize the form
    let ratio = -2.0 * m2 / (l2 + n2);
    if !(ratio.abs() < 1.0) {
        return Err(Error::NoPrincipalTangents { discriminant: report.kappa * report.kappa - report.k });
    }
    let t = 0.5 * ratio.atanh();
    let (ch, sh) = (t.cosh(), t.sinh());
    let x_c = (ch * e_c.0 + sh * f_c.0, ch * e_c.1 + sh * f_c.1);
    let y_c = (sh * e_c.0 + ch * f_c.0, sh * e_c.1 + ch * f_c.1);
    let (x, y) = (fund.tangent(x_c), fund.tangent(y_c));

    let sxx = fund.sigma(x_c, x_c);
    let syy = fund.sigma(y_c, y_c);
    let sxy = fund.sigma(x_c, y_c);
    let h = (sxx - syy) * 0.5;
    let hh = inner(h, h);
    let eps: i8 = if hh > 0.0 { 1 } else { -1 };
    let epsf = eps as f64;
    let b = h * (epsf / (epsf * hh).sqrt());
    let seed = if eps > 0 { fund.n2 } else { fund.n1 };
    let l_raw = seed - b * (inner(seed, b) * epsf);
    let mut l = l_raw * (1.0 / inner(l_raw, l_raw).abs().sqrt());
    if orientation(x, y, b, l) < 0.0 {
        l = -l;
    }
    let coframe = Coframe {
        p: inner(fund.jet.z_u, x),
        q: -inner(fund.jet.z_u, y),
        r: inner(fund.jet.z_v, x),
        s: -inner(fund.jet.z_v, y),
    };
    let sigma_scale = sxx.max_abs().max(syy.max_abs()).max(sxy.max_abs());
    Ok(PrincipalPoint {
        frame: [x, y, b, l],
        eps,
        x_c,
        y_c,
        nu1: inner(sxx, b),
        nu2: inner(syy, b),
        lambda: inner(sxy, b),
        mu: inner(sxy, l),
        coframe,
        sigma_scale,
    })
}

fn principal_point_at(spec: &SurfaceSpec, u: f64, v: f64) -> Result<PrincipalPoint> {
    principal_point(&FundamentalData::from_jet(&evaluate_jet(spec, u, v)?)?)
}

/// The geometric frame `{x, y, b, l}` at `(u, v)`.
pub fn principal_frame_at(spec: &SurfaceSpec, u: f64, v: f64) -> Result<Frame4> {
    let p = principal_point_at(spec, u, v)?;
    Ok(Frame4::new(p.frame, frame_signature(p.eps)))
}

/// Checks that a neighbouring frame lies on the same branch as the centre.
fn same_branch(center: &PrincipalPoint, other: &PrincipalPoint) -> bool {
    if center.eps != other.eps {
        return false;
    }
    let sig = frame_signature(center.eps);
    (0..4).all(|k| inner(center.frame[k], other.frame[k]) * sig[k] > 0.5)
}

/// Geometric functions at `(u, v)`; the derivative functions γ and β use
/// central differences of the frame field with step `h` (for sampled
/// surfaces the grid spacing is used instead).
pub fn geometric_functions_at(spec: &SurfaceSpec, u: f64, v: f64, h: f64) -> Result<GeometricFunctions> {
    if !(h > 0.0) {
        return Err(Error::NonPositive { what: "frame difference step".into(), value: h });
    }
    let (hu, hv) = match &spec.source {
        JetSource::Sampled { grid, .. } => (grid.hu(), grid.hv()),
        _ => (h, h),
    };
    let c = principal_point_at(spec, u, v)?;
    let tol = GENERAL_TYPE_TOL * c.sigma_scale;
    if c.mu.abs() <= tol {
        return Err(not_general("mu vanishes"));
    }
    if (c.nu1 - c.nu2).abs() <= tol {
        return Err(not_general("nu1 = nu2"));
    }
    let neighbour = |du: f64, dv: f64| -> Result<PrincipalPoint> {
        let p = principal_point_at(spec, u + du, v + dv)?;
        if same_branch(&c, &p) {
            Ok(p)
        } else {
            Err(Error::FrameBranchFlip { u, v })
        }
    };
    let (up, um) = (neighbour(hu, 0.0)?, neighbour(-hu, 0.0)?);
    let (vp, vm) = (neighbour(0.0, hv)?, neighbour(0.0, -hv)?);
    let d_u = |k: usize| (up.frame[k] - um.frame[k]) * (0.5 / hu);
    let d_v = |k: usize| (vp.frame[k] - vm.frame[k]) * (0.5 / hv);
    let along = |dir: (f64, f64), k: usize| d_u(k) * dir.0 + d_v(k) * dir.1;
    let [_, y, _, l] = c.frame;
    let values = GfValues {
        gamma1: inner(along(c.x_c, 0), y),
        gamma2: inner(along(c.y_c, 0), y),
        nu1: c.nu1,
        nu2: c.nu2,
        lambda: c.lambda,
        mu: c.mu,
        beta1: inner(along(c.x_c, 2), l),
        beta2: inner(along(c.y_c, 2), l),
    };
    Ok(GeometricFunctions {
        values,
        eps: c.eps,
        frame: Frame4::new(c.frame, frame_signature(c.eps)),
        coframe: c.coframe,
    })
}

/// Frame and position at one grid node, used to seed reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub node: [usize; 2],
    pub position: Vec4,
    /// `[x, y, b, l]`.
    pub frame: [Vec4; 4],
}

/// Geometric functions sampled on a rectangular grid.
///
/// JSON layout: `{domain, nu, nv, hu, hv, eps, gamma1, ..., beta2, sqrt_e,
/// sqrt_neg_g[, coframe_uy, coframe_vx][, anchor]}` with every field a
/// nested array `f[i][j]` (`u` index outermost). `sqrt_e` and `sqrt_neg_g`
/// hold the coframe entries `p` and `s`; the optional `coframe_uy` (`q`) and
/// `coframe_vx` (`r`) default to zero, i.e. principal coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GFGrid {
    pub domain: Domain,
    pub nu: usize,
    pub nv: usize,
    pub hu: f64,
    pub hv: f64,
    pub eps: i8,
    pub gamma1: Field2,
    pub gamma2: Field2,
    pub nu1: Field2,
    pub nu2: Field2,
    pub lambda: Field2,
    pub mu: Field2,
    pub beta1: Field2,
    pub beta2: Field2,
    pub sqrt_e: Field2,
    pub sqrt_neg_g: Field2,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coframe_uy: Option<Field2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coframe_vx: Option<Field2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Anchor>,
}

impl GFGrid {
    /// Grid with every function constant, in principal coordinates.
    pub fn constant(grid: GridSpec, eps: i8, values: GfValues, sqrt_e: f64, sqrt_neg_g: f64) -> Self {
        let f = |x: f64| Field2::filled(grid.nu, grid.nv, x);
        GFGrid {
            domain: grid.domain,
            nu: grid.nu,
            nv: grid.nv,
            hu: grid.hu(),
            hv: grid.hv(),
            eps,
            gamma1: f(values.gamma1),
            gamma2: f(values.gamma2),
            nu1: f(values.nu1),
            nu2: f(values.nu2),
            lambda: f(values.lambda),
            mu: f(values.mu),
            beta1: f(values.beta1),
            beta2: f(values.beta2),
            sqrt_e: f(sqrt_e),
            sqrt_neg_g: f(sqrt_neg_g),
            coframe_uy: None,
            coframe_vx: None,
            anchor: None,
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec { domain: self.domain, nu: self.nu, nv: self.nv }
    }

    fn fields(&self) -> [(&'static str, &Field2); 10] {
        [
            ("gamma1", &self.gamma1),
            ("gamma2", &self.gamma2),
            ("nu1", &self.nu1),
            ("nu2", &self.nu2),
            ("lambda", &self.lambda),
            ("mu", &self.mu),
            ("beta1", &self.beta1),
            ("beta2", &self.beta2),
            ("sqrt_e", &self.sqrt_e),
            ("sqrt_neg_g", &self.sqrt_neg_g),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let spec = GridSpec::new(self.domain, self.nu, self.nv)?;
        if self.eps != 1 && self.eps != -1 {
            return Err(Error::Invalid(format!("eps must be +1 or -1, got {}", self.eps)));
        }
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs();
        if !close(self.hu, spec.hu()) || !close(self.hv, spec.hv()) {
            return Err(Error::Invalid(format!(
                "spacing ({}, {}) does not match domain and node counts ({}, {})",
                self.hu,
                self.hv,
                spec.hu(),
                spec.hv()
            )));
        }
        let optional = [("coframe_uy", &self.coframe_uy), ("coframe_vx", &self.coframe_vx)];
        let all = self.fields().into_iter().chain(optional.iter().filter_map(|(n, f)| f.as_ref().map(|f| (*n, f))));
        for (name, field) in all {
            if field.shape() != (self.nu, self.nv) {
                return Err(Error::Invalid(format!(
                    "field {name} has shape {:?}, expected ({}, {})",
                    field.shape(),
                    self.nu,
                    self.nv
                )));
            }
            if field.values().iter().any(|x| !x.is_finite()) {
                return Err(Error::Invalid(format!("field {name} has non-finite entries")));
            }
        }
        if let Some(a) = &self.anchor {
            if a.node[0] >= self.nu || a.node[1] >= self.nv {
                return Err(Error::Invalid(format!("anchor node {:?} is outside the grid", a.node)));
            }
        }
        Ok(())
    }

    pub fn values(&self, i: usize, j: usize) -> GfValues {
        GfValues {
            gamma1: self.gamma1.get(i, j),
            gamma2: self.gamma2.get(i, j),
            nu1: self.nu1.get(i, j),
            nu2: self.nu2.get(i, j),
            lambda: self.lambda.get(i, j),
            mu: self.mu.get(i, j),
            beta1: self.beta1.get(i, j),
            beta2: self.beta2.get(i, j),
        }
    }

    pub fn coframe(&self, i: usize, j: usize) -> Coframe {
        Coframe {
            p: self.sqrt_e.get(i, j),
            q: self.coframe_uy.as_ref().map_or(0.0, |f| f.get(i, j)),
            r: self.coframe_vx.as_ref().map_or(0.0, |f| f.get(i, j)),
            s: self.sqrt_neg_g.get(i, j),
        }
    }

    /// Whether the grid is in principal coordinates (`q = r = 0`).
    pub fn is_principal(&self) -> bool {
        let zero = |f: &Option<Field2>| f.as_ref().is_none_or(|f| f.max_abs() == 0.0);
        zero(&self.coframe_uy) && zero(&self.coframe_vx)
    }

    pub fn set_values(&mut self, i: usize, j: usize, v: GfValues) {
        self.gamma1.set(i, j, v.gamma1);
        self.gamma2.set(i, j, v.gamma2);
        self.nu1.set(i, j, v.nu1);
        self.nu2.set(i, j, v.nu2);
        self.lambda.set(i, j, v.lambda);
        self.mu.set(i, j, v.mu);
        self.beta1.set(i, j, v.beta1);
        self.beta2.set(i, j, v.beta2);
    }

    pub fn set_coframe(&mut self, i: usize, j: usize, c: Coframe) {
        self.sqrt_e.set(i, j, c.p);
        self.sqrt_neg_g.set(i, j, c.s);
        let (nu, nv) = (self.nu, self.nv);
        self.coframe_uy.get_or_insert_with(|| Field2::filled(nu, nv, 0.0)).set(i, j, c.q);
        self.coframe_vx.get_or_insert_with(|| Field2::filled(nu, nv, 0.0)).set(i, j, c.r);
    }
}

/// Extracts geometric functions at every node of `grid`. The anchor stores
/// the frame and position at node `anchor`.
pub fn extract_gf_grid(spec: &SurfaceSpec, grid: GridSpec, h: f64, anchor: (usize, usize)) -> Result<GFGrid> {
    if anchor.0 >= grid.nu || anchor.1 >= grid.nv {
        return Err(Error::Invalid(format!("anchor node {anchor:?} is outside the grid")));
    }
    let mut out: Option<GFGrid> = None;
    for (i, j) in grid.nodes() {
        let (u, v) = (grid.u(i), grid.v(j));
        let gf = geometric_functions_at(spec, u, v, h)?;
        let g = out.get_or_insert_with(|| GFGrid::constant(grid, gf.eps, GfValues::default(), 0.0, 0.0));
        if gf.eps != g.eps {
            return Err(not_general(format!(
                "mean curvature vector changes causal character at ({u}, {v})"
            )));
        }
        g.set_values(i, j, gf.values);
        g.set_coframe(i, j, gf.coframe);
        if (i, j) == anchor {
            g.anchor = Some(Anchor { node: [i, j], position: spec.position(u, v)?, frame: gf.frame.e });
        }
    }
    Ok(out.expect("grid has nodes"))
}

/// Convenience wrapper using [`DEFAULT_FD_STEP`] and the centre node as anchor.
pub fn extract_gf_grid_default(spec: &SurfaceSpec, grid: GridSpec) -> Result<GFGrid> {
    extract_gf_grid(spec, grid, DEFAULT_FD_STEP, (grid.nu / 2, grid.nv / 2))
}

/// Outcome of one class predicate: its defining residual and the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub residual: f64,
    pub holds: bool,
}

impl Predicate {
    fn new(residual: f64, tol: f64) -> Self {
        Self { residual, holds: residual <= tol }
    }
}

/// Constancy predicates are `None` when evaluated at a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassFlags {
    pub flat_k: Predicate,
    pub constant_k: Option<Predicate>,
    pub flat_normal: Predicate,
    pub constant_normal: Option<Predicate>,
    pub cmc: Option<Predicate>,
    pub parallel_h: Option<Predicate>,
    pub pnmcv: Predicate,
    pub chen: Predicate,
}

fn max_over<'a>(items: impl Iterator<Item = &'a GfValues>, f: impl Fn(&GfValues) -> f64) -> f64 {
    items.fold(0.0_f64, |m, v| m.max(f(v).abs()))
}

fn variation<'a>(items: impl Iterator<Item = &'a GfValues>, f: impl Fn(&GfValues) -> f64) -> f64 {
    let (lo, hi) = items.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        let x = f(v);
        (lo.min(x), hi.max(x))
    });
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

fn flat_k(v: &GfValues) -> f64 {
    v.lambda * v.lambda - v.mu * v.mu - v.nu1 * v.nu2
}

fn class_flags(values: &[GfValues], eps: i8, grid: bool, tol: f64) -> ClassFlags {
    let it = || values.iter();
    let beta = max_over(it(), |v| v.beta1.abs().max(v.beta2.abs()));
    let cmc = variation(it(), |v| v.nu1 - v.nu2);
    let constancy = |r: f64| grid.then(|| Predicate::new(r, tol));
    ClassFlags {
        flat_k: Predicate::new(max_over(it(), flat_k), tol),
        constant_k: constancy(variation(it(), |v| eps as f64 * flat_k(v))),
        flat_normal: Predicate::new(max_over(it(), |v| v.nu1 + v.nu2), tol),
        constant_normal: constancy(variation(it(), |v| v.mu * (v.nu1 + v.nu2))),
        cmc: constancy(cmc),
        parallel_h: constancy(beta.max(cmc)),
        pnmcv: Predicate::new(beta, tol),
        chen: Predicate::new(max_over(it(), |v| v.lambda), tol),
    }
}

pub fn class_predicates_point(gf: &GeometricFunctions, tol: f64) -> ClassFlags {
    class_flags(&[gf.values], gf.eps, false, tol)
}

pub fn class_predicates_grid(grid: &GFGrid, tol: f64) -> ClassFlags {
    let values: Vec<GfValues> = grid.grid_spec().nodes().map(|(i, j)| grid.values(i, j)).collect();
    class_flags(&values, grid.eps, true, tol)
}

/// Signed residual fields (LHS − RHS) of the six integrability conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityResiduals {
    pub r: [Field2; 6],
    /// Compatibility of the coframe with the connection (`z_uv = z_vu`),
    /// components along x and y.
    pub coframe: [Field2; 2],
}

impl IntegrabilityResiduals {
    pub fn max_abs(&self) -> [f64; 6] {
        std::array::from_fn(|k| self.r[k].max_abs())
    }

    pub fn max_coframe(&self) -> f64 {
        self.coframe[0].max_abs().max(self.coframe[1].max_abs())
    }

    /// Largest residual over all eight fields.
    pub fn overall(&self) -> f64 {
        self.max_abs().into_iter().fold(self.max_coframe(), f64::max)
    }
}

/// Evaluates the integrability conditions with directional derivatives
/// realized by grid differences (central inside, one-sided second order on
/// the boundary).
pub fn integrability_residuals(grid: &GFGrid) -> Result<IntegrabilityResiduals> {
    grid.validate()?;
    let (hu, hv) = (grid.hu, grid.hv);
    let eps = grid.eps as f64;
    let zeros = Field2::filled(grid.nu, grid.nv, 0.0);
    let q_field = grid.coframe_uy.clone().unwrap_or_else(|| zeros.clone());
    let r_field = grid.coframe_vx.clone().unwrap_or_else(|| zeros.clone());
    let mut r: [Field2; 6] = std::array::from_fn(|_| zeros.clone());
    let mut cf: [Field2; 2] = std::array::from_fn(|_| zeros.clone());
    for (i, j) in grid.grid_spec().nodes() {
        let v = grid.values(i, j);
        let c = grid.coframe(i, j);
        let dir = |f: &Field2| c.directional(f.d_u(i, j, hu), f.d_v(i, j, hv));
        let (x_mu, y_mu) = dir(&grid.mu);
        let (x_la, y_la) = dir(&grid.lambda);
        let (_, y_n1) = dir(&grid.nu1);
        let (x_n2, _) = dir(&grid.nu2);
        let (x_b2, _) = dir(&grid.beta2);
        let (_, y_b1) = dir(&grid.beta1);
        let (x_g2, _) = dir(&grid.gamma2);
        let (_, y_g1) = dir(&grid.gamma1);
        let (g1, g2, n1, n2, la, mu, b1, b2) =
            (v.gamma1, v.gamma2, v.nu1, v.nu2, v.lambda, v.mu, v.beta1, v.beta2);
        r[0].set(i, j, 2.0 * mu * g2 - eps * la * b1 + eps * n1 * b2 - x_mu);
        r[1].set(i, j, 2.0 * mu * g1 + eps * n2 * b1 - eps * la * b2 - y_mu);
        r[2].set(i, j, 2.0 * la * g2 - eps * mu * b1 - (n1 + n2) * g1 - (x_la - y_n1));
        r[3].set(i, j, 2.0 * la * g1 - eps * mu * b2 - (n1 + n2) * g2 - (-x_n2 + y_la));
        r[4].set(i, j, g1 * b1 - g2 * b2 + (n1 + n2) * mu - (-x_b2 + y_b1));
        r[5].set(i, j, eps * (la * la - mu * mu - n1 * n2) - (x_g2 - y_g1 + g1 * g1 - g2 * g2));

        let gu = c.p * g1 + c.q * g2;
        let gv = c.r * g1 + c.s * g2;
        let p_v = grid.sqrt_e.d_v(i, j, hv);
        let s_u = grid.sqrt_neg_g.d_u(i, j, hu);
        let q_v = q_field.d_v(i, j, hv);
        let r_u = r_field.d_u(i, j, hu);
        cf[0].set(i, j, p_v - r_u - c.q * gv + c.s * gu);
        cf[1].set(i, j, q_v - s_u - c.p * gv + c.r * gu);
    }
    Ok(IntegrabilityResiduals { r, coframe: cf })
}

/// Gram residual of the frame against signature `(1, −1, ε, −ε)`.
pub fn frame_gram_residual(gf: &GeometricFunctions) -> f64 {
    gram_residual(&gf.frame)
}
