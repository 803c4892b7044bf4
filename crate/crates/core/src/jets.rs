//! Surface specifications, 2-jets, the first fundamental form, normal frames
//! and the splitting of second derivatives into Christoffel symbols and
//! normal coefficients.
//!
//! Second derivatives are decomposed as
//!
//! ```text
//! z_ij = Γ¹_ij z_u − Γ²_ij z_v + c¹_ij n1 − c²_ij n2,   ij ∈ {uu, uv, vv}
//! ```
//!
//! so that `c¹_ij = <z_ij, n1>` and `c²_ij = <z_ij, n2>` with `<n1,n1> = 1`,
//! `<n2,n2> = -1`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::grid::{Domain, GridSpec};
use crate::pe4::{inner, orientation, Vec4};

/// Default finite-difference step for numeric jets.
pub const DEFAULT_FD_STEP: f64 = 1e-4;
/// Basis condition number above which the decomposition is refused.
pub const MAX_BASIS_CONDITION: f64 = 1e12;

/// Index of the pairs `11`, `12`, `22` in coefficient arrays.
pub const UU: usize = 0;
pub const UV: usize = 1;
pub const VV: usize = 2;

/// Position and first and second partial derivatives at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceJet {
    pub z: Vec4,
    pub z_u: Vec4,
    pub z_v: Vec4,
    pub z_uu: Vec4,
    pub z_uv: Vec4,
    pub z_vv: Vec4,
}

impl SurfaceJet {
    pub fn second(&self) -> [Vec4; 3] {
        [self.z_uu, self.z_uv, self.z_vv]
    }

    /// Jet after the linear change `u = a ū + b v̄, v = c ū + d v̄`, with
    /// `jac = [[a, b], [c, d]] = [[u_ū, u_v̄], [v_ū, v_v̄]]`.
    pub fn linear_reparam(&self, jac: [[f64; 2]; 2]) -> SurfaceJet {
        let [[uu, uv], [vu, vv]] = jac;
        let quad = |p: (f64, f64), q: (f64, f64)| {
            self.z_uu * (p.0 * q.0) + self.z_uv * (p.0 * q.1 + p.1 * q.0) + self.z_vv * (p.1 * q.1)
        };
        let col_u = (uu, vu);
        let col_v = (uv, vv);
        SurfaceJet {
            z: self.z,
            z_u: self.z_u * uu + self.z_v * vu,
            z_v: self.z_u * uv + self.z_v * vv,
            z_uu: quad(col_u, col_u),
            z_uv: quad(col_u, col_v),
            z_vv: quad(col_v, col_v),
        }
    }

    /// Swaps the roles of `u` and `v`.
    pub fn swapped(&self) -> SurfaceJet {
        SurfaceJet {
            z: self.z,
            z_u: self.z_v,
            z_v: self.z_u,
            z_uu: self.z_vv,
            z_uv: self.z_uv,
            z_vv: self.z_uu,
        }
    }
}

pub type PositionFn = Arc<dyn Fn(f64, f64) -> Vec4 + Send + Sync>;
pub type JetFn = Arc<dyn Fn(f64, f64) -> SurfaceJet + Send + Sync>;

/// How a surface produces jets.
#[derive(Clone)]
pub enum JetSource {
    /// Exact derivatives supplied by the caller.
    Analytic(JetFn),
    /// Second-order central differences of the position with step `h`.
    Numeric { z: PositionFn, h: f64 },
    /// Positions sampled on a grid; jets exist at nodes at least two
    /// spacings from the boundary and use fourth-order central stencils.
    Sampled { grid: GridSpec, z: Arc<Vec<Vec4>> },
}

/// A parametrized surface patch `z(u, v)` in E^4_2.
#[derive(Clone)]
pub struct SurfaceSpec {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub domain: Domain,
    pub source: JetSource,
}

impl fmt::Debug for SurfaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.source {
            JetSource::Analytic(_) => "analytic".to_string(),
            JetSource::Numeric { h, .. } => format!("numeric(h={h})"),
            JetSource::Sampled { grid, .. } => format!("sampled({}x{})", grid.nu, grid.nv),
        };
        f.debug_struct("SurfaceSpec")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("domain", &self.domain)
            .field("source", &kind)
            .finish()
    }
}

impl SurfaceSpec {
    pub fn analytic(
        name: impl Into<String>,
        domain: Domain,
        jet: impl Fn(f64, f64) -> SurfaceJet + Send + Sync + 'static,
    ) -> Result<Self> {
        domain.validate()?;
        Ok(Self {
            name: name.into(),
            params: BTreeMap::new(),
            domain,
            source: JetSource::Analytic(Arc::new(jet)),
        })
    }

    pub fn numeric(
        name: impl Into<String>,
        domain: Domain,
        h: f64,
        z: impl Fn(f64, f64) -> Vec4 + Send + Sync + 'static,
    ) -> Result<Self> {
        domain.validate()?;
        if !(h > 0.0) {
            return Err(Error::NonPositive { what: "finite-difference step".into(), value: h });
        }
        Ok(Self {
            name: name.into(),
            params: BTreeMap::new(),
            domain,
            source: JetSource::Numeric { z: Arc::new(z), h },
        })
    }

    pub fn sampled(name: impl Into<String>, grid: GridSpec, z: Vec<Vec4>) -> Result<Self> {
        if z.len() != grid.len() {
            return Err(Error::Invalid(format!(
                "sampled surface has {} points for a {}x{} grid",
                z.len(),
                grid.nu,
                grid.nv
            )));
        }
        if grid.nu < 5 || grid.nv < 5 {
            return Err(Error::GridTooSmall { nu: grid.nu, nv: grid.nv, min: 5 });
        }
        Ok(Self {
            name: name.into(),
            params: BTreeMap::new(),
            domain: grid.domain,
            source: JetSource::Sampled { grid, z: Arc::new(z) },
        })
    }

    pub fn with_params(mut self, params: BTreeMap<String, f64>) -> Self {
        self.params = params;
        self
    }

    /// Same position data, jets by central differences with step `h`.
    pub fn to_numeric(&self, h: f64) -> Result<Self> {
        let z: PositionFn = match &self.source {
            JetSource::Analytic(jet) => {
                let jet = Arc::clone(jet);
                Arc::new(move |u, v| jet(u, v).z)
            }
            JetSource::Numeric { z, .. } => Arc::clone(z),
            JetSource::Sampled { .. } => {
                return Err(Error::Invalid("sampled surfaces have no continuous position".into()))
            }
        };
        let mut out = SurfaceSpec::numeric(self.name.clone(), self.domain, h, move |u, v| z(u, v))?;
        out.params = self.params.clone();
        Ok(out)
    }

    /// Spacing of the stencil used by [`evaluate_jet`], if any.
    pub fn stencil_step(&self) -> Option<(f64, f64)> {
        match &self.source {
            JetSource::Analytic(_) => None,
            JetSource::Numeric { h, .. } => Some((*h, *h)),
            JetSource::Sampled { grid, .. } => Some((grid.hu(), grid.hv())),
        }
    }

    pub fn position(&self, u: f64, v: f64) -> Result<Vec4> {
        Ok(evaluate_jet(self, u, v)?.z)
    }
}

/// Evaluates the 2-jet of `spec` at `(u, v)`.
pub fn evaluate_jet(spec: &SurfaceSpec, u: f64, v: f64) -> Result<SurfaceJet> {
    let domain_err = || Error::Domain { u, v, domain: spec.domain.to_array() };
    match &spec.source {
        JetSource::Analytic(jet) => {
            if !spec.domain.contains(u, v, 0.0) {
                return Err(domain_err());
            }
            Ok(jet(u, v))
        }
        JetSource::Numeric { z, h } => {
            if !spec.domain.contains(u, v, *h) {
                return Err(domain_err());
            }
            Ok(central_jet(z.as_ref(), u, v, *h))
        }
        JetSource::Sampled { grid, z } => {
            let (i, j) = grid.node_at(u, v, 1e-6).ok_or_else(domain_err)?;
            if i < 2 || j < 2 || i + 2 >= grid.nu || j + 2 >= grid.nv {
                return Err(domain_err());
            }
            Ok(sampled_jet(grid, z, i, j))
        }
    }
}

fn central_jet(z: &(dyn Fn(f64, f64) -> Vec4 + Send + Sync), u: f64, v: f64, h: f64) -> SurfaceJet {
    let c = z(u, v);
    let (up, um) = (z(u + h, v), z(u - h, v));
    let (vp, vm) = (z(u, v + h), z(u, v - h));
    let mixed = z(u + h, v + h) - z(u + h, v - h) - z(u - h, v + h) + z(u - h, v - h);
    SurfaceJet {
        z: c,
        z_u: (up - um) * (0.5 / h),
        z_v: (vp - vm) * (0.5 / h),
        z_uu: (up - c * 2.0 + um) * (1.0 / (h * h)),
        z_uv: mixed * (0.25 / (h * h)),
        z_vv: (vp - c * 2.0 + vm) * (1.0 / (h * h)),
    }
}

const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];

fn sampled_jet(grid: &GridSpec, z: &[Vec4], i: usize, j: usize) -> SurfaceJet {
    let (hu, hv) = (grid.hu(), grid.hv());
    let at = |di: isize, dj: isize| {
        let ii = (i as isize + di) as usize;
        let jj = (j as isize + dj) as usize;
        z[ii * grid.nv + jj]
    };
    let mut jet = SurfaceJet {
        z: at(0, 0),
        z_u: Vec4::ZERO,
        z_v: Vec4::ZERO,
        z_uu: Vec4::ZERO,
        z_uv: Vec4::ZERO,
        z_vv: Vec4::ZERO,
    };
    for k in 0..5 {
        let o = k as isize - 2;
        jet.z_u += at(o, 0) * (D1[k] / hu);
        jet.z_v += at(0, o) * (D1[k] / hv);
        jet.z_uu += at(o, 0) * (D2[k] / (hu * hu));
        jet.z_vv += at(0, o) * (D2[k] / (hv * hv));
        for (l, w) in D1.iter().enumerate() {
            let p = l as isize - 2;
            jet.z_uv += at(o, p) * (D1[k] * w / (hu * hv));
        }
    }
    jet
}

/// Coefficients of the first fundamental form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstForm {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub w: f64,
    pub lorentz_ok: bool,
}

impl FirstForm {
    pub fn det(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }
}

pub fn first_form(jet: &SurfaceJet) -> FirstForm {
    let e = inner(jet.z_u, jet.z_u);
    let f = inner(jet.z_u, jet.z_v);
    let g = inner(jet.z_v, jet.z_v);
    let det = e * g - f * f;
    FirstForm { e, f, g, w: det.abs().sqrt(), lorentz_ok: e > 0.0 && g < 0.0 && det < 0.0 }
}

/// Pseudo-orthonormal normal pair `(n1, n2)` with `<n1,n1> = 1`,
/// `<n2,n2> = -1`, oriented so that `(z_u, z_v, n1, n2)` is positive in the
/// sense of [`orientation`].
///
/// Construction: reject the coordinate axes off the tangent plane, keep the
/// two best-conditioned rejections, and diagonalize the induced metric on
/// their span; the positive eigendirection gives `n1`.
pub fn normal_frame(jet: &SurfaceJet) -> Result<(Vec4, Vec4)> {
    let ff = first_form(jet);
    if !ff.lorentz_ok {
        return Err(Error::NotLorentz { e: ff.e, f: ff.f, g: ff.g });
    }
    let det = ff.det();
    let reject = |w: Vec4| {
        let (a, b) = (inner(jet.z_u, w), inner(jet.z_v, w));
        let alpha = (ff.g * a - ff.f * b) / det;
        let beta = (ff.e * b - ff.f * a) / det;
        w - jet.z_u * alpha - jet.z_v * beta
    };
    let rejections: Vec<Vec4> = (0..4).map(|k| reject(Vec4::basis(k))).collect();
    let first = (0..4)
        .max_by(|&a, &b| rejections[a].euclid_norm().total_cmp(&rejections[b].euclid_norm()))
        .expect("four candidates");
    let r1 = rejections[first] * (1.0 / rejections[first].euclid_norm());
    let (second, r2) = (0..4)
        .filter(|&k| k != first)
        .map(|k| (k, rejections[k] - r1 * r1.euclid_dot(rejections[k])))
        .max_by(|a, b| a.1.euclid_norm().total_cmp(&b.1.euclid_norm()))
        .expect("three candidates");
    let _ = second;
    let r2 = r2 * (1.0 / r2.euclid_norm());

    // induced metric on span{r1, r2} and its eigen-decomposition
    let (p, q, s) = (inner(r1, r1), inner(r1, r2), inner(r2, r2));
    let mean = 0.5 * (p + s);
    let radius = (0.25 * (p - s) * (p - s) + q * q).sqrt();
    let (lmax, lmin) = (mean + radius, mean - radius);
    let tol = 1e-9;
    if !(lmax > tol && lmin < -tol) {
        return Err(Error::DegenerateNormal { max: lmax, min: lmin });
    }
    let (ca, cb) = if q.abs() > f64::EPSILON * (p.abs() + s.abs()) {
        let (a, b) = (q, lmax - p);
        let n = a.hypot(b);
        (a / n, b / n)
    } else if p >= s {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let mut n1 = (r1 * ca + r2 * cb) * (1.0 / lmax.sqrt());
    let mut n2 = (r1 * -cb + r2 * ca) * (1.0 / (-lmin).sqrt());

    // one cleanup pass against rounding
    n1 = reject(n1);
    n1 = n1 * (1.0 / n1.norm_sq().sqrt());
    n2 = reject(n2);
    n2 -= n1 * inner(n1, n2);
    n2 = n2 * (1.0 / (-n2.norm_sq()).sqrt());

    let pivot = (0..4).max_by(|&a, &b| n1[a].abs().total_cmp(&n1[b].abs())).unwrap_or(0);
    if n1[pivot] < 0.0 {
        n1 = -n1;
    }
    if orientation(jet.z_u, jet.z_v, n1, n2) < 0.0 {
        n2 = -n2;
    }
    Ok((n1, n2))
}

/// Christoffel symbols and normal coefficients, indexed `[pair][k]` with
/// pair in `UU, UV, VV` and `k = 0, 1` for the upper index 1, 2.
pub type PairCoefficients = [[f64; 2]; 3];

/// Splits `z_uu, z_uv, z_vv` over the basis `{z_u, z_v, n1, n2}`.
pub fn decompose_second_derivatives(
    jet: &SurfaceJet,
    n1: Vec4,
    n2: Vec4,
) -> Result<(PairCoefficients, PairCoefficients)> {
    let basis = Matrix4::from_columns(&[
        jet.z_u.to_vector(),
        jet.z_v.to_vector(),
        n1.to_vector(),
        n2.to_vector(),
    ]);
    let sv = basis.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_BASIS_CONDITION) {
        return Err(Error::SingularBasis { condition });
    }
    let lu = basis.lu();
    let mut gamma = [[0.0; 2]; 3];
    let mut c = [[0.0; 2]; 3];
    for (pair, w) in jet.second().into_iter().enumerate() {
        let rhs: Vector4<f64> = w.to_vector();
        let x = lu.solve(&rhs).ok_or(Error::SingularBasis { condition })?;
        let residual = (basis * x - rhs).amax();
        let scale = w.max_abs().max(smax * x.amax()).max(f64::MIN_POSITIVE);
        if residual > 1e-9 * scale {
            return Err(Error::SingularBasis { condition });
        }
        gamma[pair] = [x[0], -x[1]];
        c[pair] = [x[2], -x[3]];
    }
    Ok((gamma, c))
}

/// Everything first- and second-order at a surface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalData {
    pub jet: SurfaceJet,
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub w: f64,
    pub n1: Vec4,
    pub n2: Vec4,
    pub c: PairCoefficients,
    pub gamma: PairCoefficients,
}

impl FundamentalData {
    pub fn from_jet(jet: &SurfaceJet) -> Result<Self> {
        let (n1, n2) = normal_frame(jet)?;
        Self::with_normals(jet, n1, n2)
    }

    /// Uses a caller-supplied normal frame instead of [`normal_frame`].
    pub fn with_normals(jet: &SurfaceJet, n1: Vec4, n2: Vec4) -> Result<Self> {
        let ff = first_form(jet);
        if !ff.lorentz_ok {
            return Err(Error::NotLorentz { e: ff.e, f: ff.f, g: ff.g });
        }
        let (gamma, c) = decompose_second_derivatives(jet, n1, n2)?;
        Ok(Self { jet: *jet, e: ff.e, f: ff.f, g: ff.g, w: ff.w, n1, n2, c, gamma })
    }

    pub fn first_form(&self) -> FirstForm {
        FirstForm { e: self.e, f: self.f, g: self.g, w: self.w, lorentz_ok: true }
    }

    /// `sigma(z_i, z_j)` for a coefficient pair.
    pub fn sigma_pair(&self, pair: usize) -> Vec4 {
        self.n1 * self.c[pair][0] - self.n2 * self.c[pair][1]
    }

    /// Second fundamental tensor on tangent vectors given by their
    /// coefficients `(a, b)` in the basis `{z_u, z_v}`.
    pub fn sigma(&self, x: (f64, f64), y: (f64, f64)) -> Vec4 {
        self.sigma_pair(UU) * (x.0 * y.0)
            + self.sigma_pair(UV) * (x.0 * y.1 + x.1 * y.0)
            + self.sigma_pair(VV) * (x.1 * y.1)
    }

    pub fn tangent(&self, x: (f64, f64)) -> Vec4 {
        self.jet.z_u * x.0 + self.jet.z_v * x.1
    }

    /// Largest |c| at the point; the natural scale for "is zero" tests.
    pub fn c_scale(&self) -> f64 {
        self.c.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Largest of |E|, |F|, |G|.
    pub fn metric_scale(&self) -> f64 {
        self.e.abs().max(self.f.abs()).max(self.g.abs())
    }

    /// Transforms the normal frame by the hyperbolic rotation
    /// `ñ1 = cosh θ n1 − sinh θ n2`, `ñ2 = −sinh θ n1 + cosh θ n2`.
    pub fn rotate_normals(&self, theta: f64) -> Result<Self> {
        let (ch, sh) = (theta.cosh(), theta.sinh());
        let m1 = self.n1 * ch - self.n2 * sh;
        let m2 = self.n2 * ch - self.n1 * sh;
        Self::with_normals(&self.jet, m1, m2)
    }
}

/// Rebuilds the point data in the gauge `F = 0` by the linear change
/// `ū = u + (F/E) v, v̄ = v`, i.e. `z_v̄ = z_v − (F/E) z_u`.
pub fn orthogonal_gauge(jet: &SurfaceJet) -> SurfaceJet {
    let ff = first_form(jet);
    jet.linear_reparam([[1.0, -ff.f / ff.e], [0.0, 1.0]])
}
