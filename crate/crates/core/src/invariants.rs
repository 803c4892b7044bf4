//! Second-order invariants of a Lorentz surface at a point: the functions
//! L, M, N, the Weingarten-type map, k, ϰ, the Gauss curvature, the mean
//! curvature vector, shape operators, tangent structures and point classes.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geoframe::GeometricFunctions;
use crate::jets::{FundamentalData, UU, UV, VV};
use crate::pe4::{causal_character, inner, CausalCharacter, Vec4};

/// Default relative tolerance for "is zero" decisions in classification.
pub const CLASSIFY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointType {
    Flat,
    UmbilicalMinimal,
    QuasiMinimal,
    GeneralSpacelikeH,
    GeneralTimelikeH,
}

impl PointType {
    pub fn as_str(self) -> &'static str {
        match self {
            PointType::Flat => "Flat",
            PointType::UmbilicalMinimal => "UmbilicalMinimal",
            PointType::QuasiMinimal => "QuasiMinimal",
            PointType::GeneralSpacelikeH => "GeneralSpacelikeH",
            PointType::GeneralTimelikeH => "GeneralTimelikeH",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointClass {
    pub kind: PointType,
    /// Sign of ϰ² − k: −1, 0 or +1.
    pub discriminant_sign: i8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub delta: [f64; 3],
    pub l: f64,
    pub m: f64,
    pub n: f64,
    /// `[[γ¹₁, γ²₁], [γ¹₂, γ²₂]]`, so `γ(z_u) = γ[0][0] z_u + γ[0][1] z_v`.
    pub gamma: [[f64; 2]; 2],
    pub k: f64,
    pub kappa: f64,
    pub gauss: f64,
    pub d: f64,
    pub h: Vec4,
    pub h_causal: CausalCharacter,
    pub point_class: PointClass,
}

fn det2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - b[0] * a[1]
}

/// Mean curvature vector `½ g^{ij} σ_ij`; equals `½(σ(x,x) − σ(y,y))` for
/// any pseudo-orthonormal tangent pair.
pub fn mean_curvature_vector(fund: &FundamentalData) -> Vec4 {
    let det = fund.e * fund.g - fund.f * fund.f;
    (fund.sigma_pair(UU) * fund.g - fund.sigma_pair(UV) * (2.0 * fund.f) + fund.sigma_pair(VV) * fund.e)
        * (0.5 / det)
}

/// Magnitude used to make L, M, N tests scale-aware.
fn lmn_scale(fund: &FundamentalData) -> f64 {
    let c = fund.c_scale();
    c * c / fund.w
}

pub fn second_order_invariants(fund: &FundamentalData) -> InvariantReport {
    second_order_invariants_tol(fund, CLASSIFY_TOL)
}

pub fn second_order_invariants_tol(fund: &FundamentalData, tol: f64) -> InvariantReport {
    let (e, f, g, w) = (fund.e, fund.f, fund.g, fund.w);
    let col = |p: usize| fund.c[p];
    let delta = [det2(col(UU), col(UV)), det2(col(UU), col(VV)), det2(col(UV), col(VV))];
    let (l, m, n) = (2.0 * delta[0] / w, delta[1] / w, 2.0 * delta[2] / w);
    let det = e * g - f * f;
    let gamma = [
        [(f * m - g * l) / det, (f * l - e * m) / det],
        [(f * n - g * m) / det, (f * m - e * n) / det],
    ];
    let k = (l * n - m * m) / det;
    let kappa = (e * n + g * l - 2.0 * f * m) / (2.0 * det);
    let (s_uu, s_uv, s_vv) = (fund.sigma_pair(UU), fund.sigma_pair(UV), fund.sigma_pair(VV));
    let gauss = (inner(s_uu, s_vv) - inner(s_uv, s_uv)) / det;
    let d = {
        let (a, b, c) = (e * m - f * l, e * n - g * l, f * n - g * m);
        b * b - 4.0 * a * c
    };
    let h = mean_curvature_vector(fund);
    let mut report = InvariantReport {
        e,
        f,
        g,
        delta,
        l,
        m,
        n,
        gamma,
        k,
        kappa,
        gauss,
        d,
        h,
        h_causal: h_character(fund, h, tol),
        point_class: PointClass { kind: PointType::Flat, discriminant_sign: 0 },
    };
    report.point_class = classify_point(fund, &report, tol);
    report
}

fn h_character(fund: &FundamentalData, h: Vec4, tol: f64) -> CausalCharacter {
    // Relative to the size of σ so that reparametrizations do not change it.
    let scale = fund.c_scale() / fund.metric_scale();
    causal_character(h * (1.0 / scale.max(f64::MIN_POSITIVE)), tol)
}

/// Max deviation of (L, M, N) from being proportional to (E, F, G),
/// normalized to be dimensionless; zero at flat points.
pub fn umbilicity_residual(report: &InvariantReport) -> f64 {
    let (e, f, g) = (report.e, report.f, report.g);
    let (l, m, n) = (report.l, report.m, report.n);
    let lmn = l.abs().max(m.abs()).max(n.abs());
    if lmn == 0.0 {
        return 0.0;
    }
    let efg = e.abs().max(f.abs()).max(g.abs());
    let minors = [l * f - m * e, l * g - n * e, m * g - n * f];
    minors.iter().fold(0.0_f64, |a, x| a.max(x.abs())) / (lmn * efg)
}

pub fn classify_point(fund: &FundamentalData, report: &InvariantReport, tol: f64) -> PointClass {
    let scale = lmn_scale(fund);
    let lmn = report.l.abs().max(report.m.abs()).max(report.n.abs());
    let disc = report.kappa * report.kappa - report.k;
    let disc_scale = report.k.abs().max(report.kappa * report.kappa).max(scale * scale / (fund.w * fund.w));
    let discriminant_sign = if disc.abs() <= tol * disc_scale {
        0
    } else if disc > 0.0 {
        1
    } else {
        -1
    };
    let kind = if scale == 0.0 || lmn <= tol * scale {
        PointType::Flat
    } else if umbilicity_residual(report) <= tol {
        PointType::UmbilicalMinimal
    } else {
        match report.h_causal {
            CausalCharacter::Zero => PointType::UmbilicalMinimal,
            CausalCharacter::Lightlike => PointType::QuasiMinimal,
            CausalCharacter::Spacelike => PointType::GeneralSpacelikeH,
            CausalCharacter::Timelike => PointType::GeneralTimelikeH,
        }
    };
    PointClass { kind, discriminant_sign }
}

/// Matrices of the shape operators `A_{n1}`, `A_{n2}` in the unit basis
/// `x = z_u/√E`, `y = z_v/√−G`; column `j` is the image of basis vector `j`.
pub fn shape_operators(fund: &FundamentalData, tol: f64) -> Result<(Matrix2<f64>, Matrix2<f64>)> {
    if fund.f.abs() > tol * fund.metric_scale() {
        return Err(Error::NotDiagonalGauge { f: fund.f });
    }
    let (e, g) = (fund.e, fund.g);
    let root = (-e * g).sqrt();
    let op = |k: usize| {
        let (c11, c12, c22) = (fund.c[UU][k], fund.c[UV][k], fund.c[VV][k]);
        Matrix2::new(c11 / e, c12 / root, -c12 / root, c22 / g)
    };
    Ok((op(0), op(1)))
}

/// `⟨(A₂A₁ − A₁A₂)x, y⟩` with `⟨y, y⟩ = −1`.
pub fn normal_connection_curvature(a1: &Matrix2<f64>, a2: &Matrix2<f64>) -> f64 {
    let comm = a2 * a1 - a1 * a2;
    -comm[(1, 0)]
}

/// Direction `(λ : μ)` in the basis `{z_u, z_v}`, normalized to unit
/// Euclidean length with a nonnegative leading nonzero entry.
pub type Direction = (f64, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct TangentStructures {
    pub principal: Vec<Direction>,
    pub asymptotic: Vec<Direction>,
    l: f64,
    m: f64,
    n: f64,
}

impl TangentStructures {
    /// `Lλ₁λ₂ + M(λ₁μ₂ + λ₂μ₁) + Nμ₁μ₂`; zero for conjugate tangents.
    pub fn conjugate_residual(&self, d1: Direction, d2: Direction) -> f64 {
        self.l * d1.0 * d2.0 + self.m * (d1.0 * d2.1 + d2.0 * d1.1) + self.n * d1.1 * d2.1
    }
}

fn normalize(d: Direction) -> Direction {
    let n = d.0.hypot(d.1);
    let (a, b) = (d.0 / n, d.1 / n);
    if a < 0.0 || (a == 0.0 && b < 0.0) {
        (-a, -b)
    } else {
        (a, b)
    }
}

/// Real roots `(λ : μ)` of `aλ² + bλμ + cμ² = 0`.
fn quadratic_directions(a: f64, b: f64, c: f64, tol: f64) -> Vec<Direction> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    let disc = b * b - 4.0 * a * c;
    if disc < -tol * scale * scale {
        return Vec::new();
    }
    let root = disc.max(0.0).sqrt();
    let double = disc.abs() <= tol * scale * scale;
    // Stable roots: pick the larger-magnitude leading coefficient and use
    // q = −(b + sign(b)√disc)/2 to avoid cancellation.
    if a == 0.0 && c == 0.0 {
        return vec![(1.0, 0.0), (0.0, 1.0)];
    }
    let sgn = if b >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (b + sgn * root);
    let mut dirs = if a.abs() >= c.abs() {
        // roots in t = λ/μ: t = q/a, c/q
        let t1 = q / a;
        let mut v = vec![normalize((t1, 1.0))];
        if !double {
            v.push(if q != 0.0 { normalize((c / q, 1.0)) } else { normalize((1.0, 0.0)) });
        }
        v
    } else {
        // roots in s = μ/λ with c s² + b s + a = 0: s = q/c, a/q
        let s1 = q / c;
        let mut v = vec![normalize((1.0, s1))];
        if !double {
            v.push(if q != 0.0 { normalize((1.0, a / q)) } else { normalize((0.0, 1.0)) });
        }
        v
    };
    dirs.dedup_by(|x, y| (x.0 - y.0).abs() < 1e-14 && (x.1 - y.1).abs() < 1e-14);
    dirs
}

pub fn tangent_structures(report: &InvariantReport, tol: f64) -> Result<TangentStructures> {
    let (e, f, g) = (report.e, report.f, report.g);
    let (l, m, n) = (report.l, report.m, report.n);
    let (pa, pb, pc) = (e * m - f * l, e * n - g * l, f * n - g * m);
    let scale = (e.abs().max(f.abs()).max(g.abs())) * l.abs().max(m.abs()).max(n.abs());
    if scale == 0.0 || pa.abs().max(pb.abs()).max(pc.abs()) <= tol * scale {
        return Err(Error::IndeterminateEquation);
    }
    Ok(TangentStructures {
        principal: quadratic_directions(pa, pb, pc, tol),
        asymptotic: quadratic_directions(l, 2.0 * m, n, tol),
        l,
        m,
        n,
    })
}

/// The allied mean curvature vector `a(H) = −ε(|ν₁−ν₂|/2) λ μ l`.
pub fn allied_mean_curvature(gf: &GeometricFunctions) -> Result<Vec4> {
    let v = &gf.values;
    if v.mu == 0.0 || v.nu1 == v.nu2 {
        return Err(Error::NotGeneralType { reason: "requires mu != 0 and nu1 != nu2".into() });
    }
    let eps = gf.eps as f64;
    Ok(gf.frame.e[3] * (-eps * 0.5 * (v.nu1 - v.nu2).abs() * v.lambda * v.mu))
}
