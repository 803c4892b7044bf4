//! Surface reconstruction from geometric functions.
//!
//! The frame `Z` (rows `x, y, b, l`) obeys `Z_u = A Z`, `Z_v = B Z` with
//! `A = p Aₓ + q A_y`, `B = r Aₓ + s A_y`, where `Aₓ`, `A_y` hold the
//! coefficients of `∇'_x`, `∇'_y` from the frame equations and `(p, q, r, s)`
//! is the coframe. Frames are marched with classic RK4 along grid lines
//! (coefficients linearly interpolated between nodes), then positions follow
//! from `z_u = p x + q y`, `z_v = r x + s y` with a Hermite-corrected
//! trapezoid rule.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geoframe::{frame_signature, integrability_residuals, GFGrid, GfValues};
use crate::grid::{Domain, Field2, GridSpec};
use crate::jets::SurfaceSpec;
use crate::pe4::{gram_residual, metric_matrix, Frame4, Vec4, GRAM_TOL};

/// Gram drift above which integration is aborted.
pub const DRIFT_CEILING: f64 = 1e-3;
/// Relative disagreement that triggers the metric-consistency warning.
pub const METRIC_DIAGNOSTIC_TOL: f64 = 1e-2;

/// Coefficient matrices of `∇'_x Z` and `∇'_y Z` (rows `x, y, b, l`).
pub fn coefficient_matrices(v: &GfValues, eps: i8) -> (Matrix4<f64>, Matrix4<f64>) {
    let e = eps as f64;
    #[rustfmt::skip]
    let ax = Matrix4::new(
        0.0,       -v.gamma1, e * v.nu1,      0.0,
        -v.gamma1, 0.0,       e * v.lambda,   -e * v.mu,
        -v.nu1,    v.lambda,  0.0,            -e * v.beta1,
        0.0,       v.mu,      -e * v.beta1,   0.0,
    );
    #[rustfmt::skip]
    let ay = Matrix4::new(
        0.0,       -v.gamma2, e * v.lambda,   -e * v.mu,
        -v.gamma2, 0.0,       e * v.nu2,      0.0,
        -v.lambda, v.nu2,     0.0,            -e * v.beta2,
        -v.mu,     0.0,       -e * v.beta2,   0.0,
    );
    (ax, ay)
}

/// Frame system sampled at grid nodes.
#[derive(Debug, Clone)]
pub struct FrameSystem {
    pub grid: GridSpec,
    pub eps: i8,
    a: Vec<Matrix4<f64>>,
    b: Vec<Matrix4<f64>>,
}

impl FrameSystem {
    pub fn a(&self, i: usize, j: usize) -> &Matrix4<f64> {
        &self.a[i * self.grid.nv + j]
    }

    pub fn b(&self, i: usize, j: usize) -> &Matrix4<f64> {
        &self.b[i * self.grid.nv + j]
    }

    fn eta(&self) -> Matrix4<f64> {
        Matrix4::from_diagonal(&frame_signature(self.eps).into())
    }

    /// Max over nodes of `‖MᵀΗ + ΗM‖` for both matrices.
    pub fn pseudo_skew_residual(&self) -> f64 {
        let eta = self.eta();
        self.a
            .iter()
            .chain(&self.b)
            .map(|m| (m.transpose() * eta + eta * m).amax())
            .fold(0.0, f64::max)
    }
}

pub fn assemble_system(grid: &GFGrid) -> Result<FrameSystem> {
    grid.validate()?;
    let spec = grid.grid_spec();
    let mut a = Vec::with_capacity(spec.len());
    let mut b = Vec::with_capacity(spec.len());
    for (i, j) in spec.nodes() {
        let c = grid.coframe(i, j);
        for value in [c.p, c.s] {
            if !(value > 0.0) {
                return Err(Error::InvalidMetric { i, j, value });
            }
        }
        if !(c.det() > 0.0) {
            return Err(Error::InvalidMetric { i, j, value: c.det() });
        }
        let (ax, ay) = coefficient_matrices(&grid.values(i, j), grid.eps);
        a.push(ax * c.p + ay * c.q);
        b.push(ax * c.r + ay * c.s);
    }
    Ok(FrameSystem { grid: spec, eps: grid.eps, a, b })
}

/// Frame with vectors as rows.
pub type FrameMatrix = Matrix4<f64>;

pub fn frame_to_matrix(f: &Frame4) -> FrameMatrix {
    Matrix4::from_rows(&f.e.map(|v| v.to_vector().transpose()))
}

pub fn matrix_to_frame(m: &FrameMatrix, eps: i8) -> Frame4 {
    let row = |k: usize| Vec4::new(m[(k, 0)], m[(k, 1)], m[(k, 2)], m[(k, 3)]);
    Frame4::new([row(0), row(1), row(2), row(3)], frame_signature(eps))
}

/// Positively oriented reference frame with signature `(1, −1, ε, −ε)`:
/// `(e1, e3, e2, e4)` for ε = 1 and `(e1, e3, e4, −e2)` for ε = −1.
pub fn standard_frame(eps: i8) -> Frame4 {
    let e = Vec4::basis;
    let vectors = if eps > 0 { [e(0), e(2), e(1), e(3)] } else { [e(0), e(2), e(3), -e(1)] };
    Frame4::new(vectors, frame_signature(eps))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IntegrationOptions {
    /// Re-pseudo-orthonormalize every this many steps; `None` disables.
    pub reorthonormalize_every: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameDiagnostics {
    pub max_gram_drift: f64,
    pub path_discrepancy: f64,
    /// Largest correction applied by re-orthonormalization, if enabled.
    pub max_correction: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FrameField {
    pub grid: GridSpec,
    pub eps: i8,
    pub origin: (usize, usize),
    frames: Vec<FrameMatrix>,
    pub diagnostics: FrameDiagnostics,
}

impl FrameField {
    pub fn at(&self, i: usize, j: usize) -> &FrameMatrix {
        &self.frames[i * self.grid.nv + j]
    }

    pub fn frame(&self, i: usize, j: usize) -> Frame4 {
        matrix_to_frame(self.at(i, j), self.eps)
    }
}

fn rk4_step(y: &FrameMatrix, m0: &Matrix4<f64>, m1: &Matrix4<f64>, h: f64) -> FrameMatrix {
    let mm = (m0 + m1) * 0.5;
    let k1 = m0 * y;
    let k2 = mm * (y + k1 * (0.5 * h));
    let k3 = mm * (y + k2 * (0.5 * h));
    let k4 = m1 * (y + k3 * h);
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Indefinite Gram–Schmidt on the rows; returns the corrected frame and the
/// size of the correction.
fn reorthonormalize(z: &FrameMatrix, signature: [f64; 4]) -> (FrameMatrix, f64) {
    let g = metric_matrix();
    let mut rows: Vec<nalgebra::RowVector4<f64>> = (0..4).map(|k| z.row(k).into_owned()).collect();
    for k in 0..4 {
        for m in 0..k {
            let proj = (rows[k] * g * rows[m].transpose())[0] * signature[m];
            rows[k] = rows[k] - rows[m] * proj;
        }
        let n = (rows[k] * g * rows[k].transpose())[0];
        rows[k] /= n.abs().sqrt();
    }
    let out = Matrix4::from_rows(&rows);
    let correction = (out - z).amax();
    (out, correction)
}

fn gram_drift(z: &FrameMatrix, signature: &Matrix4<f64>) -> f64 {
    (z * metric_matrix() * z.transpose() - signature).amax()
}

struct Marcher<'a> {
    sys: &'a FrameSystem,
    options: IntegrationOptions,
    steps: usize,
    max_correction: f64,
}

impl Marcher<'_> {
    fn step(&mut self, y: &FrameMatrix, m0: &Matrix4<f64>, m1: &Matrix4<f64>, h: f64) -> FrameMatrix {
        let mut next = rk4_step(y, m0, m1, h);
        self.steps += 1;
        if let Some(k) = self.options.reorthonormalize_every {
            if k > 0 && self.steps.is_multiple_of(k) {
                let (fixed, c) = reorthonormalize(&next, frame_signature(self.sys.eps));
                self.max_correction = self.max_correction.max(c);
                next = fixed;
            }
        }
        next
    }

    /// Marches along one grid line from index `start` in both directions.
    /// `coef(k)` is the system matrix at line index `k`.
    fn line(
        &mut self,
        n: usize,
        start: usize,
        h: f64,
        init: FrameMatrix,
        coef: impl Fn(usize) -> Matrix4<f64>,
    ) -> Vec<FrameMatrix> {
        let mut out = vec![init; n];
        for k in start + 1..n {
            out[k] = self.step(&out[k - 1], &coef(k - 1), &coef(k), h);
        }
        for k in (0..start).rev() {
            out[k] = self.step(&out[k + 1], &coef(k + 1), &coef(k), -h);
        }
        out
    }

    /// u-sweep along the origin row, then v-columns (or the reverse).
    fn sweep(&mut self, origin: (usize, usize), init: FrameMatrix, u_first: bool) -> Vec<FrameMatrix> {
        let g = self.sys.grid;
        let (hu, hv) = (g.hu(), g.hv());
        let mut frames = vec![init; g.len()];
        let sys = self.sys;
        if u_first {
            let row = self.line(g.nu, origin.0, hu, init, |i| *sys.a(i, origin.1));
            for (i, start) in row.into_iter().enumerate() {
                let col = self.line(g.nv, origin.1, hv, start, |j| *sys.b(i, j));
                frames[i * g.nv..(i + 1) * g.nv].copy_from_slice(&col);
            }
        } else {
            let col = self.line(g.nv, origin.1, hv, init, |j| *sys.b(origin.0, j));
            for (j, start) in col.into_iter().enumerate() {
                let row = self.line(g.nu, origin.0, hu, start, |i| *sys.a(i, j));
                for (i, f) in row.into_iter().enumerate() {
                    frames[i * g.nv + j] = f;
                }
            }
        }
        frames
    }
}

/// Integrates the frame system from `init` at node `origin`.
pub fn integrate_frames(
    sys: &FrameSystem,
    init: &Frame4,
    origin: (usize, usize),
    options: IntegrationOptions,
) -> Result<FrameField> {
    let g = sys.grid;
    if origin.0 >= g.nu || origin.1 >= g.nv {
        return Err(Error::Invalid(format!("origin node {origin:?} is outside the grid")));
    }
    let sig = frame_signature(sys.eps);
    if init.signature != sig {
        return Err(Error::FrameMismatch {
            reason: format!("initial frame signature {:?} differs from {:?}", init.signature, sig),
        });
    }
    let residual = gram_residual(init);
    if residual > GRAM_TOL {
        return Err(Error::FrameMismatch {
            reason: format!("initial frame is not pseudo-orthonormal (Gram residual {residual:e})"),
        });
    }
    let z0 = frame_to_matrix(init);
    let mut marcher = Marcher { sys, options, steps: 0, max_correction: 0.0 };
    let frames = marcher.sweep(origin, z0, true);
    let other = marcher.sweep(origin, z0, false);

    let sig_m = Matrix4::from_diagonal(&sig.into());
    let max_gram_drift = frames.iter().map(|z| gram_drift(z, &sig_m)).fold(0.0, f64::max);
    if !(max_gram_drift <= DRIFT_CEILING) {
        return Err(Error::StepTooLarge { drift: max_gram_drift, ceiling: DRIFT_CEILING });
    }
    let path_discrepancy = frames.iter().zip(&other).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
    Ok(FrameField {
        grid: g,
        eps: sys.eps,
        origin,
        frames,
        diagnostics: FrameDiagnostics {
            max_gram_drift,
            path_discrepancy,
            max_correction: options.reorthonormalize_every.map(|_| marcher.max_correction),
        },
    })
}

fn row(m: &Matrix4<f64>, k: usize) -> Vec4 {
    Vec4::new(m[(k, 0)], m[(k, 1)], m[(k, 2)], m[(k, 3)])
}

/// Coordinate tangent vectors and their derivatives at one node.
struct NodeTangents {
    z_u: Vec4,
    z_v: Vec4,
    /// ∂_u z_u, ∂_v z_v, ∂_v z_u, ∂_u z_v
    d_uu: Vec4,
    d_vv: Vec4,
    d_vu: Vec4,
    d_uv: Vec4,
}

struct CoframeFields {
    p: Field2,
    q: Field2,
    r: Field2,
    s: Field2,
}

impl CoframeFields {
    fn new(grid: &GFGrid) -> Self {
        let zeros = Field2::filled(grid.nu, grid.nv, 0.0);
        Self {
            p: grid.sqrt_e.clone(),
            q: grid.coframe_uy.clone().unwrap_or_else(|| zeros.clone()),
            r: grid.coframe_vx.clone().unwrap_or(zeros),
            s: grid.sqrt_neg_g.clone(),
        }
    }

    fn tangents(&self, sys: &FrameSystem, frames: &FrameField, i: usize, j: usize) -> NodeTangents {
        let (hu, hv) = (sys.grid.hu(), sys.grid.hv());
        let z = frames.at(i, j);
        let zu = sys.a(i, j) * z;
        let zv = sys.b(i, j) * z;
        let (x, y) = (row(z, 0), row(z, 1));
        let (x_u, y_u, x_v, y_v) = (row(&zu, 0), row(&zu, 1), row(&zv, 0), row(&zv, 1));
        let (p, q, r, s) = (self.p.get(i, j), self.q.get(i, j), self.r.get(i, j), self.s.get(i, j));
        NodeTangents {
            z_u: x * p + y * q,
            z_v: x * r + y * s,
            d_uu: x * self.p.d_u(i, j, hu) + x_u * p + y * self.q.d_u(i, j, hu) + y_u * q,
            d_vv: x * self.r.d_v(i, j, hv) + x_v * r + y * self.s.d_v(i, j, hv) + y_v * s,
            d_vu: x * self.p.d_v(i, j, hv) + x_v * p + y * self.q.d_v(i, j, hv) + y_v * q,
            d_uv: x * self.r.d_u(i, j, hu) + x_u * r + y * self.s.d_u(i, j, hu) + y_u * s,
        }
    }
}

/// Positions on the grid and the max interior mismatch `|∂_v z_u − ∂_u z_v|`.
pub fn integrate_position(grid: &GFGrid, sys: &FrameSystem, frames: &FrameField, p0: Vec4) -> (Vec<Vec4>, f64) {
    let g = sys.grid;
    let (hu, hv) = (g.hu(), g.hv());
    let cof = CoframeFields::new(grid);
    let t: Vec<NodeTangents> = g.nodes().map(|(i, j)| cof.tangents(sys, frames, i, j)).collect();
    let at = |i: usize, j: usize| &t[i * g.nv + j];
    // ∫ f over one step of signed length h, Hermite-corrected trapezoid
    let hermite = |f0: Vec4, d0: Vec4, f1: Vec4, d1: Vec4, h: f64| (f0 + f1) * (0.5 * h) + (d0 - d1) * (h * h / 12.0);

    let (i0, j0) = frames.origin;
    let mut z = vec![p0; g.len()];
    for i in i0 + 1..g.nu {
        let (a, b) = (at(i - 1, j0), at(i, j0));
        z[i * g.nv + j0] = z[(i - 1) * g.nv + j0] + hermite(a.z_u, a.d_uu, b.z_u, b.d_uu, hu);
    }
    for i in (0..i0).rev() {
        let (a, b) = (at(i + 1, j0), at(i, j0));
        z[i * g.nv + j0] = z[(i + 1) * g.nv + j0] + hermite(a.z_u, a.d_uu, b.z_u, b.d_uu, -hu);
    }
    for i in 0..g.nu {
        for j in j0 + 1..g.nv {
            let (a, b) = (at(i, j - 1), at(i, j));
            z[i * g.nv + j] = z[i * g.nv + j - 1] + hermite(a.z_v, a.d_vv, b.z_v, b.d_vv, hv);
        }
        for j in (0..j0).rev() {
            let (a, b) = (at(i, j + 1), at(i, j));
            z[i * g.nv + j] = z[i * g.nv + j + 1] + hermite(a.z_v, a.d_vv, b.z_v, b.d_vv, -hv);
        }
    }
    let mut mixed = 0.0_f64;
    for i in 1..g.nu.saturating_sub(1) {
        for j in 1..g.nv.saturating_sub(1) {
            let n = at(i, j);
            mixed = mixed.max((n.d_vu - n.d_uv).max_abs());
        }
    }
    (z, mixed)
}

/// Compares the supplied √E, √−G with the values implied by the μ-equations
/// of the integrability conditions (principal coordinates only).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricDiagnostic {
    pub checked_nodes: usize,
    pub max_rel_dev_e: f64,
    pub max_rel_dev_g: f64,
}

pub fn metric_diagnostic(grid: &GFGrid) -> Option<MetricDiagnostic> {
    if !grid.is_principal() {
        return None;
    }
    let eps = grid.eps as f64;
    let spec = grid.grid_spec();
    let mu_u = grid.mu.diff_u(grid.hu);
    let mu_v = grid.mu.diff_v(grid.hv);
    let scale = grid.mu.max_abs().max(f64::MIN_POSITIVE);
    let tiny = 1e-8 * scale;
    let mut d = MetricDiagnostic::default();
    for (i, j) in spec.nodes() {
        let v = grid.values(i, j);
        let den_e = 2.0 * v.mu * v.gamma2 - eps * v.lambda * v.beta1 + eps * v.nu1 * v.beta2;
        let den_g = 2.0 * v.mu * v.gamma1 + eps * v.nu2 * v.beta1 - eps * v.lambda * v.beta2;
        let (mu, mv) = (mu_u.get(i, j), mu_v.get(i, j));
        let mut used = false;
        if mu.abs() > tiny && den_e.abs() > tiny {
            let e = mu / den_e;
            d.max_rel_dev_e = d.max_rel_dev_e.max((e - grid.sqrt_e.get(i, j)).abs() / grid.sqrt_e.get(i, j));
            used = true;
        }
        if mv.abs() > tiny && den_g.abs() > tiny {
            let g = mv / den_g;
            let s = grid.sqrt_neg_g.get(i, j);
            d.max_rel_dev_g = d.max_rel_dev_g.max((g - s).abs() / s);
            used = true;
        }
        d.checked_nodes += used as usize;
    }
    Some(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOptions {
    /// Largest admissible integrability residual (all eight fields).
    pub max_integrability: f64,
    pub integration: IntegrationOptions,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self { max_integrability: 1e-2, integration: IntegrationOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReconstructionDiagnostics {
    pub max_gram_drift: f64,
    pub mixed_partial_residual: f64,
    pub path_discrepancy: f64,
    pub max_integrability_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_reorthonormalization: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_check: Option<MetricDiagnostic>,
}

/// Reconstructed positions and frames; arrays are nested `[i][j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructedSurface {
    pub domain: Domain,
    pub nu: usize,
    pub nv: usize,
    pub eps: i8,
    pub origin: [usize; 2],
    pub z: Vec<Vec<Vec4>>,
    /// `[x, y, b, l]` per node.
    pub frames: Vec<Vec<[Vec4; 4]>>,
    pub diagnostics: ReconstructionDiagnostics,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl ReconstructedSurface {
    pub fn grid_spec(&self) -> GridSpec {
        GridSpec { domain: self.domain, nu: self.nu, nv: self.nv }
    }

    pub fn position(&self, i: usize, j: usize) -> Vec4 {
        self.z[i][j]
    }

    pub fn frame(&self, i: usize, j: usize) -> Frame4 {
        Frame4::new(self.frames[i][j], frame_signature(self.eps))
    }

    /// The z grid as a sampled surface for re-analysis.
    pub fn to_surface_spec(&self) -> Result<SurfaceSpec> {
        SurfaceSpec::sampled("reconstructed", self.grid_spec(), self.z.iter().flatten().copied().collect())
    }
}

pub fn reconstruct(
    grid: &GFGrid,
    init: &Frame4,
    origin: (usize, usize),
    p0: Vec4,
    options: ReconstructOptions,
) -> Result<ReconstructedSurface> {
    let residuals = integrability_residuals(grid)?;
    let worst = residuals.overall();
    if !(worst <= options.max_integrability) {
        return Err(Error::IntegrabilityTooLarge { residual: worst, threshold: options.max_integrability });
    }
    let sys = assemble_system(grid)?;
    let frames = integrate_frames(&sys, init, origin, options.integration)?;
    let (z, mixed) = integrate_position(grid, &sys, &frames, p0);

    let g = sys.grid;
    let mut warnings = Vec::new();
    let metric_check = metric_diagnostic(grid);
    if let Some(m) = metric_check {
        if m.max_rel_dev_e > METRIC_DIAGNOSTIC_TOL || m.max_rel_dev_g > METRIC_DIAGNOSTIC_TOL {
            warnings.push(format!(
                "supplied sqrt(E), sqrt(-G) differ from the values implied by mu and the \
                 integrability conditions (relative deviation {:.3e}, {:.3e})",
                m.max_rel_dev_e, m.max_rel_dev_g
            ));
        }
    }
    Ok(ReconstructedSurface {
        domain: g.domain,
        nu: g.nu,
        nv: g.nv,
        eps: grid.eps,
        origin: [origin.0, origin.1],
        z: z.chunks(g.nv).map(<[Vec4]>::to_vec).collect(),
        frames: (0..g.nu).map(|i| (0..g.nv).map(|j| frames.frame(i, j).e).collect()).collect(),
        diagnostics: ReconstructionDiagnostics {
            max_gram_drift: frames.diagnostics.max_gram_drift,
            mixed_partial_residual: mixed,
            path_discrepancy: frames.diagnostics.path_discrepancy,
            max_integrability_residual: worst,
            max_reorthonormalization: frames.diagnostics.max_correction,
            metric_check,
        },
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::geoframe::{extract_gf_grid_default, geometric_functions_at};
    use crate::jets::{evaluate_jet, first_form};
    use crate::pe4::align_rigid;

    fn constants_grid(n: usize) -> GFGrid {
        let v = GfValues { nu1: 3.0, nu2: -3.0, lambda: 4.0, mu: 5.0, ..Default::default() };
        let r = 1.0 / 5f64.sqrt();
        GFGrid::constant(GridSpec::new(Domain::new(0.0, 1.0, 0.0, 1.0), n, n).unwrap(), 1, v, r, r)
    }

    #[test]
    fn zero_system_is_trivial() {
        let spec = GridSpec::new(Domain::new(0.0, 1.0, 0.0, 1.0), 5, 5).unwrap();
        let g = GFGrid::constant(spec, 1, GfValues::default(), 1.0, 1.0);
        let sys = assemble_system(&g).unwrap();
        assert_eq!(sys.pseudo_skew_residual(), 0.0);
        assert!(sys.a(2, 2).amax() == 0.0 && sys.b(0, 4).amax() == 0.0);
        let init = standard_frame(1);
        let f = integrate_frames(&sys, &init, (0, 0), IntegrationOptions::default()).unwrap();
        assert_eq!(f.diagnostics.max_gram_drift, 0.0);
        assert_eq!(f.frame(4, 3).e, init.e);
        let (z, mixed) = integrate_position(&g, &sys, &f, Vec4::ZERO);
        // plane z = u x0 + v y0
        let want = init.e[0] * spec.u(3) + init.e[1] * spec.v(2);
        assert!((z[3 * 5 + 2] - want).max_abs() < 1e-15);
        assert_eq!(mixed, 0.0);
    }

    #[test]
    fn constants_coefficients() {
        let g = constants_grid(3);
        let sys = assemble_system(&g).unwrap();
        let r5 = 5f64.sqrt();
        #[rustfmt::skip]
        let want = Matrix4::new(
            0.0, 0.0, 3.0, 0.0,
            0.0, 0.0, 4.0, -5.0,
            -3.0, 4.0, 0.0, 0.0,
            0.0, 5.0, 0.0, 0.0,
        ) / r5;
        assert!((sys.a(1, 1) - want).amax() < 1e-15);
        assert!(sys.pseudo_skew_residual() < 1e-15);
    }

    #[test]
    fn random_systems_are_pseudo_skew() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for eps in [1i8, -1] {
            let spec = GridSpec::new(Domain::new(0.0, 1.0, 0.0, 1.0), 4, 4).unwrap();
            let mut g = GFGrid::constant(spec, eps, GfValues::default(), 1.0, 1.0);
            for (i, j) in spec.nodes() {
                let mut r = || rng.gen_range(-3.0..3.0);
                g.set_values(i, j, GfValues {
                    gamma1: r(), gamma2: r(), nu1: r(), nu2: r(), lambda: r(), mu: r(), beta1: r(), beta2: r(),
                });
                g.set_coframe(i, j, crate::geoframe::Coframe { p: 1.5, q: r() * 0.1, r: r() * 0.1, s: 0.7 });
            }
            assert!(assemble_system(&g).unwrap().pseudo_skew_residual() < 1e-12);
        }
    }

    #[test]
    fn nonpositive_metric_is_rejected() {
        let mut g = constants_grid(3);
        g.sqrt_e.set(1, 2, -0.1);
        assert_eq!(assemble_system(&g).unwrap_err(), Error::InvalidMetric { i: 1, j: 2, value: -0.1 });
    }

    #[test]
    fn constants_round_trip() {
        let g = constants_grid(101);
        let s = reconstruct(&g, &standard_frame(1), (0, 0), Vec4::ZERO, ReconstructOptions::default()).unwrap();
        let d = s.diagnostics;
        assert!(d.max_gram_drift < 1e-10, "{d:?}");
        assert!(d.path_discrepancy < 1e-8, "{d:?}");
        assert!(d.mixed_partial_residual < 1e-8, "{d:?}");
        let spec = s.to_surface_spec().unwrap();
        let (u, v) = (spec.domain.u_min + 0.5, spec.domain.v_min + 0.5);
        let ff = first_form(&evaluate_jet(&spec, u, v).unwrap());
        assert!((ff.e - 0.2).abs() < 1e-6 && ff.f.abs() < 1e-6 && (ff.g + 0.2).abs() < 1e-6);
        let gf = geometric_functions_at(&spec, u, v, 1.0).unwrap();
        assert!((gf.values.lambda - 4.0).abs() < 1e-4);
        assert!((gf.values.mu.abs() - 5.0).abs() < 1e-4);
        assert!((gf.values.nu1 - 3.0).abs() < 1e-4);
    }

    #[test]
    fn reconstruction_is_deterministic_and_motion_covariant() {
        let g = constants_grid(21);
        let opts = ReconstructOptions::default();
        let a = reconstruct(&g, &standard_frame(1), (10, 10), Vec4::ZERO, opts).unwrap();
        let a2 = reconstruct(&g, &standard_frame(1), (10, 10), Vec4::ZERO, opts).unwrap();
        assert_eq!(a, a2);

        let boost = |v: Vec4| {
            let (c, s) = (0.7f64.cosh(), 0.7f64.sinh());
            Vec4::new(c * v.x1 + s * v.x3, v.x2, s * v.x1 + c * v.x3, v.x4)
        };
        let init = standard_frame(1);
        let moved = Frame4::new(init.e.map(boost), init.signature);
        let p0 = Vec4::new(1.0, 2.0, 3.0, 4.0);
        let b = reconstruct(&g, &moved, (10, 10), p0, opts).unwrap();
        let iso = align_rigid((a.position(10, 10), &a.frame(10, 10)), (b.position(10, 10), &b.frame(10, 10)), 1e-8).unwrap();
        for i in 0..21 {
            for j in 0..21 {
                assert!((iso.apply_point(a.position(i, j)) - b.position(i, j)).max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn incompatible_data_is_rejected() {
        let mut g = constants_grid(11);
        g.mu = Field2::filled(11, 11, 6.0);
        let err = reconstruct(&g, &standard_frame(1), (0, 0), Vec4::ZERO, ReconstructOptions::default()).unwrap_err();
        assert_eq!(err.code(), "IntegrabilityTooLarge");
    }

    #[test]
    fn bad_initial_frame_is_rejected() {
        let g = constants_grid(5);
        let sys = assemble_system(&g).unwrap();
        let err = integrate_frames(&sys, &standard_frame(-1), (0, 0), IntegrationOptions::default()).unwrap_err();
        assert_eq!(err.code(), "FrameMismatch");
        let mut skewed = standard_frame(1);
        skewed.e[0] = skewed.e[0] * 1.1;
        let err = integrate_frames(&sys, &skewed, (0, 0), IntegrationOptions::default()).unwrap_err();
        assert_eq!(err.code(), "FrameMismatch");
    }

    #[test]
    fn path_discrepancy_tracks_incompatibility() {
        let spec = GridSpec::new(Domain::new(0.0, 1.0, 0.0, 1.0), 21, 21).unwrap();
        let base = GfValues { nu1: 3.0, nu2: -3.0, lambda: 4.0, mu: 5.0, ..Default::default() };
        let r = 1.0 / 5f64.sqrt();
        let disc = |delta: f64| {
            let mut g = GFGrid::constant(spec, 1, base, r, r);
            g.mu = spec.sample(|u, _| 5.0 + delta * u);
            let sys = assemble_system(&g).unwrap();
            integrate_frames(&sys, &standard_frame(1), (0, 0), IntegrationOptions::default())
                .unwrap()
                .diagnostics
                .path_discrepancy
        };
        let (d1, d2) = (disc(1e-3), disc(2e-3));
        assert!(d1 > 1e-6);
        assert!((d2 / d1 - 2.0).abs() < 0.05, "{d1} {d2}");
    }

    #[test]
    fn reorthonormalization_reports_corrections() {
        let g = constants_grid(11);
        let plain = reconstruct(&g, &standard_frame(1), (0, 0), Vec4::ZERO, ReconstructOptions::default()).unwrap();
        assert_eq!(plain.diagnostics.max_reorthonormalization, None);
        let opts = ReconstructOptions {
            integration: IntegrationOptions { reorthonormalize_every: Some(2) },
            ..Default::default()
        };
        let s = reconstruct(&g, &standard_frame(1), (0, 0), Vec4::ZERO, opts).unwrap();
        let c = s.diagnostics.max_reorthonormalization.unwrap();
        assert!(c > 0.0 && c < 1e-4, "{c}");
        assert!(s.diagnostics.max_gram_drift < plain.diagnostics.max_gram_drift);
    }

    #[test]
    fn graph_p_round_trip() {
        let surface = catalog::graph_p(2.0);
        let spec = GridSpec::new(Domain::new(-0.1, 0.1, -0.1, 0.1), 21, 21).unwrap();
        let g = extract_gf_grid_default(&surface, spec).unwrap();
        let anchor = g.anchor.unwrap();
        let init = Frame4::new(anchor.frame, frame_signature(g.eps));
        let opts = ReconstructOptions { max_integrability: 0.1, ..Default::default() };
        let rec = reconstruct(&g, &init, (10, 10), anchor.position, opts).unwrap();
        let mut err = 0.0_f64;
        for (i, j) in spec.nodes() {
            let z = surface.position(spec.u(i), spec.v(j)).unwrap();
            err = err.max((rec.position(i, j) - z).max_abs());
        }
        assert!(err < 1e-4, "max position error {err}");
    }

    #[test]
    fn standard_frames_are_positive() {
        for eps in [1, -1] {
            let f = standard_frame(eps);
            assert!(f.orientation() > 0.0);
            assert_eq!(gram_residual(&f), 0.0);
        }
    }
}
