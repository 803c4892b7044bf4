//! Surfaces with parallel normalized mean curvature vector in canonical
//! parameters.
//!
//! In canonical coordinates such a surface is determined by three functions
//! `λ, μ, ν` (with `ν₁ = ν`, `ν₂ = −ν`, `β₁ = β₂ = 0`, `E = −G = 1/|μ|`)
//! subject to the natural PDEs
//!
//! ```text
//! ν_u = −λ_v + λ (ln|μ|)_v
//! ν_v =  λ_u − λ (ln|μ|)_u
//! ε (λ² − μ² + ν²) = ½ |μ| Δʰ ln|μ|,      Δʰ = ∂²_u − ∂²_v
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geoframe::{GFGrid, GfValues};
use crate::grid::{Domain, Field2, GridSpec};

/// Relative variation of `ν` below which it counts as constant.
pub const NU_CONSTANT_TOL: f64 = 1e-8;

/// Canonical-parameter data `(λ, μ, ν)` on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalTriple {
    pub domain: Domain,
    pub hu: f64,
    pub hv: f64,
    pub eps: i8,
    pub lambda: Field2,
    pub mu: Field2,
    pub nu: Field2,
}

impl CanonicalTriple {
    pub fn new(grid: GridSpec, eps: i8, lambda: Field2, mu: Field2, nu: Field2) -> Result<Self> {
        let t = Self { domain: grid.domain, hu: grid.hu(), hv: grid.hv(), eps, lambda, mu, nu };
        t.validate()?;
        Ok(t)
    }

    /// Samples `(λ, μ, ν) = f(u, v)` at the grid nodes.
    pub fn sample(grid: GridSpec, eps: i8, f: impl Fn(f64, f64) -> (f64, f64, f64)) -> Result<Self> {
        let lambda = grid.sample(|u, v| f(u, v).0);
        let mu = grid.sample(|u, v| f(u, v).1);
        let nu = grid.sample(|u, v| f(u, v).2);
        Self::new(grid, eps, lambda, mu, nu)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.lambda.shape()
    }

    pub fn grid_spec(&self) -> GridSpec {
        let (nu, nv) = self.shape();
        GridSpec { domain: self.domain, nu, nv }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps != 1 && self.eps != -1 {
            return Err(Error::Invalid(format!("eps must be +1 or -1, got {}", self.eps)));
        }
        let (nu, nv) = self.shape();
        let spec = GridSpec::new(self.domain, nu, nv)?;
        if self.mu.shape() != (nu, nv) || self.nu.shape() != (nu, nv) {
            return Err(Error::Invalid("lambda, mu and nu must share one shape".into()));
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
        for (name, f) in [("lambda", &self.lambda), ("mu", &self.mu), ("nu", &self.nu)] {
            if f.values().iter().any(|x| !x.is_finite()) {
                return Err(Error::Invalid(format!("{name} contains non-finite values")));
            }
        }
        Ok(())
    }

    /// Fails on the first node (row-major) where μ is zero or has the
    /// opposite sign to μ at the first node.
    pub fn check_mu(&self) -> Result<()> {
        mu_nonvanishing(&self.mu)
    }

    pub fn nu_is_constant(&self) -> bool {
        self.nu.variation() <= NU_CONSTANT_TOL * self.nu.max_abs().max(1.0)
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.nu_is_constant() {
            w.push(
                "nu is constant: the data describes a surface with parallel mean curvature \
                 vector (PMCV subclass), outside the nu != const hypothesis"
                    .to_string(),
            );
        }
        w
    }
}

fn mu_nonvanishing(mu: &Field2) -> Result<()> {
    let (nu, nv) = mu.shape();
    let sign = mu.get(0, 0).signum();
    for i in 0..nu {
        for j in 0..nv {
            let m = mu.get(i, j);
            if m == 0.0 || m.signum() != sign {
                return Err(Error::MuVanishes { i, j });
            }
        }
    }
    Ok(())
}

/// `Δʰ f = f_uu − f_vv` by central differences; boundary nodes are NaN.
pub fn hyperbolic_laplacian(f: &Field2, hu: f64, hv: f64) -> Result<Field2> {
    let (nu, nv) = f.shape();
    if nu < 3 || nv < 3 {
        return Err(Error::GridTooSmall { nu, nv, min: 3 });
    }
    let mut out = Field2::filled(nu, nv, f64::NAN);
    for i in 1..nu - 1 {
        for j in 1..nv - 1 {
            let c = 2.0 * f.get(i, j);
            let fuu = (f.get(i + 1, j) - c + f.get(i - 1, j)) / (hu * hu);
            let fvv = (f.get(i, j + 1) - c + f.get(i, j - 1)) / (hv * hv);
            out.set(i, j, fuu - fvv);
        }
    }
    Ok(out)
}

/// Residuals of the three natural PDEs. `r3` is NaN on boundary nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaturalPdeResiduals {
    pub r1: Field2,
    pub r2: Field2,
    pub r3: Field2,
}

impl NaturalPdeResiduals {
    /// Max-norms `[r1, r2, r3]` over nodes where the residual is defined.
    pub fn max_abs(&self) -> [f64; 3] {
        let m = |f: &Field2| f.values().iter().filter(|x| x.is_finite()).fold(0.0_f64, |a, x| a.max(x.abs()));
        [m(&self.r1), m(&self.r2), m(&self.r3)]
    }

    pub fn max(&self) -> f64 {
        self.max_abs().into_iter().fold(0.0, f64::max)
    }
}

pub fn natural_pde_residuals(t: &CanonicalTriple) -> Result<NaturalPdeResiduals> {
    t.validate()?;
    t.check_mu()?;
    let (hu, hv) = (t.hu, t.hv);
    let eps = t.eps as f64;
    let ln_mu = t.mu.map(|m| m.abs().ln());
    let lap = hyperbolic_laplacian(&ln_mu, hu, hv)?;
    let (nu, nv) = t.shape();
    let mut r1 = Field2::filled(nu, nv, 0.0);
    let mut r2 = r1.clone();
    let mut r3 = r1.clone();
    for i in 0..nu {
        for j in 0..nv {
            let la = t.lambda.get(i, j);
            let (mu, n) = (t.mu.get(i, j), t.nu.get(i, j));
            let (lm_u, lm_v) = (ln_mu.d_u(i, j, hu), ln_mu.d_v(i, j, hv));
            r1.set(i, j, t.nu.d_u(i, j, hu) + t.lambda.d_v(i, j, hv) - la * lm_v);
            r2.set(i, j, t.nu.d_v(i, j, hv) - t.lambda.d_u(i, j, hu) + la * lm_u);
            r3.set(i, j, eps * (la * la - mu * mu + n * n) - 0.5 * mu.abs() * lap.get(i, j));
        }
    }
    Ok(NaturalPdeResiduals { r1, r2, r3 })
}

/// Geometric-function grid of the surface with canonical data `t`.
pub fn gf_from_canonical(t: &CanonicalTriple) -> Result<GFGrid> {
    t.validate()?;
    t.check_mu()?;
    let spec = t.grid_spec();
    let root = t.mu.map(|m| m.abs().sqrt());
    let mut g = GFGrid::constant(spec, t.eps, GfValues::default(), 1.0, 1.0);
    g.gamma1 = root.diff_v(t.hv);
    g.gamma2 = root.diff_u(t.hu);
    g.nu1 = t.nu.clone();
    g.nu2 = t.nu.map(|x| -x);
    g.lambda = t.lambda.clone();
    g.mu = t.mu.clone();
    g.sqrt_e = root.map(|r| 1.0 / r);
    g.sqrt_neg_g = g.sqrt_e.clone();
    Ok(g)
}

/// Separation `E|μ| = φ(u)`, `−G|μ| = ψ(v)` and the canonical change of
/// parameters `ū = ∫√φ du`, `v̄ = ∫√ψ dv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    /// `max |E|μ| − φ(u)|` over the grid.
    pub phi_residual: f64,
    /// `max |−G|μ| − ψ(v)|` over the grid.
    pub psi_residual: f64,
    pub u_bar: Vec<f64>,
    pub v_bar: Vec<f64>,
}

fn cumulative_trapezoid(x: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for k in 1..x.len() {
        out[k] = out[k - 1] + 0.5 * (x[k] - x[k - 1]) * (f[k] + f[k - 1]);
    }
    out
}

/// Piecewise-linear interpolation on increasing `xs`, clamped at the ends.
fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&a| a <= x).clamp(1, n - 1);
    let t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    ys[k - 1] + t * (ys[k] - ys[k - 1])
}

/// Splits `E|μ|` and `−G|μ|` into functions of one variable and integrates
/// the change of parameters from `(u0, v0)`.
pub fn separability_and_change(
    grid: GridSpec,
    e: &Field2,
    g: &Field2,
    mu: &Field2,
    origin: (f64, f64),
    tolerance: f64,
) -> Result<SeparabilityReport> {
    let (nu, nv) = (grid.nu, grid.nv);
    for (name, f) in [("E", e), ("G", g), ("mu", mu)] {
        if f.shape() != (nu, nv) {
            return Err(Error::Invalid(format!("{name} has shape {:?}, expected ({nu}, {nv})", f.shape())));
        }
    }
    if !grid.domain.contains(origin.0, origin.1, 0.0) {
        return Err(Error::Domain { u: origin.0, v: origin.1, domain: grid.domain.to_array() });
    }
    mu_nonvanishing(mu)?;
    let a = e.zip_map(mu, |e, m| e * m.abs());
    let b = g.zip_map(mu, |g, m| -g * m.abs());
    let phi: Vec<f64> = (0..nu).map(|i| (0..nv).map(|j| a.get(i, j)).sum::<f64>() / nv as f64).collect();
    let psi: Vec<f64> = (0..nv).map(|j| (0..nu).map(|i| b.get(i, j)).sum::<f64>() / nu as f64).collect();
    let mut phi_residual = 0.0_f64;
    let mut psi_residual = 0.0_f64;
    for (i, j) in grid.nodes() {
        phi_residual = phi_residual.max((a.get(i, j) - phi[i]).abs());
        psi_residual = psi_residual.max((b.get(i, j) - psi[j]).abs());
    }
    let worst = phi_residual.max(psi_residual);
    if !(worst <= tolerance) {
        return Err(Error::NotSeparable { residual: worst, tolerance });
    }
    for (what, values) in [("phi", &phi), ("psi", &psi)] {
        if let Some(&value) = values.iter().find(|&&x| !(x > 0.0)) {
            return Err(Error::NonPositive { what: what.to_string(), value });
        }
    }
    let u: Vec<f64> = (0..nu).map(|i| grid.u(i)).collect();
    let v: Vec<f64> = (0..nv).map(|j| grid.v(j)).collect();
    let change = |x: &[f64], f: &[f64], x0: f64| {
        let roots: Vec<f64> = f.iter().map(|w| w.sqrt()).collect();
        let c = cumulative_trapezoid(x, &roots);
        let c0 = interp(x, &c, x0);
        c.into_iter().map(|y| y - c0).collect::<Vec<_>>()
    };
    let u_bar = change(&u, &phi, origin.0);
    let v_bar = change(&v, &psi, origin.1);
    Ok(SeparabilityReport { u, v, phi, psi, phi_residual, psi_residual, u_bar, v_bar })
}

/// Principal-coordinate PNMCV data in arbitrary (non-canonical) parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PnmcvGrid {
    pub domain: Domain,
    pub eps: i8,
    pub e: Field2,
    pub g: Field2,
    pub lambda: Field2,
    pub mu: Field2,
    pub nu: Field2,
}

impl PnmcvGrid {
    pub fn grid_spec(&self) -> Result<GridSpec> {
        let (nu, nv) = self.e.shape();
        GridSpec::new(self.domain, nu, nv)
    }

    /// Reads `E = (√E)²`, `G = −(√−G)²`, `λ`, `μ`, `ν = ν₁` from a principal
    /// geometric-function grid.
    pub fn from_gf_grid(grid: &GFGrid) -> Result<Self> {
        grid.validate()?;
        if !grid.is_principal() {
            return Err(Error::Invalid("canonicalization needs principal coordinates (q = r = 0)".into()));
        }
        Ok(Self {
            domain: grid.domain,
            eps: grid.eps,
            e: grid.sqrt_e.map(|p| p * p),
            g: grid.sqrt_neg_g.map(|s| -s * s),
            lambda: grid.lambda.clone(),
            mu: grid.mu.clone(),
            nu: grid.nu1.clone(),
        })
    }
}

/// Result of moving PNMCV data to canonical parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Canonicalization {
    pub report: SeparabilityReport,
    pub triple: CanonicalTriple,
    /// `max |E|μ| − 1|` and `max |−G|μ| − 1|` on the resampled grid.
    pub metric_residual: [f64; 2],
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Applies the canonical change and resamples onto a uniform `(ū, v̄)` grid
/// with the same node counts.
pub fn canonicalize(data: &PnmcvGrid, origin: (f64, f64), tolerance: f64) -> Result<Canonicalization> {
    let grid = data.grid_spec()?;
    let report = separability_and_change(grid, &data.e, &data.g, &data.mu, origin, tolerance)?;
    let (nu, nv) = (grid.nu, grid.nv);
    let new_grid = GridSpec::new(
        Domain::new(report.u_bar[0], report.u_bar[nu - 1], report.v_bar[0], report.v_bar[nv - 1]),
        nu,
        nv,
    )?;
    // inverse maps: node of the new grid -> fractional index in the old one
    let idx_u: Vec<f64> = (0..nu).map(|k| k as f64).collect();
    let idx_v: Vec<f64> = (0..nv).map(|k| k as f64).collect();
    let fi: Vec<f64> = (0..nu).map(|k| interp(&report.u_bar, &idx_u, new_grid.u(k))).collect();
    let fj: Vec<f64> = (0..nv).map(|k| interp(&report.v_bar, &idx_v, new_grid.v(k))).collect();
    let bilinear = |f: &Field2, x: f64, y: f64| {
        let i = (x.floor() as usize).min(nu - 2);
        let j = (y.floor() as usize).min(nv - 2);
        let (s, t) = (x - i as f64, y - j as f64);
        (1.0 - s) * ((1.0 - t) * f.get(i, j) + t * f.get(i, j + 1))
            + s * ((1.0 - t) * f.get(i + 1, j) + t * f.get(i + 1, j + 1))
    };
    let resample = |f: &Field2| new_grid.sample_indexed(|k, l| bilinear(f, fi[k], fj[l]));
    // metric in new parameters: Ē = E/φ(u), Ḡ = G/ψ(v)
    let e_bar = Field2::from_fn(nu, nv, |i, j| data.e.get(i, j) / report.phi[i]);
    let g_bar = Field2::from_fn(nu, nv, |i, j| data.g.get(i, j) / report.psi[j]);
    let (e_new, g_new) = (resample(&e_bar), resample(&g_bar));
    let triple =
        CanonicalTriple::new(new_grid, data.eps, resample(&data.lambda), resample(&data.mu), resample(&data.nu))?;
    let mut metric_residual = [0.0_f64; 2];
    for (i, j) in new_grid.nodes() {
        let m = triple.mu.get(i, j).abs();
        metric_residual[0] = metric_residual[0].max((e_new.get(i, j) * m - 1.0).abs());
        metric_residual[1] = metric_residual[1].max((-g_new.get(i, j) * m - 1.0).abs());
    }
    let warnings = triple.warnings();
    Ok(Canonicalization { report, triple, metric_residual, warnings })
}
