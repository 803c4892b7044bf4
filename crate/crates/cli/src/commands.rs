//! Subcommand implementations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lorentz_core::bonnet::{reconstruct, standard_frame, IntegrationOptions, ReconstructOptions};
use lorentz_core::catalog;
use lorentz_core::geoframe::{extract_gf_grid, frame_signature, integrability_residuals, GFGrid};
use lorentz_core::grid::{Domain, GridSpec};
use lorentz_core::invariants::{second_order_invariants_tol, InvariantReport, CLASSIFY_TOL};
use lorentz_core::jets::{evaluate_jet, FundamentalData, SurfaceSpec, DEFAULT_FD_STEP};
use lorentz_core::pe4::{Frame4, Vec4};
use lorentz_core::pnmcv::{canonicalize, gf_from_canonical, natural_pde_residuals, CanonicalTriple, PnmcvGrid};
use lorentz_core::Error;
use serde::Serialize;
use serde_json::Value;

use crate::args::*;
use crate::error::{CliError, Result};
use crate::io::{obj_mesh, output_path, parse_payload, read_value, write_atomic, write_json, ZGrid};

pub const DEFAULT_RES: usize = 21;
pub const DEFAULT_THRESHOLD: f64 = 0.1;
pub const DEFAULT_SEPARABILITY_TOL: f64 = 1e-6;

pub fn run(cli: Cli) -> Result<()> {
    let config = cli.config.as_deref().map(read_value).transpose()?;
    let cfg = config.as_ref();
    let section = cli.command.name();
    match &cli.command {
        Command::Analyze(a) => analyze(merge(a, cfg, section)?),
        Command::Classify(a) => classify(merge(a, cfg, section)?),
        Command::Frame(a) => frame(merge(a, cfg, section)?),
        Command::Reconstruct(a) => reconstruct_cmd(merge(a, cfg, section)?),
        Command::PnmcvVerify(a) => pnmcv_verify(merge(a, cfg, section)?),
        Command::Canonicalize(a) => canonicalize_cmd(merge(a, cfg, section)?),
        Command::Export(a) => export(merge(a, cfg, section)?),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn positive(what: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonPositive { what: what.into(), value: x }.into())
    }
}

fn pair(what: &str, v: &[f64]) -> Result<(f64, f64)> {
    match v {
        [a, b] => Ok((*a, *b)),
        _ => Err(usage(format!("--{what} takes two values"))),
    }
}

fn required<'a>(what: &str, p: &'a Option<PathBuf>) -> Result<&'a PathBuf> {
    p.as_ref().ok_or_else(|| usage(format!("--{what} is required")))
}

fn parse_params(items: &[String]) -> Result<BTreeMap<String, f64>> {
    items
        .iter()
        .map(|s| {
            let (k, v) = s.split_once('=').ok_or_else(|| usage(format!("parameter '{s}' is not NAME=VALUE")))?;
            let x = v.trim().parse::<f64>().map_err(|_| usage(format!("parameter '{s}' has no numeric value")))?;
            Ok((k.trim().to_string(), x))
        })
        .collect()
}

/// Nearest grid node to `(u, v)`; points outside the domain are rejected.
fn snap(grid: &GridSpec, (u, v): (f64, f64)) -> Result<(usize, usize)> {
    if !grid.domain.contains(u, v, 0.0) {
        return Err(Error::Domain { u, v, domain: grid.domain.to_array() }.into());
    }
    let idx = |x: f64, lo: f64, h: f64, n: usize| (((x - lo) / h).round().max(0.0) as usize).min(n - 1);
    Ok((idx(u, grid.domain.u_min, grid.hu(), grid.nu), idx(v, grid.domain.v_min, grid.hv(), grid.nv)))
}

fn projection(p: Option<&Vec<usize>>) -> Result<[usize; 3]> {
    let p = p.cloned().unwrap_or_else(|| vec![1, 2, 3]);
    match p[..] {
        [a, b, c] if [a, b, c].iter().all(|k| (1..=4).contains(k)) => Ok([a - 1, b - 1, c - 1]),
        _ => Err(usage("--projection takes three coordinates between 1 and 4")),
    }
}

fn read_zgrid(path: &Path) -> Result<ZGrid> {
    let value = read_value(path)?;
    parse_payload(path, &value, None)
}

/// A surface together with the grid it is evaluated on.
struct Resolved {
    spec: SurfaceSpec,
    grid: GridSpec,
}

/// Builds the surface and evaluation grid. `shrink` is how far a catalog
/// domain is pulled in for stencils that look past a point; `margin` is the
/// number of boundary nodes a sampled input cannot use.
fn resolve_surface(opts: &mut SurfaceOpts, shrink: f64, margin: usize) -> Result<Resolved> {
    let (spec, default_domain, default_res) = match (&opts.surface, &opts.input) {
        (Some(_), Some(_)) => return Err(usage("give either --surface or --input, not both")),
        (None, None) => return Err(usage("one of --surface or --input is required")),
        (Some(name), None) => {
            let mut spec = catalog::by_name(name, &parse_params(&opts.param)?)?;
            let mut pad = shrink;
            match opts.jets.get_or_insert(JetMode::Analytic) {
                JetMode::Analytic => {}
                JetMode::Numeric => {
                    let h = positive("fd-step", *opts.fd_step.get_or_insert(DEFAULT_FD_STEP))?;
                    spec = spec.to_numeric(h)?;
                    pad += h;
                }
            }
            let d = spec.domain;
            let dom = Domain::new(d.u_min + pad, d.u_max - pad, d.v_min + pad, d.v_max - pad);
            (spec, dom, [DEFAULT_RES, DEFAULT_RES])
        }
        (None, Some(path)) => {
            if opts.jets.is_some() || opts.fd_step.is_some() || !opts.param.is_empty() {
                return Err(usage("--jets, --fd-step and --param apply to catalog surfaces only"));
            }
            let z = read_zgrid(path)?;
            let src = GridSpec::new(z.domain, z.nu, z.nv)?;
            let spec = SurfaceSpec::sampled("input", src, z.flat()?)?;
            if src.nu <= 2 * margin + 2 || src.nv <= 2 * margin + 2 {
                return Err(Error::GridTooSmall { nu: src.nu, nv: src.nv, min: 2 * margin + 3 }.into());
            }
            let dom = Domain::new(src.u(margin), src.u(src.nu - 1 - margin), src.v(margin), src.v(src.nv - 1 - margin));
            (spec, dom, [src.nu - 2 * margin, src.nv - 2 * margin])
        }
    };
    let domain = match opts.domain.get_or_insert_with(|| default_domain.to_array().to_vec())[..] {
        [a, b, c, d] => Domain::new(a, b, c, d),
        _ => return Err(usage("--domain takes four values U0,U1,V0,V1")),
    };
    let res = match opts.res.get_or_insert_with(|| default_res.to_vec())[..] {
        [n] => [n, n],
        [a, b] => [a, b],
        _ => return Err(usage("--res takes one or two values")),
    };
    if res[0] < 3 || res[1] < 3 {
        return Err(Error::GridTooSmall { nu: res[0], nv: res[1], min: 3 }.into());
    }
    let grid = GridSpec::new(domain, res[0], res[1])?;
    Ok(Resolved { spec, grid })
}

#[derive(Serialize)]
struct PointError {
    code: &'static str,
    message: String,
}

/// One analyzed node. Invariant fields are absent when evaluation failed.
#[derive(Serialize)]
struct PointRow {
    i: usize,
    j: usize,
    u: f64,
    v: f64,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    inv: Option<InvariantRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<PointError>,
}

#[derive(Serialize)]
struct InvariantRow {
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "F")]
    f: f64,
    #[serde(rename = "G")]
    g: f64,
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "M")]
    m: f64,
    #[serde(rename = "N")]
    n: f64,
    k: f64,
    kappa: f64,
    #[serde(rename = "K")]
    gauss: f64,
    #[serde(rename = "D")]
    d: f64,
    #[serde(rename = "H")]
    h: Vec4,
    h_causal: &'static str,
    class: &'static str,
    discriminant_sign: i8,
}

impl From<&InvariantReport> for InvariantRow {
    fn from(r: &InvariantReport) -> Self {
        Self {
            e: r.e,
            f: r.f,
            g: r.g,
            l: r.l,
            m: r.m,
            n: r.n,
            k: r.k,
            kappa: r.kappa,
            gauss: r.gauss,
            d: r.d,
            h: r.h,
            h_causal: r.h_causal.as_str(),
            class: r.point_class.kind.as_str(),
            discriminant_sign: r.point_class.discriminant_sign,
        }
    }
}

impl PointRow {
    fn class(&self) -> String {
        match (&self.inv, &self.error) {
            (Some(r), _) => r.class.to_string(),
            (None, Some(e)) => format!("error:{}", e.code),
            (None, None) => unreachable!("a row holds invariants or an error"),
        }
    }
}

fn analyze_points(r: &Resolved, tol: f64) -> Vec<PointRow> {
    r.grid
        .nodes()
        .map(|(i, j)| {
            let (u, v) = (r.grid.u(i), r.grid.v(j));
            let res = evaluate_jet(&r.spec, u, v).and_then(|jet| FundamentalData::from_jet(&jet));
            match res {
                Ok(fund) => {
                    let rep = second_order_invariants_tol(&fund, tol);
                    PointRow { i, j, u, v, inv: Some((&rep).into()), error: None }
                }
                Err(e) => PointRow { i, j, u, v, inv: None, error: Some(PointError { code: e.code(), message: e.to_string() }) },
            }
        })
        .collect()
}

fn class_counts(rows: &[PointRow]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for r in rows {
        *counts.entry(r.class()).or_insert(0) += 1;
    }
    counts
}

/// Shortest round-trip text; scientific notation outside `[1e-5, 1e16)` and
/// negative zero printed as `0`.
fn fmt_num(x: f64) -> String {
    let x = x + 0.0;
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !a.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn csv_table(rows: &[PointRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "u", "v", "E", "F", "G", "L", "M", "N", "k", "kappa", "K", "D", "Hx1", "Hx2", "Hx3", "Hx4", "H_causal", "class",
    ];
    let csv_err = |e: csv::Error| usage(format!("cannot format CSV: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![fmt_num(r.u), fmt_num(r.v)];
        match &r.inv {
            Some(x) => {
                let nums = [x.e, x.f, x.g, x.l, x.m, x.n, x.k, x.kappa, x.gauss, x.d, x.h.x1, x.h.x2, x.h.x3, x.h.x4];
                rec.extend(nums.into_iter().map(fmt_num));
                rec.push(x.h_causal.to_string());
            }
            None => rec.extend(std::iter::repeat_n(String::new(), 15)),
        }
        rec.push(r.class());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| usage(format!("cannot format CSV: {e}")))
}

#[derive(Serialize)]
struct GridInfo {
    domain: Domain,
    nu: usize,
    nv: usize,
}

#[derive(Serialize)]
struct SurfaceInfo<'a> {
    name: &'a str,
    params: &'a BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct AnalyzeReport<'a> {
    surface: SurfaceInfo<'a>,
    grid: GridInfo,
    counts: BTreeMap<String, usize>,
    points: &'a [PointRow],
}

fn analyze(mut a: AnalyzeArgs) -> Result<()> {
    let r = resolve_surface(&mut a.surface, 0.0, 2)?;
    let tol = positive("tol", *a.tol.get_or_insert(CLASSIFY_TOL))?;
    let out = output_path(a.out.as_ref(), "analyze.json");
    let csv_path = a.csv.clone().unwrap_or_else(|| out.with_extension("csv"));
    a.out = Some(out.clone());
    a.csv = Some(csv_path.clone());

    let rows = analyze_points(&r, tol);
    let counts = class_counts(&rows);
    let report = AnalyzeReport {
        surface: SurfaceInfo { name: &r.spec.name, params: &r.spec.params },
        grid: GridInfo { domain: r.grid.domain, nu: r.grid.nu, nv: r.grid.nv },
        counts,
        points: &rows,
    };
    write_json(&out, &record("analyze", &a), &report)?;
    write_atomic(&csv_path, &csv_table(&rows)?)?;
    let errors = rows.iter().filter(|r| r.error.is_some()).count();
    println!("analyze: {} points ({errors} failed) -> {}, {}", rows.len(), out.display(), csv_path.display());
    Ok(())
}

#[derive(Serialize)]
struct ClassifyReport<'a> {
    surface: SurfaceInfo<'a>,
    grid: GridInfo,
    total: usize,
    counts: &'a BTreeMap<String, usize>,
}

fn classify(mut a: ClassifyArgs) -> Result<()> {
    let r = resolve_surface(&mut a.surface, 0.0, 2)?;
    let tol = positive("tol", *a.tol.get_or_insert(CLASSIFY_TOL))?;
    let rows = analyze_points(&r, tol);
    let counts = class_counts(&rows);
    let width = counts.keys().map(String::len).max().unwrap_or(0).max(5);
    println!("{:<width$}  {:>7}  {:>7}", "class", "count", "share");
    for (k, n) in &counts {
        println!("{k:<width$}  {n:>7}  {:>6.1}%", 100.0 * *n as f64 / rows.len() as f64);
    }
    println!("{:<width$}  {:>7}", "total", rows.len());
    if let Some(out) = a.out.clone() {
        let report = ClassifyReport {
            surface: SurfaceInfo { name: &r.spec.name, params: &r.spec.params },
            grid: GridInfo { domain: r.grid.domain, nu: r.grid.nu, nv: r.grid.nv },
            total: rows.len(),
            counts: &counts,
        };
        write_json(&out, &record("classify", &a), &report)?;
    }
    Ok(())
}

fn frame(mut a: FrameArgs) -> Result<()> {
    let sampled = a.surface.input.is_some();
    let step = if sampled { 0.0 } else { positive("frame-step", *a.frame_step.get_or_insert(DEFAULT_FD_STEP))? };
    let r = resolve_surface(&mut a.surface, step, 3)?;
    let anchor = match &a.anchor {
        Some(p) => snap(&r.grid, pair("anchor", p)?)?,
        None => (r.grid.nu / 2, r.grid.nv / 2),
    };
    a.anchor = Some(vec![r.grid.u(anchor.0), r.grid.v(anchor.1)]);
    let out = output_path(a.out.as_ref(), "frame.json");
    a.out = Some(out.clone());

    // Sampled surfaces difference their frames on the sample grid and ignore the step.
    let g = extract_gf_grid(&r.spec, r.grid, if sampled { DEFAULT_FD_STEP } else { step }, anchor)?;
    write_json(&out, &record("frame", &a), &g)?;
    let res = integrability_residuals(&g)?.overall();
    println!(
        "frame: {}x{} grid, eps {}, integrability residual {res:.3e} -> {}",
        g.nu,
        g.nv,
        g.eps,
        out.display()
    );
    Ok(())
}

fn reconstruct_cmd(mut a: ReconstructArgs) -> Result<()> {
    let input = required("input", &a.input)?.clone();
    let g: GFGrid = parse_payload(&input, &read_value(&input)?, None)?;
    g.validate()?;
    let grid = g.grid_spec();
    let init_mode = *a.init.get_or_insert(if g.anchor.is_some() { InitMode::Anchor } else { InitMode::Standard });
    let (init, anchor_node, anchor_pos) = match init_mode {
        InitMode::Standard => (standard_frame(g.eps), None, Vec4::ZERO),
        InitMode::Anchor => {
            let an = g.anchor.ok_or_else(|| usage("--init anchor needs a grid with an anchor"))?;
            (Frame4::new(an.frame, frame_signature(g.eps)), Some((an.node[0], an.node[1])), an.position)
        }
    };
    let origin = match &a.origin {
        Some(p) => snap(&grid, pair("origin", p)?)?,
        None => anchor_node.unwrap_or((grid.nu / 2, grid.nv / 2)),
    };
    a.origin = Some(vec![grid.u(origin.0), grid.v(origin.1)]);
    let p0 = match a.p0.get_or_insert_with(|| anchor_pos.to_array().to_vec())[..] {
        [x1, x2, x3, x4] => Vec4::new(x1, x2, x3, x4),
        _ => return Err(usage("--p0 takes four values")),
    };
    let threshold = positive("threshold", *a.threshold.get_or_insert(DEFAULT_THRESHOLD))?;
    if a.reorthonormalize == Some(0) {
        return Err(Error::NonPositive { what: "reorthonormalize".into(), value: 0.0 }.into());
    }
    let proj = projection(a.projection.as_ref())?;
    a.projection = Some(proj.iter().map(|k| k + 1).collect());
    let out = output_path(a.out.as_ref(), "reconstruct.json");
    let obj = a.obj.clone().unwrap_or_else(|| out.with_extension("obj"));
    a.out = Some(out.clone());
    a.obj = Some(obj.clone());

    let opts = ReconstructOptions {
        max_integrability: threshold,
        integration: IntegrationOptions { reorthonormalize_every: a.reorthonormalize },
    };
    let rec = reconstruct(&g, &init, origin, p0, opts)?;
    write_json(&out, &record("reconstruct", &a), &rec)?;
    let z = ZGrid { domain: rec.domain, nu: rec.nu, nv: rec.nv, z: rec.z.clone() };
    write_atomic(&obj, obj_mesh(&z, proj).as_bytes())?;
    let d = &rec.diagnostics;
    println!(
        "reconstruct: integrability {:.3e}, gram drift {:.3e}, path discrepancy {:.3e} -> {}, {}",
        d.max_integrability_residual,
        d.max_gram_drift,
        d.path_discrepancy,
        out.display(),
        obj.display()
    );
    for w in &rec.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    grid: GridInfo,
    eps: i8,
    /// Largest |R1|, |R2|, |R3| over the interior nodes.
    max_residuals: [f64; 3],
    max_residual: f64,
    /// Integrability of the geometric functions built from the triple.
    integrability_residual: f64,
    nu_constant: bool,
    warnings: Vec<String>,
}

fn pnmcv_verify(mut a: PnmcvVerifyArgs) -> Result<()> {
    let input = required("input", &a.input)?.clone();
    let t: CanonicalTriple = parse_payload(&input, &read_value(&input)?, Some("triple"))?;
    t.validate()?;
    let tol = a.tol.map(|x| positive("tol", x)).transpose()?;
    let out = output_path(a.out.as_ref(), "pnmcv-verify.json");
    a.out = Some(out.clone());

    let res = natural_pde_residuals(&t)?;
    let max_residuals = res.max_abs();
    let gf = gf_from_canonical(&t)?;
    let spec = t.grid_spec();
    let report = VerifyReport {
        grid: GridInfo { domain: spec.domain, nu: spec.nu, nv: spec.nv },
        eps: t.eps,
        max_residuals,
        max_residual: res.max(),
        integrability_residual: integrability_residuals(&gf)?.overall(),
        nu_constant: t.nu_is_constant(),
        warnings: t.warnings(),
    };
    write_json(&out, &record("pnmcv-verify", &a), &report)?;
    let [r1, r2, r3] = max_residuals;
    println!("pnmcv-verify: max residuals {r1:.3e} {r2:.3e} {r3:.3e} -> {}", out.display());
    if let Some(tol) = tol {
        if !(report.max_residual <= tol) {
            return Err(Error::IntegrabilityTooLarge { residual: report.max_residual, threshold: tol }.into());
        }
    }
    Ok(())
}

fn canonicalize_cmd(mut a: CanonicalizeArgs) -> Result<()> {
    let input = required("input", &a.input)?.clone();
    let value = read_value(&input)?;
    let data: PnmcvGrid = if value.get("sqrt_e").is_some() {
        let g: GFGrid = parse_payload(&input, &value, None)?;
        PnmcvGrid::from_gf_grid(&g)?
    } else {
        parse_payload(&input, &value, None)?
    };
    let grid = data.grid_spec()?;
    let origin = pair("origin", a.origin.get_or_insert_with(|| vec![grid.domain.u_min, grid.domain.v_min]))?;
    let tol = positive("tol", *a.tol.get_or_insert(DEFAULT_SEPARABILITY_TOL))?;
    let out = output_path(a.out.as_ref(), "canonicalize.json");
    a.out = Some(out.clone());

    let c = canonicalize(&data, origin, tol)?;
    let config = record("canonicalize", &a);
    write_json(&out, &config, &c)?;
    if let Some(p) = &a.triple_out {
        write_json(p, &config, &c.triple)?;
    }
    println!(
        "canonicalize: separability residuals {:.3e} {:.3e} -> {}",
        c.report.phi_residual,
        c.report.psi_residual,
        out.display()
    );
    for w in &c.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn export(mut a: ExportArgs) -> Result<()> {
    let input = required("input", &a.input)?.clone();
    let z = read_zgrid(&input)?;
    z.flat()?;
    let proj = projection(a.projection.as_ref())?;
    a.projection = Some(proj.iter().map(|k| k + 1).collect());
    let out = output_path(a.out.as_ref(), "export.obj");
    write_atomic(&out, obj_mesh(&z, proj).as_bytes())?;
    println!("export: {}x{} mesh -> {}", z.nu, z.nv, out.display());
    Ok(())
}

/// Prints the machine-readable error to stderr and returns the exit code.
pub fn report_error(e: &CliError) -> i32 {
    let v: Value = e.to_json();
    eprintln!("{}", serde_json::to_string(&v).expect("error objects serialize"));
    e.exit_code()
}
