//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the summary is printed even
//! when test output is captured. Exits non-zero if any criterion fails.

use std::f64::consts::FRAC_PI_2;
use std::time::{Duration, Instant};

use lorentz_core::bonnet::{
    assemble_system, frame_to_matrix, integrate_frames, reconstruct, standard_frame, IntegrationOptions,
    ReconstructOptions,
};
use lorentz_core::catalog;
use lorentz_core::geoframe::{
    extract_gf_grid_default, frame_signature, geometric_functions_at, integrability_residuals, GFGrid, GfValues,
};
use lorentz_core::grid::{Domain, Field2, GridSpec};
use lorentz_core::invariants::{
    normal_connection_curvature, second_order_invariants, shape_operators, umbilicity_residual, InvariantReport,
};
use lorentz_core::jets::{evaluate_jet, orthogonal_gauge, FundamentalData, SurfaceSpec};
use lorentz_core::pe4::{align_rigid, Frame4, Vec4};
use lorentz_core::pnmcv::{canonicalize, hyperbolic_laplacian, natural_pde_residuals, CanonicalTriple, PnmcvGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn report_at(spec: &SurfaceSpec, u: f64, v: f64) -> InvariantReport {
    let fund = FundamentalData::from_jet(&evaluate_jet(spec, u, v).unwrap()).unwrap();
    second_order_invariants(&fund)
}

fn golden_invariants() -> Outcome {
    let r = report_at(&catalog::graph_p(2.0), 0.0, 0.0);
    let checks = [
        ("L", r.l, -4.0),
        ("M", r.m, 0.0),
        ("N", r.n, -4.0),
        ("k", r.k, -16.0),
        ("kappa", r.kappa, 0.0),
        ("K", r.gauss, -3.0),
        ("D", r.d, 64.0),
        ("H1", r.h.x1, 0.0),
        ("H2", r.h.x2, 1.0),
        ("H3", r.h.x3, 0.0),
        ("H4", r.h.x4, 0.0),
    ];
    let worst = checks.iter().map(|(_, a, b)| (a - b).abs()).fold(0.0, f64::max);
    let bad: Vec<_> = checks.iter().filter(|(_, a, b)| (a - b).abs() >= 1e-9).map(|(n, ..)| *n).collect();
    outcome(bad.is_empty(), format!("max deviation {worst:.1e}, H {}{}", r.h_causal.as_str(), fmt_bad(&bad)))
}

fn fmt_bad(bad: &[&str]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!(", off: {}", bad.join(" "))
    }
}

/// `M ↦ Jᵀ M J` on a symmetric 2×2 given as `(a, b, c) = [[a, b], [b, c]]`.
fn congruence(j: [[f64; 2]; 2], (a, b, c): (f64, f64, f64)) -> (f64, f64, f64) {
    let [[p, q], [r, s]] = j;
    (
        a * p * p + 2.0 * b * p * r + c * r * r,
        a * p * q + b * (p * s + q * r) + c * r * s,
        a * q * q + 2.0 * b * q * s + c * s * s,
    )
}

fn gauge_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_lmn = 0.0_f64;
    let mut worst_inv = 0.0_f64;
    for spec in [catalog::graph_p(2.0), catalog::graph_k(1.0, 2.0, 1.0)] {
        for _ in 0..100 {
            let (u, v) = (rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
            let jet = evaluate_jet(&spec, u, v).unwrap();
            let base = FundamentalData::from_jet(&jet).unwrap();
            let r0 = second_order_invariants(&base);
            let scale = r0.l.abs().max(r0.m.abs()).max(r0.n.abs()).max(1.0);

            // hyperbolic rotation of the normal frame: L, M, N unchanged
            let theta = rng.gen_range(-2.0..2.0);
            let r1 = second_order_invariants(&base.rotate_normals(theta).unwrap());
            for (a, b) in [(r1.l, r0.l), (r1.m, r0.m), (r1.n, r0.n)] {
                worst_lmn = worst_lmn.max((a - b).abs() / scale);
            }
            for (a, b) in [(r1.k, r0.k), (r1.kappa, r0.kappa), (r1.gauss, r0.gauss)] {
                worst_inv = worst_inv.max(rel(a, b));
            }

            // linear reparametrization keeping E > 0 > G
            let j = loop {
                let j = [[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)], [
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                ]];
                let det: f64 = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                let (e, _, g) = congruence(j, (r0.e, r0.f, r0.g));
                if det.abs() > 0.2 && e > 0.05 && g < -0.05 {
                    break j;
                }
            };
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let moved = jet.linear_reparam(j);
            // with the normal frame held fixed: (L, M, N) ↦ sign(J)·Jᵀ(L, M, N)J
            let fixed = second_order_invariants(&FundamentalData::with_normals(&moved, base.n1, base.n2).unwrap());
            let (l, m, n) = congruence(j, (r0.l, r0.m, r0.n));
            let s = det.signum();
            let jscale = scale * (j.iter().flatten().fold(0.0_f64, |a, x| a.max(x.abs()))).powi(2);
            for (a, b) in [(fixed.l, s * l), (fixed.m, s * m), (fixed.n, s * n)] {
                worst_lmn = worst_lmn.max((a - b).abs() / jscale);
            }
            // with the orientation-anchored normal frame: k, ϰ, K invariant
            let r2 = second_order_invariants(&FundamentalData::from_jet(&moved).unwrap());
            for (a, b) in [(r2.k, r0.k), (r2.kappa, r0.kappa), (r2.gauss, r0.gauss)] {
                worst_inv = worst_inv.max(rel(a, b));
            }
        }
    }
    outcome(
        worst_lmn < 1e-9 && worst_inv < 1e-9,
        format!("L/M/N law deviation {worst_lmn:.1e}, invariant drift {worst_inv:.1e} (relative)"),
    )
}

fn normal_curvature_proposition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let surfaces = [
        catalog::graph_p(2.0),
        catalog::graph_k(1.0, 2.0, 1.0),
        catalog::graph_t(1.0, 2.0, 1.0),
        catalog::graph2(),
        catalog::chen_minimal(),
    ];
    let mut worst = 0.0_f64;
    for k in 0..50 {
        let spec = surfaces[k % surfaces.len()].to_numeric(1e-4).unwrap();
        let d = spec.domain;
        let u = rng.gen_range(d.u_min + 0.01..d.u_max - 0.01);
        let v = rng.gen_range(d.v_min + 0.01..d.v_max - 0.01);
        let jet = orthogonal_gauge(&evaluate_jet(&spec, u, v).unwrap());
        let fund = FundamentalData::from_jet(&jet).unwrap();
        let r = second_order_invariants(&fund);
        let (a1, a2) = shape_operators(&fund, 1e-8).unwrap();
        worst = worst.max((normal_connection_curvature(&a1, &a2) - r.kappa).abs());
    }
    outcome(worst < 1e-6, format!("max |commutator - kappa| {worst:.1e} over 50 points"))
}

fn minimal_iff_umbilical() -> Outcome {
    let spec = catalog::chen_minimal();
    let grid = GridSpec::new(spec.domain, 21, 21).unwrap();
    let (mut h_max, mut umb_max) = (0.0_f64, 0.0_f64);
    for (i, j) in grid.nodes() {
        let (u, v) = (grid.u(i), grid.v(j));
        assert!(u.sin().abs() > 0.5, "grid must avoid sin u = 0");
        let r = report_at(&spec, u, v);
        h_max = h_max.max(r.h.euclid_norm());
        umb_max = umb_max.max(umbilicity_residual(&r));
    }
    outcome(h_max < 1e-8 && umb_max < 1e-8, format!("max |H| {h_max:.1e}, max umbilicity residual {umb_max:.1e}"))
}

fn geometric_identities() -> Outcome {
    let grid = GridSpec::new(Domain::new(-0.2, 0.2, -0.2, 0.2), 11, 11).unwrap();
    let mut worst = [0.0_f64; 3];
    let mut nodes = 0;
    for spec in [catalog::graph_p(2.0), catalog::graph_k(1.0, 2.0, 1.0)] {
        for (i, j) in grid.nodes() {
            let (u, v) = (grid.u(i), grid.v(j));
            let Ok(gf) = geometric_functions_at(&spec, u, v, 1e-3) else { continue };
            nodes += 1;
            let r = report_at(&spec, u, v);
            let g = gf.values;
            let e = gf.eps as f64;
            worst[0] = worst[0].max((r.gauss - e * (g.lambda.powi(2) - g.mu.powi(2) - g.nu1 * g.nu2)).abs());
            worst[1] = worst[1].max((r.kappa - g.mu * (g.nu1 + g.nu2)).abs());
            worst[2] = worst[2].max((r.k - 4.0 * g.mu.powi(2) * g.nu1 * g.nu2).abs());
        }
    }
    outcome(
        nodes > 0 && worst.iter().all(|&w| w < 1e-6),
        format!("{nodes} general-type nodes; max deviations K {:.1e}, kappa {:.1e}, k {:.1e}", worst[0], worst[1], worst[2]),
    )
}

fn constants_grid(n: usize) -> GFGrid {
    let v = GfValues { nu1: 3.0, nu2: -3.0, lambda: 4.0, mu: 5.0, ..Default::default() };
    let r = 1.0 / 5f64.sqrt();
    GFGrid::constant(GridSpec::new(Domain::new(0.0, 1.0, 0.0, 1.0), n, n).unwrap(), 1, v, r, r)
}

fn bonnet_constants() -> Outcome {
    let g = constants_grid(101);
    let rec = match reconstruct(&g, &standard_frame(1), (0, 0), Vec4::ZERO, ReconstructOptions::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("reconstruction failed: {e}")),
    };
    let spec = rec.to_surface_spec().unwrap();
    let grid = rec.grid_spec();
    let mut worst = 0.0_f64;
    for i in 3..grid.nu - 3 {
        for j in 3..grid.nv - 3 {
            let gf = match geometric_functions_at(&spec, grid.u(i), grid.v(j), grid.hu()) {
                Ok(gf) => gf,
                Err(e) => return outcome(false, format!("re-extraction failed at ({i},{j}): {e}")),
            };
            let v = gf.values;
            worst = worst.max((v.lambda - 4.0).abs()).max((v.mu.abs() - 5.0).abs()).max((v.nu1 - 3.0).abs());
        }
    }
    let d = rec.diagnostics;
    outcome(
        worst < 1e-4 && d.max_gram_drift < 1e-10 && d.mixed_partial_residual < 1e-8,
        format!(
            "re-extraction error {worst:.1e}, Gram drift {:.1e}, mixed-partial residual {:.1e}",
            d.max_gram_drift, d.mixed_partial_residual
        ),
    )
}

fn graph_p_grid() -> (SurfaceSpec, GFGrid) {
    let surface = catalog::graph_p(2.0);
    let spec = GridSpec::new(Domain::new(-0.1, 0.1, -0.1, 0.1), 21, 21).unwrap();
    let g = extract_gf_grid_default(&surface, spec).unwrap();
    (surface, g)
}

/// Caller threshold for the integrability precondition on extracted data,
/// whose residuals are O(h²) discretization error rather than incompatibility.
const EXTRACTED_THRESHOLD: f64 = 0.1;

fn bonnet_extracted() -> Outcome {
    let (surface, g) = graph_p_grid();
    let opts = ReconstructOptions { max_integrability: EXTRACTED_THRESHOLD, ..Default::default() };
    let rec = match reconstruct(&g, &standard_frame(g.eps), (10, 10), Vec4::ZERO, opts) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("reconstruction failed: {e}")),
    };
    let anchor = g.anchor.as_ref().unwrap();
    let original = Frame4::new(anchor.frame, frame_signature(g.eps));
    let iso = align_rigid((rec.position(10, 10), &rec.frame(10, 10)), (anchor.position, &original), 1e-8).unwrap();
    let grid = g.grid_spec();
    let mut worst = 0.0_f64;
    for (i, j) in grid.nodes() {
        let z = surface.position(grid.u(i), grid.v(j)).unwrap();
        worst = worst.max((iso.apply_point(rec.position(i, j)) - z).max_abs());
    }
    outcome(
        worst < 1e-4,
        format!(
            "max position error {worst:.1e} after alignment (integrability residual {:.1e})",
            rec.diagnostics.max_integrability_residual
        ),
    )
}

fn uniqueness() -> Outcome {
    let (_, g) = graph_p_grid();
    let opts = ReconstructOptions { max_integrability: EXTRACTED_THRESHOLD, ..Default::default() };
    let a = reconstruct(&g, &standard_frame(1), (10, 10), Vec4::ZERO, opts).unwrap();
    // second initial frame: boosts in the (e1, e3) and (e2, e4) planes
    let boost = |w: Vec4| {
        let (c, s) = (0.8f64.cosh(), 0.8f64.sinh());
        Vec4::new(c * w.x1 + s * w.x3, w.x2, s * w.x1 + c * w.x3, w.x4)
    };
    let twist = |w: Vec4| {
        let (c, s) = (0.3f64.cosh(), 0.3f64.sinh());
        Vec4::new(w.x1, c * w.x2 + s * w.x4, w.x3, s * w.x2 + c * w.x4)
    };
    let init = standard_frame(1);
    let other = Frame4::new(init.e.map(|w| twist(boost(w))), init.signature);
    let b = reconstruct(&g, &other, (10, 10), Vec4::new(0.5, -1.0, 2.0, 0.25), opts).unwrap();
    let iso = align_rigid((a.position(10, 10), &a.frame(10, 10)), (b.position(10, 10), &b.frame(10, 10)), 1e-8).unwrap();
    let grid = g.grid_spec();
    let worst = grid
        .nodes()
        .map(|(i, j)| (iso.apply_point(a.position(i, j)) - b.position(i, j)).max_abs())
        .fold(0.0, f64::max);
    outcome(worst < 1e-6, format!("max aligned position error {worst:.1e}"))
}

fn pnmcv_pdes() -> Outcome {
    let grid = GridSpec::new(Domain::new(0.0, 1.0, 0.0, 1.0), 21, 21).unwrap();
    let exact = CanonicalTriple::sample(grid, 1, |_, _| (4.0, 5.0, 3.0)).unwrap();
    let r = natural_pde_residuals(&exact).unwrap().max();
    let perturbed = CanonicalTriple::sample(grid, 1, |_, _| (4.0, 6.0, 3.0)).unwrap();
    let p = natural_pde_residuals(&perturbed).unwrap();
    let r3_dev = p.r3.values().iter().filter(|x| x.is_finite()).map(|x| (x + 11.0).abs()).fold(0.0, f64::max);
    let [r1, r2, _] = p.max_abs();
    outcome(
        r < 1e-12 && r3_dev < 1e-12 && r1 < 1e-12 && r2 < 1e-12,
        format!("constants residual {r:.1e}; perturbed r3 = -11 within {r3_dev:.1e}"),
    )
}

fn canonicalization() -> Outcome {
    // the constants family reparametrized by u = ū/2, so E|μ| = φ(u) = 4
    let n = 41;
    let spec = GridSpec::new(Domain::new(0.0, 0.5, 0.0, 1.0), n, n).unwrap();
    let f = |x: f64| Field2::filled(n, n, x);
    let stretched = PnmcvGrid {
        domain: spec.domain,
        eps: 1,
        e: f(4.0 / 5.0),
        g: f(-1.0 / 5.0),
        lambda: f(4.0),
        mu: f(5.0),
        nu: f(3.0),
    };
    // and a variable stretch φ(u) = (1 + u)², ψ(v) = 2 + cos v over varying μ
    let mu = spec.sample(|u, v| 5.0 + 0.5 * (u + v).sin());
    let variable = PnmcvGrid {
        domain: spec.domain,
        eps: 1,
        e: Field2::from_fn(n, n, |i, j| (1.0 + spec.u(i)).powi(2) / mu.get(i, j)),
        g: Field2::from_fn(n, n, |i, j| -(2.0 + spec.v(j).cos()) / mu.get(i, j)),
        lambda: f(4.0),
        mu,
        nu: f(3.0),
    };
    let mut details = Vec::new();
    let mut pass = true;
    for (name, data) in [("phi = 4", stretched), ("variable", variable)] {
        match canonicalize(&data, (0.0, 0.0), 1e-8) {
            Ok(c) => {
                let worst = c.metric_residual[0].max(c.metric_residual[1]);
                pass &= worst < 1e-4;
                details.push(format!("{name}: separable, max |E|mu| - 1|, |-G|mu| - 1| = {worst:.1e}"));
            }
            Err(e) => {
                pass = false;
                details.push(format!("{name}: {e}"));
            }
        }
    }
    outcome(pass, details.join("; "))
}

fn ratio_ok(r: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&r)
}

fn convergence_orders() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;

    // FD jets on a non-polynomial surface
    let chen = catalog::chen_minimal();
    let (u, v) = (FRAC_PI_2 + 0.1, 0.05);
    let exact = evaluate_jet(&chen, u, v).unwrap();
    let jet_err = |h: f64| {
        let j = evaluate_jet(&chen.to_numeric(h).unwrap(), u, v).unwrap();
        [(j.z_u, exact.z_u), (j.z_v, exact.z_v), (j.z_uu, exact.z_uu), (j.z_uv, exact.z_uv), (j.z_vv, exact.z_vv)]
            .iter()
            .map(|(a, b)| (*a - *b).max_abs())
            .fold(0.0, f64::max)
    };
    let r = jet_err(0.02) / jet_err(0.01);
    pass &= ratio_ok(r, 3.5, 4.5);
    parts.push(format!("FD jets {r:.2}"));

    // integrability residuals of extracted grids
    let surface = catalog::graph_p(2.0);
    let resid = |n: usize| {
        let spec = GridSpec::new(Domain::new(-0.1, 0.1, -0.1, 0.1), n, n).unwrap();
        integrability_residuals(&extract_gf_grid_default(&surface, spec).unwrap()).unwrap().overall()
    };
    let r = resid(11) / resid(21);
    pass &= ratio_ok(r, 3.5, 4.5);
    parts.push(format!("integrability {r:.2}"));

    // hyperbolic Laplacian
    let lap_err = |n: usize| {
        let g = GridSpec::new(Domain::new(0.0, 1.0, 0.0, 1.0), n, n).unwrap();
        let f = g.sample(|u, v| u.exp() + v.powi(4));
        let l = hyperbolic_laplacian(&f, g.hu(), g.hv()).unwrap();
        let (i, j) = ((n - 1) / 2, (n - 1) / 2);
        (l.get(i, j) - (g.u(i).exp() - 12.0 * g.v(j).powi(2))).abs()
    };
    let r = lap_err(21) / lap_err(41);
    pass &= ratio_ok(r, 3.5, 4.5);
    parts.push(format!("laplacian {r:.2}"));

    // RK4 frames: deviation from the exact flow exp(vB) exp(uA) Z0
    let frame_err = |n: usize| {
        let g = constants_grid(n);
        let sys = assemble_system(&g).unwrap();
        let init = standard_frame(1);
        let f = integrate_frames(&sys, &init, (0, 0), IntegrationOptions::default()).unwrap();
        let (a, b) = (*sys.a(0, 0), *sys.b(0, 0));
        let z0 = frame_to_matrix(&init);
        let spec = g.grid_spec();
        let err = spec
            .nodes()
            .map(|(i, j)| (f.at(i, j) - (b * spec.v(j)).exp() * (a * spec.u(i)).exp() * z0).amax())
            .fold(0.0, f64::max);
        (err, f.diagnostics.max_gram_drift)
    };
    let (e1, d1) = frame_err(11);
    let (e2, d2) = frame_err(21);
    let r = e1 / e2;
    pass &= ratio_ok(r, 12.0, 20.0);
    parts.push(format!("RK4 frame drift {r:.2}"));
    // reported, not gated: the Gram residual converges one order faster
    parts.push(format!("(Gram residual ratio {:.1})", d1 / d2));

    outcome(pass, parts.join(", "))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);
    let criteria: [Criterion; 11] = [
        ("golden invariants", golden_invariants, Some(Duration::from_secs(1))),
        ("gauge invariance", gauge_invariance, Some(Duration::from_secs(10))),
        ("normal-curvature proposition", normal_curvature_proposition, None),
        ("minimal iff umbilical", minimal_iff_umbilical, None),
        ("geometric-function identities", geometric_identities, None),
        ("Bonnet round-trip (constants)", bonnet_constants, Some(Duration::from_secs(30))),
        ("Bonnet round-trip (extracted)", bonnet_extracted, None),
        ("uniqueness up to rigid motion", uniqueness, None),
        ("PNMCV PDE verification", pnmcv_pdes, None),
        ("canonicalization", canonicalization, None),
        ("convergence orders", convergence_orders, None),
    ];
    let mut failed = 0;
    for (k, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut o = run();
        let took = start.elapsed();
        if let Some(limit) = limit {
            if took > *limit {
                o.pass = false;
                o.detail.push_str(&format!(", runtime {took:.2?} exceeds {limit:?}"));
            }
        }
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} [{status}] {name}: {} ({took:.2?})", k + 1, o.detail);
        failed += (!o.pass) as usize;
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
