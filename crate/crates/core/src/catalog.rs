//! Built-in test surfaces with analytic jets.
//!
//! | name    | z(u, v)                                        | exercises                  |
//! |---------|------------------------------------------------|----------------------------|
//! | plane   | (u, 0, v, 0)                                   | totally geodesic           |
//! | saddle  | (u, 0, v, uv)                                  | flat point at the origin   |
//! | graph2  | (u, (u²+v²)/2, v, (u²−v²)/2)                   | ϰ² − k < 0                 |
//! | graphP  | (u, (u²−v²)/2, v, c·uv)                        | spacelike H, ϰ = 0         |
//! | graphK  | (u, (αu²−βv²)/2, v, c·uv)                      | spacelike H, ϰ ≠ 0         |
//! | graphT  | (u, c·uv, v, (αu²−βv²)/2)                      | timelike H                 |
//! | chen    | α(u+v) + β(u−v) with null curves α, β          | minimal                    |

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::grid::Domain;
use crate::jets::{SurfaceJet, SurfaceSpec};
use crate::pe4::Vec4;

pub const NAMES: [&str; 7] = ["plane", "saddle", "graph2", "graphP", "graphK", "graphT", "chen"];

fn graph_domain() -> Domain {
    Domain::new(-0.4, 0.4, -0.4, 0.4)
}

fn tagged(spec: SurfaceSpec, params: &[(&str, f64)]) -> SurfaceSpec {
    spec.with_params(params.iter().map(|(k, v)| (k.to_string(), *v)).collect())
}

/// Graph over the (x1, x3) plane: `z = (u, f(u,v), v, g(u,v))` with `f` and
/// `g` homogeneous quadratics given by their Hessians `[f_uu, f_uv, f_vv]`.
fn quadratic_graph(name: &str, f: [f64; 3], g: [f64; 3]) -> SurfaceSpec {
    let q = |h: [f64; 3], u: f64, v: f64| 0.5 * (h[0] * u * u + 2.0 * h[1] * u * v + h[2] * v * v);
    SurfaceSpec::analytic(name, graph_domain(), move |u, v| SurfaceJet {
        z: Vec4::new(u, q(f, u, v), v, q(g, u, v)),
        z_u: Vec4::new(1.0, f[0] * u + f[1] * v, 0.0, g[0] * u + g[1] * v),
        z_v: Vec4::new(0.0, f[1] * u + f[2] * v, 1.0, g[1] * u + g[2] * v),
        z_uu: Vec4::new(0.0, f[0], 0.0, g[0]),
        z_uv: Vec4::new(0.0, f[1], 0.0, g[1]),
        z_vv: Vec4::new(0.0, f[2], 0.0, g[2]),
    })
    .expect("static domain is valid")
}

pub fn plane() -> SurfaceSpec {
    quadratic_graph("plane", [0.0; 3], [0.0; 3])
}

pub fn saddle() -> SurfaceSpec {
    quadratic_graph("saddle", [0.0; 3], [0.0, 1.0, 0.0])
}

pub fn graph2() -> SurfaceSpec {
    quadratic_graph("graph2", [1.0, 0.0, 1.0], [1.0, 0.0, -1.0])
}

pub fn graph_p(c: f64) -> SurfaceSpec {
    tagged(quadratic_graph("graphP", [1.0, 0.0, -1.0], [0.0, c, 0.0]), &[("c", c)])
}

pub fn graph_k(alpha: f64, beta: f64, c: f64) -> SurfaceSpec {
    tagged(
        quadratic_graph("graphK", [alpha, 0.0, -beta], [0.0, c, 0.0]),
        &[("alpha", alpha), ("beta", beta), ("c", c)],
    )
}

pub fn graph_t(alpha: f64, beta: f64, c: f64) -> SurfaceSpec {
    tagged(
        quadratic_graph("graphT", [0.0, c, 0.0], [alpha, 0.0, -beta]),
        &[("alpha", alpha), ("beta", beta), ("c", c)],
    )
}

/// Minimal Lorentz surface `α(u+v) + β(u−v)` built from the null curves
/// `α(s) = (sin s, cos s, s, 0)` and `β(t) = (0, −sinh t, −cosh t, t)`.
///
/// `F = 0` and `E = −G = 2(sin s·cosh t + sinh t)`, positive on the default
/// domain around `(π/2, 0)`.
pub fn chen_minimal() -> SurfaceSpec {
    let c = std::f64::consts::FRAC_PI_2;
    let domain = Domain::new(c - 0.3, c + 0.3, -0.3, 0.3);
    SurfaceSpec::analytic("chen", domain, |u, v| {
        let (s, t) = (u + v, u - v);
        let (ss, cs) = s.sin_cos();
        let (sh, ch) = (t.sinh(), t.cosh());
        let a = Vec4::new(ss, cs, s, 0.0);
        let da = Vec4::new(cs, -ss, 1.0, 0.0);
        let dda = Vec4::new(-ss, -cs, 0.0, 0.0);
        let b = Vec4::new(0.0, -sh, -ch, t);
        let db = Vec4::new(0.0, -ch, -sh, 1.0);
        let ddb = Vec4::new(0.0, -sh, -ch, 0.0);
        SurfaceJet {
            z: a + b,
            z_u: da + db,
            z_v: da - db,
            z_uu: dda + ddb,
            z_uv: dda - ddb,
            z_vv: dda + ddb,
        }
    })
    .expect("static domain is valid")
}

/// Looks a surface up by name, filling unspecified parameters with defaults.
/// Defaults: graphP `c = 2`; graphK `α = 1, β = 2, c = 1`; graphT
/// `α = 1, β = 2, c = 1`.
pub fn by_name(name: &str, params: &BTreeMap<String, f64>) -> Result<SurfaceSpec> {
    let allowed: &[&str] = match name {
        "graphP" => &["c"],
        "graphK" | "graphT" => &["alpha", "beta", "c"],
        "plane" | "saddle" | "graph2" | "chen" => &[],
        _ => {
            return Err(Error::Invalid(format!(
                "unknown surface '{name}' (known: {})",
                NAMES.join(", ")
            )))
        }
    };
    if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Invalid(format!("surface '{name}' has no parameter '{bad}'")));
    }
    if let Some((k, v)) = params.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Invalid(format!("parameter {k} = {v} is not finite")));
    }
    let p = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
    Ok(match name {
        "plane" => plane(),
        "saddle" => saddle(),
        "graph2" => graph2(),
        "graphP" => graph_p(p("c", 2.0)),
        "graphK" => graph_k(p("alpha", 1.0), p("beta", 2.0), p("c", 1.0)),
        "graphT" => graph_t(p("alpha", 1.0), p("beta", 2.0), p("c", 1.0)),
        _ => chen_minimal(),
    })
}
