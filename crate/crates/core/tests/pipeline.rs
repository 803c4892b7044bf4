use lorentz_core::bonnet::{reconstruct, standard_frame, ReconstructOptions, ReconstructedSurface};
use lorentz_core::catalog;
use lorentz_core::geoframe::{
    class_predicates_grid, extract_gf_grid_default, geometric_functions_at, integrability_residuals, GFGrid,
};
use lorentz_core::grid::{Domain, GridSpec};
use lorentz_core::pe4::Vec4;
use lorentz_core::pnmcv::{gf_from_canonical, natural_pde_residuals, CanonicalTriple};

#[test]
fn canonical_constants_reconstruct_and_re_extract() {
    let grid = GridSpec::new(Domain::new(0.0, 0.6, 0.0, 0.6), 31, 31).unwrap();
    let t = CanonicalTriple::sample(grid, 1, |_, _| (4.0, 5.0, 3.0)).unwrap();
    assert!(natural_pde_residuals(&t).unwrap().max() < 1e-12);
    assert_eq!(t.warnings().len(), 1, "constant nu is flagged");

    let g = gf_from_canonical(&t).unwrap();
    let flags = class_predicates_grid(&g, 1e-8);
    assert!(flags.pnmcv.holds && flags.flat_normal.holds);

    let rec = reconstruct(&g, &standard_frame(1), (15, 15), Vec4::ZERO, ReconstructOptions::default()).unwrap();
    let spec = rec.to_surface_spec().unwrap();
    for (i, j) in [(5, 5), (15, 20), (25, 8)] {
        let gf = geometric_functions_at(&spec, grid.u(i), grid.v(j), grid.hu()).unwrap();
        assert!((gf.values.lambda - 4.0).abs() < 1e-4);
        assert!((gf.values.mu.abs() - 5.0).abs() < 1e-4);
        assert!((gf.values.nu1 - 3.0).abs() < 1e-4);
        assert!((gf.values.nu2 + 3.0).abs() < 1e-4);
    }
}

#[test]
fn json_round_trips_preserve_grids_and_surfaces() {
    let spec = GridSpec::new(Domain::new(-0.1, 0.1, -0.1, 0.1), 11, 11).unwrap();
    let g = extract_gf_grid_default(&catalog::graph_p(2.0), spec).unwrap();
    let text = serde_json::to_string(&g).unwrap();
    let back: GFGrid = serde_json::from_str(&text).unwrap();
    assert_eq!(back, g);
    assert_eq!(integrability_residuals(&back).unwrap().overall(), integrability_residuals(&g).unwrap().overall());

    let opts = ReconstructOptions { max_integrability: 0.5, ..Default::default() };
    let rec = reconstruct(&back, &standard_frame(1), (5, 5), Vec4::ZERO, opts).unwrap();
    let text = serde_json::to_string(&rec).unwrap();
    let again: ReconstructedSurface = serde_json::from_str(&text).unwrap();
    assert_eq!(again, rec);
    assert_eq!(rec.z.len(), 11);
    assert!(rec.frames.iter().all(|row| row.len() == 11));
}

#[test]
fn timelike_family_reconstructs() {
    let surface = catalog::graph_t(1.0, 2.0, 1.0);
    let spec = GridSpec::new(Domain::new(-0.1, 0.1, -0.1, 0.1), 21, 21).unwrap();
    let g = extract_gf_grid_default(&surface, spec).unwrap();
    assert_eq!(g.eps, -1);
    let anchor = g.anchor.unwrap();
    let init = lorentz_core::pe4::Frame4::new(anchor.frame, lorentz_core::geoframe::frame_signature(-1));
    let opts = ReconstructOptions { max_integrability: 0.5, ..Default::default() };
    let rec = reconstruct(&g, &init, (10, 10), anchor.position, opts).unwrap();
    let worst = spec
        .nodes()
        .map(|(i, j)| (rec.position(i, j) - surface.position(spec.u(i), spec.v(j)).unwrap()).max_abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");
}
