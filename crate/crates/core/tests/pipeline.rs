use multiscale_transport::assembly::{assemble_ap_system, assemble_explicit_system};
use multiscale_transport::complexity::{sweep_epsilon_streaming, RowWriter, SweepMode, SweepOptions, CSV_HEADER};
use multiscale_transport::model::{initial_kinetic, initial_parity, ConfigDocument};
use multiscale_transport::mtx::{read_matrix, read_vector, write_system};
use multiscale_transport::quadrature::{full_range_rule, half_range_rule};
use multiscale_transport::spectral::singular_extremes;
use multiscale_transport::{GridConfig, Scheme};

#[test]
fn exported_system_has_the_same_spectrum() {
    let doc = ConfigDocument::parse(r#"{"scheme": "AP", "epsilon": 1e-4, "h": 0.1, "N": 3, "Nx": 6, "Nt": 5}"#).unwrap();
    let cfg = doc.resolve().unwrap();
    let rule = half_range_rule(cfg.n).unwrap();
    let sys = assemble_ap_system(&cfg, &rule, true, &initial_parity(&cfg, &rule).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_system(dir.path(), &sys).unwrap();
    let l = read_matrix::<f64>(&dir.path().join("L.mtx")).unwrap();
    let f = read_vector::<f64>(&dir.path().join("F.mtx")).unwrap();
    assert_eq!(f, sys.f);
    assert_eq!(singular_extremes(&l).unwrap(), singular_extremes(&sys.l).unwrap());
}

#[test]
fn dense_and_sparse_solves_agree() {
    let tau = 0.9 * GridConfig::max_stable_tau(Scheme::Explicit, 0.3, 0.1);
    let cfg = GridConfig::explicit(0.3, tau, 0.1, 2, 8, 6).with_boundary(1.0, 0.0);
    let rule = full_range_rule(2).unwrap();
    let sys = assemble_explicit_system(&cfg, &rule, &initial_kinetic(&cfg, &rule).unwrap()).unwrap();
    let a = sys.solve_dense().unwrap();
    let b = sys.solve_sparse().unwrap();
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-12 * scale);
    }
}

#[test]
fn streamed_sweep_csv_is_ordered_and_matches_batch() {
    let base = GridConfig::ap(1.0, 0.005, 0.1, 2, 6, 3);
    let eps = [1e-1, 1e-3, 1e-2, 1e-5, 1e-4];
    let mut w = RowWriter::new(Vec::new()).unwrap();
    let rows = sweep_epsilon_streaming(&base, &eps, SweepMode::FixedGrid, &SweepOptions::default(), |r| w.write(r)).unwrap();
    let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    for (line, e) in lines[1..].iter().zip(eps) {
        let field: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(field, e);
    }
    assert_eq!(text, multiscale_transport::complexity::rows_to_csv(&rows).unwrap());
}
