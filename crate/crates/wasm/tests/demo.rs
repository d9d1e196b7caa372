use zce_wasm::{coverage_curve_json, exceedance_law_json, pot_explorer_json};

#[test]
fn exceedance_law_for_each_method() {
    let bayes = exceedance_law_json("bayes", 50, 100, 0.99, 1).unwrap();
    assert!((bayes["mean"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let total: f64 = bayes["p"].as_array().unwrap().iter().map(|p| p.as_f64().unwrap()).sum();
    assert!(total > 1.0 - 1e-5);
    let ml = exceedance_law_json("ml", 50, 100, 0.99, 1).unwrap();
    assert!(ml["mean"].as_f64().unwrap() > 1.2);
    let gvs = exceedance_law_json("gvs", 100, 100, 0.99, 1).unwrap();
    assert!(gvs["psi"].is_null());
    assert!((gvs["mean"].as_f64().unwrap() - 100.0 / 101.0).abs() < 1e-9);
    assert!(exceedance_law_json("median", 5, 5, 0.9, 1).is_err());
    assert!(exceedance_law_json("bayes", 5, 5, 1.5, 1).unwrap_err().contains("alpha"));
}

#[test]
fn coverage_curve_hits_target_for_bayes_only() {
    let c = coverage_curve_json(0.99, 100, 500).unwrap();
    let ns = c["n"].as_array().unwrap();
    assert_eq!(ns[0], 1);
    assert!(ns.last().unwrap().as_u64().unwrap() <= 500);
    for (b, m) in c["bayes"].as_array().unwrap().iter().zip(c["ml"].as_array().unwrap()) {
        assert!((b.as_f64().unwrap() - 1.0).abs() < 1e-9);
        assert!(m.as_f64().unwrap() > 1.0);
    }
    assert!(coverage_curve_json(0.99, 100, 0).is_err());
}

#[test]
fn pot_explorer_is_seeded() {
    let a = pot_explorer_json(7, 0.3, 50, 100, 50, 0.99, 100).unwrap();
    let b = pot_explorer_json(7, 0.3, 50, 100, 50, 0.99, 100).unwrap();
    assert_eq!(a, b);
    assert_eq!(a["tail"].as_array().unwrap().len(), 50);
    let (eta, truth) = (a["eta"].as_f64().unwrap(), a["eta_true"].as_f64().unwrap());
    assert!(eta > a["threshold"].as_f64().unwrap());
    assert!((eta / truth).ln().abs() < 1.0, "eta {eta} vs {truth}");
    assert!(pot_explorer_json(7, 0.3, 5, 5, 50, 0.99, 100).is_err());
}
