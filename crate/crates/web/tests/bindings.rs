use ring_ladder_web::{discord_curve_json, odd_even_json, x_state_json};

fn parse(s: &str) -> serde_json::Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn singlet_record() {
    let r = parse(&x_state_json(0.0, 0.5, 0.5, 0.0, -0.5, 0.0, true).unwrap());
    assert!((r["discord"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((r["oracle_discord"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((r["concurrence"].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn invalid_state_is_rejected() {
    let e = x_state_json(0.5, 0.5, 0.0, 0.0, 0.0, 0.3, false).unwrap_err();
    assert!(e.to_string().contains("density matrix"), "{e}");
}

#[test]
fn curve_has_one_point_per_theta() {
    let v = parse(&discord_curve_json(4, 0.0, 0.5, 0.1, "rung").unwrap());
    let pts = v.as_array().unwrap();
    assert_eq!(pts.len(), 6);
    assert!((pts[5]["theta_over_pi"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!(pts.iter().all(|p| p["discord"].as_f64().unwrap() >= 0.0));
}

#[test]
fn limits_are_enforced() {
    assert!(discord_curve_json(10, 0.0, 0.1, 0.1, "rung").is_err());
    assert!(discord_curve_json(4, -1.0, 1.0, 0.001, "rung").is_err());
    assert!(discord_curve_json(4, 0.0, 0.1, 0.1, "plaquette").is_err());
    assert!(odd_even_json(0.2, "4,12").is_err());
}

#[test]
fn odd_even_rows() {
    let v = parse(&odd_even_json(0.2, "4,6,8").unwrap());
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}
