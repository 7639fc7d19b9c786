use serde_json::Value;

use fracbvp::fbvp::Route;
use fracbvp::harness::{
    content_hash, emit_csv, emit_svg, parse_csv, read_csv, render_svg, write_csv, RunRecord, SvgAxes, RECORD_HEADER,
};

fn record(t: f64, x: f64, route: Route, value: f64) -> RunRecord {
    RunRecord {
        alpha: 0.6,
        eta: 1.0,
        sigma: 0.5,
        c: 1.0,
        t,
        x,
        route,
        value,
        std_error: if route == Route::MonteCarlo { 1e-3 } else { 0.0 },
        wall_ms: 1.25,
        seed: 42,
        config_hash: "ab".repeat(32),
        warning: if route == Route::Laplace {
            "talbot and stehfest differ by 2e-4".into()
        } else {
            String::new()
        },
    }
}

fn curves() -> Vec<RunRecord> {
    let mut out = Vec::new();
    for route in Route::ALL {
        for t in [2.0, 0.5, 1.0] {
            out.push(record(t, 0.5, route, 1.0 / (1.0 + t)));
        }
    }
    out
}

#[test]
fn empty_record_list_gives_a_header_only_csv() {
    let mut buf = Vec::new();
    write_csv(&[], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text, format!("{}\n", RECORD_HEADER.join(",")));
    assert!(read_csv(text.as_bytes()).unwrap().is_empty());
}

#[test]
fn csv_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("runs.csv");
    let recs = curves();
    emit_csv(&path, &recs).unwrap();
    assert_eq!(parse_csv(&path).unwrap(), recs);
}

#[test]
fn csv_header_starts_with_the_solve_columns() {
    let mut buf = Vec::new();
    write_csv(&curves(), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("alpha,eta,sigma,c,t,x,route,value,std_error,wall_ms,"));
}

#[test]
fn content_hash_ignores_key_order() {
    let a: Value = serde_json::from_str(r#"{"alpha":0.6,"t":[1,2],"eta":1,"nested":{"b":1,"a":2}}"#).unwrap();
    let b: Value = serde_json::from_str(r#"{"nested":{"a":2,"b":1},"eta":1,"t":[1,2],"alpha":0.6}"#).unwrap();
    assert_eq!(content_hash(&a), content_hash(&b));
    let c: Value = serde_json::from_str(r#"{"alpha":0.6,"t":[2,1],"eta":1,"nested":{"b":1,"a":2}}"#).unwrap();
    assert_ne!(content_hash(&a), content_hash(&c));
}

#[test]
fn content_hash_matches_git_blob_framing() {
    // hashlib.sha256(b"blob 2\x00{}")
    let v: Value = serde_json::from_str("{}").unwrap();
    assert_eq!(
        content_hash(&v),
        "f1763e2b60578aec547424aecd0574d432968c9d845353fcdc2e1ecb809596d2"
    );
}

#[test]
fn three_routes_give_three_polylines_and_a_legend() {
    let svg = render_svg(&curves(), &SvgAxes::default()).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    for route in ["quadrature", "laplace", "mc"] {
        assert!(
            svg.contains(&format!("x=0.5 {route}</text>")),
            "legend entry for {route}"
        );
    }
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn polyline_points_are_sorted_in_t() {
    let svg = render_svg(&curves(), &SvgAxes::default()).unwrap();
    let start = svg.find("points=\"").unwrap() + 8;
    let pts = &svg[start..start + svg[start..].find('"').unwrap()];
    let xs: Vec<f64> = pts
        .split(' ')
        .map(|p| p.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(xs.windows(2).all(|w| w[0] < w[1]), "{xs:?}");
}

#[test]
fn svg_is_written_and_empty_input_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.svg");
    emit_svg(&path, &curves(), &SvgAxes::default()).unwrap();
    assert!(std::fs::read_to_string(&path).unwrap().contains("<polyline"));
    assert!(render_svg(&[], &SvgAxes::default()).is_err());
}
