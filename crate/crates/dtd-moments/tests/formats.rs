use std::path::Path;

use dtd_moments::config::Config;
use dtd_moments::formats::{parse_scheme, parse_signals, scheme_to_string, signals_to_string, FitRecord};
use dtd_moments::manifest::config_hash;
use dtd_moments_core::encoding::btensor;
use dtd_moments_core::{AcqScheme, SchemeSpec};
use proptest::prelude::*;

fn mem() -> &'static Path {
    Path::new("mem.csv")
}

fn scheme() -> impl Strategy<Value = AcqScheme> {
    prop::collection::vec((0.0..5.0f64, -0.5..=1.0f64, 0.0..3.2f64, -3.2..3.2f64), 1..40).prop_map(|pts| {
        AcqScheme::new(
            pts.into_iter()
                .map(|(b, bd, t, p)| btensor(b, bd, t, p).unwrap())
                .collect(),
        )
    })
}

proptest! {
    #[test]
    fn scheme_csv_round_trip_is_bit_exact(s in scheme()) {
        let back = parse_scheme(mem(), scheme_to_string(&s).as_bytes()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn signal_csv_round_trip_is_bit_exact(v in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 0..64)) {
        prop_assert_eq!(parse_signals(mem(), signals_to_string(&v).as_bytes()).unwrap(), v);
    }

    #[test]
    fn canonical_config_hash_ignores_order_and_comments(
        vals in prop::collection::vec(0.01..10.0f64, 1..5),
        seed in any::<u64>(),
    ) {
        let list = vals.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ");
        let a = Config::parse("a.cfg", &format!("phantom = mixed\nf_iso = {list}\nseed = {seed}\n")).unwrap();
        let b = Config::parse("b.cfg", &format!("# reordered\nseed={seed}\n\n  f_iso   = {list}\nphantom=mixed\n")).unwrap();
        prop_assert_eq!(
            config_hash("experiment", &a.canonical(), &[]),
            config_hash("experiment", &b.canonical(), &[])
        );
        let list_a = a.list("f_iso").unwrap().unwrap();
        prop_assert_eq!(list_a, vals);
    }
}

#[test]
fn truncated_scheme_row_reports_its_line() {
    let mut text = scheme_to_string(&dtd_moments_core::generate_scheme(&SchemeSpec::default_scheme()).unwrap());
    text.push_str("100,1.0,1.0\n");
    let err = parse_scheme(mem(), text.as_bytes()).unwrap_err();
    assert!(err.to_string().starts_with("mem.csv:102:"), "{err}");
}

#[test]
fn fit_record_json_round_trip() {
    let text = r#"{
      "parameters": {"model": "cov", "s0": 1.0},
      "moments": null,
      "descriptors": null,
      "residual_norm": 0.5,
      "converged": true,
      "start_index": null,
      "iterations": null
    }"#;
    let rec: FitRecord = serde_json::from_str(text).unwrap();
    let again: FitRecord = serde_json::from_str(&serde_json::to_string(&rec).unwrap()).unwrap();
    assert_eq!(rec, again);
}
