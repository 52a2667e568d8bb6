mod common;

use loe_core::classifier::{explain, ExplainParams};
use loe_core::LoeLabel;

#[test]
fn planted_token_ranks_first() {
    let model = common::OneToken { token: "marker".into(), level: LoeLabel::L1b };
    let mut rng = common::rng(3);
    let mut top = 0;
    for seed in 0..100 {
        let doc = common::random_document_with(&mut rng, "marker");
        let e = explain(&model, "d", &doc, &ExplainParams { seed, ..Default::default() }).unwrap();
        if e.top_term(LoeLabel::L1b) == Some("marker") {
            top += 1;
        }
    }
    assert!(top >= 95, "{top}/100");
}

#[test]
fn sampled_weights_agree_with_enumeration() {
    let terms = common::ten_terms();
    let feats: Vec<String> = terms.distinct().into_iter().map(String::from).collect();
    for n_samples in [500, 2000] {
        let exact = common::enumerated_surrogate(&common::TwoTerm, &terms, n_samples, 0.75, 1e-3);
        let mut errors = Vec::new();
        for seed in 0..20 {
            let p = ExplainParams { n_samples, seed, ..Default::default() };
            let e = explain(&common::TwoTerm, "d", &terms, &p).unwrap();
            let est: Vec<f64> = feats.iter().map(|f| e.weight(LoeLabel::L1b, f).unwrap()).collect();
            errors.push(common::relative_error(&est, &exact[LoeLabel::L1b.ordinal()]));
        }
        let mean = errors.iter().sum::<f64>() / errors.len() as f64;
        let worst = errors.iter().cloned().fold(0.0, f64::max);
        assert!(mean <= 0.05, "n={n_samples} mean {mean}");
        if n_samples >= 2000 {
            assert!(worst <= 0.05, "n={n_samples} worst {worst}");
        }
    }
}

#[test]
fn constant_model_has_no_weights() {
    let e = explain(&common::Constant, "d", &common::ten_terms(), &ExplainParams::default()).unwrap();
    for list in e.weights.values() {
        assert!(list.iter().all(|t| t.weight.abs() < 1e-9));
    }
}
