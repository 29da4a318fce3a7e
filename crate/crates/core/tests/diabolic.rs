//! End-to-end checks on the diabolic pair `f0 = f + 1`, `f1(x) = f(x - 1)`.

use echolab::echo::{estimate_echo_index, min_block_length_for_index_one, BlockScanConfig, EchoConfig};
use echolab::maps::{preset, AtlasConfig, AttractorAtlas, DiabolicFamily};
use echolab::seeding::mix_seed;
use echolab::symbolic::{generate_sequence, RepeatSpec, StartRule, SymbolSequence};

#[test]
fn each_map_has_one_global_attractor() {
    let f = preset("diabolic").unwrap();
    let atlas = AttractorAtlas::build(f.as_ref(), &AtlasConfig::default()).unwrap();
    assert_eq!(atlas.attractor_counts(), vec![1, 1]);
    let stable = atlas.stable_points();
    assert!((stable[0][0][0] - 3.0).abs() < 1e-9);
    assert!((stable[1][0][0] + 2.0).abs() < 1e-9);
    assert!(atlas.maps.iter().all(|m| m.unresolved_fraction == Some(0.0)));
}

#[test]
fn alternation_has_many_responses() {
    let v = SymbolSequence::periodic(2, &[0, 1], 2000).unwrap();
    let est = estimate_echo_index(&DiabolicFamily::new(), &v, &EchoConfig { n_ic: 200, ..Default::default() }).unwrap();
    assert!(est.index > 1, "index {}", est.index);
}

#[test]
fn random_runs_of_two_give_index_one() {
    let spec = RepeatSpec::binary(2, None, 2, None).unwrap().with_probabilities(vec![0.5, 0.5]).unwrap();
    let cfg = EchoConfig { n_ic: 200, ..Default::default() };
    for r in 0..3 {
        let v = generate_sequence(&spec, cfg.steps, mix_seed(&[11, r]), StartRule::Uniform).unwrap();
        let est = estimate_echo_index(&DiabolicFamily::new(), &v, &cfg).unwrap();
        assert_eq!(est.index, 1, "realization {r}");
    }
}

#[test]
fn periodic_five_blocks_give_index_one() {
    let word = [0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
    let v = SymbolSequence::periodic(2, &word, 2000).unwrap();
    let est = estimate_echo_index(&DiabolicFamily::new(), &v, &EchoConfig { n_ic: 200, ..Default::default() }).unwrap();
    assert_eq!(est.index, 1);
}

#[test]
fn minimum_block_length_for_index_one_is_two() {
    let report = min_block_length_for_index_one(&DiabolicFamily::new(), &BlockScanConfig::default()).unwrap();
    let failing: Vec<_> = report
        .per_length
        .iter()
        .flat_map(|(l, cases)| cases.iter().filter(|c| c.index != 1).map(move |c| (*l, c.label.clone(), c.index)))
        .collect();
    assert_eq!(report.minimum, Some(2), "cases with index != 1: {failing:?}");
}
