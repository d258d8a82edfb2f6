mod common;

use common::lexicon_corpus;
use kiru::corpus::{LabelScheme, SegDictionary};
use kiru::decode::segment;
use kiru::{Arch, ModelConfig, SegmenterModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small(arch: Arch) -> ModelConfig {
    ModelConfig {
        arch,
        use_ctype: true,
        ngram_orders: vec![1, 2, 3],
        use_dict: true,
        char_dim: 8,
        ctype_dim: 3,
        hidden: 12,
        epochs: 2,
        ..ModelConfig::default()
    }
}

fn trained(arch: Arch, scheme: LabelScheme) -> SegmenterModel {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let corpus = lexicon_corpus(40, &mut rng);
    let dict = SegDictionary::new(corpus.iter().flat_map(|s| s.words().unwrap()), 4);
    let cfg = ModelConfig {
        scheme,
        ..small(arch)
    };
    let mut m = SegmenterModel::from_corpus(cfg, &corpus, Some(dict)).unwrap();
    m.train(&corpus, None).unwrap();
    m
}

fn random_text(rng: &mut ChaCha8Rng) -> String {
    let pool: Vec<char> = "ため池の水をくむ日本語カタカナABC123。、".chars().collect();
    (0..rng.gen_range(1..25))
        .map(|_| pool[rng.gen_range(0..pool.len())])
        .collect()
}

#[test]
fn file_round_trip_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for arch in Arch::ALL {
        let m = trained(arch, LabelScheme::Bies);
        let path = dir.path().join(format!("{arch}.kiru"));
        m.save(&path).unwrap();
        let back = SegmenterModel::load(&path).unwrap();
        for _ in 0..100 {
            let chars: Vec<char> = random_text(&mut rng).chars().collect();
            assert_eq!(
                m.forward_chars(&chars).unwrap(),
                back.forward_chars(&chars).unwrap()
            );
        }
    }
}

#[test]
fn bie_model_segments_after_reload() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bie.kiru");
    trained(Arch::Lstm, LabelScheme::Bie).save(&path).unwrap();
    let m = SegmenterModel::load(&path).unwrap();
    assert_eq!(m.config().scheme, LabelScheme::Bie);
    let out = segment(&m, "ため池の水\n").unwrap();
    assert_eq!(out.replace(' ', ""), "ため池の水\n");
}

#[test]
fn segment_edge_cases() {
    let m = trained(Arch::Ffnn, LabelScheme::Bies);
    assert_eq!(segment(&m, "").unwrap(), "");
    assert_eq!(segment(&m, "\n\n").unwrap(), "\n\n");
    assert_eq!(segment(&m, "池").unwrap(), "池\n");
    assert_eq!(m.segment_line("").unwrap(), "");
}

#[test]
fn segmentation_is_deterministic() {
    let m = trained(Arch::Rnn, LabelScheme::Bies);
    let text = "ため池の水をくむ\n日本語の学校\n";
    assert_eq!(segment(&m, text).unwrap(), segment(&m, text).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn characters_are_conserved(seed in any::<u64>(), lines in 1usize..5) {
        let m = trained(Arch::Lstm, LabelScheme::Bi);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let text: Vec<String> = (0..lines).map(|_| random_text(&mut rng)).collect();
        let text = text.join("\n");
        let out = segment(&m, &text).unwrap();
        prop_assert_eq!(out.replace(' ', ""), format!("{}\n", text));
        for line in out.lines() {
            prop_assert!(!line.starts_with(' ') && !line.ends_with(' ') && !line.contains("  "));
        }
    }
}
