//! Trained-model regression fixture: a word that mixes hiragana and kanji
//! must stay whole, where splitting at every character-type change fails.

use kiru::corpus::{build_dictionary, Sentence};
use kiru::features::classify_char_type;
use kiru::{ModelConfig, SegmenterModel};

fn type_change_baseline(text: &str) -> Vec<String> {
    let mut words: Vec<String> = Vec::new();
    let mut prev = None;
    for c in text.chars() {
        let t = classify_char_type(c);
        match words.last_mut() {
            Some(w) if prev == Some(t) => w.push(c),
            _ => words.push(c.to_string()),
        }
        prev = Some(t);
    }
    words
}

#[test]
fn mixed_script_word_stays_whole() {
    let lines = [
        "ため池 の 水 を 見る",
        "古い ため池 が ある",
        "その ため に 池 へ 行く",
        "ため池 に 魚 が いる",
        "雨 の ため 池 の 水 が 増える",
        "大きな ため池 を 作る",
        "池 の 周り を 歩く",
        "この ため池 は 古い",
    ];
    let corpus: Vec<Sentence> = lines
        .iter()
        .map(|l| Sentence::from_words(l.split(' ')).unwrap())
        .collect();
    let dict = build_dictionary(&[&corpus], false, 4).unwrap();
    let cfg = ModelConfig {
        use_ctype: true,
        ngram_orders: vec![1, 2, 3],
        use_dict: true,
        char_dim: 16,
        ctype_dim: 4,
        hidden: 24,
        epochs: 40,
        ..ModelConfig::default()
    };
    let mut model = SegmenterModel::from_corpus(cfg, &corpus, Some(dict)).unwrap();
    model.train(&corpus, None).unwrap();

    let text = "ため池の水を見る";
    assert_eq!(type_change_baseline(text)[..2], ["ため", "池"]);
    let out = model.segment_line(text).unwrap();
    assert!(out.split(' ').any(|w| w == "ため池"), "got `{out}`");
}
