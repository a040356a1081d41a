use medagent::query::{fixture_dictionary, Dictionary};

#[test]
fn shipped_dictionary_matches_the_fixture() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/dictionary.tsv")).unwrap();
    let shipped = Dictionary::parse(&text, "en").unwrap();
    assert!(shipped == fixture_dictionary());
    assert_eq!(shipped.to_tsv(), text);
}
