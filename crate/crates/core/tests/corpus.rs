mod common;

use std::sync::Arc;

use common::in_process;
use medagent::corpus::{
    drug_lookup, generate_corpus, get_results, load_corpus, save_corpus, serve, Corpus, HttpTransport, SearchFormSpec,
    SiteService, TallyPacer, Transport,
};
use medagent::platform::Location;
use proptest::prelude::*;

fn ids(records: &[medagent::corpus::SiteRecord]) -> Vec<String> {
    records.iter().map(|r| r.record_id.clone()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scraped_results_equal_a_linear_scan(seed in 0u64..1000, site_ix in 0usize..13, term in "[a-z]{1,6}") {
        let corpus = Arc::new(generate_corpus(seed, 1, 10));
        let site = corpus.sites[site_ix].clone();
        let expected: Vec<String> = site
            .records
            .iter()
            .filter(|r| r.disease.to_lowercase().contains(&term))
            .map(|r| r.record_id.clone())
            .collect();
        let transport = in_process(&corpus);
        let got = get_results(&Location::for_site(site), &term, &SearchFormSpec::default(), transport.as_ref(), &mut TallyPacer::default()).unwrap();
        prop_assert_eq!(ids(&got), expected);
    }
}

#[test]
fn only_the_search_request_is_charged() {
    let corpus = Arc::new(generate_corpus(1, 1, 4));
    let site = corpus.sites[0].clone();
    let mut pacer = TallyPacer::default();
    get_results(
        &Location::for_site(site.clone()),
        "x",
        &SearchFormSpec::default(),
        in_process(&corpus).as_ref(),
        &mut pacer,
    )
    .unwrap();
    assert_eq!(pacer.total_ms, site.collect_latency_ms as f64);
}

#[test]
fn http_and_in_process_transports_agree() {
    let corpus = Arc::new(generate_corpus(12, 1, 6));
    let server = serve(SiteService::new(corpus.clone()), "127.0.0.1:0").unwrap();
    let http = HttpTransport::new(server.base_url());
    let local = in_process(&corpus);
    let form = SearchFormSpec::default();
    for site in corpus.sites.iter().take(4) {
        let loc = Location::for_site(site.clone());
        let term = &site.records[0].disease;
        let a = get_results(&loc, term, &form, &http, &mut TallyPacer::default()).unwrap();
        let b = get_results(&loc, term, &form, local.as_ref(), &mut TallyPacer::default()).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_empty());
    }
    assert!(http.get("/site/nowhere", &mut TallyPacer::default()).is_err());
    server.shutdown().unwrap();
}

#[test]
fn drug_lookup_unions_every_matching_record() {
    let corpus = generate_corpus(3, 2, 8);
    let disease = corpus.sites[0].records[0].disease.clone();
    let mut expected: Vec<String> = corpus
        .sites
        .iter()
        .flat_map(|s| &s.records)
        .filter(|r| r.disease == disease)
        .flat_map(|r| r.drugs.clone())
        .collect();
    expected.sort();
    expected.dedup();
    assert_eq!(drug_lookup(&disease.to_uppercase(), &corpus), expected);
    assert!(drug_lookup("no such disease", &corpus).is_empty());
}

#[test]
fn corpus_survives_a_save_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = generate_corpus(21, 1, 5);
    save_corpus(&corpus, dir.path()).unwrap();
    let back: Corpus = load_corpus(dir.path()).unwrap();
    assert_eq!(back, corpus);
}
