use std::collections::BTreeMap;
use std::net::IpAddr;

use super::*;
use crate::query::{annotate, fixture_dictionary};
use crate::security::{Credential, SecurityError, SessionStore};

fn rec(id: &str, disease: &str, desc: &str, drugs: &[&str]) -> SiteRecord {
    SiteRecord {
        record_id: id.into(),
        disease: disease.into(),
        description: desc.into(),
        drugs: drugs.iter().map(|d| d.to_string()).collect(),
    }
}

fn item(id: &str, disease: &str, drugs: &[&str], assurance: u8, terms: &[&str], cats: &[Category]) -> ResultItem {
    ResultItem::new(
        rec(id, disease, &format!("{disease} notes"), drugs),
        &format!("loc-{id}"),
        assurance,
        cats.iter().copied().collect(),
        terms.iter().map(|t| t.to_string()).collect(),
    )
}

#[test]
fn conflicts_keep_more_assured_source() {
    let a = item("a", "gout", &["colchicine"], 3, &["gout"], &[]);
    let b = item("b", "gout", &["allopurinol"], 1, &["gout"], &[]);
    let kept = resolve_conflicts(vec![a.clone(), b]);
    assert_eq!(kept, vec![a.clone()]);

    let same = item("c", "gout", &["colchicine"], 1, &["gout"], &[]);
    assert_eq!(resolve_conflicts(vec![a.clone(), same.clone()]).len(), 2);

    let tie = item("d", "gout", &["allopurinol"], 3, &["gout"], &[]);
    assert_eq!(resolve_conflicts(vec![a.clone(), tie]).len(), 2);

    let other = item("e", "asthma", &["salbutamol"], 0, &["asthma"], &[]);
    assert_eq!(resolve_conflicts(vec![a.clone(), other.clone()]), vec![a, other]);
}

#[test]
fn merge_duplicates_and_threshold() {
    let a = item("a", "gout", &["colchicine"], 2, &["gout"], &[]);
    let mut b = a.clone();
    b.source_location = "loc-z".into();
    b.sources[0].location_id = "loc-z".into();
    b.record.drugs = vec!["naproxen".into()];
    let merged = merge_similar(vec![a.clone(), b]);
    assert_eq!(merged.len(), 1);
    assert_eq!(merged[0].sources.len(), 2);
    assert_eq!(merged[0].record.drugs, ["colchicine", "naproxen"]);

    // 4 shared tokens out of 5 distinct: exactly 0.8.
    let mut x = item("x", "gout", &[], 0, &["gout"], &[]);
    x.record.description = "one two three four".into();
    let mut y = item("y", "gout", &[], 0, &["gout"], &[]);
    y.record.description = "one two three four five".into();
    assert_eq!(description_jaccard(&x.record.description, &y.record.description), 0.8);
    assert_eq!(merge_similar(vec![x.clone(), y.clone()]).len(), 1);
    y.record.description = "one two three four five six".into();
    assert_eq!(merge_similar(vec![x, y]).len(), 2);

    let distinct = vec![a, item("q", "asthma", &[], 0, &["asthma"], &[])];
    assert_eq!(merge_similar(distinct.clone()), distinct);
}

#[test]
fn ranking_examples() {
    let empty = UserProfile::new("u");
    let one = item("b", "gout", &[], 0, &["gout"], &[]);
    let two = item("a", "gout", &[], 0, &["gout", "pain"], &[]);
    let ranked = rank_and_sort(vec![one.clone(), two.clone()], &empty);
    assert_eq!(ranked[0].record.record_id, "a");
    assert_eq!(ranked[0].score, 2.0);

    let p = item("p", "x", &[], 1, &["x"], &[]);
    let q = item("q", "x", &[], 1, &["x"], &[]);
    let ranked = rank_and_sort(vec![q.clone(), p.clone()], &empty);
    assert_eq!(ranked[0].record.record_id, "p");

    let boosted = item("z", "x", &[], 1, &["x"], &[Category::Cardiovascular]);
    let mut prof = UserProfile::new("u");
    prof.set_preference(Category::Cardiovascular, 0.5);
    let ranked = rank_and_sort(vec![p, boosted], &prof);
    assert_eq!(ranked[0].record.record_id, "z");
    assert_eq!(ranked[0].score, 1.5);
}

#[test]
fn feedback_rules() {
    let cardio = item("h1", "angina", &[], 2, &["angina"], &[Category::Cardiovascular]);
    let mut p = UserProfile::new("u");
    p.set_preference(Category::Cardiovascular, 0.5);
    let up = apply_feedback(&p, &FeedbackEvent::explicit("h1", 1, 1), &cardio).unwrap();
    assert_eq!(up.preference(Category::Cardiovascular), 0.6);
    assert_eq!(up.feedback_history.len(), 1);

    let zero = UserProfile::new("u");
    let down = apply_feedback(&zero, &FeedbackEvent::explicit("h1", -1, 1), &cardio).unwrap();
    assert_eq!(down.preference(Category::Cardiovascular), 0.0);

    let mut cur = p.clone();
    for t in 0..10 {
        cur = apply_feedback(&cur, &FeedbackEvent::explicit("h1", 1, t), &cardio).unwrap();
    }
    assert_eq!(cur.preference(Category::Cardiovascular), 1.0);

    let clicked = apply_feedback(&p, &FeedbackEvent::click("h1", 2), &cardio).unwrap();
    assert!((clicked.preference(Category::Cardiovascular) - 0.52).abs() < 1e-12);

    assert_eq!(
        apply_feedback(&p, &FeedbackEvent::explicit("nope", 1, 1), &cardio),
        Err(FeedbackError::UnknownResult("nope".into()))
    );
}

#[test]
fn enrichment() {
    let d = fixture_dictionary();
    let a = annotate("angina", &d, None).unwrap();
    assert_eq!(enrich_query(&a, &UserProfile::new("u")), a);

    let mut p = UserProfile::new("u");
    p.set_preference(Category::Cardiovascular, 1.0);
    p.health_conditions = vec!["diabetes".into()];
    let e = enrich_query(&a, &p);
    assert_eq!(e.target_categories, a.target_categories);
    assert_eq!(e.terms, a.terms);
    assert!(a.target_categories.contains(&Category::Cardiovascular));
    assert!(e.category_weight(Category::Cardiovascular) > a.category_weight(Category::Cardiovascular));
    assert!(e.context_terms.contains(&"diabetes".to_string()));
}

#[test]
fn profile_store_round_trip_and_auth() {
    let dir = tempfile::tempdir().unwrap();
    let store = ProfileStore::open(dir.path()).unwrap();
    let sessions = SessionStore::default();
    let ip: IpAddr = "127.0.0.1".parse().unwrap();
    sessions.register_user("u1", ip);
    let s = sessions
        .login(&Credential {
            user_id: "u1".into(),
            source_ip: ip,
        })
        .unwrap();

    let fresh = create_or_update_profile(&store, &sessions, &s.token, &[]).unwrap();
    assert_eq!(fresh, UserProfile::new("u1"));

    let form: Vec<FormField> = vec![
        ("preference.cardiovascular".into(), "1.7".into()),
        ("health_conditions".into(), "asthma".into()),
        ("common.city".into(), "Plovdiv".into()),
    ];
    let p = create_or_update_profile(&store, &sessions, &s.token, &form).unwrap();
    assert_eq!(p.preference(Category::Cardiovascular), 1.0);
    assert_eq!(store.load("u1").unwrap().unwrap(), p);
    assert_eq!(p.health_conditions, ["asthma"]);

    let err = create_or_update_profile(&store, &sessions, "bogus", &form).unwrap_err();
    assert!(matches!(err, ProfileError::Auth(SecurityError::AuthRequired)));
    let bad = vec![("preference.elbow".to_string(), "0.3".to_string())];
    assert!(matches!(
        create_or_update_profile(&store, &sessions, &s.token, &bad),
        Err(ProfileError::InvalidField { .. })
    ));
}

#[test]
fn profile_document_field_names() {
    let mut p = UserProfile::new("u1");
    p.common_info = BTreeMap::from([("name".into(), "Ana".into())]);
    p.medical_info = BTreeMap::from([("blood".into(), "AB+".into())]);
    p.health_conditions = vec!["asthma".into()];
    p.set_preference(Category::Digestive, 0.25);
    p.feedback_history.push(FeedbackEvent::click("r1", 7));
    p.feedback_history.push(FeedbackEvent::explicit("r2", -1, 8));
    let text = profile_to_toml(&p);
    for key in ["user_id", "common_info", "medical_info", "health_conditions", "preferences", "feedback_history"] {
        assert!(text.contains(key), "{key} missing from\n{text}");
    }
    assert_eq!(parse_profile(&text).unwrap(), p);
}
