//! User profiles, profile-aware query enrichment and post-processing of
//! collected results.

mod profile;

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use profile::{
    apply_form, clamp_weight, create_or_update_profile, parse_profile, profile_to_toml, FeedbackEvent, FeedbackKind,
    FormField, ProfileError, ProfileStore, UserProfile, CLICK,
};

use crate::corpus::SiteRecord;
use crate::query::{tokenize, AnnotatedQuery};
use crate::taxonomy::Category;

pub const MERGE_JACCARD_THRESHOLD: f64 = 0.8;
pub const EXPLICIT_STEP: f64 = 0.1;
pub const CLICK_STEP: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResultSource {
    pub location_id: String,
    pub record_id: String,
    pub assurance_level: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultItem {
    pub record: SiteRecord,
    pub source_location: String,
    pub matched_terms: BTreeSet<String>,
    pub score: f64,
    pub assurance_level: u8,
    pub categories: BTreeSet<Category>,
    /// Every (location, record) pair folded into this item; starts as the
    /// item's own origin.
    pub sources: Vec<ResultSource>,
}

impl ResultItem {
    pub fn new(
        record: SiteRecord,
        source_location: &str,
        assurance_level: u8,
        categories: BTreeSet<Category>,
        matched_terms: BTreeSet<String>,
    ) -> Self {
        let sources = vec![ResultSource {
            location_id: source_location.to_string(),
            record_id: record.record_id.clone(),
            assurance_level,
        }];
        ResultItem {
            record,
            source_location: source_location.to_string(),
            matched_terms,
            score: 0.0,
            assurance_level,
            categories,
            sources,
        }
    }

    pub fn refers_to(&self, record_id: &str) -> bool {
        self.record.record_id == record_id || self.sources.iter().any(|s| s.record_id == record_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FeedbackError {
    #[error("feedback refers to unknown result {0}")]
    UnknownResult(String),
    #[error("malformed feedback event")]
    Malformed,
}

/// Raises the weight of categories the user prefers and attaches the
/// user's health conditions as context. Terms are left as they are.
pub fn enrich_query(annotated: &AnnotatedQuery, profile: &UserProfile) -> AnnotatedQuery {
    let mut out = annotated.clone();
    for c in &out.target_categories {
        if let Some(w) = profile.preferences.get(c) {
            out.category_weights.insert(*c, 1.0 + clamp_weight(*w));
        }
    }
    let present: BTreeSet<&str> = out.terms.iter().map(|t| t.corrected.as_str()).collect();
    let mut context: Vec<String> = Vec::new();
    for cond in &profile.health_conditions {
        let cond = cond.trim().to_lowercase();
        if !cond.is_empty() && !present.contains(cond.as_str()) && !context.contains(&cond) {
            context.push(cond);
        }
    }
    for c in context {
        if !out.context_terms.contains(&c) {
            out.context_terms.push(c);
        }
    }
    out
}

fn drugs_conflict(a: &SiteRecord, b: &SiteRecord) -> bool {
    !a.drugs.is_empty() && !b.drugs.is_empty() && a.drugs.iter().all(|d| !b.drugs.contains(d))
}

/// Drops an item when another item about the same disease lists a
/// nonempty, disjoint set of drugs and comes from a more assured source.
pub fn resolve_conflicts(items: Vec<ResultItem>) -> Vec<ResultItem> {
    let beaten: Vec<bool> = items
        .iter()
        .map(|a| {
            items.iter().any(|b| {
                b.record.disease == a.record.disease
                    && b.assurance_level > a.assurance_level
                    && drugs_conflict(&a.record, &b.record)
            })
        })
        .collect();
    items
        .into_iter()
        .zip(beaten)
        .filter_map(|(item, lost)| (!lost).then_some(item))
        .collect()
}

pub fn description_jaccard(a: &str, b: &str) -> f64 {
    let ta: BTreeSet<String> = tokenize(a).into_iter().collect();
    let tb: BTreeSet<String> = tokenize(b).into_iter().collect();
    if ta.is_empty() && tb.is_empty() {
        return 1.0;
    }
    ta.intersection(&tb).count() as f64 / ta.union(&tb).count() as f64
}

/// Folds each item into the first earlier group with the same disease and a
/// description at or above the similarity threshold. The group keeps its
/// first item's record and description.
pub fn merge_similar(items: Vec<ResultItem>) -> Vec<ResultItem> {
    let mut groups: Vec<ResultItem> = Vec::with_capacity(items.len());
    for item in items {
        let target = groups.iter_mut().find(|g| {
            g.record.disease == item.record.disease
                && description_jaccard(&g.record.description, &item.record.description) >= MERGE_JACCARD_THRESHOLD
        });
        match target {
            None => groups.push(item),
            Some(g) => {
                let drugs: BTreeSet<String> = g.record.drugs.drain(..).chain(item.record.drugs).collect();
                g.record.drugs = drugs.into_iter().collect();
                g.matched_terms.extend(item.matched_terms);
                g.categories.extend(item.categories);
                g.score = g.score.max(item.score);
                g.assurance_level = g.assurance_level.max(item.assurance_level);
                for s in item.sources {
                    if !g.sources.contains(&s) {
                        g.sources.push(s);
                    }
                }
                g.sources.sort();
            }
        }
    }
    groups
}

pub fn score_item(item: &ResultItem, profile: &UserProfile) -> f64 {
    item.matched_terms.len() as f64 + item.categories.iter().map(|c| profile.preference(*c)).sum::<f64>()
}

/// Full tie-break chain: score descending, assurance descending, record id,
/// then source location.
pub fn rank_order(a: &ResultItem, b: &ResultItem) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(b.assurance_level.cmp(&a.assurance_level))
        .then_with(|| a.record.record_id.cmp(&b.record.record_id))
        .then_with(|| a.source_location.cmp(&b.source_location))
}

pub fn rank_and_sort(mut items: Vec<ResultItem>, profile: &UserProfile) -> Vec<ResultItem> {
    for item in &mut items {
        item.score = score_item(item, profile);
    }
    items.sort_by(rank_order);
    items
}

/// The three post-processing stages in order.
pub fn post_process(items: Vec<ResultItem>, profile: &UserProfile) -> Vec<ResultItem> {
    rank_and_sort(merge_similar(resolve_conflicts(items)), profile)
}

pub fn apply_feedback(
    profile: &UserProfile,
    event: &FeedbackEvent,
    item: &ResultItem,
) -> Result<UserProfile, FeedbackError> {
    if !event.is_well_formed() {
        return Err(FeedbackError::Malformed);
    }
    if !item.refers_to(&event.record_id) {
        return Err(FeedbackError::UnknownResult(event.record_id.clone()));
    }
    let delta = match event.kind {
        FeedbackKind::Explicit => EXPLICIT_STEP * f64::from(event.rating.unwrap_or(0)),
        FeedbackKind::Implicit if event.marker.as_deref() == Some(CLICK) => CLICK_STEP,
        FeedbackKind::Implicit => 0.0,
    };
    let mut out = profile.clone();
    if delta != 0.0 {
        for c in &item.categories {
            let w = out.preference(*c) + delta;
            // Rounding keeps repeated tenth-steps on exact decimal values.
            out.set_preference(*c, (w * 1e9).round() / 1e9);
        }
    }
    out.feedback_history.push(event.clone());
    Ok(out)
}

/// Finds the delivered item an event refers to.
pub fn find_delivered<'a>(delivered: &'a [ResultItem], record_id: &str) -> Result<&'a ResultItem, FeedbackError> {
    delivered
        .iter()
        .find(|i| i.refers_to(record_id))
        .ok_or_else(|| FeedbackError::UnknownResult(record_id.to_string()))
}

#[cfg(test)]
mod tests;
