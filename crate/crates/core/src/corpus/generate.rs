use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{Corpus, SiteManifest, SiteRecord};
use crate::taxonomy::Category;
use crate::vocab::{vocab_for, VOCAB};

const QUALIFIERS: &[&str] = &["acute", "chronic", "severe", "mild"];
const COURSES: &[&str] = &["usually self-limiting", "often recurrent", "requires follow-up", "responds to treatment"];

/// Builds `13 * sites_per_category` sites, every category represented,
/// fully determined by `seed`.
pub fn generate_corpus(seed: u64, sites_per_category: usize, records_per_site: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sites = Vec::with_capacity(13 * sites_per_category);
    for category in Category::ALL {
        let vocab = vocab_for(category);
        for j in 0..sites_per_category {
            let site_id = format!("{}-{}", category.slug(), j + 1);
            let assurance_level = rng.gen_range(0..=3u8);
            let collect_latency_ms = rng.gen_range(5..=40u64);
            let mut records = Vec::with_capacity(records_per_site);
            for k in 0..records_per_site {
                let n = vocab.diseases.len();
                let base = vocab.diseases[(k + j) % n];
                // Past one full pass over the disease list, qualify the name
                // so repeated diseases remain distinguishable.
                let disease = if k >= n {
                    format!("{} {}", QUALIFIERS[(k / n - 1) % QUALIFIERS.len()], base)
                } else {
                    base.to_string()
                };
                records.push(SiteRecord {
                    record_id: format!("{site_id}-r{:03}", k + 1),
                    description: describe(&mut rng, &disease, vocab.symptoms),
                    drugs: pick_drugs(&mut rng, vocab.drugs),
                    disease,
                });
            }
            sites.push(SiteManifest {
                site_id,
                category,
                assurance_level,
                collect_latency_ms,
                records,
            });
        }
    }
    Corpus::new(sites)
}

fn describe(rng: &mut ChaCha8Rng, disease: &str, symptoms: &[&str]) -> String {
    let picked: Vec<&str> = symptoms.choose_multiple(rng, 2).copied().collect();
    let course = COURSES.choose(rng).unwrap();
    format!("{disease} presents with {} and {}; {course}.", picked[0], picked[1])
}

fn pick_drugs(rng: &mut ChaCha8Rng, drugs: &[&str]) -> Vec<String> {
    let count = rng.gen_range(1..=3usize);
    let mut picked: Vec<String> = drugs.choose_multiple(rng, count).map(|d| d.to_string()).collect();
    picked.sort();
    picked
}

/// All disease base names known to the generator, with their category.
pub fn known_diseases() -> impl Iterator<Item = (Category, &'static str)> {
    VOCAB
        .iter()
        .flat_map(|v| v.diseases.iter().map(move |d| (v.category, *d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn counts_follow_arguments() {
        let c = generate_corpus(1, 1, 5);
        assert_eq!(c.sites.len(), 13);
        assert_eq!(c.record_count(), 65);
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(generate_corpus(3, 2, 7), generate_corpus(3, 2, 7));
        assert_ne!(generate_corpus(3, 2, 7), generate_corpus(4, 2, 7));
    }

    #[test]
    fn two_sites_per_category() {
        let c = generate_corpus(7, 2, 10);
        assert_eq!(c.sites.len(), 26);
        let mut per: BTreeMap<Category, usize> = BTreeMap::new();
        for s in &c.sites {
            *per.entry(s.category).or_default() += 1;
        }
        assert_eq!(per.len(), 13);
        assert!(per.values().all(|&n| n == 2));
    }

    #[test]
    fn ids_unique_and_fields_valid() {
        let c = generate_corpus(11, 3, 20);
        let mut ids: Vec<&str> = c.sites.iter().flat_map(|s| s.records.iter().map(|r| r.record_id.as_str())).collect();
        let total = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), total);
        for s in &c.sites {
            assert!(s.assurance_level <= 3);
            assert!(s.records.iter().all(|r| !r.disease.is_empty() && !r.drugs.is_empty()));
        }
    }

    #[test]
    fn vocab_table_is_in_category_order() {
        for (i, v) in VOCAB.iter().enumerate() {
            assert_eq!(v.category, Category::ALL[i]);
        }
    }
}
