use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::taxonomy::Category;

pub fn precision(retrieved: &BTreeSet<String>, relevant: &BTreeSet<String>) -> f64 {
    ratio(retrieved.intersection(relevant).count(), retrieved.len())
}

pub fn recall(retrieved: &BTreeSet<String>, relevant: &BTreeSet<String>) -> f64 {
    ratio(retrieved.intersection(relevant).count(), relevant.len())
}

pub fn f_measure(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Raw sets for one evaluated query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub query_id: String,
    pub category: Category,
    pub retrieved: BTreeSet<String>,
    pub relevant: BTreeSet<String>,
}

impl QueryOutcome {
    pub fn hits(&self) -> usize {
        self.retrieved.intersection(&self.relevant).count()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryMetrics {
    pub queries: usize,
    pub retrieved: usize,
    pub relevant: usize,
    pub hits: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

impl CategoryMetrics {
    fn add(&mut self, o: &QueryOutcome) {
        self.queries += 1;
        self.retrieved += o.retrieved.len();
        self.relevant += o.relevant.len();
        self.hits += o.hits();
    }

    fn finish(&mut self) {
        self.precision = ratio(self.hits, self.retrieved);
        self.recall = ratio(self.hits, self.relevant);
        self.f_measure = f_measure(self.precision, self.recall);
    }
}

/// Micro-averaged precision, recall and F-measure over a suite run, with a
/// per-category breakdown. Counts are summed before dividing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub overall: CategoryMetrics,
    pub per_category: BTreeMap<Category, CategoryMetrics>,
    pub coverage_gaps: Vec<String>,
}

impl MetricsReport {
    pub fn from_outcomes(outcomes: &[QueryOutcome], coverage_gaps: Vec<String>) -> Self {
        let mut overall = CategoryMetrics::default();
        let mut per_category: BTreeMap<Category, CategoryMetrics> =
            Category::ALL.iter().map(|c| (*c, CategoryMetrics::default())).collect();
        for o in outcomes {
            overall.add(o);
            per_category.get_mut(&o.category).expect("every category present").add(o);
        }
        overall.finish();
        per_category.values_mut().for_each(CategoryMetrics::finish);
        MetricsReport {
            precision: overall.precision,
            recall: overall.recall,
            f_measure: overall.f_measure,
            overall,
            per_category,
            coverage_gaps,
        }
    }

    /// Flat `key = value` document. Reals use the shortest representation
    /// that reads back to the same value.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("precision", self.precision.to_string());
        put("recall", self.recall.to_string());
        put("f_measure", self.f_measure.to_string());
        put("queries", self.overall.queries.to_string());
        put("retrieved", self.overall.retrieved.to_string());
        put("relevant", self.overall.relevant.to_string());
        put("hits", self.overall.hits.to_string());
        put("coverage_gaps", self.coverage_gaps.join(","));
        for (c, m) in &self.per_category {
            let p = format!("category.{}", c.slug());
            put(&format!("{p}.queries"), m.queries.to_string());
            put(&format!("{p}.retrieved"), m.retrieved.to_string());
            put(&format!("{p}.relevant"), m.relevant.to_string());
            put(&format!("{p}.hits"), m.hits.to_string());
            put(&format!("{p}.precision"), m.precision.to_string());
            put(&format!("{p}.recall"), m.recall.to_string());
            put(&format!("{p}.f_measure"), m.f_measure.to_string());
        }
        out
    }

    pub fn parse_document(text: &str) -> Result<Self, String> {
        let mut kv: BTreeMap<&str, &str> = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| format!("line {}: expected `key = value`", n + 1))?;
            kv.insert(k.trim(), v.trim());
        }
        let get = |k: &str| kv.get(k).copied().ok_or_else(|| format!("missing key `{k}`"));
        let real = |k: &str| get(k)?.parse::<f64>().map_err(|e| format!("`{k}`: {e}"));
        let count = |k: &str| get(k)?.parse::<usize>().map_err(|e| format!("`{k}`: {e}"));
        let block = |p: &str| -> Result<CategoryMetrics, String> {
            Ok(CategoryMetrics {
                queries: count(&format!("{p}queries"))?,
                retrieved: count(&format!("{p}retrieved"))?,
                relevant: count(&format!("{p}relevant"))?,
                hits: count(&format!("{p}hits"))?,
                precision: real(&format!("{p}precision"))?,
                recall: real(&format!("{p}recall"))?,
                f_measure: real(&format!("{p}f_measure"))?,
            })
        };
        let overall = block("")?;
        let mut per_category = BTreeMap::new();
        for c in Category::ALL {
            per_category.insert(c, block(&format!("category.{}.", c.slug()))?);
        }
        let gaps = get("coverage_gaps")?;
        Ok(MetricsReport {
            precision: overall.precision,
            recall: overall.recall,
            f_measure: overall.f_measure,
            overall,
            per_category,
            coverage_gaps: if gaps.is_empty() {
                Vec::new()
            } else {
                gaps.split(',').map(str::to_string).collect()
            },
        })
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<22} {:>7} {:>9} {:>9} {:>6} {:>9} {:>9} {:>9}\n",
            "CATEGORY", "QUERIES", "RETRIEVED", "RELEVANT", "HITS", "PRECISION", "RECALL", "F"
        );
        let row = |out: &mut String, name: &str, m: &CategoryMetrics| {
            let _ = writeln!(
                out,
                "{:<22} {:>7} {:>9} {:>9} {:>6} {:>9.4} {:>9.4} {:>9.4}",
                name, m.queries, m.retrieved, m.relevant, m.hits, m.precision, m.recall, m.f_measure
            );
        };
        for (c, m) in &self.per_category {
            row(&mut out, c.slug(), m);
        }
        row(&mut out, "OVERALL", &self.overall);
        if !self.coverage_gaps.is_empty() {
            let _ = writeln!(out, "coverage gaps: {}", self.coverage_gaps.join(", "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: impl IntoIterator<Item = usize>) -> BTreeSet<String> {
        ids.into_iter().map(|i| format!("r{i}")).collect()
    }

    #[test]
    fn ratio_examples() {
        assert!((precision(&set(0..25), &set(1..25)) - 0.96).abs() < 1e-12);
        assert!((recall(&set(0..91), &set(0..100)) - 0.91).abs() < 1e-12);
        let f = f_measure(0.96, 0.91);
        assert!((f - 0.9343).abs() < 5e-4);
        assert_eq!((f * 100.0).round(), 93.0);
    }

    #[test]
    fn degenerate_inputs_are_zero() {
        assert_eq!(precision(&set([]), &set(0..3)), 0.0);
        assert_eq!(recall(&set(0..3), &set([])), 0.0);
        assert_eq!(f_measure(0.0, 0.0), 0.0);
    }

    #[test]
    fn document_round_trips() {
        let outcomes = vec![
            QueryOutcome {
                query_id: "q1".into(),
                category: Category::Urinary,
                retrieved: set(0..3),
                relevant: set(1..5),
            },
            QueryOutcome {
                query_id: "q2".into(),
                category: Category::Nervous,
                retrieved: set(0..7),
                relevant: set(0..1),
            },
        ];
        let r = MetricsReport::from_outcomes(&outcomes, vec!["q9".into()]);
        assert_eq!(r.overall.hits, 3);
        assert_eq!(r.overall.retrieved, 10);
        assert_eq!(MetricsReport::parse_document(&r.to_document()).unwrap(), r);
        assert!(r.to_table().contains("OVERALL"));
    }
}
