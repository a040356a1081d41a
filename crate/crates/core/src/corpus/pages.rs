//! Page rendering and routing for the synthetic sites. The same
//! [`SiteService`] answers in-process fetches and the HTTP server.

use std::sync::Arc;

use super::html::escape;
use super::model::{Corpus, SearchFormSpec, SiteManifest, SiteRecord};

/// Attribute carried by every result entry.
pub const RECORD_ID_ATTR: &str = "data-record-id";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteResponse {
    pub status: u16,
    pub body: String,
    /// Simulated processing time the site spends before answering.
    pub latency_ms: u64,
}

#[derive(Debug, Clone)]
pub struct SiteService {
    corpus: Arc<Corpus>,
    form: SearchFormSpec,
}

impl SiteService {
    pub fn new(corpus: Arc<Corpus>) -> Self {
        SiteService {
            corpus,
            form: SearchFormSpec::default(),
        }
    }

    pub fn corpus(&self) -> &Arc<Corpus> {
        &self.corpus
    }

    pub fn form(&self) -> &SearchFormSpec {
        &self.form
    }

    /// Routes `GET /site/{id}` and `GET /site/{id}/search?q=...`. Only the
    /// search answer carries the site's collection latency; the form page is
    /// static.
    pub fn respond(&self, path_and_query: &str) -> SiteResponse {
        let (path, query) = path_and_query
            .split_once('?')
            .unwrap_or((path_and_query, ""));
        let segments: Vec<&str> = path.trim_matches('/').split('/').collect();
        match segments.as_slice() {
            ["site", id] => self.page(id, false, |site| search_page(site, &self.form)),
            ["site", id, "search"] => {
                let term = form_urlencoded::parse(query.as_bytes())
                    .find(|(k, _)| k == self.form.query_attribute_name.as_str())
                    .map(|(_, v)| v.into_owned())
                    .unwrap_or_default();
                self.page(id, true, |site| {
                    let hits: Vec<&SiteRecord> = site.matching(&term).collect();
                    results_page(site, &self.form, &term, &hits)
                })
            }
            _ => not_found(),
        }
    }

    fn page(&self, id: &str, searching: bool, render: impl FnOnce(&SiteManifest) -> String) -> SiteResponse {
        match self.corpus.site(id) {
            Some(site) => SiteResponse {
                status: 200,
                body: render(site),
                latency_ms: if searching { site.collect_latency_ms } else { 0 },
            },
            None => not_found(),
        }
    }
}

fn not_found() -> SiteResponse {
    SiteResponse {
        status: 404,
        body: "<!DOCTYPE html><html><body><p>not found</p></body></html>".into(),
        latency_ms: 0,
    }
}

fn form_html(site: &SiteManifest, form: &SearchFormSpec, value: &str) -> String {
    format!(
        "<form id=\"{fid}\" action=\"/site/{sid}/search\" method=\"get\">\
         <label for=\"{fid}-input\">Disease</label>\
         <input type=\"text\" id=\"{fid}-input\" name=\"{q}\" value=\"{v}\"/>\
         <button type=\"submit\" id=\"{bid}\">Search</button></form>",
        fid = escape(&form.form_element_id),
        sid = escape(&site.site_id),
        q = escape(&form.query_attribute_name),
        v = escape(value),
        bid = escape(&form.submit_button_id),
    )
}

pub fn search_page(site: &SiteManifest, form: &SearchFormSpec) -> String {
    format!(
        "<!DOCTYPE html><html><head><title>{t}</title></head><body>\
         <h1>{t}</h1><p class=\"category\">{c}</p>{f}</body></html>",
        t = escape(&site.site_id),
        c = escape(site.category.name()),
        f = form_html(site, form, ""),
    )
}

pub fn results_page(site: &SiteManifest, form: &SearchFormSpec, term: &str, hits: &[&SiteRecord]) -> String {
    let mut items = String::new();
    for r in hits {
        let drugs: String = r
            .drugs
            .iter()
            .map(|d| format!("<li class=\"drug\">{}</li>", escape(d)))
            .collect();
        items.push_str(&format!(
            "<li class=\"result\" {attr}=\"{id}\"><h3 class=\"disease\">{d}</h3>\
             <p class=\"description\">{desc}</p><ul class=\"drugs\">{drugs}</ul></li>",
            attr = RECORD_ID_ATTR,
            id = escape(&r.record_id),
            d = escape(&r.disease),
            desc = escape(&r.description),
        ));
    }
    format!(
        "<!DOCTYPE html><html><head><title>{t}</title></head><body>{f}\
         <ul id=\"results\" data-count=\"{n}\">{items}</ul></body></html>",
        t = escape(&site.site_id),
        f = form_html(site, form, term),
        n = hits.len(),
    )
}
