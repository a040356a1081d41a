//! Form-driven collection from one site: load the page, find the search
//! form, put the term in its query field, submit, and read the result list.

use super::html::{self, Element, HtmlError};
use super::model::{SearchFormSpec, SiteRecord};
use super::pages::RECORD_ID_ATTR;
use super::transport::{FetchError, Pacer, Transport};
use crate::platform::Location;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScrapeError {
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<HtmlError> for ScrapeError {
    fn from(e: HtmlError) -> Self {
        ScrapeError::Parse(e.to_string())
    }
}

pub fn get_results(
    location: &Location,
    search_term: &str,
    form: &SearchFormSpec,
    transport: &dyn Transport,
    pacer: &mut dyn Pacer,
) -> Result<Vec<SiteRecord>, ScrapeError> {
    let page_path = format!("/site/{}", location.site.site_id);
    let page = html::parse(&transport.get(&page_path, pacer)?)?;
    let submit_path = fill_and_submit(&page, &page_path, form, search_term)?;
    let results = html::parse(&transport.get(&submit_path, pacer)?)?;
    parse_results(&results)
}

/// Loads the site's form once and submits it for every term, returning
/// each term's hits in term order.
pub fn collect_terms(
    location: &Location,
    terms: &[String],
    form: &SearchFormSpec,
    transport: &dyn Transport,
    pacer: &mut dyn Pacer,
) -> Result<Vec<(String, Vec<SiteRecord>)>, ScrapeError> {
    if terms.is_empty() {
        return Ok(Vec::new());
    }
    let page_path = format!("/site/{}", location.site.site_id);
    let page = html::parse(&transport.get(&page_path, pacer)?)?;
    let mut out = Vec::with_capacity(terms.len());
    for term in terms {
        let submit_path = fill_and_submit(&page, &page_path, form, term)?;
        let results = html::parse(&transport.get(&submit_path, pacer)?)?;
        out.push((term.clone(), parse_results(&results)?));
    }
    Ok(out)
}

/// Locates the form, sets the query attribute to `term`, "clicks" the submit
/// button and returns the request the browser would issue.
pub fn fill_and_submit(page: &Element, page_path: &str, form: &SearchFormSpec, term: &str) -> Result<String, ScrapeError> {
    let form_el = page
        .by_id(&form.form_element_id)
        .filter(|e| e.name == "form")
        .ok_or_else(|| ScrapeError::Parse(format!("no form #{}", form.form_element_id)))?;
    let mut fields: Vec<(String, String)> = form_el
        .find_all(|e| e.name == "input" && e.attr("name").is_some())
        .into_iter()
        .map(|e| (e.attr("name").unwrap().to_string(), e.attr("value").unwrap_or("").to_string()))
        .collect();
    let query_field = fields
        .iter_mut()
        .find(|(k, _)| *k == form.query_attribute_name)
        .ok_or_else(|| ScrapeError::Parse(format!("no input named {}", form.query_attribute_name)))?;
    query_field.1 = term.to_string();
    form_el
        .by_id(&form.submit_button_id)
        .ok_or_else(|| ScrapeError::Parse(format!("no submit #{}", form.submit_button_id)))?;
    let method = form_el.attr("method").unwrap_or("get").to_ascii_lowercase();
    if method != "get" {
        return Err(ScrapeError::Parse(format!("unsupported form method {method}")));
    }
    let action = form_el.attr("action").filter(|a| !a.is_empty()).unwrap_or(page_path);
    let query = form_urlencoded::Serializer::new(String::new())
        .extend_pairs(fields.iter().map(|(k, v)| (k.as_str(), v.as_str())))
        .finish();
    Ok(format!("{action}?{query}"))
}

pub fn parse_results(page: &Element) -> Result<Vec<SiteRecord>, ScrapeError> {
    let list = page
        .by_id("results")
        .ok_or_else(|| ScrapeError::Parse("no result list".into()))?;
    list.find_all(|e| e.attr(RECORD_ID_ATTR).is_some())
        .into_iter()
        .map(|entry| {
            let disease = entry
                .find(|e| e.has_class("disease"))
                .map(|e| e.text())
                .ok_or_else(|| ScrapeError::Parse("result without disease".into()))?;
            let description = entry
                .find(|e| e.has_class("description"))
                .map(|e| e.text())
                .unwrap_or_default();
            let drugs = entry
                .find_all(|e| e.has_class("drug"))
                .into_iter()
                .map(|e| e.text())
                .collect();
            Ok(SiteRecord {
                record_id: entry.attr(RECORD_ID_ATTR).unwrap().to_string(),
                disease,
                description,
                drugs,
            })
        })
        .collect()
}
