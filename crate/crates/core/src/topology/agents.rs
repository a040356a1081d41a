//! Agent behaviours for both collection topologies.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crossbeam_channel::Sender;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{collect_at, filter_locations, CollectedRecord, OutboundRequest};
use crate::corpus::{SearchFormSpec, Transport};
use crate::platform::{Behavior, Context, Location, Message, Performative};
use crate::security::AssuranceLevel;

pub const QUERY_MOD: &str = "query-mod";
pub const COORDINATOR: &str = "coordinator";
pub const COORDINATION_SERVICE: &str = "coordination";
pub const WEB_PREFIX: &str = "web-";

/// What a coordinator reports back to the query-modification agent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CollectionReport {
    pub records: Vec<CollectedRecord>,
    pub per_location_ms: BTreeMap<String, f64>,
    pub itinerary: Vec<String>,
    pub failures: Vec<String>,
}

pub type Replies = Arc<Mutex<HashMap<String, Sender<Message>>>>;

/// Forwards each coordinator answer to whoever is waiting on that
/// conversation.
pub struct QueryModAgent {
    pub replies: Replies,
}

impl Behavior for QueryModAgent {
    fn handle(&mut self, _ctx: &mut Context<'_>, msg: Message) {
        let waiting = self.replies.lock().unwrap().remove(&msg.conversation_id);
        if let Some(tx) = waiting {
            let _ = tx.send(msg);
        }
    }
}

/// Static web agent bound to one place.
pub struct WebAgent {
    pub location: Location,
    pub transport: Arc<dyn Transport>,
    pub form: SearchFormSpec,
}

impl Behavior for WebAgent {
    fn handle(&mut self, ctx: &mut Context<'_>, msg: Message) {
        if msg.performative != Performative::Request {
            return;
        }
        let terms: Vec<String> = serde_json::from_value(msg.content["terms"].clone()).unwrap_or_default();
        let started = ctx.now_ms();
        let outcome = collect_at(&self.location, &terms, &self.form, self.transport.as_ref(), ctx);
        let elapsed = ctx.now_ms() - started;
        let content = match outcome {
            Ok(records) => json!({
                "location_id": self.location.location_id,
                "elapsed_ms": elapsed,
                "records": records,
            }),
            Err(e) => json!({
                "location_id": self.location.location_id,
                "elapsed_ms": elapsed,
                "error": e.to_string(),
            }),
        };
        let perf = if content.get("error").is_some() {
            Performative::Failure
        } else {
            Performative::Confirm
        };
        let _ = ctx.reply(&msg, perf, content);
    }
}

struct Pending {
    reply_to: String,
    outstanding: usize,
    report: CollectionReport,
}

/// Static coordinator: fans a request out to the web agents of the
/// filtered places and confirms once every one of them has answered.
#[derive(Default)]
pub struct StaticCoordinator {
    pending: HashMap<String, Pending>,
}

impl StaticCoordinator {
    fn start(&mut self, ctx: &mut Context<'_>, msg: Message) {
        let conv = msg.conversation_id.clone();
        let mut report = CollectionReport::default();
        let request: OutboundRequest = match serde_json::from_value(msg.content.clone()) {
            Ok(r) => r,
            Err(e) => {
                let _ = ctx.reply(&msg, Performative::Failure, json!({"error": e.to_string()}));
                return;
            }
        };
        let required = AssuranceLevel::new(request.required_assurance).unwrap_or_default();
        let targets = filter_locations(ctx.available_locations(), &request.categories, required);
        let mut recipients = Vec::new();
        for loc in &targets {
            report.itinerary.push(loc.location_id.clone());
            let agent = loc.categories.iter().find_map(|c| {
                ctx.search_service(c.name())
                    .into_iter()
                    .find(|a| ctx.location_of(&a.name).as_deref() == Some(loc.location_id.as_str()))
            });
            match agent {
                Some(a) => recipients.push(a.name),
                None => report.failures.push(format!("{}: no web agent", loc.location_id)),
            }
        }
        let body = json!({"search_id": request.search_id, "terms": request.terms});
        for r in &recipients {
            let _ = ctx.send(r, Performative::Request, &conv, body.clone());
        }
        let pending = Pending {
            reply_to: msg.sender.name.clone(),
            outstanding: recipients.len(),
            report,
        };
        if pending.outstanding == 0 {
            confirm(ctx, &conv, pending);
        } else {
            self.pending.insert(conv, pending);
        }
    }

    fn collect(&mut self, ctx: &mut Context<'_>, msg: Message) {
        let conv = msg.conversation_id.clone();
        let Some(p) = self.pending.get_mut(&conv) else {
            return;
        };
        let c = &msg.content;
        let loc = c["location_id"].as_str().unwrap_or(&msg.sender.name).to_string();
        if let Some(ms) = c["elapsed_ms"].as_f64() {
            p.report.per_location_ms.insert(loc.clone(), ms);
        }
        match msg.performative {
            Performative::Confirm => {
                let recs: Vec<CollectedRecord> = serde_json::from_value(c["records"].clone()).unwrap_or_default();
                p.report.records.extend(recs);
            }
            _ => {
                let why = c["error"].as_str().or(c["reason"].as_str()).unwrap_or("failed");
                p.report.failures.push(format!("{loc}: {why}"));
            }
        }
        p.outstanding -= 1;
        if p.outstanding == 0 {
            let done = self.pending.remove(&conv).unwrap();
            confirm(ctx, &conv, done);
        }
    }
}

fn confirm(ctx: &mut Context<'_>, conv: &str, mut p: Pending) {
    p.report.records.sort_by(|a, b| (&a.location_id, &a.record.record_id).cmp(&(&b.location_id, &b.record.record_id)));
    let content = serde_json::to_value(&p.report).expect("report serializes");
    let _ = ctx.send(&p.reply_to, Performative::Confirm, conv, content);
}

impl Behavior for StaticCoordinator {
    fn handle(&mut self, ctx: &mut Context<'_>, msg: Message) {
        match msg.performative {
            Performative::Request => self.start(ctx, msg),
            Performative::Confirm | Performative::Failure => self.collect(ctx, msg),
            Performative::Inform => {}
        }
    }
}

/// Everything the mobile agent carries between places.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct Journey {
    conversation: String,
    reply_to: String,
    terms: Vec<String>,
    plan: Vec<String>,
    next: usize,
    report: CollectionReport,
}

/// The single mobile coordinating agent: plans an itinerary over the
/// filtered places, collects at each one after arriving, and informs the
/// query-modification agent when every place has been visited.
pub struct MobileCoordinator {
    pub transport: Arc<dyn Transport>,
    pub form: SearchFormSpec,
    journey: Option<Journey>,
    queued: Vec<Message>,
}

impl MobileCoordinator {
    pub fn new(transport: Arc<dyn Transport>, form: SearchFormSpec) -> Self {
        MobileCoordinator {
            transport,
            form,
            journey: None,
            queued: Vec::new(),
        }
    }

    fn begin(&mut self, ctx: &mut Context<'_>, msg: Message) {
        let request: OutboundRequest = match serde_json::from_value(msg.content.clone()) {
            Ok(r) => r,
            Err(e) => {
                let _ = ctx.reply(&msg, Performative::Failure, json!({"error": e.to_string()}));
                return;
            }
        };
        let required = AssuranceLevel::new(request.required_assurance).unwrap_or_default();
        let plan: Vec<String> = filter_locations(ctx.available_locations(), &request.categories, required)
            .into_iter()
            .map(|l| l.location_id)
            .collect();
        self.journey = Some(Journey {
            conversation: msg.conversation_id.clone(),
            reply_to: msg.sender.name.clone(),
            terms: request.terms,
            report: CollectionReport {
                itinerary: plan.clone(),
                ..Default::default()
            },
            plan,
            next: 0,
        });
        self.advance(ctx);
    }

    /// Moves to the next planned place or, with none left, reports.
    fn advance(&mut self, ctx: &mut Context<'_>) {
        loop {
            let j = self.journey.as_mut().expect("journey in progress");
            let Some(dest) = j.plan.get(j.next).cloned() else {
                let mut j = self.journey.take().unwrap();
                j.report
                    .records
                    .sort_by(|a, b| (&a.location_id, &a.record.record_id).cmp(&(&b.location_id, &b.record.record_id)));
                let content = serde_json::to_value(&j.report).expect("report serializes");
                let _ = ctx.send(&j.reply_to, Performative::Inform, &j.conversation, content);
                self.start_queued(ctx);
                return;
            };
            match ctx.move_to(&dest) {
                Ok(()) => return,
                Err(e) => {
                    j.report.failures.push(format!("{dest}: {e}"));
                    j.next += 1;
                }
            }
        }
    }

    fn collect_here(&mut self, ctx: &mut Context<'_>, loc: &Location) {
        let j = self.journey.as_mut().expect("journey in progress");
        let started = ctx.now_ms();
        match collect_at(loc, &j.terms, &self.form, self.transport.as_ref(), ctx) {
            Ok(recs) => j.report.records.extend(recs),
            Err(e) => j.report.failures.push(format!("{}: {e}", loc.location_id)),
        }
        j.report.per_location_ms.insert(loc.location_id.clone(), ctx.now_ms() - started);
        j.next += 1;
    }

    fn start_queued(&mut self, ctx: &mut Context<'_>) {
        if self.journey.is_none() && !self.queued.is_empty() {
            let next = self.queued.remove(0);
            self.begin(ctx, next);
        }
    }
}

impl Behavior for MobileCoordinator {
    fn handle(&mut self, ctx: &mut Context<'_>, msg: Message) {
        if msg.performative != Performative::Request {
            return;
        }
        if self.journey.is_some() {
            self.queued.push(msg);
        } else {
            self.begin(ctx, msg);
        }
    }

    fn after_move(&mut self, ctx: &mut Context<'_>, dest: &Location) {
        if self.journey.is_none() {
            return;
        }
        self.collect_here(ctx, dest);
        self.advance(ctx);
    }

    fn on_move_failed(&mut self, ctx: &mut Context<'_>, dest: &Location) {
        let Some(j) = self.journey.as_mut() else {
            return;
        };
        j.report.failures.push(format!("{}: migration aborted", dest.location_id));
        j.next += 1;
        self.advance(ctx);
    }

    fn save_state(&self) -> Vec<u8> {
        serde_json::to_vec(&self.journey).expect("journey serializes")
    }

    fn restore_state(&mut self, state: &[u8]) {
        self.journey = serde_json::from_slice(state).unwrap_or(None);
    }
}
