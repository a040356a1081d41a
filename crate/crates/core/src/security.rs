//! Log-in authority and the boundary rules for site-bound traffic: sessions
//! bound to a registered IP, per-search record keys, site assurance checks,
//! and the outbound sanitizer.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::net::IpAddr;
use std::path::Path;
use std::sync::RwLock;
use std::time::{Duration, Instant};

use hmac::{Hmac, Mac};
use rand::RngCore;
use serde_json::{Map, Value};
use sha2::Sha256;

use crate::corpus::SiteManifest;

pub const DEFAULT_SESSION_TTL: Duration = Duration::from_secs(30 * 60);
pub const DEFAULT_REQUIRED_ASSURANCE: AssuranceLevel = AssuranceLevel(2);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SecurityError {
    /// Deliberately carries no detail so unknown users and wrong addresses
    /// look the same.
    #[error("authentication failed")]
    AuthFailed,
    #[error("authentication required")]
    AuthRequired,
    #[error("outbound payload still carries an identifier")]
    SanitizationFailure,
    #[error("invalid secret: {0}")]
    InvalidSecret(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Credential {
    pub user_id: String,
    pub source_ip: IpAddr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub token: String,
    pub user_id: String,
    pub source_ip: IpAddr,
    pub expires_at: Instant,
}

impl Session {
    pub fn is_expired(&self, now: Instant) -> bool {
        now >= self.expires_at
    }
}

/// Registered users with their allowed source addresses, and live sessions.
#[derive(Debug)]
pub struct SessionStore {
    ttl: Duration,
    users: RwLock<BTreeMap<String, BTreeSet<IpAddr>>>,
    sessions: RwLock<HashMap<String, Session>>,
}

impl Default for SessionStore {
    fn default() -> Self {
        SessionStore::new(DEFAULT_SESSION_TTL)
    }
}

impl SessionStore {
    pub fn new(ttl: Duration) -> Self {
        SessionStore {
            ttl,
            users: RwLock::new(BTreeMap::new()),
            sessions: RwLock::new(HashMap::new()),
        }
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    pub fn register_user(&self, user_id: &str, ip: IpAddr) {
        self.users
            .write()
            .unwrap()
            .entry(user_id.to_string())
            .or_default()
            .insert(ip);
    }

    pub fn is_registered(&self, user_id: &str) -> bool {
        self.users.read().unwrap().contains_key(user_id)
    }

    pub fn login(&self, cred: &Credential) -> Result<Session, SecurityError> {
        self.login_at(cred, Instant::now())
    }

    pub fn login_at(&self, cred: &Credential, now: Instant) -> Result<Session, SecurityError> {
        let allowed = !cred.user_id.is_empty()
            && self
                .users
                .read()
                .unwrap()
                .get(&cred.user_id)
                .is_some_and(|ips| ips.contains(&cred.source_ip));
        if !allowed {
            return Err(SecurityError::AuthFailed);
        }
        let mut sessions = self.sessions.write().unwrap();
        sessions.retain(|_, s| !s.is_expired(now));
        let token = loop {
            let t = random_hex::<16>();
            if !sessions.contains_key(&t) {
                break t;
            }
        };
        let session = Session {
            token: token.clone(),
            user_id: cred.user_id.clone(),
            source_ip: cred.source_ip,
            expires_at: now + self.ttl,
        };
        sessions.insert(token, session.clone());
        Ok(session)
    }

    pub fn validate(&self, token: &str) -> Result<Session, SecurityError> {
        self.validate_at(token, Instant::now())
    }

    pub fn validate_at(&self, token: &str, now: Instant) -> Result<Session, SecurityError> {
        let mut sessions = self.sessions.write().unwrap();
        match sessions.get(token) {
            Some(s) if !s.is_expired(now) => Ok(s.clone()),
            Some(_) => {
                sessions.remove(token);
                Err(SecurityError::AuthRequired)
            }
            None => Err(SecurityError::AuthRequired),
        }
    }

    pub fn logout(&self, token: &str) -> bool {
        self.sessions.write().unwrap().remove(token).is_some()
    }
}

fn random_hex<const N: usize>() -> String {
    let mut bytes = [0u8; N];
    rand::thread_rng().fill_bytes(&mut bytes);
    hex::encode(bytes)
}

/// Key material for record-key derivation.
#[derive(Clone, PartialEq, Eq)]
pub struct PlatformSecret(Vec<u8>);

impl fmt::Debug for PlatformSecret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PlatformSecret(..)")
    }
}

impl PlatformSecret {
    pub const MIN_LEN: usize = 16;

    pub fn new(bytes: Vec<u8>) -> Result<Self, SecurityError> {
        if bytes.len() < Self::MIN_LEN {
            return Err(SecurityError::InvalidSecret(format!(
                "need at least {} bytes, got {}",
                Self::MIN_LEN,
                bytes.len()
            )));
        }
        Ok(PlatformSecret(bytes))
    }

    pub fn generate() -> Self {
        let mut bytes = vec![0u8; 32];
        rand::thread_rng().fill_bytes(&mut bytes);
        PlatformSecret(bytes)
    }

    /// Reads a secret file: hex text is decoded, anything else is used as
    /// raw bytes after trimming surrounding whitespace.
    pub fn from_file(path: &Path) -> Result<Self, SecurityError> {
        let raw = std::fs::read(path).map_err(|e| SecurityError::InvalidSecret(format!("{}: {e}", path.display())))?;
        let text = String::from_utf8_lossy(&raw);
        let trimmed = text.trim();
        match hex::decode(trimmed) {
            Ok(bytes) => Self::new(bytes),
            Err(_) => Self::new(trimmed.as_bytes().to_vec()),
        }
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SearchNonce(pub [u8; 16]);

impl SearchNonce {
    pub fn fresh() -> Self {
        let mut n = [0u8; 16];
        rand::thread_rng().fill_bytes(&mut n);
        SearchNonce(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RecordKey {
    pub key: [u8; 32],
    pub search_nonce: SearchNonce,
}

impl RecordKey {
    pub fn to_hex(&self) -> String {
        hex::encode(self.key)
    }
}

/// HMAC-SHA256 keyed by the platform secret over `user_id 0x00 nonce`.
pub fn derive_record_key(secret: &PlatformSecret, user_id: &str, nonce: SearchNonce) -> RecordKey {
    let mut mac = Hmac::<Sha256>::new_from_slice(&secret.0).expect("hmac accepts any key length");
    mac.update(user_id.as_bytes());
    mac.update(&[0]);
    mac.update(&nonce.0);
    RecordKey {
        key: mac.finalize().into_bytes().into(),
        search_nonce: nonce,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AssuranceLevel(u8);

impl AssuranceLevel {
    pub const MAX: u8 = 3;

    pub fn new(level: u8) -> Option<Self> {
        (level <= Self::MAX).then_some(AssuranceLevel(level))
    }

    pub fn level(self) -> u8 {
        self.0
    }
}

impl Default for AssuranceLevel {
    fn default() -> Self {
        DEFAULT_REQUIRED_ASSURANCE
    }
}

pub fn check_assurance(site: &SiteManifest, required: AssuranceLevel) -> bool {
    site.assurance_level >= required.0
}

/// Object keys that refer to the user or carry profile data. They never
/// leave the platform.
pub const USER_REFERENCE_KEYS: &[&str] = &["user_id", "user", "session_token", "token"];
pub const PROFILE_KEYS: &[&str] = &[
    "profile",
    "common_info",
    "medical_info",
    "health_conditions",
    "preferences",
    "category_weights",
    "feedback_history",
    "context_terms",
];
/// Fields holding random or keyed material; excluded from the residual scan.
pub const OPAQUE_KEYS: &[&str] = &["record_key", "search_id"];

/// Identifiers that must not appear in anything bound for a site.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SensitiveValues {
    values: BTreeSet<String>,
}

impl SensitiveValues {
    pub fn new<I, S>(values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        SensitiveValues {
            values: values
                .into_iter()
                .map(|v| v.as_ref().trim().to_lowercase())
                .filter(|v| !v.is_empty())
                .collect(),
        }
    }

    pub fn for_session<'a>(session: &'a Session, profile_values: impl IntoIterator<Item = &'a str>) -> Self {
        let mut all: Vec<&str> = vec![session.user_id.as_str(), session.token.as_str()];
        all.extend(profile_values);
        SensitiveValues::new(all)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.values.iter().map(String::as_str)
    }

    /// First sensitive value occurring anywhere in `text`, case-insensitive.
    pub fn find_in(&self, text: &str) -> Option<&str> {
        let lower = text.to_lowercase();
        self.iter().find(|v| lower.contains(v))
    }
}

/// Strips user references and profile data from a site-bound payload,
/// removes whole-word occurrences of sensitive values from its strings,
/// and substitutes the record key for the user reference. Fails closed if
/// any sensitive value survives.
pub fn pseudonymize_outbound(
    payload: &Value,
    sensitive: &SensitiveValues,
    record_key: &RecordKey,
) -> Result<Value, SecurityError> {
    let mut had_user_ref = false;
    let mut out = scrub(payload, sensitive, &mut had_user_ref).unwrap_or(Value::Null);
    if had_user_ref {
        match &mut out {
            Value::Object(map) => {
                map.insert("record_key".into(), Value::String(record_key.to_hex()));
            }
            _ => return Err(SecurityError::SanitizationFailure),
        }
    }
    if residual_scan(&out, sensitive).is_some() {
        return Err(SecurityError::SanitizationFailure);
    }
    Ok(out)
}

/// Returns a sensitive value found in `payload` outside the opaque fields.
pub fn residual_scan<'a>(payload: &Value, sensitive: &'a SensitiveValues) -> Option<&'a str> {
    let mut stripped = payload.clone();
    if let Value::Object(map) = &mut stripped {
        for k in OPAQUE_KEYS {
            map.remove(*k);
        }
    }
    let text = serde_json::to_string(&stripped).unwrap_or_default();
    sensitive.find_in(&text)
}

fn scrub(v: &Value, sensitive: &SensitiveValues, had_user_ref: &mut bool) -> Option<Value> {
    match v {
        Value::String(s) => {
            let cleaned = remove_words(s, sensitive);
            (!cleaned.is_empty() || s.is_empty()).then_some(Value::String(cleaned))
        }
        Value::Array(items) => Some(Value::Array(
            items.iter().filter_map(|i| scrub(i, sensitive, had_user_ref)).collect(),
        )),
        Value::Object(map) => {
            let mut out = Map::new();
            for (k, val) in map {
                if USER_REFERENCE_KEYS.contains(&k.as_str()) {
                    *had_user_ref = true;
                    continue;
                }
                if PROFILE_KEYS.contains(&k.as_str()) {
                    continue;
                }
                if sensitive.find_in(k).is_some() {
                    continue;
                }
                if let Some(clean) = scrub(val, sensitive, had_user_ref) {
                    out.insert(k.clone(), clean);
                }
            }
            Some(Value::Object(out))
        }
        other => Some(other.clone()),
    }
}

/// Removes whole-word, case-insensitive occurrences of each sensitive
/// value and normalises the remaining whitespace.
fn remove_words(s: &str, sensitive: &SensitiveValues) -> String {
    let mut cur = s.to_string();
    loop {
        let mut changed = false;
        for v in sensitive.iter() {
            let lower = cur.to_lowercase();
            // Lowercasing can change byte lengths outside ASCII; only edit in
            // place when offsets line up.
            if lower.len() != cur.len() {
                continue;
            }
            let mut next = String::with_capacity(cur.len());
            let mut last = 0;
            for (at, _) in lower.match_indices(v) {
                if at < last {
                    continue;
                }
                let end = at + v.len();
                let before_ok = lower[..at].chars().next_back().is_none_or(|c| !c.is_alphanumeric());
                let after_ok = lower[end..].chars().next().is_none_or(|c| !c.is_alphanumeric());
                if before_ok && after_ok {
                    next.push_str(&cur[last..at]);
                    last = end;
                    changed = true;
                }
            }
            next.push_str(&cur[last..]);
            cur = next;
        }
        if !changed {
            break;
        }
    }
    cur.split_whitespace().collect::<Vec<_>>().join(" ")
}
