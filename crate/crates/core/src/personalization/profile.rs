use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::security::{SecurityError, SessionStore};
use crate::taxonomy::Category;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FeedbackKind {
    Explicit,
    Implicit,
}

/// A user reaction to a delivered result. Explicit events carry a rating
/// in {-1, 0, +1}; implicit events carry a marker (only `click` is
/// modelled).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackEvent {
    pub kind: FeedbackKind,
    pub record_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marker: Option<String>,
    pub timestamp: u64,
}

pub const CLICK: &str = "click";

impl FeedbackEvent {
    pub fn explicit(record_id: &str, rating: i8, timestamp: u64) -> Self {
        FeedbackEvent {
            kind: FeedbackKind::Explicit,
            record_id: record_id.to_string(),
            rating: Some(rating.clamp(-1, 1)),
            marker: None,
            timestamp,
        }
    }

    pub fn click(record_id: &str, timestamp: u64) -> Self {
        FeedbackEvent {
            kind: FeedbackKind::Implicit,
            record_id: record_id.to_string(),
            rating: None,
            marker: Some(CLICK.to_string()),
            timestamp,
        }
    }

    pub fn is_well_formed(&self) -> bool {
        match self.kind {
            FeedbackKind::Explicit => self.rating.is_some_and(|r| (-1..=1).contains(&r)) && self.marker.is_none(),
            FeedbackKind::Implicit => self.marker.is_some() && self.rating.is_none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    #[serde(default)]
    pub common_info: BTreeMap<String, String>,
    #[serde(default)]
    pub medical_info: BTreeMap<String, String>,
    #[serde(default)]
    pub health_conditions: Vec<String>,
    #[serde(default)]
    pub preferences: BTreeMap<Category, f64>,
    #[serde(default)]
    pub feedback_history: Vec<FeedbackEvent>,
}

impl UserProfile {
    pub fn new(user_id: &str) -> Self {
        UserProfile {
            user_id: user_id.to_string(),
            common_info: BTreeMap::new(),
            medical_info: BTreeMap::new(),
            health_conditions: Vec::new(),
            preferences: BTreeMap::new(),
            feedback_history: Vec::new(),
        }
    }

    pub fn preference(&self, c: Category) -> f64 {
        self.preferences.get(&c).copied().unwrap_or(0.0)
    }

    pub fn set_preference(&mut self, c: Category, w: f64) {
        self.preferences.insert(c, clamp_weight(w));
    }

    /// Values from the identifying sections, which must never leave the
    /// platform.
    pub fn private_values(&self) -> impl Iterator<Item = &str> {
        self.common_info.values().chain(self.medical_info.values()).map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.common_info.is_empty()
            && self.medical_info.is_empty()
            && self.health_conditions.is_empty()
            && self.preferences.is_empty()
    }
}

pub fn clamp_weight(w: f64) -> f64 {
    if w.is_nan() {
        0.0
    } else {
        w.clamp(0.0, 1.0)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error(transparent)]
    Auth(#[from] SecurityError),
    #[error("invalid profile field `{field}`: {reason}")]
    InvalidField { field: String, reason: String },
    #[error("profile storage error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt profile document {path}: {reason}")]
    Corrupt { path: String, reason: String },
}

/// One field assignment from a profile form:
/// `common.<key>`, `medical.<key>`, `health_conditions` (comma list) or
/// `preference.<category>`.
pub type FormField = (String, String);

pub fn apply_form(profile: &mut UserProfile, form: &[FormField]) -> Result<(), ProfileError> {
    for (field, value) in form {
        let invalid = |reason: String| ProfileError::InvalidField {
            field: field.clone(),
            reason,
        };
        if let Some(key) = field.strip_prefix("common.") {
            set_or_clear(&mut profile.common_info, key, value);
        } else if let Some(key) = field.strip_prefix("medical.") {
            set_or_clear(&mut profile.medical_info, key, value);
        } else if field == "health_conditions" {
            profile.health_conditions = value
                .split(',')
                .map(|c| c.trim().to_lowercase())
                .filter(|c| !c.is_empty())
                .collect();
        } else if let Some(cat) = field.strip_prefix("preference.") {
            let c: Category = cat.parse().map_err(|e: crate::taxonomy::UnknownCategory| invalid(e.to_string()))?;
            let w: f64 = value.trim().parse().map_err(|_| invalid(format!("`{value}` is not a number")))?;
            if w.is_nan() {
                return Err(invalid("weight is NaN".into()));
            }
            profile.set_preference(c, w);
        } else {
            return Err(invalid("unknown field".into()));
        }
    }
    Ok(())
}

fn set_or_clear(map: &mut BTreeMap<String, String>, key: &str, value: &str) {
    if value.trim().is_empty() {
        map.remove(key);
    } else {
        map.insert(key.to_string(), value.trim().to_string());
    }
}

#[derive(Debug)]
enum Backend {
    Dir(PathBuf),
    Memory(Mutex<HashMap<String, String>>),
}

/// Profiles kept as one TOML document per user, in a data directory or in
/// memory. Writes to the same user are serialised and replace the whole
/// document atomically.
#[derive(Debug)]
pub struct ProfileStore {
    backend: Backend,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl ProfileStore {
    pub fn open(dir: &Path) -> Result<Self, ProfileError> {
        fs::create_dir_all(dir)?;
        Ok(ProfileStore {
            backend: Backend::Dir(dir.to_path_buf()),
            locks: Mutex::new(HashMap::new()),
        })
    }

    /// Keeps the same TOML documents in memory only.
    pub fn in_memory() -> Self {
        ProfileStore {
            backend: Backend::Memory(Mutex::new(HashMap::new())),
            locks: Mutex::new(HashMap::new()),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        match &self.backend {
            Backend::Dir(d) => Some(d),
            Backend::Memory(_) => None,
        }
    }

    fn path(dir: &Path, user_id: &str) -> PathBuf {
        dir.join(format!("profile-{}.toml", hex::encode(user_id)))
    }

    fn lock(&self, user_id: &str) -> Arc<Mutex<()>> {
        self.locks.lock().unwrap().entry(user_id.to_string()).or_default().clone()
    }

    pub fn load(&self, user_id: &str) -> Result<Option<UserProfile>, ProfileError> {
        let (origin, text) = match &self.backend {
            Backend::Dir(dir) => {
                let path = Self::path(dir, user_id);
                match fs::read_to_string(&path) {
                    Ok(t) => (path.display().to_string(), t),
                    Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
                    Err(e) => return Err(e.into()),
                }
            }
            Backend::Memory(docs) => match docs.lock().unwrap().get(user_id) {
                Some(t) => (format!("memory:{user_id}"), t.clone()),
                None => return Ok(None),
            },
        };
        let profile = parse_profile(&text).map_err(|reason| ProfileError::Corrupt { path: origin, reason })?;
        Ok(Some(profile))
    }

    pub fn load_or_new(&self, user_id: &str) -> Result<UserProfile, ProfileError> {
        Ok(self.load(user_id)?.unwrap_or_else(|| UserProfile::new(user_id)))
    }

    pub fn save(&self, profile: &UserProfile) -> Result<(), ProfileError> {
        let lock = self.lock(&profile.user_id);
        let _guard = lock.lock().unwrap();
        self.write_document(profile)
    }

    /// Read-modify-write under the user's lock.
    pub fn update<F>(&self, user_id: &str, f: F) -> Result<UserProfile, ProfileError>
    where
        F: FnOnce(&mut UserProfile) -> Result<(), ProfileError>,
    {
        let lock = self.lock(user_id);
        let _guard = lock.lock().unwrap();
        let mut profile = self.load_or_new(user_id)?;
        f(&mut profile)?;
        self.write_document(&profile)?;
        Ok(profile)
    }

    fn write_document(&self, profile: &UserProfile) -> Result<(), ProfileError> {
        let text = profile_to_toml(profile);
        let dir = match &self.backend {
            Backend::Dir(dir) => dir,
            Backend::Memory(docs) => {
                docs.lock().unwrap().insert(profile.user_id.clone(), text);
                return Ok(());
            }
        };
        let path = Self::path(dir, &profile.user_id);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

pub fn profile_to_toml(profile: &UserProfile) -> String {
    toml::to_string(profile).expect("profile serializes")
}

pub fn parse_profile(text: &str) -> Result<UserProfile, String> {
    let mut p: UserProfile = toml::from_str(text).map_err(|e| e.to_string())?;
    for w in p.preferences.values_mut() {
        *w = clamp_weight(*w);
    }
    Ok(p)
}

/// Applies a form to the caller's own profile and persists it. The user is
/// taken from the session, so the token must be live.
pub fn create_or_update_profile(
    store: &ProfileStore,
    sessions: &SessionStore,
    token: &str,
    form: &[FormField],
) -> Result<UserProfile, ProfileError> {
    let session = sessions.validate(token)?;
    store.update(&session.user_id, |p| apply_form(p, form))
}
