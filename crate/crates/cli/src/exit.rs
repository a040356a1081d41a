//! Process exit codes. Every failure the CLI reports maps to exactly one.
//!
//! | code | meaning                                              |
//! |------|------------------------------------------------------|
//! | 0    | success                                              |
//! | 1    | internal error                                       |
//! | 2    | bad configuration or usage                           |
//! | 3    | empty query after stopword removal                   |
//! | 4    | authentication failed                                |
//! | 5    | authentication required (missing or expired session)|
//! | 6    | outbound request failed sanitization                 |
//! | 7    | network, fetch, parse or server failure              |
//! | 8    | invalid input (profile field, suite or judgments)    |

use std::fmt;

use medagent::bench::SuiteError;
use medagent::personalization::ProfileError;
use medagent::query::QueryError;
use medagent::security::SecurityError;
use medagent::topology::SearchError;

pub const OK: u8 = 0;
pub const INTERNAL: u8 = 1;
pub const CONFIG: u8 = 2;
pub const EMPTY_QUERY: u8 = 3;
pub const AUTH_FAILED: u8 = 4;
pub const AUTH_REQUIRED: u8 = 5;
pub const SANITIZATION: u8 = 6;
pub const TRANSPORT: u8 = 7;
pub const INVALID_INPUT: u8 = 8;

/// `(code, kind)`; the kind is the error name carried in API responses.
pub const TABLE: &[(u8, &str)] = &[
    (OK, "Ok"),
    (INTERNAL, "Internal"),
    (CONFIG, "Config"),
    (EMPTY_QUERY, "EmptyQuery"),
    (AUTH_FAILED, "AuthFailed"),
    (AUTH_REQUIRED, "AuthRequired"),
    (SANITIZATION, "SanitizationFailure"),
    (TRANSPORT, "Transport"),
    (INVALID_INPUT, "InvalidInput"),
];

pub fn kind_of(code: u8) -> &'static str {
    TABLE.iter().find(|(c, _)| *c == code).map_or("Internal", |(_, k)| k)
}

pub fn code_of(kind: &str) -> u8 {
    TABLE.iter().find(|(_, k)| *k == kind).map_or(INTERNAL, |(c, _)| *c)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(CONFIG, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(INTERNAL, message)
    }

    pub fn transport(message: impl Into<String>) -> Self {
        Self::new(TRANSPORT, message)
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new(INVALID_INPUT, message)
    }

    pub fn kind(&self) -> &'static str {
        kind_of(self.code)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<SecurityError> for CliError {
    fn from(e: SecurityError) -> Self {
        let code = match e {
            SecurityError::AuthFailed => AUTH_FAILED,
            SecurityError::AuthRequired => AUTH_REQUIRED,
            SecurityError::SanitizationFailure => SANITIZATION,
            SecurityError::InvalidSecret(_) => CONFIG,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        match e {
            ProfileError::Auth(s) => s.into(),
            ProfileError::InvalidField { .. } => CliError::invalid(e.to_string()),
            ProfileError::Io(_) | ProfileError::Corrupt { .. } => CliError::internal(e.to_string()),
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::Query(QueryError::EmptyQuery) => CliError::new(EMPTY_QUERY, QueryError::EmptyQuery.to_string()),
            SearchError::Security(s) => s.into(),
            SearchError::Profile(p) => p.into(),
            SearchError::Topology(t) => CliError::transport(t.to_string()),
        }
    }
}

impl From<SuiteError> for CliError {
    fn from(e: SuiteError) -> Self {
        match e {
            SuiteError::Search { source, query_id } => {
                let inner = CliError::from(source);
                CliError::new(inner.code, format!("query {query_id}: {}", inner.message))
            }
            other => CliError::invalid(other.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_a_bijection() {
        for (code, kind) in TABLE {
            assert_eq!(code_of(kind), *code);
            assert_eq!(kind_of(*code), *kind);
        }
        let mut codes: Vec<u8> = TABLE.iter().map(|(c, _)| *c).collect();
        codes.dedup();
        assert_eq!(codes.len(), TABLE.len());
    }

    #[test]
    fn core_errors_map_to_distinct_codes() {
        let codes = [
            CliError::from(SearchError::Query(QueryError::EmptyQuery)).code,
            CliError::from(SecurityError::AuthFailed).code,
            CliError::from(SecurityError::AuthRequired).code,
            CliError::from(SecurityError::SanitizationFailure).code,
        ];
        assert_eq!(codes, [EMPTY_QUERY, AUTH_FAILED, AUTH_REQUIRED, SANITIZATION]);
    }
}
