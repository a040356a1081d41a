//! Multi-agent medical information search: an agent platform with a
//! directory service and logical mobility, a synthetic corpus of medical
//! sites, a query-modification pipeline, personalization, a security gate,
//! static and mobile collection topologies, and an evaluation harness.

pub mod bench;
pub mod corpus;
pub mod personalization;
pub mod platform;
pub mod query;
pub mod security;
pub mod taxonomy;
pub mod topology;
pub mod vocab;

pub use taxonomy::Category;
