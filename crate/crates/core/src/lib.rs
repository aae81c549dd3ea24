//! Relational, document and property-graph storage engines over one
//! stock / news / OHLC data model, plus the five-query ESG workload that
//! runs against all of them.

pub mod engine;
pub mod ingest;
pub mod model;
pub mod text;
pub mod workload;
