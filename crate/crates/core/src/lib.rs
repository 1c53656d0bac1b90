//! Semantic network resource description, validation and embedding.

pub mod graphstore;
pub mod vocab;
pub mod pathquery;
pub mod models;
pub mod embed;
pub mod rules;
pub mod actors;
pub mod cli;
