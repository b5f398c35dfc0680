//! CLI library (placeholder).
