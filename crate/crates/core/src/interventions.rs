//! Interventional metrics (stub).
