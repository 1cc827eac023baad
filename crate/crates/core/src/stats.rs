//! Statistics (stub).
