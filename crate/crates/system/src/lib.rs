//! System-level checks live in `tests/acceptance.rs`.
