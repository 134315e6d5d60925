//! Acceptance gate for `endor-core`; see `tests/acceptance.rs`.

#[path = "../../core/tests/common/mod.rs"]
pub mod strategies;
