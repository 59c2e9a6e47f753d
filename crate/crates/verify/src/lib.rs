//! Independent oracles, built-in fixtures and the acceptance criteria.
//!
//! [`criteria`] evaluates each acceptance criterion and returns a report with
//! one pass/fail line per criterion; both the `acceptance` test target and the
//! `verify` command print those lines.

pub mod criteria;
pub mod fixtures;
pub mod oracle;
