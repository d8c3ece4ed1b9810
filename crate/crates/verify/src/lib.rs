//! Holds no code: the acceptance harness lives in `tests/acceptance.rs`.
//! It is a separate package so that it runs after every other suite in a
//! workspace test run.
