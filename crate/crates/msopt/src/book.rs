//! Compiles every fenced Rust block of the guide as a doctest, so the book
//! under `book/` cannot drift from the crate API. Chapters are attached as
//! rustdoc-visible modules; `cargo test --doc` runs them.
