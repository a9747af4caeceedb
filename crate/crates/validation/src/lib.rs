//! Acceptance checks for the workspace. The checks are in `tests/acceptance.rs` and print
//! one PASS/FAIL line per criterion; run them with `cargo test -p caustica-validation`.
