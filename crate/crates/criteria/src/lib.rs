//! Holds no code; the criteria live in `tests/acceptance.rs`. Run them with
//! `cargo test -p tsne-forensics-criteria`.
