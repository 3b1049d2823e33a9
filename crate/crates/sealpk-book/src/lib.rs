//! Runnable companion to the guide under `book/`.
//!
//! mdbook renders the chapters but does not execute them against this
//! workspace's crates, so each chapter is also included here as module
//! documentation: `cargo test -p sealpk-book --doc` compiles and runs
//! every Rust snippet the book shows. A failing doc-test names the
//! chapter module it came from.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/protection-keys.md")]
pub mod protection_keys {}

#[doc = include_str!("../../../book/src/kernel.md")]
pub mod kernel {}

#[doc = include_str!("../../../book/src/sealing.md")]
pub mod sealing {}

#[doc = include_str!("../../../book/src/machine.md")]
pub mod machine {}

#[doc = include_str!("../../../book/src/shadow-stack.md")]
pub mod shadow_stack {}
