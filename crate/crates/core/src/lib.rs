pub mod display;
pub mod dom;
pub mod engine;
pub mod flow;
mod fmt;
pub mod layout;
pub mod scheduler;
pub mod style;
pub mod tokenizer;

pub use fmt::fmt2;
