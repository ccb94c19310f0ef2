pub mod catalog;
pub mod export;
pub mod lexicon;
pub mod store;
