pub mod corpus;
pub mod exec;
pub mod oracle;
pub mod query;
pub mod storage;
pub mod trie;
