//! Tool environment for deep-search agents.
//!
//! Four tools — search, visit, medical professional search, and a no-tool
//! answerability check — implemented over two interchangeable backends: a
//! deterministic offline lexical index for desk-scale runs and tests, and
//! online HTTP adapters that normalize arbitrary backends to the same result
//! shapes. Everything upstream is backend-agnostic.

pub mod document;
pub mod error;
pub mod http;
pub mod index;
pub mod stub;
pub mod tools;

pub use document::{read_corpus, write_corpus, Document, SourceTag};
pub use error::{ToolError, ToolErrorKind};
pub use http::{AdapterConfig, HttpAdapter, OnlineEnvironment};
pub use index::{build_index, MedicalSearchWeights, SearchIndex, SearchResult};
pub use stub::{StubRoute, StubServer};
pub use tools::{
    llm_check, AnswerModel, CheckJudge, CheckRecord, CheckVerdict, HeadTruncation,
    IdentitySummarizer, ModelAnswer, OfflineEnvironment, Summarizer, ToolEnvironment,
};
