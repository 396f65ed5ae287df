//! Long-horizon task synthesis.
//!
//! Four phases turn a knowledge graph and a document corpus into hard
//! multi-hop QA tasks: (1) long-tail entity sampling and subgraph-based seed
//! questions with multi-model consistency checking; (2) agentic multi-hop
//! fact introduction gated by a no-tool answerability check and a hop
//! threshold; (3) typed entity obfuscation refined by a multi-round
//! checklist; (4) multi-rollout and cross-model verification with recovery,
//! plus entity-level contamination checking and stratified category
//! balancing for benchmark curation. Every model dependency is a contract;
//! scripted implementations ship for deterministic desk-scale runs.

pub mod harden;
pub mod kg;
pub mod pipeline;
pub mod scripted;
pub mod seed;
pub mod task_io;
pub mod verify;

pub use harden::{
    checklist_iterate, expand_multihop, obfuscate, CandidateTask, ChecklistReport,
    ChecklistReview, ChecklistReviewer, DeepeningProposal, DetectedEntity, EntityClass,
    EntityDetector, ExpandLimits, Explorer, FactRecord, HardenError, ObfuscationContext,
    ObfuscationEvent, ObfuscationRuleSet, RewriteTransform, TaskStatus,
};
pub use kg::{
    build_graph, extract_subgraph, read_graph, sample_longtail, stratify, write_graph, Entity,
    FrequencyStrata, GraphError, KnowledgeGraph, Relation, Stratum, Subgraph, DEFAULT_NODE_CAP,
};
pub use pipeline::{run_scripted_pipeline, PipelineReport, ScriptedPipelineConfig, VerifiedTask};
pub use seed::{
    consistency_check, render_path, subgraph_to_qa, PathRendering, QaGenerator, SeedError,
    SeedQA, SeedVerifier, VerifierReply,
};
pub use verify::{
    check_contamination, cross_model_verify, import_annotations, multi_rollout_verify, recover,
    stratified_balance, AgentAttempt, BenchCategory, BenchmarkItem, CategoryDeficit,
    ContaminationHit, ExpertAnnotation, VerificationMode, VerificationRun, VerificationVerdict,
    VerifierAgent, VerifyError,
};
