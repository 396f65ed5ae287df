//! End-to-end scripted synthesis: Phase 1 → 4 over a graph and an offline
//! corpus, fully deterministic under a fixed seed.

use crate::harden::{
    checklist_iterate, expand_multihop, obfuscate, CandidateTask, ExpandLimits,
    ObfuscationContext,
};
use crate::kg::{extract_subgraph, sample_longtail, stratify, GraphError, KnowledgeGraph};
use crate::scripted::{
    default_obfuscation_rules, CorpusExplorer, DictionaryDetector, EntityResolutionJudge,
    GoldOracleAgent, GraphOracleVerifier, ScriptedMemoryAnswerer, ScriptedReviewer,
    TemplateQaGenerator,
};
use crate::seed::{consistency_check, subgraph_to_qa};
use crate::verify::{cross_model_verify, multi_rollout_verify, recover, VerificationVerdict, VerifierAgent};
use medsearch_core::{derive_seed, AliasTable};
use medsearch_env::OfflineEnvironment;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptedPipelineConfig {
    pub task_count: usize,
    pub seed: u64,
    pub quantiles: (f64, f64),
    pub depth_range: (usize, usize),
    /// Constraint riders the scripted no-tool answerer can absorb before its
    /// recall fails.
    pub memory_limit: u32,
    pub expand: ExpandLimits,
    pub max_regen: u32,
    pub min_rounds: u32,
    pub max_rounds: u32,
    pub rollout_n: usize,
    pub retry_budget: u32,
}

impl Default for ScriptedPipelineConfig {
    fn default() -> Self {
        Self {
            task_count: 3,
            seed: 0,
            quantiles: (0.25, 0.75),
            depth_range: (4, 6),
            memory_limit: 7,
            expand: ExpandLimits::default(),
            max_regen: 2,
            min_rounds: 5,
            max_rounds: 10,
            rollout_n: 3,
            retry_budget: 2,
        }
    }
}

/// A task that survived Phase 4, with both verdicts attached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifiedTask {
    pub task: CandidateTask,
    pub multi_rollout: VerificationVerdict,
    pub cross_model: VerificationVerdict,
}

/// Pipeline outcome: surviving tasks plus an account of every rejection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineReport {
    pub tasks: Vec<VerifiedTask>,
    pub attempts: usize,
    pub rejections: Vec<String>,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("pipeline produced {produced} of {wanted} tasks after {attempts} attempts")]
    InsufficientTasks {
        produced: usize,
        wanted: usize,
        attempts: usize,
    },
}

/// Run the four phases with the scripted model contracts. Identical inputs
/// and seed produce byte-identical reports.
pub fn run_scripted_pipeline(
    kg: &KnowledgeGraph,
    env: &OfflineEnvironment,
    config: &ScriptedPipelineConfig,
) -> Result<PipelineReport, PipelineError> {
    let strata = stratify(kg, config.quantiles)?;
    let aliases = AliasTable::new();
    let generator = TemplateQaGenerator;
    let verifier_a = GraphOracleVerifier::new(kg);
    let verifier_b = GraphOracleVerifier::new(kg);
    let answerer = ScriptedMemoryAnswerer::new(kg, config.memory_limit);
    let judge = EntityResolutionJudge {
        aliases: aliases.clone(),
    };
    let detector = DictionaryDetector::from_graph(kg);
    let rules = default_obfuscation_rules();
    let ctx = ObfuscationContext {
        rules: &rules,
        env,
        detector: &detector,
    };

    let mut sampling_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "root-sampling"));
    let mut tasks = Vec::new();
    let mut rejections = Vec::new();
    let max_attempts = config.task_count.saturating_mul(10).max(10);
    let mut attempts = 0;

    while tasks.len() < config.task_count && attempts < max_attempts {
        attempts += 1;
        let root = sample_longtail(&strata, &mut sampling_rng)?;
        let mut extract_rng =
            ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &format!("extract-{attempts}")));
        let sub = match extract_subgraph(kg, &root, config.depth_range, &mut extract_rng) {
            Ok(sub) => sub,
            Err(err) => {
                rejections.push(format!("attempt {attempts}: {err}"));
                continue;
            }
        };

        // Phase 1: seed question plus consistency check.
        let qa = match subgraph_to_qa(kg, &sub, &generator) {
            Ok(qa) => qa,
            Err(err) => {
                rejections.push(format!("attempt {attempts}: {err}"));
                continue;
            }
        };
        let qa = match consistency_check(
            kg,
            qa,
            &[&verifier_a, &verifier_b],
            config.max_regen,
            &generator,
            &aliases,
        ) {
            Ok(qa) => qa,
            Err(err) => {
                rejections.push(format!("attempt {attempts}: {err}"));
                continue;
            }
        };

        // Phase 2: multi-hop fact introduction under the answerability gate.
        let task_id = format!("task-{:03}", tasks.len());
        let mut explorer = CorpusExplorer::new(5);
        let task = match expand_multihop(
            &qa,
            &task_id,
            env,
            &mut explorer,
            &answerer,
            &judge,
            config.expand,
        ) {
            Ok(task) => task,
            Err(err) => {
                rejections.push(format!("attempt {attempts}: {err}"));
                continue;
            }
        };

        // Phase 3: obfuscation plus checklist refinement.
        let task = match obfuscate(&task, &ctx) {
            Ok(task) => task,
            Err(err) => {
                rejections.push(format!("attempt {attempts}: {err}"));
                continue;
            }
        };
        let mut reviewer = ScriptedReviewer::new(&detector);
        let task = match checklist_iterate(&task, &mut reviewer, &ctx, config.min_rounds, config.max_rounds)
        {
            Ok(task) => task,
            Err(err) => {
                rejections.push(format!("attempt {attempts}: {err}"));
                continue;
            }
        };

        // Phase 4: unanimous verification, with recovery for
        // infrastructure-failed runs.
        let mut rollout_agent = GoldOracleAgent::new(&task.answer);
        let mut multi = match multi_rollout_verify(&task, &mut rollout_agent, config.rollout_n, &aliases)
        {
            Ok(v) => v,
            Err(err) => {
                rejections.push(format!("attempt {attempts}: {err}"));
                continue;
            }
        };
        if multi.is_deferred() {
            let mut retry_agent = GoldOracleAgent::new(&task.answer);
            multi = recover(&multi, &task, &mut retry_agent, config.retry_budget, &aliases);
        }
        let mut model_a = GoldOracleAgent::new(&task.answer);
        let mut model_b = GoldOracleAgent::new(&task.answer);
        let mut models: Vec<&mut dyn VerifierAgent> = vec![&mut model_a, &mut model_b];
        let cross = match cross_model_verify(&task, &mut models, &aliases) {
            Ok(v) => v,
            Err(err) => {
                rejections.push(format!("attempt {attempts}: {err}"));
                continue;
            }
        };
        if !multi.passed || !cross.passed {
            rejections.push(format!(
                "attempt {attempts}: verification failed (multi {}, cross {})",
                multi.passed, cross.passed
            ));
            continue;
        }
        tasks.push(VerifiedTask {
            task,
            multi_rollout: multi,
            cross_model: cross,
        });
    }

    if tasks.len() < config.task_count {
        return Err(PipelineError::InsufficientTasks {
            produced: tasks.len(),
            wanted: config.task_count,
            attempts,
        });
    }
    Ok(PipelineReport {
        tasks,
        attempts,
        rejections,
    })
}
