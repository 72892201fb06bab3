//! Pancyclicity of `H ∪ G` when `G` is a perfect matching and the maximum
//! matching of `H` may leave many vertices uncovered.
//!
//! With a near-perfect matching of `H` the absorbing construction runs in its
//! matching-augmented mode. Otherwise the vertex set is partitioned around a
//! maximum matching ([`partition`]), `M ∪ G` is rewired into one long cycle
//! ([`steps`]) and cycles of each length are cut from it ([`extract`]).

pub mod blossom;
pub mod extract;
pub mod partition;
pub mod steps;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use blossom::{max_matching, max_matching_with, Matching, MatchingError, MatchingOptions};
pub use extract::{bipartite_obstruction, MatchingCycle, Obstruction};
pub use partition::{check_partition_properties, default_beta, partition, Check, Part, Partition, PartitionError};
pub use steps::{run_six_steps, Pairing, SixStepOutcome, StepError, StepTrace};

use crate::absorb::{pancyclic_witness, AbsorbConfig, Failure, Witness};
use crate::ledger::{Ledger, Selection, Strictness};
use crate::perturb::PerturbedInstance;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Margin in the minimum-degree threshold.
    pub eps: f64,
    /// Sets the uncapped absorber count `⌈3/(ηα²)⌉`.
    pub eta: f64,
    /// Level threshold; `None` takes [`default_beta`].
    pub beta: Option<f64>,
    pub selection: Selection,
    pub strictness: Strictness,
    pub pairing: Pairing,
    /// Overrides the absorber count.
    pub absorbers: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            eps: 0.1,
            eta: 0.01,
            beta: None,
            selection: Selection::Random,
            strictness: Strictness::Experiment,
            pairing: Pairing::Random,
            absorbers: None,
        }
    }
}

/// Which construction produced the witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Fewer than `√n` vertices left uncovered by the maximum matching.
    MatchingAugmented,
    /// Partition and six rewiring steps.
    SixSteps,
}

/// Summary of a partition for reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionSummary {
    pub beta: f64,
    pub sizes: Vec<(Part, usize)>,
    pub stop: usize,
    pub checks: Vec<Check>,
}

impl PartitionSummary {
    pub fn of(p: &Partition, checks: Vec<Check>) -> Self {
        let sizes = [Part::A, Part::B1, Part::B2, Part::C1, Part::C2, Part::R].into_iter().map(|q| (q, p.size(q))).collect();
        PartitionSummary { beta: p.beta, sizes, stop: p.stop, checks }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchingRun {
    pub route: Route,
    /// Vertices left uncovered by the maximum matching.
    pub deficit: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<StepTrace>,
    /// Removed vertices that could be absorbed back one at a time.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extra_absorbable: Option<usize>,
    pub witness: Witness,
}

/// Cycles of every length for `H ∪ G` with `G` a perfect matching.
pub fn matching_pancyclic_witness<R: Rng + ?Sized>(
    inst: &PerturbedInstance,
    cfg: &PipelineConfig,
    rng: &mut R,
) -> MatchingRun {
    let n = inst.n();
    let m = max_matching(inst.h());
    let deficit = n - m.covered();
    let mut run = MatchingRun {
        route: Route::SixSteps,
        deficit,
        partition: None,
        steps: None,
        extra_absorbable: None,
        witness: Witness { n, ledger: Ledger::new(cfg.strictness), ..Default::default() },
    };
    if inst.d() != 1 {
        run.witness.fail_all("precondition", format!("G must be a perfect matching, got d = {}", inst.d()));
        return run;
    }
    if (deficit as f64) < (n as f64).sqrt() {
        run.route = Route::MatchingAugmented;
        let acfg = AbsorbConfig { selection: cfg.selection, strictness: cfg.strictness, absorbers: cfg.absorbers };
        run.witness = pancyclic_witness(inst, Some(&m.edges()), &acfg, rng);
        return run;
    }
    let alpha = inst.alpha();
    let mut ledger = Ledger::new(cfg.strictness);
    let margin = (1.0 + cfg.eps) * (2f64.sqrt() - 1.0);
    if let Err(e) = ledger.check("threshold margin", margin, alpha) {
        run.witness.ledger = ledger;
        run.witness.fail_all("precondition", e.to_string());
        return run;
    }
    let beta = cfg.beta.unwrap_or_else(|| default_beta(n, alpha));
    let p = match partition(inst.h(), &m, alpha, beta) {
        Ok(p) => p,
        Err(e) => {
            run.witness.ledger = ledger;
            run.witness.fail_all("partition", e.to_string());
            return run;
        }
    };
    let checks = check_partition_properties(inst.h(), &m, &p);
    for c in checks.iter().filter(|c| !c.ok) {
        // recorded as a zero-tolerance bound so experiment mode keeps going
        if let Err(e) = ledger.check(&format!("partition {}", c.name), 1.0, 0.0) {
            run.witness.ledger = ledger;
            run.witness.fail_all("partition", format!("{e}: {}", c.detail));
            return run;
        }
    }
    run.partition = Some(PartitionSummary::of(&p, checks));
    let (out, trace) = run_six_steps(inst, &p, &m, cfg, rng);
    ledger.entries.extend(trace.ledger.entries.iter().cloned());
    run.witness.absorbers = trace.absorbers;
    run.steps = Some(trace);
    run.witness.ledger = ledger;
    let out = match out {
        Ok(o) => o,
        Err(e) => {
            let stage = e.step().map_or("steps".to_string(), |s| format!("step {s}"));
            run.witness.fail_all(&stage, e.to_string());
            return run;
        }
    };
    let mc = MatchingCycle::new(inst, out);
    run.extra_absorbable = Some(mc.extra_len());
    for k in 3..=n {
        match mc.extract(inst, k) {
            Ok(c) => run.witness.offer(inst, k, c),
            Err(e) => run.witness.failures.push(Failure { k, stage: "extract".into(), reason: e.to_string() }),
        }
    }
    run
}
