//! Success and obstruction rates across alpha for the unbalanced bipartite
//! family with a perfect matching, written as CSV to stdout.

use perturbed_pancyclic::cli::{cmd_sweep, write_sweep_csv, Command, ExperimentConfig};
use perturbed_pancyclic::ledger::Strictness;

fn main() {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let cfg = ExperimentConfig {
        command: Command::Sweep,
        n: 1000,
        d: 1,
        alpha: 0.45,
        eps: 0.1,
        eta: 0.01,
        family: "unbalanced-bipartite".into(),
        trials,
        seed: 11,
        strictness: Strictness::Experiment,
        out: None,
        alpha_grid: Some((0.30, 0.48, 0.02)),
        r_max: 10,
        input: None,
        report: None,
    };
    let rows = cmd_sweep(&cfg).unwrap();
    write_sweep_csv(std::io::stdout().lock(), &rows).unwrap();
}
