"""The experiment harness: JSON config in, reproducible CSV out.

Everything here is also reachable from the command line:

    vecbandits run config.json
    vecbandits oracle trace.txt --p inf
    vecbandits record envspec.json --out trace.txt
    vecbandits verify-potentials --samples 10000
"""

import json
import tempfile
from pathlib import Path

from vecbandits import ExperimentConfig, run_experiment
from vecbandits.cli import main as cli_main

workdir = Path(tempfile.mkdtemp(prefix="vecbandits-demo-"))
print(f"working in {workdir}")

config = {
    "experiment": "demo-matrix",
    "problem": "olvc",
    "variants": ["adversarial", "doubling"],
    "p": "inf",
    "T": 1024,
    "seeds": [0, 1, 2],
    "environment": {"kind": "phased_halving", "d": 16},
    "out": str(workdir / "demo.csv"),
}
cfg_path = workdir / "demo.json"
cfg_path.write_text(json.dumps(config, indent=2))

report = run_experiment(ExperimentConfig.from_file(cfg_path))
print()
print("--- per-run rows ---")
print(report.to_csv())
print("--- aggregates ---")
for variant, agg in report.aggregates.items():
    print(f"{variant}: mean load {agg['mean_alg']:.1f}, mean OPT {agg['mean_opt']:.1f}, "
          f"mean ratio {agg.get('mean_ratio', float('nan')):.3f}, bounds ok = {agg['bound_ok']}")

print()
print("--- the same experiment through the CLI ---")
code = cli_main(["run", str(cfg_path)])
print(f"exit code: {code} (0 = all bound checks passed)")

print()
print("--- record an environment, then ask the oracle about it ---")
env_spec = {
    "kind": "stochastic",
    "T": 50,
    "p": 2,
    "seed": 3,
    "costs": [
        [{"dist": "bernoulli", "q": 0.8}, {"dist": "bernoulli", "q": 0.2}],
        [{"dist": "bernoulli", "q": 0.2}, {"dist": "bernoulli", "q": 0.8}],
    ],
}
spec_path = workdir / "env.json"
spec_path.write_text(json.dumps(env_spec))
trace_path = workdir / "recorded.trace"
cli_main(["record", str(spec_path), "--out", str(trace_path)])
cli_main(["oracle", str(trace_path), "--p", "2"])
