"""Driving an experiment from Python; the same runs are available as `fremlinlab run`."""

import sys

from fremlinlab import ExperimentConfig, run_experiment
from fremlinlab.labcli import format_table

cfg = ExperimentConfig(
    experiment="lp-diagonal",
    spaces=[{"family": "lp", "p": 4}, {"family": "lp", "p": 1.5}],
    dims=[2, 3],
    trials=3,
    seed=1,
)
report = run_experiment(cfg)
print(report.summary)
sys.stdout.write(format_table(report, "csv"))
sys.exit(0 if report.passed else 1)
