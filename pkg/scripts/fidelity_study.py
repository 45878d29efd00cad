"""Probe-set fidelity of extraction across seeds for rule-generated and swing datasets.

Reproduces the numbers behind the fidelity acceptance checks: ELMs fitted to
labels from known rule lists, and the ELM fitted to the bundled swing data.
"""

import argparse

import numpy as np

from elmrules import elm, swinggen
from elmrules.dataset import zscore_fit_apply
from elmrules.extraction import SamplingConfig, extract
from elmrules.pipeline import PipelineConfig, fit_pipeline
from elmrules.synthetic import edge_rule_dataset, rule_dataset, step_dataset

CASES = {
    "step-2d": (lambda s: step_dataset(seed=s), 50),
    "edge-2d": (lambda s: edge_rule_dataset(n=5000, seed=s), 200),
    "edge-3d": (lambda s: edge_rule_dataset(n=5000, n_features=3, seed=s), 200),
    "rulelist-4d": (lambda s: rule_dataset(seed=s), 50),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=6)
    ap.add_argument("--cases", nargs="+", default=list(CASES), choices=list(CASES) + ["swing"])
    args = ap.parse_args()

    for name in args.cases:
        fids = []
        for s in range(1, args.seeds + 1):
            if name == "swing":
                machines, network, gen = swinggen.load_fixture()
                ds, _ = swinggen.generate_dataset(machines, network, swinggen.GenConfig(**gen), seed=7)
                fids.append(fit_pipeline(ds, PipelineConfig(), seed=s).extraction.fidelity)
                continue
            make, L = CASES[name]
            std, _ = zscore_fit_apply(make(s))
            model = elm.train(std.rows, std.labels, L=L, seed=s)
            fids.append(extract(model, std, SamplingConfig(seed=s)).fidelity)
        print(f"{name:<12} min {min(fids):.4f}  mean {np.mean(fids):.4f}  " + " ".join(f"{f:.4f}" for f in fids))


if __name__ == "__main__":
    main()
