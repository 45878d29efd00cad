"""Cross-validated comparison of ELM-rules, the ELM itself and plain Ant-Miner on a swing dataset.

    python scripts/compare_methods.py --samples 2000 --seed 7 --k 5
"""

import argparse
import logging
import time

from elmrules import evaluation, swinggen
from elmrules.pipeline import PipelineConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--feature-set", default="table1", choices=sorted(swinggen.FEATURE_SETS))
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)

    machines, network, gen = swinggen.load_fixture()
    cfg = swinggen.GenConfig(**{**gen, "n_samples": args.samples, "feature_set": args.feature_set})
    ds, info = swinggen.generate_dataset(machines, network, cfg, seed=args.seed)
    print(f"{ds.n_samples} samples, {info['n_unstable']} unstable, features {info['features']}")

    methods = {}
    for method in ("elm-rules", "rules"):
        t = time.perf_counter()
        rep = evaluation.cross_validate(ds, PipelineConfig(method=method), args.k, args.seed, args.jobs)
        methods.update(rep.methods)
        print(f"{method}: {time.perf_counter() - t:.1f}s")
        if method == "elm-rules":
            fids = [f["fidelity_probe"] for f in rep.folds]
            print("probe fidelity per fold:", " ".join(f"{x:.3f}" for x in fids))
    print(evaluation.render_text(evaluation.comparison_table(methods)))


if __name__ == "__main__":
    main()
