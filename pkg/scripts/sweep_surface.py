"""CV accuracy over a (rho, n_ants) grid, written as rho,n_ants,acc CSV.

Defaults to the planted synthetic benchmark with plain mining, which runs in
seconds; ``--swing`` switches to a generated swing dataset and ELM-rules.
"""

import argparse
from pathlib import Path

from elmrules import evaluation, swinggen
from elmrules.extraction import SamplingConfig
from elmrules.pipeline import PipelineConfig
from elmrules.synthetic import planted_continuous


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rho", type=float, nargs="+", default=[0.55, 0.65, 0.75, 0.85, 0.95])
    ap.add_argument("--ants", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--swing", action="store_true")
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("surface.csv"))
    args = ap.parse_args()

    if args.swing:
        machines, network, gen = swinggen.load_fixture()
        ds, _ = swinggen.generate_dataset(machines, network, swinggen.GenConfig(**{**gen, "n_samples": args.samples}), args.seed)
        cfg = PipelineConfig()
    else:
        ds = planted_continuous(n=args.samples, seed=args.seed)
        cfg = PipelineConfig(method="rules", sampling=SamplingConfig(bins_per_feature=3))
    cells = evaluation.parameter_sweep(ds, args.rho, args.ants, cfg, args.k, args.seed, args.jobs)
    args.out.write_text(evaluation.surface_csv(cells))
    for rho, ants, acc in cells:
        print(f"rho={rho:<5g} ants={ants:<4d} acc={acc:.4f}")


if __name__ == "__main__":
    main()
