"""Command-line front end: ``elmrules {gen,train,extract,eval,sweep,pipeline}``.

Every subcommand reads an optional JSON config (see ``--help`` for the keys
and defaults), derives its module seeds from one global ``--seed`` and
writes its artifacts into a fresh run directory that only appears once all
files are complete.

Seed derivation: the subcommand's working seed is
``derive_seed(seed, "<subcommand>")`` (SeedSequence over the seed and the
CRC32 of the tag). ``pipeline`` uses the tags of the stages it runs, so
``pipeline --seed 7`` produces the same dataset as ``gen --seed 7``.

Exit codes: 0 success, 2 configuration error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import os
import shutil
import sys
import tempfile
import time
from dataclasses import asdict, fields, is_dataclass
from pathlib import Path

import numpy as np

from elmrules import __version__, elm, evaluation, swinggen
from elmrules.dataset import BadFoldSpec, Dataset, Standardizer, load_csv, write_csv
from elmrules.extraction import SamplingConfig, extract
from elmrules.miner import MinerConfig
from elmrules.pipeline import ElmConfig, PipelineConfig, fit_elm, model_inputs
from elmrules.seeding import derive_seed

log = logging.getLogger("elmrules")

COMMANDS = ("gen", "train", "extract", "eval", "sweep", "pipeline")


class ConfigError(ValueError):
    pass


# ---- schema -------------------------------------------------------------

# nested fields driven by the global seed or by per-scenario draws
_HIDDEN = {"sampling": {"seed"}, "miner": {"seed"}, "scenario": {"seed", "tcl", "load_scale"}}


def _dataclass_defaults(cls, hidden=frozenset()) -> dict:
    out = {}
    for f in fields(cls):
        if f.name in hidden:
            continue
        val = getattr(cls(), f.name)
        if is_dataclass(val):
            val = _dataclass_defaults(type(val), _HIDDEN.get(f.name, set()))
        elif isinstance(val, tuple):
            val = list(val)
        out[f.name] = val
    return out


def default_config() -> dict:
    gen = _dataclass_defaults(swinggen.GenConfig)
    return {
        "seed": 0,
        "description": "",
        "fixture": None,
        "machines": None,
        "networks": None,
        "data": None,
        "model": None,
        "run_root": "runs",
        "jobs": 1,
        "k": 5,
        "method": "elm-rules",
        "positive_class": -1,
        "generator": gen,
        "elm": _dataclass_defaults(ElmConfig),
        "sampling": _dataclass_defaults(SamplingConfig, _HIDDEN["sampling"]),
        "miner": _dataclass_defaults(MinerConfig, _HIDDEN["miner"]),
        "sweep": {"rho_grid": [0.55, 0.65, 0.75, 0.85, 0.95], "ants_grid": [50, 100, 200, 400]},
        "external": {},
    }


# top-level keys each subcommand reads; other known keys are accepted and ignored
USES = {
    "gen": ("seed", "description", "fixture", "machines", "networks", "generator", "run_root"),
    "train": ("seed", "data", "elm", "run_root"),
    "extract": ("seed", "data", "model", "sampling", "miner", "positive_class", "run_root"),
    "eval": ("seed", "data", "elm", "sampling", "miner", "method", "positive_class", "k", "jobs", "external", "run_root"),
    "sweep": ("seed", "data", "elm", "sampling", "miner", "method", "positive_class", "k", "jobs", "sweep", "run_root"),
    "pipeline": ("seed", "fixture", "machines", "networks", "data", "generator", "elm", "sampling", "miner",
                 "method", "positive_class", "k", "jobs", "external", "run_root"),
}
# free-form values (no type check against the default)
_FREE = {"machines", "networks", "external", "fixture", "data", "model", "n_examples", "probe_size"}


def _check(value, default, path: str):
    key = path.rsplit(".", 1)[-1]
    if key in _FREE or (default is None and key not in _FREE):
        return value
    if isinstance(default, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected an object")
        out = copy.deepcopy(default)
        for k, v in value.items():
            if k.startswith("_"):
                continue
            if k not in default:
                raise ConfigError(f"unknown config key {path + '.' if path else ''}{k}")
            out[k] = _check(v, default[k], f"{path}.{k}" if path else k)
        return out
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false")
    elif isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer")
    elif isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number")
        value = float(value)
    elif isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string")
    elif isinstance(default, list):
        if not isinstance(value, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
            raise ConfigError(f"{path}: expected a list of numbers")
        if path.startswith("generator") and len(value) != len(default):
            raise ConfigError(f"{path}: expected {len(default)} numbers")
    return value


def resolve_config(raw: dict) -> dict:
    """Merge ``raw`` over the defaults, rejecting unknown keys and bad types."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    cfg = _check(raw, default_config(), "")
    for name in ("n_examples", "probe_size"):
        v = cfg["sampling"].get(name)
        if v is not None and (isinstance(v, bool) or not isinstance(v, int)):
            raise ConfigError(f"sampling.{name}: expected an integer or null")
    if not isinstance(cfg["external"], dict) or not all(isinstance(v, str) for v in cfg["external"].values()):
        raise ConfigError("external: expected an object of name -> CSV path")
    if cfg["k"] < 2:
        raise BadFoldSpec(f"k must be >= 2, got {cfg['k']}")
    if cfg["jobs"] < 1:
        raise ConfigError("jobs must be >= 1")
    # build the typed configs now so value errors surface before any work
    try:
        pipeline_config(cfg)
        gen_config(cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def pipeline_config(cfg: dict) -> PipelineConfig:
    return PipelineConfig(elm=ElmConfig(**cfg["elm"]), sampling=SamplingConfig(**cfg["sampling"]),
                          miner=MinerConfig(**cfg["miner"]), method=cfg["method"],
                          positive_class=cfg["positive_class"])


def gen_config(cfg: dict) -> swinggen.GenConfig:
    return swinggen.GenConfig(**cfg["generator"])


def _flatten(d: dict, prefix: str = "") -> list[tuple[str, object]]:
    out = []
    for k, v in d.items():
        if isinstance(v, dict) and v:
            out += _flatten(v, f"{prefix}{k}.")
        else:
            out.append((prefix + k, v))
    return out


def keys_help(command: str) -> str:
    defaults = default_config()
    lines = ["config keys (JSON; dotted names are nested objects) and defaults:"]
    for top in USES[command]:
        val = defaults[top]
        items = _flatten({top: val}) if isinstance(val, dict) and val else [(top, val)]
        lines += [f"  {k} = {json.dumps(v)}" for k, v in items]
    lines.append("--seed/--jobs/--data/--model/--k/--out on the command line override the config.")
    return "\n".join(lines)


# ---- run directories ----------------------------------------------------

class RunDir:
    """Stage files in a hidden directory; rename into place on success."""

    def __init__(self, root, command: str, seed: int):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        stamp = time.strftime("%Y%m%dT%H%M%SZ", time.gmtime())
        self.name = f"{command}-{stamp}-seed{seed}"
        self.stage = Path(tempfile.mkdtemp(prefix=f".{self.name}.", dir=self.root))
        self.final: Path | None = None

    def path(self, name: str) -> Path:
        return self.stage / name

    def write_text(self, name: str, text: str) -> Path:
        p = self.path(name)
        p.write_text(text, encoding="utf-8")
        return p

    def write_json(self, name: str, obj) -> Path:
        return self.write_text(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def commit(self) -> Path:
        target = self.root / self.name
        n = 1
        while target.exists():
            target = self.root / f"{self.name}-{n}"
            n += 1
        os.replace(self.stage, target)
        self.final = target
        return target

    def abort(self) -> None:
        shutil.rmtree(self.stage, ignore_errors=True)


def _atomic_copy(src: Path, dst) -> None:
    dst = Path(dst)
    dst.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{dst.name}.", dir=dst.parent)
    os.close(fd)
    try:
        shutil.copyfile(src, tmp)
        os.replace(tmp, dst)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


# ---- stages -------------------------------------------------------------

def _fixture(cfg: dict):
    if cfg["machines"] is not None or cfg["networks"] is not None:
        return swinggen.parse_fixture({"machines": cfg["machines"], "networks": cfg["networks"]})[:2]
    return swinggen.load_fixture(cfg["fixture"])[:2]


def _gen(cfg: dict, run: RunDir) -> tuple[Dataset, dict]:
    machines, network = _fixture(cfg)
    seed = derive_seed(cfg["seed"], "gen")
    log.info("simulating %d scenarios", cfg["generator"]["n_samples"])
    ds, info = swinggen.generate_dataset(machines, network, gen_config(cfg), seed)
    write_csv(ds, run.path("data.csv"))
    run.write_json("gen_info.json", info)
    return ds, info


def _train(cfg: dict, ds: Dataset, run: RunDir) -> elm.ElmModel:
    model, std, _ = fit_elm(ds, ElmConfig(**cfg["elm"]), derive_seed(cfg["seed"], "train"))
    model.save(run.path("model.json"))
    acc = float(np.mean(elm.predict(model, std.rows) == std.labels))
    run.write_json("train_metrics.json", {"train_acc": acc, "L": model.L, "n_inputs": model.n,
                                          "dropped": [c for i, c in enumerate(ds.names) if i not in model.preprocessing["kept"]]})
    log.info("ELM trained: L=%d, training accuracy %.4f", model.L, acc)
    return model


def _extract(cfg: dict, model: elm.ElmModel, ds: Dataset, run: RunDir):
    std = model_inputs(model, ds)
    pcfg = pipeline_config(cfg).seeded(derive_seed(cfg["seed"], "extract"))
    log.info("extracting rules (%d ants)", pcfg.miner.n_ants)
    result = extract(model, std, pcfg.sampling, pcfg.miner, pcfg.positive_class)
    pre = model.preprocessing or {}
    units = result.discretizer.to_units(Standardizer.from_dict(pre)) if "means" in pre else result.discretizer
    run.write_text("rules.txt", result.rules.render(std.names, units))
    run.write_json("rules.json", {"features": std.names, "rule_list": result.rules.to_dict(),
                                  "bin_edges_model_space": result.discretizer.to_dict()["bin_edges"],
                                  "bin_edges_units": units.to_dict()["bin_edges"]})
    run.write_json("result.json", result.to_dict())
    log.info("fidelity %.4f with %d rules", result.fidelity, result.n_rules)
    return result


def _eval(cfg: dict, ds: Dataset, run: RunDir) -> evaluation.CVReport:
    pcfg = pipeline_config(cfg)
    seed = derive_seed(cfg["seed"], "eval")
    log.info("%d-fold cross-validation", cfg["k"])
    report = evaluation.cross_validate(ds, pcfg, cfg["k"], seed, jobs=cfg["jobs"])
    run.write_text("metrics.json", evaluation.metrics_json(report))
    run.write_text("roc.csv", evaluation.roc_csv(report.roc))
    rows = evaluation.comparison_table(report.methods, cfg["external"], pcfg.positive_class)
    run.write_text("table.txt", evaluation.render_text(rows, pcfg.positive_class))
    run.write_text("table.csv", evaluation.render_csv(rows))
    return report


def _sweep(cfg: dict, ds: Dataset, run: RunDir):
    seed = derive_seed(cfg["seed"], "sweep")
    cells = evaluation.parameter_sweep(ds, cfg["sweep"]["rho_grid"], cfg["sweep"]["ants_grid"],
                                       pipeline_config(cfg), cfg["k"], seed, jobs=cfg["jobs"])
    run.write_text("surface.csv", evaluation.surface_csv(cells))
    return cells


def _need(cfg: dict, key: str) -> Path:
    if not cfg[key]:
        raise ConfigError(f"{key} is required (config key or --{key})")
    p = Path(cfg[key])
    if not p.is_file():
        raise ConfigError(f"{key} file not found: {p}")
    return p


def run_command(command: str, cfg: dict, out=None) -> Path:
    """Execute one subcommand with a resolved config; returns the run directory."""
    if command in ("train", "extract", "eval", "sweep"):
        _need(cfg, "data")
    if command == "extract":
        _need(cfg, "model")
    if cfg["sweep"]["rho_grid"] == [] or cfg["sweep"]["ants_grid"] == []:
        raise ConfigError("sweep grids must be non-empty")
    for name, path in cfg["external"].items():
        if not Path(path).is_file():
            raise ConfigError(f"external baseline {name!r}: file not found: {path}")

    run = RunDir(cfg["run_root"], command, cfg["seed"])
    try:
        resolved = {k: cfg[k] for k in USES[command]}
        resolved["_derived_seeds"] = {t: derive_seed(cfg["seed"], t) for t in ("gen", "train", "extract", "eval", "sweep")}
        run.write_json("config.resolved.json", resolved)
        if command == "gen":
            ds, info = _gen(cfg, run)
            summary = (f"generated {info['n_samples']} samples ({info['n_stable']} stable, "
                       f"{info['n_unstable']} unstable, {info['rejected']} redrawn)")
        elif command == "pipeline":
            if cfg["data"]:
                ds = load_csv(_need(cfg, "data"))
            else:
                ds, _ = _gen(cfg, run)
            model = _train(cfg, ds, run)
            result = _extract(cfg, model, ds, run)
            report = _eval(cfg, ds, run)
            rows = report.table()
            summary = evaluation.render_text(rows, report.positive_class).rstrip("\n") + f"\nfidelity (probe set): {result.fidelity:.4f}"
        else:
            ds = load_csv(cfg["data"])
            if command == "train":
                model = _train(cfg, ds, run)
                summary = f"trained ELM with L={model.L} on {ds.n_samples} samples"
            elif command == "extract":
                result = _extract(cfg, elm.ElmModel.load(cfg["model"]), ds, run)
                summary = f"extracted {result.n_rules} rules, fidelity {result.fidelity:.4f}"
            elif command == "eval":
                report = _eval(cfg, ds, run)
                summary = evaluation.render_text(report.table(), report.positive_class).rstrip("\n")
            else:
                cells = _sweep(cfg, ds, run)
                summary = "\n".join(f"rho={r:g} n_ants={a} acc={acc:.4f}" for r, a, acc in cells)
        final = run.commit()
    except BaseException:
        run.abort()
        raise
    if out is not None:
        artifact = {"gen": "data.csv", "train": "model.json", "extract": "rules.txt",
                    "eval": "metrics.json", "sweep": "surface.csv", "pipeline": "rules.txt"}[command]
        _atomic_copy(final / artifact, out)
    print(summary)
    log.info("artifacts in %s", final)
    return final


# ---- argument parsing ---------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elmrules", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "gen": "simulate swing-equation scenarios into a dataset CSV",
        "train": "train an ELM on a dataset CSV",
        "extract": "distill a trained ELM into a rule list",
        "eval": "stratified k-fold evaluation",
        "sweep": "CV accuracy over a (rho, n_ants) grid",
        "pipeline": "gen (unless data is given), train, extract and eval in one run",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name], description=helps[name], epilog=keys_help(name),
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", help="JSON config file (a fixture file also works for gen/pipeline)")
        p.add_argument("--seed", type=int, help="global seed (default from config, else 0)")
        p.add_argument("--jobs", type=int, help="parallel workers for folds and sweep cells")
        p.add_argument("--run-root", help="parent directory for run directories (default runs)")
        p.add_argument("--out", help="also copy the main artifact to this path")
        p.add_argument("-q", "--quiet", action="store_true", help="only warnings on stderr")
        if name != "gen":
            p.add_argument("--data", help="dataset CSV (last column 'label')")
        if name == "extract":
            p.add_argument("--model", help="model.json from train")
        if name in ("eval", "sweep", "pipeline"):
            p.add_argument("--k", type=int, help="number of folds")
    return parser


def _load_config(path) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if "generator" in raw and isinstance(raw["generator"], dict):
        raw = dict(raw)
        raw["generator"] = dict(raw["generator"])
    return raw


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, stream=sys.stderr,
                        format="%(message)s", force=True)
    try:
        raw = _load_config(args.config)
        for key in ("seed", "jobs", "run_root", "data", "model", "k"):
            val = getattr(args, key, None)
            if val is not None:
                raw[key] = val
        cfg = resolve_config(raw)
    except (ConfigError, BadFoldSpec) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    try:
        run_command(args.command, cfg, args.out)
    except (ConfigError, BadFoldSpec) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure: report the module error by name
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
