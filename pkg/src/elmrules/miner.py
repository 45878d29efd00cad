"""Ant-Miner sequential covering with the IAM refinements.

Classic Ant-Miner uses an entropy heuristic and a fixed evaporation rate.
IAM swaps in a coverage-density heuristic and shrinks the pheromone
retention factor ``1 - rho`` geometrically towards a floor.  Both variants
are selected through :class:`MinerConfig`.

Internally every term's coverage of the current training set is a Python
int used as a bitset, so coverage of a conjunction is a chain of ``&`` and
counting is ``int.bit_count``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from elmrules.dataset import DiscretizedDataset, Discretizer
from elmrules.metrics import ConfusionCounts
from elmrules.seeding import rng_for


class MinerError(ValueError):
    pass


class NoEligibleTerm(MinerError):
    """No eligible term has a positive pheromone x heuristic product."""


@dataclass(frozen=True, order=True)
class Term:
    attribute: int
    value: int


@dataclass(frozen=True)
class TermSpace:
    b: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(int(x) for x in self.b))
        if any(x < 1 for x in self.b):
            raise MinerError("every attribute needs at least one value")

    @property
    def a(self) -> int:
        return len(self.b)

    @property
    def total_terms(self) -> int:
        return sum(self.b)

    @property
    def offsets(self) -> list[int]:
        return [0, *np.cumsum(self.b)[:-1].tolist()]

    def index(self, term: Term) -> int:
        if not (0 <= term.attribute < self.a and 0 <= term.value < self.b[term.attribute]):
            raise MinerError(f"{term} outside the term space")
        return self.offsets[term.attribute] + term.value

    def term(self, idx: int) -> Term:
        attr = int(np.searchsorted(np.cumsum(self.b), idx, side="right"))
        return Term(attr, idx - self.offsets[attr])

    def attribute_of(self) -> np.ndarray:
        return np.repeat(np.arange(self.a), self.b)


@dataclass(frozen=True)
class PheromoneTable:
    tau: np.ndarray
    t: int = 0

    def __post_init__(self):
        tau = np.array(self.tau, dtype=float)
        tau.setflags(write=False)
        object.__setattr__(self, "tau", tau)


@dataclass(frozen=True)
class EvaporationPolicy:
    mode: str = "adaptive"  # "fixed" | "adaptive"
    rho: float = 0.85
    rho_min: float = 0.05

    def __post_init__(self):
        if self.mode not in ("fixed", "adaptive"):
            raise MinerError(f"unknown evaporation mode {self.mode!r}")
        if not 0.0 < self.rho < 1.0 or not 0.0 < self.rho_min < 1.0:
            raise MinerError("rho and rho_min must lie in (0, 1)")

    @property
    def retention(self) -> float:
        return 1.0 - self.rho


@dataclass(frozen=True)
class MinerConfig:
    n_ants: int = 400
    max_uncovered: int = 10
    min_cases_per_rule: int = 5
    max_iterations: int = 100
    convergence_window: int = 10
    heuristic: str = "density"  # "entropy" (classic) | "density" (IAM)
    evaporation: EvaporationPolicy = field(default_factory=EvaporationPolicy)
    seed: int = 0
    normalize_pheromone: bool = False
    reinit_pheromone: bool = True
    stop_when_pure: bool = True
    max_rejections: int = 3

    def __post_init__(self):
        if isinstance(self.evaporation, dict):
            object.__setattr__(self, "evaporation", EvaporationPolicy(**self.evaporation))
        for name in ("n_ants", "min_cases_per_rule", "max_iterations", "convergence_window"):
            if getattr(self, name) < 1:
                raise MinerError(f"{name} must be positive")
        if self.max_uncovered < 0 or self.max_rejections < 0:
            raise MinerError("max_uncovered and max_rejections must be >= 0")
        if self.heuristic not in ("entropy", "density"):
            raise MinerError(f"unknown heuristic {self.heuristic!r}")

    @classmethod
    def classic(cls, **kw) -> "MinerConfig":
        kw.setdefault("heuristic", "entropy")
        kw.setdefault("evaporation", EvaporationPolicy("fixed"))
        return cls(**kw)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Rule:
    antecedent: tuple[Term, ...]
    consequent: int
    quality: float = 0.0
    counts: ConfusionCounts = field(default_factory=ConfusionCounts)

    def __post_init__(self):
        terms = tuple(sorted(self.antecedent))
        attrs = [t.attribute for t in terms]
        if len(set(attrs)) != len(attrs):
            raise MinerError("a rule may use each attribute at most once")
        object.__setattr__(self, "antecedent", terms)

    @property
    def cover(self) -> int:
        return self.counts.TP + self.counts.FP

    def key(self) -> tuple:
        return (self.antecedent, self.consequent)

    def covers(self, bins) -> np.ndarray:
        bins = np.atleast_2d(bins)
        mask = np.ones(bins.shape[0], dtype=bool)
        for t in self.antecedent:
            mask &= bins[:, t.attribute] == t.value
        return mask

    def to_dict(self) -> dict:
        return {
            "terms": [[t.attribute, t.value] for t in self.antecedent],
            "class": self.consequent,
            "quality": self.quality,
            "counts": self.counts.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Rule":
        return cls(
            tuple(Term(int(a), int(v)) for a, v in d["terms"]),
            int(d["class"]),
            float(d.get("quality", 0.0)),
            ConfusionCounts(**d.get("counts", {})),
        )


def laplace(class_hits: int, total: int) -> float:
    return (class_hits + 1) / (total + 2)


@dataclass(frozen=True)
class RuleList:
    """Ordered rules with first-match semantics and a default class."""

    rules: tuple[Rule, ...]
    default_class: int
    # (cases of default_class, total cases) in the residual set, for scoring
    default_support: tuple[int, int] = (0, 0)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.default_class not in (-1, 1):
            raise MinerError("default class must be -1 or +1")

    @property
    def n_rules(self) -> int:
        return len(self.rules)

    @property
    def terms_per_rule(self) -> float:
        return float(np.mean([len(r.antecedent) for r in self.rules])) if self.rules else 0.0

    def fire(self, bins) -> np.ndarray:
        """Index of the first matching rule per row, -1 for the default."""
        bins = np.atleast_2d(bins)
        fired = np.full(bins.shape[0], -1, dtype=int)
        open_ = np.ones(bins.shape[0], dtype=bool)
        for k, rule in enumerate(self.rules):
            hit = open_ & rule.covers(bins)
            fired[hit] = k
            open_ &= ~hit
            if not open_.any():
                break
        return fired

    def predict(self, bins) -> np.ndarray:
        classes = np.array([r.consequent for r in self.rules] + [self.default_class])
        return classes[self.fire(bins)]

    def scores(self, bins) -> np.ndarray:
        per_rule = [r.consequent * laplace(r.counts.TP, r.cover) for r in self.rules]
        per_rule.append(self.default_class * laplace(*self.default_support))
        return np.asarray(per_rule)[self.fire(bins)]

    def to_dict(self) -> dict:
        return {
            "rules": [r.to_dict() for r in self.rules],
            "default_class": self.default_class,
            "default_support": list(self.default_support),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RuleList":
        return cls(
            tuple(Rule.from_dict(r) for r in d["rules"]),
            int(d["default_class"]),
            tuple(d.get("default_support", (0, 0))),
        )

    def render(self, names: Sequence[str], discretizer: Discretizer) -> str:
        lines = []
        for r in self.rules:
            conds = []
            for t in r.antecedent:
                lo, hi = discretizer.interval(t.attribute, t.value)
                conds.append(f"{names[t.attribute]} in [{_fmt(lo)},{_fmt(hi)})")
            ante = " AND ".join(conds) if conds else "TRUE"
            lines.append(f"IF {ante} THEN class={_fmt_label(r.consequent)} (Q={r.quality:.4f}, cover={r.cover})")
        lines.append(f"DEFAULT class={_fmt_label(self.default_class)}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "RuleList":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return f"{x:.6g}"


def _fmt_label(c: int) -> str:
    return "+1" if c > 0 else "-1"


def classify(rules: RuleList, sample) -> tuple[int, int]:
    fired = int(rules.fire(np.asarray(sample)[None, :])[0])
    label = rules.default_class if fired < 0 else rules.rules[fired].consequent
    return label, fired


def rule_score(rules: RuleList, sample) -> float:
    """Signed Laplace confidence of the rule that fires on ``sample``."""
    return float(rules.scores(np.asarray(sample)[None, :])[0])


# --------------------------------------------------------------------------
# pheromone, heuristics, quality
# --------------------------------------------------------------------------


class OpCounter:
    """Tally of elementwise arithmetic operations spent on heuristics."""

    def __init__(self):
        self.ops = 0

    def add(self, n: int) -> None:
        self.ops += int(n)


def init_pheromone(space: TermSpace) -> PheromoneTable:
    if space.total_terms < 1:
        raise MinerError("empty term space")
    return PheromoneTable(np.full(space.total_terms, 1.0 / space.total_terms), 0)


def entropy_heuristics(n_term, n_pos, n_classes: int = 2, counter: OpCounter | None = None) -> np.ndarray:
    """log2(k) - InfoT per term, normalized over terms with non-empty partitions."""
    n_term = np.asarray(n_term, dtype=float)
    n_pos = np.asarray(n_pos, dtype=float)
    size = n_term.size
    out = np.zeros(size)
    nz = n_term > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        p = n_pos[nz] / n_term[nz]
        q = 1.0 - p
        info = -(np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
                 + np.where(q > 0, q * np.log2(np.where(q > 0, q, 1.0)), 0.0))
    raw = math.log2(n_classes) - info
    out[nz] = raw
    total = out.sum()
    if total > 0:
        out = out / total
    if counter is not None:
        # per term: 2 divisions, 1 subtraction, 2 logs, 2 products, 1 sum,
        # 1 negation, 1 subtraction from log2(k); then 1 sum + 1 division
        counter.add(12 * size)
    return out


def density_heuristics(n_term, n_total: int, counter: OpCounter | None = None) -> np.ndarray:
    """|T_ij| / |Ts| per term."""
    n_term = np.asarray(n_term, dtype=float)
    if counter is not None:
        counter.add(n_term.size)
    return n_term / float(n_total) if n_total else np.zeros_like(n_term)


def _partition(term: Term, data: DiscretizedDataset) -> np.ndarray:
    return data.bins[:, term.attribute] == term.value


def entropy_heuristic(term: Term, data: DiscretizedDataset, n_classes: int = 2) -> float:
    """Un-normalized log2(k) - InfoT for one term; 0 for an empty partition."""
    part = _partition(term, data)
    n = int(part.sum())
    if n == 0:
        return 0.0
    info = 0.0
    for cls in (-1, 1):
        f = np.sum(data.labels[part] == cls) / n
        if f > 0:
            info -= f * math.log2(f)
    return math.log2(n_classes) - info


def density_heuristic(term: Term, data: DiscretizedDataset) -> float:
    return float(_partition(term, data).sum()) / data.n_samples


def term_probability(tau, eta, eligible) -> np.ndarray:
    tau = tau.tau if isinstance(tau, PheromoneTable) else np.asarray(tau, dtype=float)
    eta = np.asarray(eta, dtype=float)
    mask = np.zeros(tau.shape, dtype=bool)
    mask[np.asarray(list(eligible), dtype=int)] = True
    w = np.where(mask, tau * eta, 0.0)
    total = w.sum()
    if not total > 0:
        raise NoEligibleTerm("no eligible term has positive tau * eta")
    return w / total


def rule_quality(c: ConfusionCounts) -> float:
    """Sensitivity x specificity; an undefined factor counts as 0."""
    sens = c.TP / (c.TP + c.FN) if c.TP + c.FN else 0.0
    spec = c.TN / (c.TN + c.FP) if c.TN + c.FP else 0.0
    return sens * spec


def update_pheromone(
    tau: PheromoneTable,
    best: Rule | None,
    policy: EvaporationPolicy,
    space: TermSpace | None = None,
    path: Sequence[int] | None = None,
    normalize: bool = False,
) -> PheromoneTable:
    """Evaporate every term; reinforce the best rule's terms by Q/(1+Q)."""
    new = tau.tau * policy.retention
    if best is not None:
        if path is None:
            if space is None:
                raise MinerError("need the term space to locate the rule's path")
            path = [space.index(t) for t in best.antecedent]
        q = best.quality
        idx = np.asarray(list(path), dtype=int)
        new[idx] += (q / (1.0 + q)) * tau.tau[idx]
    if normalize:
        new = new / new.sum()
    return PheromoneTable(new, tau.t + 1)


def adapt_evaporation(policy: EvaporationPolicy) -> EvaporationPolicy:
    """Shrink the retention factor by 5% per step, clipped at ``rho_min``."""
    shrunk = 0.95 * policy.retention
    keep = shrunk if shrunk >= policy.rho_min else policy.rho_min
    return replace(policy, rho=1.0 - keep)


# --------------------------------------------------------------------------
# bitset context for one covering round
# --------------------------------------------------------------------------


def _bits(mask: np.ndarray) -> int:
    return int.from_bytes(np.packbits(mask, bitorder="little").tobytes(), "little")


class _Context:
    """Term coverages and memo tables for one training set."""

    def __init__(self, bins: np.ndarray, labels: np.ndarray, b: Sequence[int], min_cases: int):
        self.space = TermSpace(tuple(b))
        self.n = int(len(labels))
        self.min_cases = min_cases
        self.all = (1 << self.n) - 1
        self.pos = _bits(labels == 1)
        self.n_pos = int(np.sum(labels == 1))
        self.n_neg = self.n - self.n_pos
        self.term_attr = self.space.attribute_of().tolist()
        self.term_bits = []
        for i, bi in enumerate(self.space.b):
            col = bins[:, i]
            self.term_bits.extend(_bits(col == v) for v in range(bi))
        self.term_count = np.array([x.bit_count() for x in self.term_bits])
        self.term_pos = np.array([(x & self.pos).bit_count() for x in self.term_bits])
        self._cov: dict[tuple, int] = {(): self.all}
        self._elig: dict[tuple, np.ndarray] = {}
        self._rule: dict[tuple, Rule] = {}
        self._prune: dict[tuple, tuple] = {}

    def coverage(self, terms: tuple) -> int:
        cov = self._cov.get(terms)
        if cov is None:
            cov = self.coverage(terms[:-1]) & self.term_bits[terms[-1]]
            self._cov[terms] = cov
        return cov

    def eligible(self, terms: tuple) -> np.ndarray:
        elig = self._elig.get(terms)
        if elig is None:
            cov = self.coverage(terms)
            used = {self.term_attr[t] for t in terms}
            bits, floor = self.term_bits, self.min_cases
            elig = np.array(
                [t for t, a in enumerate(self.term_attr) if a not in used and (cov & bits[t]).bit_count() >= floor],
                dtype=int,
            )
            self._elig[terms] = elig
        return elig

    def evaluate(self, terms: tuple) -> Rule:
        rule = self._rule.get(terms)
        if rule is None:
            cov = self.coverage(terms)
            n_cov = cov.bit_count()
            n_cov_pos = (cov & self.pos).bit_count()
            n_cov_neg = n_cov - n_cov_pos
            if n_cov_pos > n_cov_neg:
                cls, tp, fp, n_cls = 1, n_cov_pos, n_cov_neg, self.n_pos
            else:
                cls, tp, fp, n_cls = -1, n_cov_neg, n_cov_pos, self.n_neg
            counts = ConfusionCounts(TP=tp, FP=fp, FN=n_cls - tp, TN=(self.n - n_cls) - fp)
            rule = Rule(tuple(self.space.term(t) for t in terms), cls, rule_quality(counts), counts)
            self._rule[terms] = rule
        return rule

    def construct(self, weights: np.ndarray, u: np.ndarray) -> tuple:
        """One ant walk; ``u`` supplies one uniform draw per added term."""
        terms: tuple = ()
        for step in range(self.space.a):
            elig = self.eligible(terms)
            if elig.size == 0:
                break
            cum = np.cumsum(weights[elig])
            total = cum[-1]
            if not total > 0:
                break
            k = int(np.searchsorted(cum, u[step] * total, side="right"))
            # side="right" never lands on a zero-weight term
            k = min(k, elig.size - 1)
            terms = tuple(sorted(terms + (int(elig[k]),)))
        return terms

    def prune(self, terms: tuple) -> tuple:
        out = self._prune.get(terms)
        if out is None:
            cur = terms
            q = self.evaluate(cur).quality
            while len(cur) > 1:
                best_q, best = q, None
                for i in range(len(cur)):
                    cand = cur[:i] + cur[i + 1:]
                    qc = self.evaluate(cand).quality
                    if qc > best_q:
                        best_q, best = qc, cand
                if best is None:
                    break
                cur, q = best, best_q
            out = cur
            self._prune[terms] = out
        return out

    def covered_mask(self, terms: tuple) -> np.ndarray:
        cov = self.coverage(terms)
        raw = np.frombuffer(cov.to_bytes((self.n + 7) // 8, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.n].astype(bool)

    def heuristics(self, kind: str, counter: OpCounter | None = None) -> np.ndarray:
        if kind == "entropy":
            return entropy_heuristics(self.term_count, self.term_pos, 2, counter)
        return density_heuristics(self.term_count, self.n, counter)


def _context(data: DiscretizedDataset, labels, min_cases: int) -> _Context:
    labels = data.labels if labels is None else np.asarray(labels)
    if labels is None:
        raise MinerError("mining needs class labels")
    return _Context(data.bins, labels, data.b, min_cases)


# --------------------------------------------------------------------------
# public single-step operations
# --------------------------------------------------------------------------


def construct_rule(data: DiscretizedDataset, tau: PheromoneTable, config: MinerConfig, rng, eta=None) -> Rule:
    """Let one ant build a rule over ``data`` (not pruned)."""
    if data.n_samples == 0:
        raise MinerError("cannot construct a rule on empty data")
    ctx = _context(data, None, config.min_cases_per_rule)
    if eta is None:
        eta = ctx.heuristics(config.heuristic)
    weights = tau.tau * np.asarray(eta, float)
    terms = ctx.construct(weights, rng.random(ctx.space.a))
    return ctx.evaluate(terms)


def prune_rule(rule: Rule, data: DiscretizedDataset, min_cases: int = 1) -> Rule:
    ctx = _context(data, None, min_cases)
    terms = tuple(sorted(ctx.space.index(t) for t in rule.antecedent))
    return ctx.evaluate(ctx.prune(terms))


# --------------------------------------------------------------------------
# covering loop
# --------------------------------------------------------------------------


@dataclass
class SearchStats:
    iterations: int = 0
    ants: int = 0
    heuristic_ops: int = 0
    rounds: int = 0
    rejections: int = 0


def _search_round(ctx: _Context, config: MinerConfig, tau: PheromoneTable, tags: tuple, banned: set,
                  stats: SearchStats, counter: OpCounter) -> tuple[Rule | None, tuple, PheromoneTable, int]:
    """Iterate ant colonies on one training set; return the overall best rule."""
    eta = ctx.heuristics(config.heuristic, counter)
    policy = config.evaporation
    best_rule, best_terms = None, None
    prev_key, same = None, 0
    for it in range(config.max_iterations):
        weights = tau.tau * eta
        u = rng_for(config.seed, "mine", *tags, it).random((config.n_ants, ctx.space.a))
        it_rule, it_terms = None, None
        for k in range(config.n_ants):
            terms = ctx.prune(ctx.construct(weights, u[k]))
            rule = ctx.evaluate(terms)
            if banned and rule.key() in banned:
                continue
            # strict '>' keeps the lowest ant index on ties
            if it_rule is None or rule.quality > it_rule.quality:
                it_rule, it_terms = rule, terms
        stats.iterations += 1
        stats.ants += config.n_ants
        if it_rule is not None and (best_rule is None or it_rule.quality > best_rule.quality):
            best_rule, best_terms = it_rule, it_terms
        tau = update_pheromone(tau, it_rule, policy, path=it_terms or (), normalize=config.normalize_pheromone)
        if policy.mode == "adaptive":
            policy = adapt_evaporation(policy)
        key = None if it_rule is None else it_rule.key()
        same = same + 1 if key == prev_key else 1
        prev_key = key
        if same >= config.convergence_window:
            break
    return best_rule, best_terms, tau, it + 1


def _majority(labels) -> int:
    labels = np.asarray(labels)
    return 1 if np.sum(labels == 1) > np.sum(labels == -1) else -1


def _default_for(labels_remaining, labels_all) -> tuple[int, tuple[int, int]]:
    pool = labels_remaining if len(labels_remaining) else labels_all
    cls = _majority(pool)
    return cls, (int(np.sum(pool == cls)), int(len(pool)))


AcceptFn = Callable[[RuleList, np.ndarray], bool]


def mine(
    data: DiscretizedDataset,
    config: MinerConfig | None = None,
    accept: AcceptFn | None = None,
    stats: SearchStats | None = None,
    counter: OpCounter | None = None,
    seed_rules: Sequence[Rule] = (),
) -> RuleList:
    """Sequential covering: mine a rule, drop the cases it covers, repeat.

    ``accept`` (optional) is called with the tentative rule list and the
    boolean mask of remaining cases the new rule covers.  A rejected rule
    is banned for the rest of the round and its cases stay in play; after
    ``max_rejections`` consecutive rejections the list is closed.

    ``seed_rules`` are offered to ``accept`` (in order) before any ants run.
    """
    config = config or MinerConfig()
    stats = stats if stats is not None else SearchStats()
    counter = counter if counter is not None else OpCounter()
    if data.labels is None:
        raise MinerError("mining needs class labels")
    if data.n_samples == 0:
        raise MinerError("cannot mine an empty dataset")
    labels_all = np.asarray(data.labels)
    remaining = np.arange(data.n_samples)
    rules: list[Rule] = []

    def tentative(rule: Rule, covered: np.ndarray) -> RuleList:
        rest = labels_all[remaining[~covered]]
        cls, support = _default_for(rest, labels_all)
        return RuleList(tuple(rules) + (rule,), cls, support)

    for cand in seed_rules:
        if len(remaining) <= config.max_uncovered:
            break
        covered = cand.covers(data.bins[remaining])
        if not covered.any():
            continue
        if accept is None or accept(tentative(cand, covered), covered):
            ctx = _Context(data.bins[remaining], labels_all[remaining], data.b, 1)
            terms = tuple(sorted(ctx.space.index(t) for t in cand.antecedent))
            rules.append(ctx.evaluate(terms))
            remaining = remaining[~covered]

    tau = None
    round_no = 0
    closed_by = None
    while len(remaining) > config.max_uncovered:
        rem_labels = labels_all[remaining]
        if config.stop_when_pure and len(np.unique(rem_labels)) == 1:
            break
        ctx = _Context(data.bins[remaining], rem_labels, data.b, config.min_cases_per_rule)
        if tau is None or config.reinit_pheromone:
            tau = init_pheromone(ctx.space)
        banned: set = set()
        chosen = None
        for attempt in range(config.max_rejections + 1):
            rule, terms, tau_out, _ = _search_round(ctx, config, tau, (round_no, attempt), banned, stats, counter)
            if not config.reinit_pheromone:
                tau = tau_out
            if rule is None:
                break
            if not rule.antecedent:
                closed_by = rule
                break
            covered = ctx.covered_mask(terms)
            if accept is None or accept(tentative(rule, covered), covered):
                chosen = (rule, covered)
                break
            banned.add(rule.key())
            stats.rejections += 1
        stats.rounds += 1
        round_no += 1
        if chosen is None:
            break
        rules.append(chosen[0])
        remaining = remaining[~chosen[1]]

    stats.heuristic_ops = counter.ops
    if closed_by is not None:
        support = (closed_by.counts.TP, closed_by.cover)
        return RuleList(tuple(rules), closed_by.consequent, support)
    cls, support = _default_for(labels_all[remaining], labels_all)
    return RuleList(tuple(rules), cls, support)


def pure_group_rules(data: DiscretizedDataset, min_cases: int = 1) -> list[Rule]:
    """Full-antecedent rules for identical binned rows that share one class.

    Largest groups first; ties broken by the row pattern.
    """
    if data.labels is None:
        raise MinerError("need labels")
    patterns, inverse = np.unique(data.bins, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    out = []
    for g, pat in enumerate(patterns):
        labs = data.labels[inverse == g]
        if len(labs) >= min_cases and np.all(labs == labs[0]):
            terms = tuple(Term(i, int(v)) for i, v in enumerate(pat))
            out.append((-len(labs), tuple(pat.tolist()), Rule(terms, int(labs[0]))))
    out.sort(key=lambda x: (x[0], x[1]))
    return [r for _, _, r in out]
