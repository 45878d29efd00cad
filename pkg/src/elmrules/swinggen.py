"""Classical-model multi-machine swing simulator for TSA datasets.

Each machine obeys

    M_i dw_i/dt = Pm_i - Pe_i - D_i w_i,    d(delta_i)/dt = w_i

with Pe_i = sum_j E_i E_j (G_ij cos(d_i - d_j) + B_ij sin(d_i - d_j)) on a
reduced network that switches prefault -> fault-on -> postfault at t0 and
tcl.  Integration is fixed-step RK4; switching instants are snapped to the
step grid so every step sits inside a single network phase.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from elmrules.dataset import Dataset
from elmrules.seeding import rng_for

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


class SwingError(ValueError):
    pass


class NoEquilibrium(SwingError):
    pass


class BadScenarioSpace(SwingError):
    pass


class HorizonTooShort(SwingError):
    pass


@dataclass(frozen=True)
class MachineParams:
    M: np.ndarray
    D: np.ndarray
    E: np.ndarray
    Pm: np.ndarray

    def __post_init__(self):
        arrs = [np.asarray(getattr(self, k), dtype=float).reshape(-1) for k in ("M", "D", "E", "Pm")]
        if len({a.size for a in arrs}) != 1:
            raise SwingError("M, D, E, Pm must have one entry per machine")
        M, D, E, _ = arrs
        if (M <= 0).any() or (D < 0).any() or (E <= 0).any():
            raise SwingError("need M > 0, D >= 0, E > 0")
        for k, a in zip(("M", "D", "E", "Pm"), arrs):
            a.setflags(write=False)
            object.__setattr__(self, k, a)

    @property
    def n(self) -> int:
        return self.M.size


def _sym(a, n: int, what: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (n, n):
        raise SwingError(f"{what}: expected {n}x{n}, got {a.shape}")
    if np.max(np.abs(a - a.T)) > 1e-12:
        raise SwingError(f"{what}: matrix is not symmetric")
    return a


@dataclass(frozen=True)
class ReducedNetwork:
    """(G, B) pairs for the three phases, in machine internal-node order."""

    prefault: tuple[np.ndarray, np.ndarray]
    fault_on: tuple[np.ndarray, np.ndarray]
    postfault: tuple[np.ndarray, np.ndarray]

    def __post_init__(self):
        n = np.asarray(self.prefault[0]).shape[0]
        for ph in ("prefault", "fault_on", "postfault"):
            G, B = getattr(self, ph)
            object.__setattr__(self, ph, (_sym(G, n, f"{ph}.G"), _sym(B, n, f"{ph}.B")))

    @property
    def n(self) -> int:
        return self.prefault[0].shape[0]

    def admittances(self) -> list[np.ndarray]:
        return [G + 1j * B for G, B in (self.prefault, self.fault_on, self.postfault)]


@dataclass(frozen=True)
class Scenario:
    t0: float = 0.1
    tcl: float = 0.2
    t_end: float = 2.0
    dt: float = 0.001
    cycle: float = 0.02
    load_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.t0 <= self.tcl <= self.t_end):
            raise SwingError("need 0 <= t0 <= tcl <= t_end")
        if self.dt <= 0:
            raise SwingError("dt must be positive")

    def step_of(self, t: float) -> int:
        return int(round(t / self.dt))


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    delta: np.ndarray  # K x n, rad
    omega: np.ndarray  # K x n, rad/s deviation
    M: np.ndarray
    Pm: np.ndarray  # mechanical power actually used (slack adjusted)
    accel_power_t0: np.ndarray = field(default=None)  # Pm - Pe just after t0

    @property
    def delta_coi(self) -> np.ndarray:
        return self.delta @ self.M / self.M.sum()

    @property
    def omega_coi(self) -> np.ndarray:
        return self.omega @ self.M / self.M.sum()

    def index_at(self, t: float) -> int:
        return int(np.argmin(np.abs(self.t - t)))


# --------------------------------------------------------------------------
# electrical power and equilibrium
# --------------------------------------------------------------------------


def electrical_power(delta, E, Y) -> np.ndarray:
    """Pe for angle rows ``delta`` (..., n), EMFs ``E`` and complex admittance ``Y``."""
    V = E * np.exp(1j * np.asarray(delta, dtype=float))
    I = V @ Y.T
    return np.real(V * np.conj(I))


def _pe_jacobian(delta, E, G, B) -> np.ndarray:
    dd = delta[:, None] - delta[None, :]
    EE = np.outer(E, E)
    J = EE * (G * np.sin(dd) - B * np.cos(dd))
    np.fill_diagonal(J, 0.0)
    np.fill_diagonal(J, -J.sum(axis=1))
    return J


def equilibrium(E, Pm, G, B, max_iter: int = 200, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Prefault operating point with machine 1 as the angle reference and slack.

    Solves Pe_i(delta) = Pm_i for machines 2..n by damped Newton; machine 1
    then takes Pm_1 = Pe_1 so total mechanical and electrical power balance.
    Returns (delta, Pm_balanced).
    """
    E = np.asarray(E, float)
    Pm = np.asarray(Pm, float)
    n = E.size
    Y = G + 1j * B
    delta = np.zeros(n)
    if n > 1:
        for it in range(max_iter):
            res = (Pm - electrical_power(delta, E, Y))[1:]
            norm = np.max(np.abs(res))
            if norm < tol:
                break
            J = _pe_jacobian(delta, E, G, B)[1:, 1:]
            try:
                step = np.linalg.solve(J, res)
            except np.linalg.LinAlgError:
                raise NoEquilibrium("singular Jacobian") from None
            lam = 1.0
            while lam > 1e-6:
                trial = delta.copy()
                trial[1:] += lam * step
                new = np.max(np.abs((Pm - electrical_power(trial, E, Y))[1:]))
                if new < norm:
                    break
                lam *= 0.5
            else:
                raise NoEquilibrium(f"line search stalled at residual {norm:.3g}")
            delta = trial
        else:
            raise NoEquilibrium(f"no convergence after {max_iter} iterations")
    balanced = Pm.copy()
    balanced[0] = electrical_power(delta, E, Y)[0]
    return delta, balanced


# --------------------------------------------------------------------------
# batch RK4
# --------------------------------------------------------------------------


def _integrate(M, D, E, Pm, Ys, delta0, k_t0, k_cl, n_steps: int, dt: float):
    """RK4 over S independent scenarios at once.

    E, Pm, delta0 are S x n; k_t0 / k_cl are per-scenario switching steps.
    Returns delta, omega as S x (n_steps + 1) x n.
    """
    S, n = delta0.shape
    delta = np.empty((S, n_steps + 1, n))
    omega = np.empty((S, n_steps + 1, n))
    d = delta0.copy()
    w = np.zeros((S, n))
    delta[:, 0] = d
    omega[:, 0] = w
    k_t0 = np.broadcast_to(np.asarray(k_t0), (S,))
    k_cl = np.broadcast_to(np.asarray(k_cl), (S,))

    def pe(dd, phase):
        V = E * np.exp(1j * dd)
        I = np.empty_like(V)
        for p in range(3):
            sel = phase == p
            if sel.any():
                # elementwise product + sum instead of matmul: BLAS rounding depends on batch shape
                I[sel] = np.sum(V[sel][:, None, :] * Ys[p][None], axis=-1)
        return np.real(V * np.conj(I))

    def rhs(dd, ww, phase):
        return ww, (Pm - pe(dd, phase) - D * ww) / M

    for k in range(n_steps):
        phase = np.where(k < k_t0, 0, np.where(k < k_cl, 1, 2))
        a1, b1 = rhs(d, w, phase)
        a2, b2 = rhs(d + 0.5 * dt * a1, w + 0.5 * dt * b1, phase)
        a3, b3 = rhs(d + 0.5 * dt * a2, w + 0.5 * dt * b2, phase)
        a4, b4 = rhs(d + dt * a3, w + dt * b3, phase)
        d = d + dt / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
        w = w + dt / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)
        delta[:, k + 1] = d
        omega[:, k + 1] = w
    return delta, omega


def _prepare(machines: MachineParams, network: ReducedNetwork, scenario: Scenario):
    if machines.n != network.n:
        raise SwingError(f"{machines.n} machines but a {network.n}-node network")
    E = machines.E * scenario.load_scale
    Pm = machines.Pm * scenario.load_scale
    delta0, Pm = equilibrium(E, Pm, *network.prefault)
    Ys = network.admittances()
    k0, kcl = scenario.step_of(scenario.t0), scenario.step_of(scenario.tcl)
    after_t0 = Ys[1] if kcl > k0 else Ys[2]
    accel = Pm - electrical_power(delta0, E, after_t0)
    return E, Pm, delta0, k0, kcl, accel


def simulate(machines: MachineParams, network: ReducedNetwork, scenario: Scenario) -> Trajectory:
    """Integrate one fault scenario from the prefault equilibrium."""
    E, Pm, delta0, k0, kcl, accel = _prepare(machines, network, scenario)
    n_steps = scenario.step_of(scenario.t_end)
    delta, omega = _integrate(
        machines.M, machines.D, E[None], Pm[None], network.admittances(), delta0[None], k0, kcl, n_steps, scenario.dt
    )
    t = np.arange(n_steps + 1) * scenario.dt
    return Trajectory(t, delta[0], omega[0], machines.M, Pm, accel)


# --------------------------------------------------------------------------
# features and labels
# --------------------------------------------------------------------------

FEATURE_CATALOG = {
    "mean_pm": "mean prefault mechanical power of all machines",
    "mean_accel_power": "mean initial acceleration power Pm - Pe just after fault inception",
    "max_ke_cl": "maximum rotor kinetic energy 0.5*M*w^2 over machines at t_cl",
    "coi_speed_3c": "COI-relative speed of the machine farthest from the COI at t_cl+3c",
    "coi_angle_3c": "COI-relative angle of the machine farthest from the COI at t_cl+3c",
    "max_angle_diff_3c": "maximum pairwise rotor angle difference at t_cl+3c",
    "ke_maxangle_3c": "kinetic energy of the machine with the largest COI-relative angle at t_cl+3c",
    "coi_angle_6c": "COI-relative angle of the machine farthest from the COI at t_cl+6c",
    "coi_speed_6c": "COI-relative speed of the machine farthest from the COI at t_cl+6c",
    "max_angle_diff_6c": "maximum pairwise rotor angle difference at t_cl+6c",
    "coi_angle_9c": "COI-relative angle of the machine farthest from the COI at t_cl+9c",
    "coi_speed_9c": "COI-relative speed of the machine farthest from the COI at t_cl+9c",
    "max_angle_diff_9c": "maximum pairwise rotor angle difference at t_cl+9c",
}

# Tz numbering of the two published feature subsets
FEATURE_SETS = {
    "table1": [
        "mean_pm", "mean_accel_power", "coi_speed_3c", "coi_angle_6c",
        "coi_speed_6c", "coi_angle_9c", "coi_speed_9c",
    ],
    "table2": [
        "mean_accel_power", "max_ke_cl", "coi_angle_3c", "max_angle_diff_3c",
        "ke_maxangle_3c", "coi_angle_6c", "max_angle_diff_6c", "coi_speed_6c",
        "coi_angle_9c", "max_angle_diff_9c", "coi_speed_9c",
    ],
}


def coi_features(traj: Trajectory, machines: MachineParams, scenario: Scenario) -> dict[str, float]:
    """Full feature catalog for one trajectory (nearest-grid-point sampling)."""
    t_last = scenario.tcl + 9 * scenario.cycle
    if traj.t[-1] + 0.5 * scenario.dt < t_last:
        raise HorizonTooShort(f"trajectory ends at {traj.t[-1]:.3f}s, features need {t_last:.3f}s")
    M = traj.M
    d_coi, w_coi = traj.delta_coi, traj.omega_coi
    out = {"mean_pm": float(np.mean(traj.Pm))}
    accel = traj.accel_power_t0
    out["mean_accel_power"] = float(np.mean(accel)) if accel is not None else float("nan")
    k = traj.index_at(scenario.tcl)
    out["max_ke_cl"] = float(np.max(0.5 * M * traj.omega[k] ** 2))
    for c in (3, 6, 9):
        k = traj.index_at(scenario.tcl + c * scenario.cycle)
        rel_d = traj.delta[k] - d_coi[k]
        rel_w = traj.omega[k] - w_coi[k]
        far = int(np.argmax(np.abs(rel_d)))
        out[f"coi_angle_{c}c"] = float(rel_d[far])
        out[f"coi_speed_{c}c"] = float(rel_w[far])
        out[f"max_angle_diff_{c}c"] = float(np.max(traj.delta[k]) - np.min(traj.delta[k]))
        if c == 3:
            top = int(np.argmax(rel_d))
            out["ke_maxangle_3c"] = float(0.5 * M[top] * traj.omega[k, top] ** 2)
    return out


def max_separation(delta: np.ndarray, criterion: str = "pairwise", M=None) -> float:
    """Largest rotor-angle spread over the whole trajectory (rad)."""
    if criterion == "pairwise":
        return float(np.max(np.max(delta, axis=-1) - np.min(delta, axis=-1)))
    if criterion == "coi":
        coi = delta @ M / np.sum(M)
        return float(np.max(np.abs(delta - coi[..., None])))
    raise SwingError(f"unknown stability criterion {criterion!r}")


def label(traj: Trajectory, criterion: str = "pairwise") -> int:
    """-1 when the angle spread ever strictly exceeds 360 degrees, else +1."""
    return -1 if max_separation(traj.delta, criterion, traj.M) > TWO_PI else 1


# --------------------------------------------------------------------------
# fixture I/O and dataset generation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GenConfig:
    n_samples: int = 2000
    load_range: tuple[float, float] = (0.75, 1.30)
    tcl_range: tuple[float, float] = (0.15, 0.45)
    pm_spread: float = 0.10
    feature_set: str = "table1"
    criterion: str = "pairwise"
    max_redraws: int = 20
    chunk: int = 250
    scenario: Scenario = field(default_factory=Scenario)

    def __post_init__(self):
        if isinstance(self.scenario, dict):
            object.__setattr__(self, "scenario", Scenario(**self.scenario))
        object.__setattr__(self, "load_range", tuple(float(x) for x in self.load_range))
        object.__setattr__(self, "tcl_range", tuple(float(x) for x in self.tcl_range))
        lo, hi = self.load_range
        if not 0 < lo <= hi:
            raise SwingError("load_range must satisfy 0 < lo <= hi")
        lo, hi = self.tcl_range
        if not (self.scenario.t0 <= lo <= hi):
            raise SwingError("tcl_range must satisfy t0 <= lo <= hi")
        if self.feature_set not in FEATURE_SETS:
            raise SwingError(f"unknown feature set {self.feature_set!r}")
        if self.n_samples < 1:
            raise SwingError("n_samples must be >= 1")


def load_fixture(path=None) -> tuple[MachineParams, ReducedNetwork, dict]:
    """Read a machine/network JSON file; ``None`` loads the bundled 3-machine case.

    Returns the parsed machines, network and any extra ``generator`` block.
    """
    if path is None:
        text = resources.files("elmrules.data").joinpath("three_machine.json").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    raw = json.loads(text)
    return parse_fixture(raw)


def parse_fixture(raw: dict) -> tuple[MachineParams, ReducedNetwork, dict]:
    try:
        m = raw["machines"]
        machines = MachineParams(m["M"], m["D"], m["E"], m["Pm"])
        nets = raw["networks"]
        network = ReducedNetwork(
            *[(np.asarray(nets[ph]["G"], float), np.asarray(nets[ph]["B"], float)) for ph in ("prefault", "fault_on", "postfault")]
        )
    except KeyError as exc:
        raise SwingError(f"fixture is missing key {exc}") from None
    return machines, network, dict(raw.get("generator", {}))


def generate_dataset(
    machines: MachineParams,
    network: ReducedNetwork,
    cfg: GenConfig | None = None,
    seed: int = 0,
) -> tuple[Dataset, dict]:
    """Draw, simulate, featurize and label ``cfg.n_samples`` scenarios.

    Each scenario i uses its own derived seed (i, attempt) so the output is
    independent of chunking.  Returns the dataset and a summary dict.
    """
    cfg = cfg or GenConfig()
    base = cfg.scenario
    n = machines.n
    draws = []
    rejected = 0
    for i in range(cfg.n_samples):
        for attempt in range(cfg.max_redraws):
            rng = rng_for(seed, "scenario", i, attempt)
            load = rng.uniform(*cfg.load_range)
            tcl = rng.uniform(*cfg.tcl_range)
            factors = 1.0 + rng.uniform(-cfg.pm_spread, cfg.pm_spread, size=n)
            sc = replace(base, tcl=tcl, load_scale=load, seed=i)
            mach = replace(machines, Pm=machines.Pm * factors)
            try:
                prep = _prepare(mach, network, sc)
            except NoEquilibrium as exc:
                rejected += 1
                log.info("scenario %d attempt %d rejected: %s", i, attempt, exc)
                continue
            draws.append((sc, mach, prep))
            break
        else:
            raise BadScenarioSpace(f"scenario {i}: no equilibrium in {cfg.max_redraws} draws")
    if rejected > 0.5 * (rejected + cfg.n_samples):
        raise BadScenarioSpace(f"{rejected} of {rejected + cfg.n_samples} draws had no equilibrium")

    names = FEATURE_SETS[cfg.feature_set]
    rows, labels = [], []
    n_steps = base.step_of(base.t_end)
    t = np.arange(n_steps + 1) * base.dt
    Ys = network.admittances()
    for start in range(0, len(draws), cfg.chunk):
        chunk = draws[start:start + cfg.chunk]
        E = np.array([p[0] for _, _, p in chunk])
        Pm = np.array([p[1] for _, _, p in chunk])
        d0 = np.array([p[2] for _, _, p in chunk])
        k0 = np.array([p[3] for _, _, p in chunk])
        kcl = np.array([p[4] for _, _, p in chunk])
        delta, omega = _integrate(machines.M, machines.D, E, Pm, Ys, d0, k0, kcl, n_steps, base.dt)
        for j, (sc, mach, prep) in enumerate(chunk):
            traj = Trajectory(t, delta[j], omega[j], machines.M, prep[1], prep[5])
            feats = coi_features(traj, mach, sc)
            rows.append([feats[k] for k in names])
            labels.append(label(traj, cfg.criterion))
    tz = [f"Tz{i + 1}" for i in range(len(names))]
    ds = Dataset.from_arrays(np.array(rows), labels, tz)
    labels = np.asarray(labels)
    info = {
        "n_samples": cfg.n_samples,
        "rejected": rejected,
        "n_stable": int(np.sum(labels == 1)),
        "n_unstable": int(np.sum(labels == -1)),
        "features": dict(zip(tz, names)),
    }
    return ds, info


def critical_clearing_scan(machines: MachineParams, network: ReducedNetwork, scenario: Scenario,
                           durations: Sequence[float], criterion: str = "pairwise") -> np.ndarray:
    """Stability label for each fault duration (same operating point)."""
    E, Pm, delta0, k0, _, _ = _prepare(machines, network, scenario)
    kcl = np.array([scenario.step_of(scenario.t0 + dur) for dur in durations])
    S = len(kcl)
    n_steps = scenario.step_of(scenario.t_end)
    delta, _ = _integrate(machines.M, machines.D, np.tile(E, (S, 1)), np.tile(Pm, (S, 1)),
                          network.admittances(), np.tile(delta0, (S, 1)), k0, kcl, n_steps, scenario.dt)
    return np.array([-1 if max_separation(delta[s], criterion, machines.M) > TWO_PI else 1 for s in range(S)])
