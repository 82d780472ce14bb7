"""Particle-swarm calibration of two-branch fractional models to master curves.

The objective is the weighted sum of squared decadic log residuals of the
storage and loss moduli. When the time-scale constraint is active, ``tau_c2``
is not searched; it is recomputed from ``(tau_c1, E_c1, E_c2)`` for every
particle at every evaluation.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataio import MasterCurve
from .exceptions import ConfigError, DomainError
from .viscomodel import PARAM_NAMES, FractionalModel, ModelKind, model_moduli, moduli_rows
from ._validation import check_positive_int

logger = logging.getLogger(__name__)

DEFAULT_BOUNDS = {
    "E_c1": (0.0, 1e4),
    "tau_c1": (1e-3, 1e2),
    "alpha1": (0.0, 1.0),
    "beta1": (0.0, 1.0),
    "E_c2": (0.0, 1e3),
    "tau_c2": (1e-3, 1e2),
    "alpha2": (0.0, 1.0),
}

_TIME_PARAMS = ("tau_c1", "tau_c2")


def free_parameters(kind, constrain_tau2: bool) -> tuple[str, ...]:
    """Names of the searched parameters, in canonical order."""
    names = ModelKind.parse(kind).param_names
    if constrain_tau2:
        names = tuple(n for n in names if n != "tau_c2")
    return names


@dataclass(frozen=True)
class ParamBounds:
    """Inclusive search box, one ``(lower, upper)`` pair per free parameter."""

    bounds: dict

    def __post_init__(self):
        clean = {}
        for name, pair in self.bounds.items():
            if name not in PARAM_NAMES:
                raise ConfigError(f"unknown parameter {name!r}")
            lo, hi = (float(v) for v in pair)
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
                raise ConfigError(f"invalid bounds for {name}: [{lo}, {hi}]")
            clean[name] = (lo, hi)
        if not clean:
            raise ConfigError("empty bounds")
        object.__setattr__(self, "bounds", clean)

    @classmethod
    def default(cls, kind=ModelKind.FMM_FMG, constrain_tau2: bool = True) -> "ParamBounds":
        return cls({n: DEFAULT_BOUNDS[n] for n in free_parameters(kind, constrain_tau2)})

    @classmethod
    def point(cls, model: FractionalModel, constrain_tau2: bool = True) -> "ParamBounds":
        """Bounds collapsed onto the parameters of ``model``."""
        vals = model.as_dict()
        return cls({n: (vals[n], vals[n]) for n in free_parameters(model.kind, constrain_tau2)})

    def for_names(self, names) -> tuple[np.ndarray, np.ndarray]:
        missing = [n for n in names if n not in self.bounds]
        if missing:
            raise ConfigError(f"no bounds given for {missing}")
        lo = np.array([self.bounds[n][0] for n in names])
        hi = np.array([self.bounds[n][1] for n in names])
        return lo, hi


@dataclass(frozen=True)
class PsoConfig:
    """Particle-swarm settings.

    ``topology`` is ``"ring"`` (each particle follows the best of itself and
    its two index neighbours) or ``"global"`` (classic gbest).
    ``velocity_clamp`` is a fraction of each dimension's search width.
    """

    n_pop: int = 200
    n_iter: int = 6000
    n_runs: int = 50
    seed: int = 0
    inertia: float = 0.729
    cognitive: float = 1.49445
    social: float = 1.49445
    velocity_clamp: float = 0.2
    topology: str = "ring"
    log_scale_times: bool = True

    def __post_init__(self):
        check_positive_int(self.n_pop, "n_pop", 2)
        check_positive_int(self.n_iter, "n_iter", 1)
        check_positive_int(self.n_runs, "n_runs", 1)
        if self.topology not in ("ring", "global"):
            raise ConfigError(f"topology must be 'ring' or 'global', got {self.topology!r}")
        if not self.velocity_clamp > 0:
            raise ConfigError("velocity_clamp must be > 0")


@dataclass
class FitResult:
    """Outcome of a multi-run fit.

    ``mean`` and ``std`` are taken over the best positions of the individual
    runs (sample standard deviation). ``history`` holds the incumbent cost
    after every iteration of every run.
    """

    param_names: tuple
    mean: dict
    std: dict
    best_model: FractionalModel
    best_cost: float
    relative_error: float
    run_costs: np.ndarray
    run_params: np.ndarray
    history: np.ndarray = field(repr=False)
    kind: ModelKind = ModelKind.FMM_FMG
    constrain_tau2: bool = True

    @property
    def mean_model(self) -> FractionalModel:
        v = self.best_model.as_dict()
        v.update(self.mean)
        return FractionalModel.from_vector([v[n] for n in PARAM_NAMES], kind=self.kind,
                                           tau2_constrained=self.constrain_tau2)

    def summary(self) -> dict:
        return {
            "kind": self.kind.value,
            "tau2_constrained": self.constrain_tau2,
            "free_parameters": list(self.param_names),
            "mean": self.mean,
            "std": self.std,
            "best": self.best_model.as_dict(),
            "best_cost": self.best_cost,
            "relative_error": self.relative_error,
            "run_costs": self.run_costs,
        }


# --- objective ----------------------------------------------------------------

def _log_data(curve: MasterCurve):
    return np.log10(curve.e_storage), np.log10(curve.e_loss)


def _batch_cost(P7, curve, w1, w2, logd=None):
    """Cost per row; rows giving non-positive or non-finite moduli score +inf."""
    ls, ll = logd if logd is not None else _log_data(curve)
    with np.errstate(all="ignore"):
        es, el = moduli_rows(P7, curve.x)
        rs = ls[None, :] - np.log10(es)
        rl = ll[None, :] - np.log10(el)
        c = w1 * np.sum(rs * rs, axis=1) + w2 * np.sum(rl * rl, axis=1)
    c[~np.isfinite(c)] = np.inf
    return c


def _check_weights(w1, w2):
    if not (w1 >= 0 and w2 >= 0):
        raise ConfigError("weights must be >= 0")


def cost(m: FractionalModel, data: MasterCurve, w1: float = 0.5, w2: float = 0.5) -> float:
    """Weighted sum of squared decadic log residuals of storage and loss moduli."""
    _check_weights(w1, w2)
    es, el = model_moduli(m, data.x)
    if np.any(es <= 0) or np.any(el <= 0):
        raise DomainError("model modulus is non-positive on the data grid; log residual undefined")
    rs = np.log10(data.e_storage / es)
    rl = np.log10(data.e_loss / el)
    return float(w1 * np.sum(rs * rs) + w2 * np.sum(rl * rl))


def relative_error(m: FractionalModel, data: MasterCurve, w1: float = 0.5, w2: float = 0.5) -> float:
    """Cost normalised by the weighted sum of squared log data."""
    num = cost(m, data, w1, w2)
    ls, ll = _log_data(data)
    den = float(w1 * np.sum(ls * ls) + w2 * np.sum(ll * ll))
    if den == 0:
        raise DomainError("relative error undefined: all data moduli equal 1 MPa")
    return num / den


# --- swarm ----------------------------------------------------------------------

class _Problem:
    """Maps search coordinates to full 7-parameter rows."""

    def __init__(self, kind, constrain_tau2, bounds: ParamBounds, log_times: bool):
        self.kind = ModelKind.parse(kind)
        self.constrain = constrain_tau2
        self.names = free_parameters(self.kind, constrain_tau2)
        self.lo, self.hi = bounds.for_names(self.names)
        self.log_mask = np.array([log_times and n in _TIME_PARAMS for n in self.names])
        if np.any(self.log_mask & (self.lo <= 0)):
            raise ConfigError("time-scale bounds must be > 0")
        self.slo = np.where(self.log_mask, np.log10(np.where(self.log_mask, self.lo, 1.0)), self.lo)
        self.shi = np.where(self.log_mask, np.log10(np.where(self.log_mask, self.hi, 1.0)), self.hi)
        self.cols = [PARAM_NAMES.index(n) for n in self.names]

    def to_natural(self, S: np.ndarray) -> np.ndarray:
        N = np.array(S, dtype=float)
        N[:, self.log_mask] = 10.0 ** N[:, self.log_mask]
        return np.clip(N, self.lo, self.hi)

    def full(self, N: np.ndarray) -> np.ndarray:
        P = np.zeros((N.shape[0], 7))
        P[:, self.cols] = N
        if self.constrain:
            with np.errstate(divide="ignore", invalid="ignore"):
                P[:, 5] = P[:, 1] * np.sqrt(P[:, 0] / P[:, 4])
        return P


def _run_swarm(problem: _Problem, curve, w1, w2, cfg: PsoConfig, seed_seq):
    rng = np.random.default_rng(seed_seq)
    lo, hi = problem.slo, problem.shi
    width = hi - lo
    vmax = cfg.velocity_clamp * width
    n, d = cfg.n_pop, lo.size
    logd = _log_data(curve)

    def evaluate(S):
        return _batch_cost(problem.full(problem.to_natural(S)), curve, w1, w2, logd)

    X = lo + rng.random((n, d)) * width
    V = np.zeros_like(X)
    f = evaluate(X)
    P, pf = X.copy(), f.copy()
    g = int(np.argmin(pf))
    G, gf = P[g].copy(), float(pf[g])
    history = np.empty(cfg.n_iter)
    idx = np.arange(n)
    for it in range(cfg.n_iter):
        if cfg.topology == "ring":
            nb = np.stack([pf[(idx - 1) % n], pf, pf[(idx + 1) % n]], axis=1)
            leader = P[(idx + np.argmin(nb, axis=1) - 1) % n]
        else:
            leader = G
        r1 = rng.random((n, d))
        r2 = rng.random((n, d))
        V = cfg.inertia * V + cfg.cognitive * r1 * (P - X) + cfg.social * r2 * (leader - X)
        np.clip(V, -vmax, vmax, out=V)
        Xn = X + V
        hit = (Xn < lo) | (Xn > hi)
        X = np.clip(Xn, lo, hi)
        V[hit] = 0.0
        f = evaluate(X)
        better = f < pf
        P[better] = X[better]
        pf[better] = f[better]
        # sequential reduction in particle order: first minimum wins
        g = int(np.argmin(pf))
        if pf[g] < gf:
            G, gf = P[g].copy(), float(pf[g])
        history[it] = gf
    return problem.to_natural(G[None, :])[0], gf, history


def _canonical(row7: np.ndarray) -> np.ndarray:
    # the FMM modulus is symmetric in (alpha, beta); report alpha >= beta
    if row7[3] > row7[2]:
        row7 = row7.copy()
        row7[[2, 3]] = row7[[3, 2]]
    return row7


def fit(data: MasterCurve, kind=ModelKind.FMM_FMG, bounds: ParamBounds | None = None,
        cfg: PsoConfig | None = None, constrain_tau2: bool = True,
        w1: float = 0.5, w2: float = 0.5, n_jobs: int | None = 1) -> FitResult:
    """Fit a two-branch model to ``data`` with ``cfg.n_runs`` independent swarms.

    Results depend only on ``(data, kind, bounds, cfg, constrain_tau2, weights)``;
    ``n_jobs`` only changes how many runs execute at once.
    """
    kind = ModelKind.parse(kind)
    cfg = cfg or PsoConfig()
    bounds = bounds or ParamBounds.default(kind, constrain_tau2)
    _check_weights(w1, w2)
    if data.x[-1] <= data.x[0]:
        raise ConfigError("zero-width frequency grid")
    if data.decades < 2:
        logger.warning("master curve spans only %.2f decades", data.decades)
    problem = _Problem(kind, constrain_tau2, bounds, cfg.log_scale_times)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_runs)

    def one(s):
        return _run_swarm(problem, data, w1, w2, cfg, s)

    workers = max(1, min(int(n_jobs or 1), cfg.n_runs))
    if workers == 1:
        outs = [one(s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(one, seeds))

    rows = np.array([_canonical(problem.full(o[0][None, :])[0]) for o in outs])
    run_costs = np.array([o[1] for o in outs])
    history = np.array([o[2] for o in outs])
    cols = problem.cols
    ddof = 1 if cfg.n_runs > 1 else 0

    def spread(v):
        # identical runs have exactly zero spread (the mean itself may round)
        return 0.0 if np.all(v == v[0]) else float(np.std(v, ddof=ddof))

    mean = {n: float(np.mean(rows[:, c])) for n, c in zip(problem.names, cols)}
    std = {n: spread(rows[:, c]) for n, c in zip(problem.names, cols)}
    if constrain_tau2:
        mean["tau_c2"] = float(np.mean(rows[:, 5]))
        std["tau_c2"] = spread(rows[:, 5])
    best = int(np.argmin(run_costs))
    if not np.isfinite(run_costs[best]):
        raise DomainError("no feasible parameter set found inside the bounds")
    best_model = FractionalModel.from_vector(rows[best], kind=kind, tau2_constrained=constrain_tau2)
    rel = relative_error(best_model, data, w1, w2)
    logger.info("fit %s: best cost %.3e, relative error %.3e", kind.value, run_costs[best], rel)
    return FitResult(param_names=problem.names, mean=mean, std=std, best_model=best_model,
                     best_cost=float(run_costs[best]), relative_error=rel, run_costs=run_costs,
                     run_params=rows, history=history, kind=kind, constrain_tau2=constrain_tau2)
