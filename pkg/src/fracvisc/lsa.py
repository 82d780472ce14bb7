"""Normalised local sensitivity (elasticity) indices of the model moduli.

For an output ``y`` (storage modulus, loss modulus or the complex-modulus
magnitude) and a parameter ``q`` the index is ``(q / y) * dy/dq``. Derivatives
are closed-form. With ``u = x * tau``, ``L = ln u`` and ``d = alpha - beta``
a branch contributes ``E_c * N / D`` with::

    N_r = u**alpha cos(pi alpha / 2) + u**(2 alpha - beta) cos(pi beta / 2)
    N_i = u**alpha sin(pi alpha / 2) + u**(2 alpha - beta) sin(pi beta / 2)
    D   = 1 + 2 u**d cos(pi d / 2) + u**(2 d)

and every parameter derivative follows from the quotient rule applied to the
partials of ``N`` and ``D``. The magnitude index uses
``(q / |E*|) * sqrt((dE'/dq)**2 + (dE''/dq)**2)``.

Indices are averaged over parameter uncertainty by Monte Carlo sampling of
independent uniform ranges, and summarised by norms over log frequency.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DomainError
from .viscomodel import PARAM_NAMES, FractionalModel, ModelKind, cos_half_pi, sin_half_pi
from ._validation import as_frequency_grid, check_positive_int, log_grid

HALF_PI = 0.5 * math.pi


class Output(str, enum.Enum):
    STORAGE = "storage"
    LOSS = "loss"
    MAGNITUDE = "magnitude"

    @classmethod
    def parse(cls, value) -> "Output":
        if isinstance(value, cls):
            return value
        aliases = {"e'": "storage", "e_storage": "storage", "e''": "loss", "e_loss": "loss",
                   "estar": "magnitude", "|e*|": "magnitude", "abs": "magnitude"}
        key = str(value).strip().lower()
        key = aliases.get(key, key)
        for o in cls:
            if o.value == key:
                return o
        raise ConfigError(f"unknown output {value!r}; expected storage, loss or magnitude")


# --- parameter ranges -----------------------------------------------------------

@dataclass(frozen=True)
class ParamRanges:
    """Independent uniform ranges ``[lower_i, upper_i]``, one per named parameter."""

    names: tuple
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        lo = np.array(self.lower, dtype=float).reshape(-1)
        hi = np.array(self.upper, dtype=float).reshape(-1)
        if not (len(names) == lo.size == hi.size) or not names:
            raise ConfigError("names, lower and upper must be non-empty and of equal length")
        if len(set(names)) != len(names):
            raise ConfigError("duplicate parameter names")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))) or np.any(lo > hi):
            raise ConfigError("each range needs finite lower <= upper")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def from_means(cls, names, means, rel_std: float = 0.05) -> "ParamRanges":
        """Ranges with mean ``mu`` and standard deviation ``rel_std * |mu|``.

        A uniform law with that mean and deviation has half-width
        ``sqrt(3) * rel_std * |mu|``; ``mu = 0`` gives the point range ``[0, 0]``.
        """
        if not rel_std >= 0:
            raise ConfigError("rel_std must be >= 0")
        mu = np.asarray(means, dtype=float)
        half = math.sqrt(3.0) * rel_std * np.abs(mu)
        return cls(tuple(names), mu - half, mu + half)

    @classmethod
    def from_baseline(cls, model: FractionalModel, rel_std: float = 0.05) -> "ParamRanges":
        """Ranges for all seven model parameters around ``model``."""
        return cls.from_means(PARAM_NAMES, model.to_vector(), rel_std)

    @property
    def k(self) -> int:
        return len(self.names)

    @property
    def means(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def stds(self) -> np.ndarray:
        return (self.upper - self.lower) / math.sqrt(12.0)

    @property
    def degenerate(self) -> np.ndarray:
        return self.lower == self.upper

    def scale(self, U) -> np.ndarray:
        """Map unit-cube rows ``U`` (n, k) affinely onto the box."""
        U = np.asarray(U, dtype=float)
        return self.lower + U * (self.upper - self.lower)


# --- sensitivity curves and norms -------------------------------------------------

class Norm(str, enum.Enum):
    L1 = "L1"
    L2 = "L2"
    LINF = "Linf"

    @classmethod
    def parse(cls, value) -> "Norm":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for n in cls:
            if n.value.lower() == key or (n is cls.LINF and key in ("inf", "l_inf", "max")):
                return n
        raise ConfigError(f"unknown norm {value!r}; expected L1, L2 or Linf")


@dataclass(frozen=True)
class SensitivityCurve:
    """Index values of one (output, parameter) pair on a frequency grid."""

    grid: np.ndarray
    values: np.ndarray
    param: str
    output: Output

    def __post_init__(self):
        g = as_frequency_grid(self.grid)
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.size != g.size:
            raise ConfigError("grid and values must have equal lengths")
        if not np.all(np.isfinite(v)):
            raise DomainError(f"non-finite index values for {self.param}")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "output", Output.parse(self.output))

    def norm(self, kind="L1", log_base: float = math.e) -> float:
        return index_norm(self, kind, log_base)


def index_norm(curve: SensitivityCurve, kind="L1", log_base: float = math.e) -> float:
    """Norm of ``|S|`` over the logarithmic frequency measure.

    ``L1 = int |S| dlog(x)`` and ``L2 = sqrt(int S**2 dlog(x))`` by the
    trapezoidal rule; ``Linf = max |S|``. The logarithm base of the measure
    defaults to ``e``; pass ``log_base=10`` to integrate per decade.
    """
    kind = Norm.parse(kind)
    a = np.abs(curve.values)
    if kind is Norm.LINF:
        return float(np.max(a))
    if curve.grid.size < 2:
        raise ConfigError("L1/L2 norms need at least 2 grid points")
    if not (log_base > 0 and log_base != 1):
        raise ConfigError("log_base must be positive and != 1")
    t = np.log(curve.grid) / math.log(log_base)
    if kind is Norm.L1:
        return float(np.trapezoid(a, t))
    return float(math.sqrt(np.trapezoid(a * a, t)))


# --- analytic derivatives -----------------------------------------------------------

def _branch_with_gradient(E_c, tau, alpha, beta, x):
    """Storage/loss of one branch and their partials w.r.t. (E_c, tau, alpha, beta).

    Returns ``(y_r, y_i, g_r, g_i)`` with ``g_*`` a 4-tuple of arrays.
    All inputs broadcast.
    """
    u = np.multiply(x, tau)
    L = np.log(u)
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    d = alpha - beta
    ua = u ** alpha
    ub = u ** (2 * alpha - beta)
    ud = u ** d
    ca, sa = cos_half_pi(alpha), sin_half_pi(alpha)
    cb, sb = cos_half_pi(beta), sin_half_pi(beta)
    cd, sd = cos_half_pi(d), sin_half_pi(d)

    Nr = ua * ca + ub * cb
    Ni = ua * sa + ub * sb
    D = 1.0 + 2.0 * ud * cd + ud * ud

    # partials with respect to L = ln u (so tau * d/dtau = d/dL)
    Nr_L = alpha * ua * ca + (2 * alpha - beta) * ub * cb
    Ni_L = alpha * ua * sa + (2 * alpha - beta) * ub * sb
    D_L = 2.0 * d * ud * cd + 2.0 * d * ud * ud
    # partials with respect to alpha
    Nr_a = ua * (L * ca - HALF_PI * sa) + 2.0 * L * ub * cb
    Ni_a = ua * (L * sa + HALF_PI * ca) + 2.0 * L * ub * sb
    D_d = 2.0 * ud * (L * cd - HALF_PI * sd) + 2.0 * L * ud * ud
    # partials with respect to beta (D depends on beta only through d)
    Nr_b = -ub * (L * cb + HALF_PI * sb)
    Ni_b = ub * (HALF_PI * cb - L * sb)

    inv_D = 1.0 / D
    inv_D2 = inv_D * inv_D
    qr = Nr * inv_D
    qi = Ni * inv_D

    def quot(n_p, n, d_p):
        return (n_p * D - n * d_p) * inv_D2

    g_r = (qr,
           E_c * quot(Nr_L, Nr, D_L) / tau,
           E_c * quot(Nr_a, Nr, D_d),
           E_c * quot(Nr_b, Nr, -D_d))
    g_i = (qi,
           E_c * quot(Ni_L, Ni, D_L) / tau,
           E_c * quot(Ni_a, Ni, D_d),
           E_c * quot(Ni_b, Ni, -D_d))
    return E_c * qr, E_c * qi, g_r, g_i


def model_gradient(P, x):
    """Moduli and their partials for parameter rows ``P`` (n, 7) on grid ``x`` (m,).

    Returns ``(E', E'', dE', dE'')`` with moduli of shape (n, m) and gradients
    of shape (n, 7, m) in :data:`PARAM_NAMES` order. The gradient with respect
    to ``tau_c2`` treats it as an independent parameter.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    x = np.asarray(x, dtype=float)[None, :]
    c = P[:, :, None]
    r1, i1, g1r, g1i = _branch_with_gradient(c[:, 0], c[:, 1], c[:, 2], c[:, 3], x)
    r2, i2, g2r, g2i = _branch_with_gradient(c[:, 4], c[:, 5], c[:, 6], 0.0, x)
    gr = np.stack([g1r[0], g1r[1], g1r[2], g1r[3], g2r[0], g2r[1], g2r[2]], axis=1)
    gi = np.stack([g1i[0], g1i[1], g1i[2], g1i[3], g2i[0], g2i[1], g2i[2]], axis=1)
    return r1 + r2, i1 + i2, gr, gi


def _indices_from_gradient(P, er, ei, gr, gi, output: Output):
    q = P[:, :, None]
    if output is Output.STORAGE:
        y, g = er[:, None, :], gr
    elif output is Output.LOSS:
        y, g = ei[:, None, :], gi
    else:
        y = np.hypot(er, ei)[:, None, :]
        g = np.sqrt(gr * gr + gi * gi)
    with np.errstate(invalid="ignore", divide="ignore"):
        S = q * g / y
    # a parameter sitting at zero contributes nothing through its q prefactor
    return np.where(q == 0, 0.0, S)


def _check_degenerate_exponents(P):
    P = np.atleast_2d(P)
    if np.any(P[:, 2] == P[:, 3]) or np.any(P[:, 6] == 0.0):
        raise DomainError("alpha == beta in a branch: characteristic parameters are undefined")


def local_indices(m: FractionalModel, x, output="storage") -> np.ndarray:
    """Normalised local indices for every parameter.

    Parameters
    ----------
    m : FractionalModel
    x : float or array_like
        Shifted angular frequencies (rad/s), strictly ascending if an array.
    output : {"storage", "loss", "magnitude"}

    Returns
    -------
    ndarray
        Shape ``(7,)`` for scalar ``x`` else ``(7, len(x))``, rows in
        :data:`PARAM_NAMES` order.
    """
    output = Output.parse(output)
    scalar = np.ndim(x) == 0
    g = as_frequency_grid(x, name="x")
    P = m.to_vector()[None, :]
    _check_degenerate_exponents(P)
    er, ei, gr, gi = model_gradient(P, g)
    y = {Output.STORAGE: er, Output.LOSS: ei, Output.MAGNITUDE: np.hypot(er, ei)}[output]
    if np.any(y == 0):
        raise DomainError(f"{output.value} modulus is zero; normalised index undefined")
    S = _indices_from_gradient(P, er, ei, gr, gi, output)[0]
    return S[:, 0] if scalar else S


# --- Monte Carlo averaging -----------------------------------------------------------

@dataclass
class LsaResult:
    """MC mean and standard deviation of the index curves of one output."""

    grid: np.ndarray
    names: tuple
    output: Output
    mean: np.ndarray
    std: np.ndarray
    n_samples: int
    n_rejected: int

    def curve(self, param: str, which: str = "mean") -> SensitivityCurve:
        i = self.names.index(param)
        vals = self.mean[i] if which == "mean" else self.std[i]
        return SensitivityCurve(self.grid, vals, param, self.output)

    def norms(self, kind="L1", log_base: float = math.e) -> dict:
        return {n: index_norm(self.curve(n), kind, log_base) for n in self.names}

    def to_dict(self) -> dict:
        return {"output": self.output.value, "grid": self.grid, "names": list(self.names),
                "mean": {n: self.mean[i] for i, n in enumerate(self.names)},
                "std": {n: self.std[i] for i, n in enumerate(self.names)},
                "n_samples": self.n_samples, "n_rejected": self.n_rejected,
                "norms": {k.value: self.norms(k) for k in Norm}}


def _chunk_stats(P, grid, output):
    er, ei, gr, gi = model_gradient(P, grid)
    S = _indices_from_gradient(P, er, ei, gr, gi, output)
    n = S.shape[0]
    mean = S.mean(axis=0)
    dev = S - mean
    return n, mean, np.einsum("ijk,ijk->jk", dev, dev), S.min(axis=0), S.max(axis=0)


def _combine(a, b):
    # Chan et al. pairwise merge of (count, mean, sum of squared deviations), plus extremes
    na, ma, Ma, lo_a, hi_a = a
    nb, mb, Mb, lo_b, hi_b = b
    n = na + nb
    delta = mb - ma
    return (n, ma + delta * (nb / n), Ma + Mb + delta * delta * (na * nb / n),
            np.minimum(lo_a, lo_b), np.maximum(hi_a, hi_b))


def _valid_rows(P, grid, output):
    ok = (P[:, 2] != P[:, 3]) & (P[:, 6] != 0.0)
    with np.errstate(all="ignore"):
        er, ei, gr, gi = model_gradient(P, grid)
        y = {Output.STORAGE: er, Output.LOSS: ei, Output.MAGNITUDE: np.hypot(er, ei)}[output]
        S = _indices_from_gradient(P, er, ei, gr, gi, output)
    ok &= np.all(y != 0, axis=1) & np.all(np.isfinite(S), axis=(1, 2))
    return ok


def mc_average_indices(baseline: FractionalModel, ranges: ParamRanges | None = None,
                       n_samples: int = 2000, grid=None, output="storage", seed=0,
                       chunk_size: int = 250, n_jobs: int | None = 1,
                       max_redraws: int = 100) -> LsaResult:
    """Monte Carlo mean and standard deviation of the local index curves.

    All seven parameters are drawn jointly and independently from ``ranges``
    (default: 5% relative standard deviation around ``baseline``). Draws for
    which an index is undefined are redrawn from the same generator and
    counted in ``n_rejected``. Results depend on ``seed`` and ``chunk_size``
    but not on ``n_jobs``.
    """
    output = Output.parse(output)
    n_samples = check_positive_int(n_samples, "n_samples")
    chunk_size = check_positive_int(chunk_size, "chunk_size")
    grid = log_grid() if grid is None else as_frequency_grid(grid, name="grid")
    ranges = ranges or ParamRanges.from_baseline(baseline)
    if ranges.names != PARAM_NAMES:
        raise ConfigError(f"ranges must cover {PARAM_NAMES} in order")
    rng = np.random.default_rng(seed)
    P = ranges.scale(rng.random((n_samples, ranges.k)))
    rejected = 0
    for _ in range(max_redraws):
        bad = ~_valid_rows(P, grid, output)
        nbad = int(bad.sum())
        if nbad == 0:
            break
        rejected += nbad
        P[bad] = ranges.scale(rng.random((nbad, ranges.k)))
    else:
        raise DomainError("could not draw valid parameter sets inside the ranges")

    chunks = [P[i:i + chunk_size] for i in range(0, n_samples, chunk_size)]
    workers = max(1, min(int(n_jobs or 1), len(chunks)))
    if workers == 1:
        stats = [_chunk_stats(c, grid, output) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(lambda c: _chunk_stats(c, grid, output), chunks))
    # deterministic pairwise (tree) reduction in chunk order
    while len(stats) > 1:
        merged = [_combine(stats[i], stats[i + 1]) for i in range(0, len(stats) - 1, 2)]
        if len(stats) % 2:
            merged.append(stats[-1])
        stats = merged
    n, mean, M2, lo, hi = stats[0]
    std = np.sqrt(M2 / (n - 1)) if n > 1 else np.zeros_like(mean)
    # points where every draw agrees: report that value exactly, with no spread
    const = lo == hi
    mean = np.where(const, lo, mean)
    std = np.where(const, 0.0, std)
    return LsaResult(grid=grid, names=PARAM_NAMES, output=output, mean=mean, std=std,
                     n_samples=n_samples, n_rejected=rejected)


def baseline_model(kind, values) -> FractionalModel:
    """Unconstrained model from a parameter 7-vector (tau_c2 is taken as given)."""
    return FractionalModel.from_vector(values, kind=ModelKind.parse(kind), tau2_constrained=False)
