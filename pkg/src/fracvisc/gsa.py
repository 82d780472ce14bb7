"""Variance-based (Sobol') global sensitivity analysis.

Sampling uses a Sobol' low-discrepancy sequence built from bundled Joe–Kuo
direction numbers. Two independent ``N x k`` matrices ``A`` and ``B`` are the
two halves of a ``2k``-dimensional sequence; ``AB_i`` is ``A`` with column
``i`` taken from ``B``. Per output point::

    V    = var([f(A); f(B)])
    S_i  = mean(f(B) * (f(AB_i) - f(A))) / V              (Saltelli 2010)
    ST_i = mean((f(A) - f(AB_i))**2) / (2 V)              (Jansen)

Parameters with a zero-width range carry no variance; they are left out of
the cross-sampling and their indices are reported as exactly zero.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .exceptions import ConfigError, DomainError
from .lsa import Output, ParamRanges
from .viscomodel import PARAM_NAMES, FractionalModel, moduli_rows
from ._validation import as_frequency_grid, check_positive_int, log_grid

_BITS = 32


@lru_cache(maxsize=1)
def _direction_table() -> tuple:
    """Rows ``(s, a, m)`` for dimensions 2, 3, ... parsed from the bundled asset."""
    text = resources.files("fracvisc").joinpath("data/sobol_directions.txt").read_text()
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        d, s, a, *m = (int(t) for t in line.split())
        if len(m) != s or d != len(rows) + 2:
            raise RuntimeError(f"corrupt direction-number row for dimension {d}")
        rows.append((s, a, tuple(m)))
    return tuple(rows)


def max_dimension() -> int:
    return len(_direction_table()) + 1


def _direction_integers(k: int) -> np.ndarray:
    """Direction integers ``v[j, b]`` (k, 32), scaled to 32-bit fixed point."""
    v = np.zeros((k, _BITS), dtype=np.uint64)
    v[0] = [1 << (_BITS - 1 - b) for b in range(_BITS)]
    table = _direction_table()
    for j in range(1, k):
        s, a, m = table[j - 1]
        mm = list(m)
        for b in range(s, _BITS):
            new = mm[b - s] ^ (mm[b - s] << s)
            for r in range(1, s):
                if (a >> (s - 1 - r)) & 1:
                    new ^= mm[b - r] << r
            mm.append(new)
        v[j] = [mm[b] << (_BITS - 1 - b) for b in range(_BITS)]
    return v


def _scramble(X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Linear matrix scramble plus digital shift of 32-bit integer points."""
    n, k = X.shape
    shifts = np.arange(_BITS - 1, -1, -1, dtype=np.uint64)
    out = np.empty_like(X)
    for j in range(k):
        lower = np.tril(rng.integers(0, 2, size=(_BITS, _BITS), dtype=np.uint8), -1)
        lower[np.diag_indices(_BITS)] = 1
        bits = ((X[:, j, None] >> shifts) & np.uint64(1)).astype(np.uint8)
        scr = (bits.astype(np.int64) @ lower.T.astype(np.int64)) & 1
        shift = rng.integers(0, 2, size=_BITS, dtype=np.int64)
        scr ^= shift
        out[:, j] = (scr.astype(np.uint64) << shifts).sum(axis=1, dtype=np.uint64)
    return out


def sobol_points(n: int, k: int, skip: int = 0, scramble: bool = False, seed=None) -> np.ndarray:
    """First ``n`` points of the ``k``-dimensional Sobol' sequence (Gray-code order).

    Parameters
    ----------
    n, k : int
        Point count and dimension (``1 <= k <= max_dimension()``).
    skip : int
        Number of leading points to drop (the unscrambled first point is 0).
    scramble : bool
        Apply a seeded linear matrix scramble and digital shift.
    seed : int, optional
        Seed for scrambling.

    Returns
    -------
    ndarray of shape (n, k) with entries in [0, 1).
    """
    n = check_positive_int(n, "n")
    k = check_positive_int(k, "k")
    skip = check_positive_int(skip, "skip", 0)
    if k > max_dimension():
        raise ConfigError(f"dimension {k} exceeds the {max_dimension()} provisioned dimensions")
    if n + skip > 2 ** _BITS:
        raise ConfigError("too many points requested")
    v = _direction_integers(k)
    idx = np.arange(skip, skip + n, dtype=np.uint64)
    gray = idx ^ (idx >> np.uint64(1))
    X = np.zeros((n, k), dtype=np.uint64)
    for b in range(_BITS):
        mask = ((gray >> np.uint64(b)) & np.uint64(1)).astype(bool)
        if not mask.any():
            continue
        X[mask] ^= v[:, b]
    if scramble:
        X = _scramble(X, np.random.default_rng(seed))
    return X.astype(np.float64) / float(2 ** _BITS)


# --- Saltelli cross-sampling ---------------------------------------------------------

@dataclass(frozen=True)
class SampleMatrices:
    """Base matrices ``A``, ``B`` (N, k) in the unit cube; ``AB(i)`` is built on demand."""

    A: np.ndarray
    B: np.ndarray

    @classmethod
    def sobol(cls, N: int, k: int, scramble: bool = False, seed=None) -> "SampleMatrices":
        U = sobol_points(N, 2 * k, skip=1, scramble=scramble, seed=seed)
        return cls(U[:, :k], U[:, k:])

    @property
    def N(self) -> int:
        return self.A.shape[0]

    @property
    def k(self) -> int:
        return self.A.shape[1]

    def AB(self, i: int) -> np.ndarray:
        M = self.A.copy()
        M[:, i] = self.B[:, i]
        return M


@dataclass
class SobolResult:
    """First- and total-order indices, shape (k, n_out), plus per-point variance."""

    names: tuple
    S: np.ndarray
    ST: np.ndarray
    V: np.ndarray
    N: int
    degenerate: np.ndarray
    grid: np.ndarray | None = None
    output: str | None = None

    def linf(self, total: bool = False) -> dict:
        M = self.ST if total else self.S
        return {n: float(np.max(np.abs(M[i]))) for i, n in enumerate(self.names)}

    def to_dict(self) -> dict:
        return {"names": list(self.names), "N": self.N, "output": self.output,
                "grid": self.grid, "V": self.V, "variance_degenerate": self.degenerate,
                "S": {n: self.S[i] for i, n in enumerate(self.names)},
                "ST": {n: self.ST[i] for i, n in enumerate(self.names)},
                "linf_S": self.linf(), "linf_ST": self.linf(total=True)}


def saltelli_indices(func, ranges: ParamRanges, N: int = 2 ** 14, scramble: bool = False,
                     seed=None, n_jobs: int | None = 1, min_N: int = 64) -> SobolResult:
    """Estimate first- and total-order Sobol' indices of ``func``.

    Parameters
    ----------
    func : callable
        Maps a parameter matrix ``Q`` of shape ``(M, k)`` (columns ordered as
        ``ranges.names``) to outputs of shape ``(M,)`` or ``(M, n_out)``.
    ranges : ParamRanges
        Independent uniform input ranges.
    N : int
        Base sample count; ``N * (k_active + 2)`` evaluations are made.
    scramble, seed
        Optional randomisation of the Sobol' points.
    n_jobs : int
        Thread count for the ``AB_i`` evaluations; results do not depend on it.
    """
    N = check_positive_int(N, "N", min_N)
    active = np.flatnonzero(~ranges.degenerate)
    k = ranges.k

    def evaluate(U):
        Q = np.tile(ranges.means, (U.shape[0], 1))
        Q[:, active] = ranges.lower[active] + U * (ranges.upper[active] - ranges.lower[active])
        y = np.asarray(func(Q), dtype=float)
        if y.shape[0] != U.shape[0]:
            raise ConfigError("func must return one row per parameter row")
        if not np.all(np.isfinite(y)):
            raise DomainError("model output is not finite on the range box")
        return y.reshape(U.shape[0], -1)

    if active.size == 0:
        y0 = evaluate(np.zeros((1, 0)))
        n_out = y0.shape[1]
        zeros = np.zeros((k, n_out))
        return SobolResult(ranges.names, zeros, zeros.copy(), np.zeros(n_out), N,
                           np.ones(n_out, dtype=bool))

    mats = SampleMatrices.sobol(N, active.size, scramble=scramble, seed=seed)
    fA = evaluate(mats.A)
    fB = evaluate(mats.B)
    stacked = np.vstack([fA, fB])
    V = np.var(stacked, axis=0)
    degenerate = np.ptp(stacked, axis=0) == 0
    safe_V = np.where(degenerate, 1.0, V)

    def column(j):
        fAB = evaluate(mats.AB(j))
        s = np.mean(fB * (fAB - fA), axis=0) / safe_V
        diff = fA - fAB
        st = 0.5 * np.mean(diff * diff, axis=0) / safe_V
        return s, st

    workers = max(1, min(int(n_jobs or 1), active.size))
    if workers == 1:
        cols = [column(j) for j in range(active.size)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cols = list(pool.map(column, range(active.size)))

    n_out = fA.shape[1]
    S = np.zeros((k, n_out))
    ST = np.zeros((k, n_out))
    for j, (s, st) in zip(active, cols):
        S[j] = np.where(degenerate, 0.0, s)
        ST[j] = np.where(degenerate, 0.0, st)
    return SobolResult(ranges.names, S, ST, np.where(degenerate, 0.0, V), N, degenerate)


def model_output_function(grid, output="storage"):
    """``func(Q)`` evaluating the chosen modulus for parameter rows ``Q`` (M, 7) on ``grid``."""
    output = Output.parse(output)
    grid = as_frequency_grid(grid, name="grid")

    def func(Q):
        es, el = moduli_rows(Q, grid)
        if output is Output.STORAGE:
            return es
        if output is Output.LOSS:
            return el
        return np.hypot(es, el)

    return func


def model_sobol_indices(baseline: FractionalModel, ranges: ParamRanges | None = None,
                        N: int = 2 ** 14, grid=None, output="storage", scramble: bool = False,
                        seed=None, n_jobs: int | None = 1) -> SobolResult:
    """Sobol' indices of a two-branch model output at every grid frequency.

    All seven parameters are independent factors (``tau_c2`` included);
    the default ranges have 5% relative standard deviation around ``baseline``.
    """
    grid = log_grid() if grid is None else as_frequency_grid(grid, name="grid")
    ranges = ranges or ParamRanges.from_baseline(baseline)
    if ranges.names != PARAM_NAMES:
        raise ConfigError(f"ranges must cover {PARAM_NAMES} in order")
    lo, hi = ranges.lower, ranges.upper
    if max(lo[2], lo[3]) <= min(hi[2], hi[3]) or lo[6] <= 0:
        raise DomainError("exponent ranges include alpha == beta in a branch; model undefined there")
    res =saltelli_indices(model_output_function(grid, output), ranges, N,
                           scramble=scramble, seed=seed, n_jobs=n_jobs)
    res.grid = grid
    res.output = Output.parse(output).value
    return res


# --- benchmark ---------------------------------------------------------------------

def ishigami(Q, a: float = 7.0, b: float = 0.1) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    x1, x2, x3 = Q[:, 0], Q[:, 1], Q[:, 2]
    return np.sin(x1) + a * np.sin(x2) ** 2 + b * x3 ** 4 * np.sin(x1)


def ishigami_first_order(a: float = 7.0, b: float = 0.1) -> np.ndarray:
    """Closed-form first-order indices of the Ishigami function on ``[-pi, pi]^3``."""
    pi4 = math.pi ** 4
    V = a * a / 8 + b * pi4 / 5 + b * b * pi4 * pi4 / 18 + 0.5
    V1 = 0.5 * (1 + b * pi4 / 5) ** 2
    V2 = a * a / 8
    return np.array([V1 / V, V2 / V, 0.0])


def ishigami_ranges() -> ParamRanges:
    return ParamRanges(("x1", "x2", "x3"), [-math.pi] * 3, [math.pi] * 3)
