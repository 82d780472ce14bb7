"""Frequency-domain fractional Maxwell branches and their parallel combinations.

A single branch is two spring-pots in series. In the non-dimensional
``(E_c, tau_c, alpha, beta)`` parameterisation its complex modulus is::

    E*(x) / E_c = (i x tau_c)**alpha / (1 + (i x tau_c)**(alpha - beta))

with ``x = a_T * omega`` the shifted angular frequency. Setting ``beta = 0``
gives the fractional Maxwell gel (FMG). Production code evaluates the real
trigonometric split of that expression; the complex form is only used by the
tests as an oracle.

Units are MPa for moduli, s for times and rad/s for frequencies.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateExponentError, DomainError

GAS_CONSTANT = 8.314462618  # J / (mol K)

#: Canonical parameter order of the 7-vector used throughout the package.
PARAM_NAMES = ("E_c1", "tau_c1", "alpha1", "beta1", "E_c2", "tau_c2", "alpha2")


class ModelKind(str, enum.Enum):
    FMG_FMG = "FMG-FMG"
    FMM_FMG = "FMM-FMG"

    @classmethod
    def parse(cls, value: "str | ModelKind") -> "ModelKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper().replace("_", "-")
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(f"unknown model kind {value!r}; expected one of "
                         f"{[k.value for k in cls]}")

    @property
    def param_names(self) -> tuple[str, ...]:
        """Names of the parameters that vary for this kind (beta1 is fixed for FMG-FMG)."""
        if self is ModelKind.FMG_FMG:
            return tuple(n for n in PARAM_NAMES if n != "beta1")
        return PARAM_NAMES


@dataclass(frozen=True)
class BranchParams:
    """One fractional Maxwell branch.

    The quasi-properties of the two spring-pots (``V`` with exponent alpha,
    ``G`` with exponent beta) map onto this parameterisation through
    ``E_c = (G**alpha / V**beta) ** (1 / (alpha - beta))`` and
    ``tau_c = (V / G) ** (1 / (alpha - beta))``.

    The time-domain ordering ``beta <= alpha`` is not enforced: the
    frequency-domain modulus is invariant under swapping the two exponents.
    """

    E_c: float
    tau_c: float
    alpha: float
    beta: float = 0.0

    def __post_init__(self):
        for name in ("E_c", "tau_c", "alpha", "beta"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v!r}")
        if self.E_c < 0:
            raise DomainError(f"E_c must be >= 0, got {self.E_c}")
        if self.tau_c <= 0:
            raise DomainError(f"tau_c must be > 0, got {self.tau_c}")
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v}")

    @property
    def is_gel(self) -> bool:
        return self.beta == 0.0


def constrained_tau2(tau1: float, Ec1: float, Ec2: float) -> float:
    """Second-branch time-scale that equalises the Pi-number of both branches.

    ``tau2 = tau1 * sqrt(Ec1 / Ec2)``.
    """
    if not (tau1 > 0 and Ec1 > 0 and Ec2 > 0):
        raise DomainError(
            f"constrained_tau2 needs positive inputs, got tau1={tau1}, Ec1={Ec1}, Ec2={Ec2}")
    return tau1 * math.sqrt(Ec1 / Ec2)


@dataclass(frozen=True)
class FractionalModel:
    """Two fractional branches in parallel."""

    branch1: BranchParams
    branch2: BranchParams
    kind: ModelKind = ModelKind.FMM_FMG
    tau2_constrained: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind.parse(self.kind))
        if self.branch2.beta != 0.0:
            raise DomainError("branch2 must be a gel branch (beta = 0)")
        if self.kind is ModelKind.FMG_FMG and self.branch1.beta != 0.0:
            raise DomainError("FMG-FMG requires beta = 0 on both branches")
        if self.tau2_constrained:
            expected = constrained_tau2(self.branch1.tau_c, self.branch1.E_c, self.branch2.E_c)
            if abs(self.branch2.tau_c - expected) > 1e-12 * expected:
                raise DomainError(
                    f"tau_c2={self.branch2.tau_c} violates the time-scale constraint "
                    f"(expected {expected})")

    @classmethod
    def from_vector(cls, values, kind=ModelKind.FMM_FMG, tau2_constrained=False):
        """Build from the 7-vector ``(E_c1, tau_c1, alpha1, beta1, E_c2, tau_c2, alpha2)``.

        When ``tau2_constrained`` is true the supplied ``tau_c2`` is ignored and
        recomputed from the constraint.
        """
        v = [float(a) for a in values]
        if len(v) != 7:
            raise ValueError(f"expected 7 parameters, got {len(v)}")
        if tau2_constrained:
            v[5] = constrained_tau2(v[1], v[0], v[4])
        return cls(BranchParams(v[0], v[1], v[2], v[3]),
                   BranchParams(v[4], v[5], v[6], 0.0),
                   kind=kind, tau2_constrained=tau2_constrained)

    @classmethod
    def constrained(cls, E_c1, tau_c1, alpha1, beta1, E_c2, alpha2, kind=ModelKind.FMM_FMG):
        tau_c2 = constrained_tau2(tau_c1, E_c1, E_c2)
        return cls.from_vector([E_c1, tau_c1, alpha1, beta1, E_c2, tau_c2, alpha2],
                               kind=kind, tau2_constrained=True)

    def to_vector(self) -> np.ndarray:
        b1, b2 = self.branch1, self.branch2
        return np.array([b1.E_c, b1.tau_c, b1.alpha, b1.beta, b2.E_c, b2.tau_c, b2.alpha])

    def as_dict(self) -> dict:
        return dict(zip(PARAM_NAMES, self.to_vector().tolist()))


def _check_frequency(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("shifted frequency must be finite and > 0")
    return x


def cos_half_pi(a):
    """``cos(pi * a / 2)`` for ``|a| <= 1``, exact at ``a`` in {-1, 0, 1}."""
    a = np.abs(np.asarray(a, dtype=float))
    return np.where(a <= 0.5, np.cos(0.5 * np.pi * a), np.sin(0.5 * np.pi * (1.0 - a)))


def sin_half_pi(a):
    """``sin(pi * a / 2)`` for ``|a| <= 1``, exact at ``a`` in {-1, 0, 1}."""
    a = np.asarray(a, dtype=float)
    m = np.abs(a)
    return np.sign(a) * np.where(m <= 0.5, np.sin(0.5 * np.pi * m), np.cos(0.5 * np.pi * (1.0 - m)))


def branch_terms(E_c, tau, alpha, beta, x):
    """Vectorised storage/loss moduli of fractional branches.

    All arguments broadcast against each other. No validation is done here;
    degenerate exponents (alpha == beta) return NaN so that callers such as
    the optimizer can reject them in bulk.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    u = np.multiply(x, tau)
    d = alpha - beta
    ua = u ** alpha
    ub = u ** (2 * alpha - beta)
    ud = u ** d
    den = 1.0 + 2.0 * ud * cos_half_pi(d) + ud * ud
    num_r = ua * cos_half_pi(alpha) + ub * cos_half_pi(beta)
    num_i = ua * sin_half_pi(alpha) + ub * sin_half_pi(beta)
    scale = np.where(d == 0, np.nan, E_c)
    return scale * num_r / den, scale * num_i / den


def branch_moduli(p: BranchParams, x):
    """Storage and loss modulus (MPa) of one branch at shifted frequency ``x``.

    Raises
    ------
    DomainError
        If any ``x <= 0``.
    DegenerateExponentError
        If ``alpha == beta``.
    """
    x = _check_frequency(x)
    if p.alpha == p.beta:
        raise DegenerateExponentError(
            f"alpha == beta == {p.alpha}: characteristic modulus and time are undefined")
    e1, e2 = branch_terms(p.E_c, p.tau_c, p.alpha, p.beta, x)
    if e1.ndim == 0:
        return float(e1), float(e2)
    return e1, e2


def model_moduli(m: FractionalModel, x):
    """Storage and loss modulus (MPa) of the two-branch model: the branch sum."""
    s1, l1 = branch_moduli(m.branch1, x)
    s2, l2 = branch_moduli(m.branch2, x)
    return s1 + s2, l1 + l2


def moduli_rows(P, x):
    """Moduli for many parameter 7-vectors at once.

    ``P`` has shape ``(n, 7)`` in :data:`PARAM_NAMES` order and ``x`` shape
    ``(m,)``; returns storage and loss arrays of shape ``(n, m)``. Like
    :func:`branch_terms`, this performs no validation.
    """
    c = np.asarray(P, dtype=float)[:, :, None]
    x = np.asarray(x, dtype=float)[None, :]
    s1, l1 = branch_terms(c[:, 0], c[:, 1], c[:, 2], c[:, 3], x)
    s2, l2 = branch_terms(c[:, 4], c[:, 5], c[:, 6], 0.0, x)
    return s1 + s2, l1 + l2


def complex_modulus(m: FractionalModel, x) -> np.ndarray:
    e1, e2 = model_moduli(m, x)
    return np.asarray(e1) + 1j * np.asarray(e2)


# --- time-temperature shift ------------------------------------------------

@dataclass(frozen=True)
class TS2Params:
    """Two-state, two-timescale shift-factor parameters.

    ``E1`` and ``E2`` are the low- and high-temperature activation energies
    (J/mol), ``dS_over_R`` the dimensionless transition entropy, ``T_star``
    the transition temperature and ``T_o`` the reference temperature (K).
    """

    E1: float
    E2: float
    dS_over_R: float
    T_star: float
    T_o: float
    R: float = field(default=GAS_CONSTANT)

    def __post_init__(self):
        if not (self.T_star > 0 and self.T_o > 0):
            raise DomainError("T_star and T_o must be positive")


def _ts2_term(p: TS2Params, T):
    # 1 / (1 + exp(z)) written via logaddexp so large |z| neither overflows nor underflows badly
    z = p.dS_over_R * (1.0 - p.T_star / T)
    weight = np.exp(-np.logaddexp(0.0, z))
    return p.E1 / (p.R * T) + (p.E2 - p.E1) / (p.R * T) * weight


def ts2_log_shift(p: TS2Params, T):
    """Natural log of the TS2 shift factor ``a_T`` at temperature ``T`` (K).

    The reference contribution is subtracted, so ``ts2_log_shift(p, p.T_o) == 0``.
    """
    T_arr = np.asarray(T, dtype=float)
    if np.any(~np.isfinite(T_arr)) or np.any(T_arr <= 0):
        raise DomainError("temperature must be > 0 K")
    out = _ts2_term(p, T_arr) - _ts2_term(p, float(p.T_o))
    # vectorised and scalar exp may differ in the last ulp
    out = np.where(T_arr == p.T_o, 0.0, out)
    return float(out) if out.ndim == 0 else out


# --- dimensionless Pi-number -----------------------------------------------

@dataclass(frozen=True)
class MediumProps:
    """Density (kg/m^3) and characteristic morphological length (m)."""

    rho: float
    L: float

    def __post_init__(self):
        if not (self.rho > 0 and self.L > 0):
            raise DomainError("rho and L must be positive")


def sound_speed(E_pa: float, rho: float) -> float:
    """One-dimensional speed of sound ``sqrt(E / rho)`` (E in Pa)."""
    if not (E_pa > 0 and rho > 0):
        raise DomainError("modulus and density must be positive")
    return math.sqrt(E_pa / rho)


def pi_number(med: MediumProps, Ec: float, tau_c: float) -> float:
    """``N_P = L / (c tau_c)`` with ``Ec`` given in MPa."""
    if not (Ec > 0 and tau_c > 0):
        raise DomainError("Ec and tau_c must be positive")
    return med.L / (sound_speed(Ec * 1e6, med.rho) * tau_c)
