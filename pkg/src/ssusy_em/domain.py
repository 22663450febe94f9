"""Core types shared by every module of the package.

Mass profiles, shape-invariance parameters, uniform grids, and the small
result records produced by the solvers live here.  Constructors normalize
their inputs but do not reject them; use :func:`validate` to check a
profile and parameter set before building operators from it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

TIE_TOL = 1e-12


class Branch(enum.Enum):
    """Which zero-mode seed a ladder state is built on."""

    J1 = "j1"
    J2 = "j2"


class Classification(enum.Enum):
    """Nature of the inverse-square term at an interior node."""

    NON_SINGULAR = "non_singular"
    ATTRACTIVE = "attractive"
    REPULSIVE = "repulsive"


class ReductionType(enum.Enum):
    TYPE_I = "type_i"
    TYPE_II = "type_ii"


class WLabel(enum.Enum):
    """Reduction branch that produced a first-order superpotential."""

    GENERIC = "generic"
    TYPE_I_W1 = "type_i_w1"
    TYPE_I_W2 = "type_i_w2"
    TYPE_II_W1 = "type_ii_w1"
    TYPE_II_W2 = "type_ii_w2"


class SsusyError(Exception):
    """Base class for every error raised by this package."""


class GridTooSmall(SsusyError):
    pass


class NodeInDomain(SsusyError):
    pass


class SuperpotentialNode(SsusyError):
    """A first-order superpotential has a pole inside the grid."""

    def __init__(self, node: float, message: str | None = None):
        self.node = node
        super().__init__(message or f"superpotential pole near x = {node!r}")


class SingularInDomain(SsusyError):
    pass


class ConvergenceFailure(SsusyError):
    """Inverse iteration failed to settle for one eigenvector."""

    def __init__(self, index: int, message: str | None = None):
        self.index = index
        super().__init__(message or f"eigenvector {index} did not converge")


class LengthMismatch(SsusyError):
    pass


class UnderResolved(SsusyError):
    pass


class SequenceTerminated(SsusyError):
    """Raising a state annihilated it, so the ladder stops there."""


def is_tie(lam: float, k3: float, tol: float = TIE_TOL) -> bool:
    """True when the two rate constants are equal up to roundoff.

    The tie case switches several formulas to their pole-free limits, so
    the comparison is relative to the size of the constants themselves.
    """
    return abs(lam - k3) <= tol * (1.0 + abs(lam) + abs(k3))


@dataclass(frozen=True)
class ConstantMass:
    """Uniform mass ``m(x) = m0``."""

    m0: float = 1.0

    @property
    def kind(self) -> str:
        return "constant"


@dataclass(frozen=True)
class HyperbolicMass:
    """Smooth step profile ``m(x) = (alpha + beta*tanh(x))**2``.

    The profile is invariant under flipping the sign of both parameters,
    so the constructor normalizes to ``alpha >= 0``.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha < 0.0:
            object.__setattr__(self, "alpha", -self.alpha)
            object.__setattr__(self, "beta", -self.beta)

    @property
    def kind(self) -> str:
        return "hyperbolic"


@dataclass(frozen=True)
class AlgebraicMass:
    """Rational bump profile ``m(x) = ((alpha + x**2) / (1 + x**2))**2``."""

    alpha: float

    @property
    def kind(self) -> str:
        return "algebraic"


MassProfile = ConstantMass | HyperbolicMass | AlgebraicMass


@dataclass(frozen=True)
class OrderingParams:
    """Exponents of the kinetic-term ordering, constrained by a + b + c = -1.

    Only the symmetric combination ``eta`` and the pair (a, b) enter the
    ordering correction, so c is never stored.
    """

    a: float = 0.0
    b: float = -1.0

    @classmethod
    def kinetic_symmetric(cls) -> "OrderingParams":
        """Ordering with the derivative sandwiched by the inverse mass."""
        return cls(a=0.0, b=-1.0)

    @property
    def eta(self) -> float:
        return 1.0 + self.b + self.a * (self.a + self.b + 1.0)


@dataclass(frozen=True)
class SIParams:
    """Constants of the shape-invariant family.

    ``lam`` is the level spacing rate, ``k3`` the splitting between the
    two ladder branches, ``l1`` the linear coefficient of the spectral
    polynomial, and ``gamma`` the integration constant of the
    superpotential.  The quadratic coefficient and the two seed energies
    are derived.
    """

    lam: float
    k3: float
    l1: float
    gamma: float = 0.0

    @property
    def l2(self) -> float:
        return (self.l1 * self.l1 - self.k3 * self.k3) / 4.0

    @property
    def eta1(self) -> float:
        return 0.5 * (-self.l1 + self.k3)

    @property
    def eta2(self) -> float:
        return -0.5 * (self.l1 + self.k3)

    @property
    def tied(self) -> bool:
        return is_tie(self.lam, self.k3)


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``x[i] = x0 + i*h`` with ``n`` points."""

    x0: float
    h: float
    n: int

    def __post_init__(self):
        if self.n < 5:
            raise GridTooSmall(f"need at least 5 points, got {self.n}")
        if not (self.h > 0.0 and math.isfinite(self.h)):
            raise GridTooSmall(f"step must be positive and finite, got {self.h!r}")

    @classmethod
    def symmetric(cls, half_width: float, n: int) -> "Grid":
        return cls(x0=-half_width, h=2.0 * half_width / (n - 1), n=n)

    @classmethod
    def from_interval(cls, a: float, b: float, n: int) -> "Grid":
        return cls(x0=a, h=(b - a) / (n - 1), n=n)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.n)

    @property
    def x_end(self) -> float:
        return self.x0 + self.h * (self.n - 1)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a function on a uniform grid."""

    x0: float
    h: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def sampled(cls, func, grid: Grid) -> "GridFunction":
        return cls(grid.x0, grid.h, func(grid.x))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.n)

    @property
    def grid(self) -> Grid:
        return Grid(self.x0, self.h, self.n)

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.x0, self.h, values)

    def d1(self) -> "GridFunction":
        from . import fd

        return self.with_values(fd.d1(self.values, self.h))

    def d2(self) -> "GridFunction":
        from . import fd

        return self.with_values(fd.d2(self.values, self.h))


@dataclass(frozen=True)
class SpectrumEntry:
    """One predicted level of a shape-invariant model."""

    n: int
    energy: float
    branch: Branch
    ladder_power: int
    regular: bool


@dataclass(frozen=True)
class SingularityReport:
    """Location and strength of the inverse-square term, if any."""

    node: float | None
    strength: float | None
    classification: Classification
    admissible: bool


@dataclass(frozen=True)
class Violation:
    field: str
    message: str


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple[Violation, ...]


def validate(profile: MassProfile, params: SIParams) -> ValidationResult:
    """Check a mass profile and parameter set against the admissible ranges.

    Returns a structured result instead of raising so callers can report
    every violation at once.
    """
    bad: list[Violation] = []

    def _finite(name: str, value: float) -> bool:
        if not math.isfinite(value):
            bad.append(Violation(name, f"{name} must be finite, got {value!r}"))
            return False
        return True

    if isinstance(profile, ConstantMass):
        if _finite("m0", profile.m0) and not profile.m0 > 0.0:
            bad.append(Violation("m0", f"m0 must be positive, got {profile.m0!r}"))
    elif isinstance(profile, HyperbolicMass):
        ok_a = _finite("alpha", profile.alpha)
        ok_b = _finite("beta", profile.beta)
        if ok_b and profile.beta == 0.0:
            bad.append(Violation("beta", "beta must be nonzero"))
        if ok_a and ok_b and not abs(profile.alpha) > abs(profile.beta):
            bad.append(
                Violation(
                    "alpha",
                    f"|alpha| must exceed |beta| to keep the mass positive, "
                    f"got alpha={profile.alpha!r}, beta={profile.beta!r}",
                )
            )
    elif isinstance(profile, AlgebraicMass):
        if _finite("alpha", profile.alpha):
            if not profile.alpha > 0.0:
                bad.append(
                    Violation("alpha", f"alpha must be positive, got {profile.alpha!r}")
                )
            elif profile.alpha == 1.0:
                bad.append(
                    Violation("alpha", "alpha = 1 degenerates to constant mass")
                )
    else:
        bad.append(Violation("profile", f"unknown mass profile {type(profile).__name__}"))

    for name, value in (
        ("lambda", params.lam),
        ("k3", params.k3),
        ("l1", params.l1),
        ("gamma", params.gamma),
    ):
        _finite(name, value)
    if math.isfinite(params.lam) and not params.lam > 0.0:
        bad.append(Violation("lambda", f"lambda must be positive, got {params.lam!r}"))
    if math.isfinite(params.k3) and params.k3 < 0.0:
        bad.append(Violation("k3", f"k3 must be nonnegative, got {params.k3!r}"))

    return ValidationResult(ok=not bad, violations=tuple(bad))


def require_valid(profile: MassProfile, params: SIParams) -> None:
    result = validate(profile, params)
    if not result.ok:
        lines = "; ".join(f"{v.field}: {v.message}" for v in result.violations)
        raise ValueError(lines)


def mass_profile_to_dict(profile: MassProfile) -> dict:
    if isinstance(profile, ConstantMass):
        return {"kind": "constant", "m0": profile.m0}
    if isinstance(profile, HyperbolicMass):
        return {"kind": "hyperbolic", "alpha": profile.alpha, "beta": profile.beta}
    if isinstance(profile, AlgebraicMass):
        return {"kind": "algebraic", "alpha": profile.alpha}
    raise ValueError(f"unknown mass profile {type(profile).__name__}")


def mass_profile_from_dict(data: dict) -> MassProfile:
    kind = data.get("kind")
    if kind == "constant":
        return ConstantMass(m0=float(data.get("m0", 1.0)))
    if kind == "hyperbolic":
        return HyperbolicMass(alpha=float(data["alpha"]), beta=float(data["beta"]))
    if kind == "algebraic":
        return AlgebraicMass(alpha=float(data["alpha"]))
    raise ValueError(f"unknown mass kind {kind!r}")


def si_params_to_dict(params: SIParams) -> dict:
    return {
        "lambda": params.lam,
        "k3": params.k3,
        "l1": params.l1,
        "gamma": params.gamma,
        "l2": params.l2,
        "eta1": params.eta1,
        "eta2": params.eta2,
    }


def si_params_from_dict(data: dict) -> SIParams:
    """Parse parameters from JSON, resolving a rational level spacing.

    ``lambda`` may be a plain number or ``{"num": p, "den": q}``, which
    means ``lambda = k3 * p / q`` so commensurate spacings survive the
    float round trip.
    """
    k3 = float(data["k3"])
    raw = data["lambda"]
    if isinstance(raw, dict):
        lam = k3 * float(raw["num"]) / float(raw["den"])
    else:
        lam = float(raw)
    return SIParams(
        lam=lam,
        k3=k3,
        l1=float(data["l1"]),
        gamma=float(data.get("gamma", 0.0)),
    )


def ordering_params_to_dict(params: OrderingParams) -> dict:
    return {"a": params.a, "b": params.b, "eta": params.eta}


def ordering_params_from_dict(data: dict) -> OrderingParams:
    return OrderingParams(a=float(data.get("a", 0.0)), b=float(data.get("b", -1.0)))


def spectrum_entry_to_dict(entry: SpectrumEntry) -> dict:
    return {
        "n": entry.n,
        "energy": entry.energy,
        "branch": entry.branch.value,
        "ladder_power": entry.ladder_power,
        "regular": entry.regular,
    }


def singularity_report_to_dict(report: SingularityReport) -> dict:
    return {
        "node": report.node,
        "strength": report.strength,
        "classification": report.classification.value,
        "admissible": report.admissible,
    }
