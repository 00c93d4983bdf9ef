"""Copula family identifiers, parameter containers and admissible ranges."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .errors import DomainError


class Kind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    STUDENT_T = "studentt"
    CLAYTON = "clayton"
    GUMBEL = "gumbel"
    FRANK = "frank"
    JOE = "joe"
    BB1 = "bb1"
    BB6 = "bb6"
    BB7 = "bb7"
    BB8 = "bb8"
    TAWN1 = "tawn1"
    TAWN2 = "tawn2"


class Rotation(str, enum.Enum):
    NONE = "none"
    DEG180 = "180"


ELLIPTICAL = frozenset({Kind.GAUSSIAN, Kind.STUDENT_T})
ARCHIMEDEAN = frozenset(
    {Kind.CLAYTON, Kind.GUMBEL, Kind.FRANK, Kind.JOE, Kind.BB1, Kind.BB6, Kind.BB7, Kind.BB8}
)
EXTREME_VALUE = frozenset({Kind.TAWN1, Kind.TAWN2})
ROTATABLE = frozenset(
    {Kind.CLAYTON, Kind.GUMBEL, Kind.JOE, Kind.BB1, Kind.BB6, Kind.BB7, Kind.BB8, Kind.TAWN1, Kind.TAWN2}
)
TWO_PARAMETER = frozenset({Kind.BB1, Kind.BB6, Kind.BB7, Kind.BB8, Kind.TAWN1, Kind.TAWN2})

_DISPLAY = {
    Kind.GAUSSIAN: "Gaussian",
    Kind.STUDENT_T: "Student-t",
    Kind.CLAYTON: "Clayton",
    Kind.GUMBEL: "Gumbel",
    Kind.FRANK: "Frank",
    Kind.JOE: "Joe",
    Kind.BB1: "BB1",
    Kind.BB6: "BB6",
    Kind.BB7: "BB7",
    Kind.BB8: "BB8",
    Kind.TAWN1: "Tawn Type 1",
    Kind.TAWN2: "Tawn Type 2",
}


@dataclass(frozen=True)
class CopulaFamily:
    """A copula family together with its rotation.

    Only the kinds in ``ROTATABLE`` may carry ``Rotation.DEG180``.
    """

    kind: Kind
    rotation: Rotation = Rotation.NONE

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "rotation", Rotation(self.rotation))
        if self.rotation is Rotation.DEG180 and self.kind not in ROTATABLE:
            raise DomainError(f"{self.kind.value} does not take a 180 degree rotation")

    @property
    def rotated(self) -> bool:
        return self.rotation is Rotation.DEG180

    @property
    def key(self) -> str:
        """Stable short identifier, e.g. ``clayton`` or ``bb1-180``."""
        return self.kind.value + ("-180" if self.rotated else "")

    @property
    def n_params(self) -> int:
        if self.kind is Kind.STUDENT_T or self.kind in TWO_PARAMETER:
            return 2
        return 1

    @property
    def display_name(self) -> str:
        base = _DISPLAY[self.kind]
        if not self.rotated:
            return base
        if self.kind in EXTREME_VALUE:
            return f"Rotated Tawn type {base[-1]} (180 degrees)"
        return f"Survival {base}"

    def __str__(self) -> str:
        return self.key


# Table order of the 21 fitted models.
ALL_FAMILIES: tuple[CopulaFamily, ...] = (
    CopulaFamily(Kind.GAUSSIAN),
    CopulaFamily(Kind.STUDENT_T),
    CopulaFamily(Kind.CLAYTON),
    CopulaFamily(Kind.GUMBEL),
    CopulaFamily(Kind.FRANK),
    CopulaFamily(Kind.JOE),
    CopulaFamily(Kind.BB1),
    CopulaFamily(Kind.BB6),
    CopulaFamily(Kind.BB7),
    CopulaFamily(Kind.BB8),
    CopulaFamily(Kind.CLAYTON, Rotation.DEG180),
    CopulaFamily(Kind.GUMBEL, Rotation.DEG180),
    CopulaFamily(Kind.JOE, Rotation.DEG180),
    CopulaFamily(Kind.BB1, Rotation.DEG180),
    CopulaFamily(Kind.BB6, Rotation.DEG180),
    CopulaFamily(Kind.BB7, Rotation.DEG180),
    CopulaFamily(Kind.BB8, Rotation.DEG180),
    CopulaFamily(Kind.TAWN1),
    CopulaFamily(Kind.TAWN1, Rotation.DEG180),
    CopulaFamily(Kind.TAWN2),
    CopulaFamily(Kind.TAWN2, Rotation.DEG180),
)


def parse_family(name: str) -> CopulaFamily:
    """Parse identifiers such as ``studentt``, ``bb1-180`` or ``survival-clayton``."""
    token = name.strip().lower().replace("_", "-").replace(" ", "-")
    rotation = Rotation.NONE
    for prefix in ("survival-", "rotated-"):
        if token.startswith(prefix):
            token, rotation = token[len(prefix):], Rotation.DEG180
    for suffix in ("-180", "180"):
        if token.endswith(suffix) and token not in ("180",):
            token, rotation = token[: -len(suffix)], Rotation.DEG180
            break
    aliases = {"t": "studentt", "student-t": "studentt", "student": "studentt", "normal": "gaussian"}
    token = aliases.get(token, token)
    try:
        kind = Kind(token)
    except ValueError:
        raise DomainError(f"unknown copula family {name!r}") from None
    return CopulaFamily(kind, rotation)


@dataclass(frozen=True)
class CopulaParams:
    """Parameter vector of a bivariate copula.

    ``theta`` is the primary dependence parameter (the correlation for the
    elliptical families), ``delta`` the second parameter of the BB and Tawn
    families, and ``nu`` the Student-t degrees of freedom.
    """

    theta: float
    delta: Optional[float] = None
    nu: Optional[float] = None

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(x for x in (self.theta, self.delta, self.nu) if x is not None)


class TailDependence(NamedTuple):
    lower: float
    upper: float


class UnitPair(NamedTuple):
    u: float
    v: float


def _finite(*xs) -> bool:
    return all(x is not None and math.isfinite(x) for x in xs)


def validate_params(family: CopulaFamily, params: CopulaParams) -> bool:
    """True iff the parameters lie in the admissible range of ``family``.

    Missing required parameters and extraneous ones both make the check fail.
    """
    kind = family.kind
    th, de, nu = params.theta, params.delta, params.nu
    if not _finite(th):
        return False
    if kind is Kind.STUDENT_T:
        return de is None and _finite(nu) and -1.0 < th < 1.0 and nu > 2.0
    if nu is not None:
        return False
    if kind in TWO_PARAMETER:
        if not _finite(de):
            return False
    elif de is not None:
        return False
    if kind is Kind.GAUSSIAN:
        return -1.0 < th < 1.0
    if kind is Kind.CLAYTON:
        return th > 0.0
    if kind is Kind.FRANK:
        return True
    if kind is Kind.GUMBEL:
        return th >= 1.0
    if kind is Kind.JOE:
        return th > 1.0
    if kind is Kind.BB1:
        return th > 0.0 and de >= 1.0
    if kind is Kind.BB6:
        return th >= 1.0 and de >= 1.0
    if kind is Kind.BB7:
        return th >= 1.0 and de > 0.0
    if kind is Kind.BB8:
        return th >= 1.0 and 0.0 < de < 1.0
    if kind in EXTREME_VALUE:
        return th >= 1.0 and 0.0 <= de <= 1.0
    return False


def check_params(family: CopulaFamily, params: CopulaParams) -> None:
    if not validate_params(family, params):
        raise DomainError(f"parameters {params} are invalid for {family.key}")
