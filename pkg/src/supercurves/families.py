"""Degenerating families of holomorphic supercurves indexed by a ladder of nu values."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from logging import getLogger
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from supercurves.exceptions import InvalidInputError
from supercurves.fields import GlobalCurve, SuperSection, make_instance
from supercurves.geometry import LineBundleSpec, MoebiusTransform

logger = getLogger(__name__)

Member = Tuple[GlobalCurve, SuperSection]
Generator = Callable[[float], Member]


class FamilyKind(str, Enum):
    BUBBLE = "bubble"
    PULLBACK = "pullback"
    NESTED = "nested"
    CONSTANT = "constant"


@dataclass
class Family:
    """
    A sequence of supercurves evaluated on the ladder ``nus``. ``parameterized``
    families have a closed form in nu; rescaled families only exist on the ladder.
    """

    name: str
    generator: Generator
    nus: List[float]
    parameterized: bool = True
    _cache: Dict[float, Member] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self.nus:
            raise InvalidInputError("a family needs a nonempty nu ladder")
        if any(later <= earlier for earlier, later in zip(self.nus, self.nus[1:])):
            raise InvalidInputError("the nu ladder must be strictly increasing")

    def member(self, nu: float) -> Member:
        if nu not in self._cache:
            if not self.parameterized and nu not in self.nus:
                raise InvalidInputError(f"nu = {nu} is not on the ladder of {self.name}")
            self._cache[nu] = self.generator(nu)
        return self._cache[nu]

    def last(self) -> Member:
        return self.member(self.nus[-1])

    @property
    def bundle_degree(self) -> int:
        return self.last()[1].bundle.degree

    def reparameterized(self, name: str, moebius: Sequence[MoebiusTransform]) -> Family:
        """The family ``nu -> (phi^nu o m^nu, pullback of psi^nu)`` on the same ladder."""
        if len(moebius) != len(self.nus):
            raise InvalidInputError("one Moebius transform per ladder entry is required")
        table = dict(zip(self.nus, moebius))

        def generator(nu: float) -> Member:
            curve, section = self.member(nu)
            return curve.pullback(table[nu]), section.pullback(table[nu])

        return Family(name, generator, list(self.nus), parameterized=False)


def nu_ladder(nu0: float, count: int) -> List[float]:
    if not nu0 > 0:
        raise InvalidInputError(f"nu0 must be positive, got {nu0}")
    if count < 3:
        raise InvalidInputError(f"ladders need at least 3 entries, got {count}")
    return [nu0 * 2.0**index for index in range(count)]


def _pullback_base(base: str, bundle_degree: int, scale: float) -> Member:
    if base == "identity":
        curve, _ = make_instance("identity")
    elif base == "square":
        curve, _ = make_instance("power", degree=2)
    else:
        raise InvalidInputError(f"unknown pullback base {base!r}", "base")
    length = curve.degree + bundle_degree + 1
    if length <= 0:
        raise InvalidInputError(f"d = {bundle_degree} leaves no section over the {base} curve")
    coefficients = np.zeros((2, length), dtype=np.complex128)
    coefficients[0, 0] = 0.5j * scale
    coefficients[1, 0] = scale
    return curve, SuperSection(curve, LineBundleSpec(bundle_degree), coefficients)


def make_family(
    kind: str,
    nus: Sequence[float],
    bundle_degree: int = -1,
    base: str = "identity",
    scale: float = 0.1,
) -> Family:
    """
    Catalog families:

    - ``bubble``: ``z + 1/(nu z)`` with ``psi = 0``.
    - ``pullback``: ``phi(nu z)`` with its section, for the base ``identity``
      (``d = -1``) or ``square`` (``d = -2``).
    - ``nested``: ``z + z / (nu (z^2 + nu^-3))``, two bubbles at the origin.
    - ``constant``: the identity for every nu.
    """
    try:
        family_kind = FamilyKind(kind)
    except ValueError as error:
        raise InvalidInputError(
            f"unknown family {kind!r}; expected one of "
            f"{', '.join(item.value for item in FamilyKind)}",
            "family",
        ) from error
    ladder = list(nus)
    if family_kind is FamilyKind.BUBBLE:
        return Family(
            "bubble",
            lambda nu: make_instance("bubble", eps=1.0 / nu, bundle_degree=bundle_degree),
            ladder,
        )
    if family_kind is FamilyKind.NESTED:
        return Family(
            "nested",
            lambda nu: make_instance("nested", eps=1.0 / nu, bundle_degree=bundle_degree),
            ladder,
        )
    if family_kind is FamilyKind.CONSTANT:
        member = make_instance("identity", bundle_degree=bundle_degree)
        return Family("constant", lambda nu: member, ladder)
    curve, section = _pullback_base(base, bundle_degree, scale)

    def generator(nu: float) -> Member:
        moebius = MoebiusTransform.scaling(nu)
        return curve.pullback(moebius), section.pullback(moebius)

    return Family(f"pullback-{base}", generator, ladder)
