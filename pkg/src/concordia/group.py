"""The eight-element symmetry group of bivariate copulas.

An element is stored as ``(swap, flip1, flip2)`` and stands for the signed
permutation of a random pair ``(U1, U2)``: flip the marked coordinates
(``U_i -> 1 - U_i``) first, then swap if ``swap`` is set. Acting on copulas,
``compose(g, h)`` is the transformation ``C -> g(h(C))``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .copulas import GridCopula, Mixture, Transformed

__all__ = [
    "GroupElement",
    "Subgroup",
    "IDENTITY",
    "PI_SWAP",
    "NU1",
    "NU2",
    "TAU",
    "ELEMENTS",
    "GAMMA",
    "GAMMA_PI",
    "GAMMA_NU",
    "GAMMA_TAU",
    "GAMMA_PI_TAU",
    "SUBGROUPS",
    "compose",
    "element",
    "subgroup",
    "apply_transform",
    "invariance_defect",
    "is_invariant",
    "symmetrize",
]

_NAMES = {
    (False, False, False): "id",
    (True, False, False): "pi",
    (False, True, False): "nu1",
    (False, False, True): "nu2",
    (False, True, True): "tau",
    (True, True, False): "pi.nu1",
    (True, False, True): "pi.nu2",
    (True, True, True): "pi.tau",
}


@dataclass(frozen=True)
class GroupElement:
    swap: bool = False
    flip1: bool = False
    flip2: bool = False

    @property
    def name(self):
        return _NAMES[(self.swap, self.flip1, self.flip2)]

    def _signed_permutation(self):
        # output coordinate k reads input coordinate src[k], flipped if sign[k]
        flips = (self.flip1, self.flip2)
        src = (1, 0) if self.swap else (0, 1)
        return src, tuple(flips[s] for s in src)

    def act_on_points(self, u1, u2):
        """Image of points ``(u1, u2)`` under the signed permutation."""
        a = 1 - u1 if self.flip1 else u1
        b = 1 - u2 if self.flip2 else u2
        return (b, a) if self.swap else (a, b)

    def act_on_mass(self, mass):
        """Permute a checkerboard mass matrix the way the element moves its cells."""
        out = np.asarray(mass)
        if self.flip1:
            out = out[::-1, :]
        if self.flip2:
            out = out[:, ::-1]
        if self.swap:
            out = out.T
        return np.ascontiguousarray(out)

    def inverse(self):
        for h in ELEMENTS:
            if compose(self, h) == IDENTITY:
                return h
        raise AssertionError("group is not closed")

    def __repr__(self):
        return self.name


def compose(g, h):
    """Return ``g o h``, the element acting as ``C -> g(h(C))``."""
    src_h, sign_h = h._signed_permutation()
    src_g, sign_g = g._signed_permutation()
    # apply h to the pair first, then g
    src = tuple(src_h[s] for s in src_g)
    sign = tuple(sign_h[s] ^ sign_g[k] for k, s in enumerate(src_g))
    flips = [False, False]
    for k in range(2):
        flips[src[k]] = sign[k]
    return GroupElement(swap=src == (1, 0), flip1=flips[0], flip2=flips[1])


IDENTITY = GroupElement()
PI_SWAP = GroupElement(swap=True)
NU1 = GroupElement(flip1=True)
NU2 = GroupElement(flip2=True)
TAU = GroupElement(flip1=True, flip2=True)
ELEMENTS = tuple(GroupElement(*bits) for bits in itertools.product((False, True), repeat=3))


def element(name):
    """Look up an element by its configuration name (``"id"``, ``"pi"``, ``"pi.nu1"``, ...)."""
    for key, value in _NAMES.items():
        if value == name:
            return GroupElement(*key)
    raise ValueError(f"unknown group element {name!r}; expected one of {sorted(_NAMES.values())}")


@dataclass(frozen=True)
class Subgroup:
    name: str
    elements: tuple

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, g):
        return g in self.elements


GAMMA = Subgroup("Gamma", ELEMENTS)
GAMMA_PI = Subgroup("GammaPi", (IDENTITY, PI_SWAP))
GAMMA_NU = Subgroup("GammaNu", (IDENTITY, NU1, NU2, TAU))
GAMMA_TAU = Subgroup("GammaTau", (IDENTITY, TAU))
GAMMA_PI_TAU = Subgroup("GammaPiTau", (IDENTITY, PI_SWAP, TAU, compose(PI_SWAP, TAU)))
SUBGROUPS = {s.name: s for s in (GAMMA, GAMMA_PI, GAMMA_NU, GAMMA_TAU, GAMMA_PI_TAU)}


def subgroup(name):
    try:
        return SUBGROUPS[name]
    except KeyError:
        raise ValueError(f"unknown subgroup {name!r}; expected one of {sorted(SUBGROUPS)}") from None


def apply_transform(g, C):
    """Return ``g(C)``.

    Grid copulas map to grid copulas with permuted masses; anything else is
    wrapped lazily. Nested wrappers are collapsed by composing elements.
    """
    if g == IDENTITY:
        return C
    if isinstance(C, GridCopula):
        return GridCopula(g.act_on_mass(C.mass))
    if isinstance(C, Transformed):
        inner = compose(g, C.element)
        return C.copula if inner == IDENTITY else Transformed(inner, C.copula)
    return Transformed(g, C)


def invariance_defect(C, S, lattice=101):
    """Largest deviation ``|g(C) - C|`` over ``g`` in ``S``.

    Returns ``(deviation, witness_element, witness_point)``. Grid copulas are
    compared cell mass by cell mass (``witness_point`` is then a cell index);
    everything else is sampled on a ``lattice x lattice`` grid of points.
    """
    worst = (0.0, IDENTITY, None)
    if isinstance(C, GridCopula):
        for g in S:
            diff = np.abs(g.act_on_mass(C.mass) - C.mass)
            idx = np.unravel_index(np.argmax(diff), diff.shape)
            if diff[idx] > worst[0]:
                worst = (float(diff[idx]), g, tuple(int(i) for i in idx))
        return worst
    t = np.linspace(0.0, 1.0, lattice)
    U1, U2 = np.meshgrid(t, t, indexing="ij")
    base = C(U1, U2)
    for g in S:
        diff = np.abs(apply_transform(g, C)(U1, U2) - base)
        idx = np.unravel_index(np.argmax(diff), diff.shape)
        if diff[idx] > worst[0]:
            worst = (float(diff[idx]), g, (float(U1[idx]), float(U2[idx])))
    return worst


def is_invariant(C, S, lattice=101, tol=1e-10):
    if tol <= 0:
        raise ValueError("tol must be positive")
    return invariance_defect(C, S, lattice)[0] <= tol


def symmetrize(C, S):
    """Equal-weight mean of ``g(C)`` over ``g`` in ``S``.

    For grid copulas the transformed masses are sorted cellwise before
    summing, so the result is invariant bit for bit.
    """
    if isinstance(C, GridCopula):
        stack = np.sort(np.stack([g.act_on_mass(C.mass) for g in S]), axis=0)
        return GridCopula(stack.sum(axis=0) / len(S))
    return Mixture([(Fraction(1, len(S)), apply_transform(g, C)) for g in S])
