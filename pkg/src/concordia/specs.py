"""JSON copula specifications and generator selection strings.

A copula specification is a JSON object with a ``kind`` key::

    {"kind": "M"} | {"kind": "W"} | {"kind": "Pi"} | {"kind": "E"}
    {"kind": "grid", "m": 2, "mass": [0.5, 0.0, 0.0, 0.5]}        # row-major
    {"kind": "mixture", "components": [{"weight": 0.5, "copula": {...}}, ...]}
    {"kind": "transformed", "element": "nu1", "copula": {...}}

``mass`` may also be given as a nested list of rows. Mixture weights may be
numbers or strings such as ``"1/3"``, which are read as exact fractions.
"""

from __future__ import annotations

import json
import os
from fractions import Fraction

import numpy as np

from .concordance import ConcordanceGenerator, interpolated_generator, make_generator, gini, spearman
from .copulas import E, PI, Copula, GridCopula, M, Mixture, Transformed, W
from .group import apply_transform, element

__all__ = ["copula_from_spec", "copula_to_spec", "load_copula", "dump_copula", "resolve_generator"]

_BUILTINS = {"M": M, "W": W, "Pi": PI, "E": E}


class SpecError(ValueError):
    """Malformed copula specification."""


def _weight(value):
    if isinstance(value, str):
        try:
            return Fraction(value)
        except ValueError:
            raise SpecError(f"bad mixture weight {value!r}") from None
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return value
    raise SpecError(f"bad mixture weight {value!r}")


def copula_from_spec(spec):
    """Build a copula from a parsed specification object."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SpecError("a copula specification must be an object with a 'kind' key")
    kind = spec["kind"]
    if kind in _BUILTINS:
        return _BUILTINS[kind]
    if kind == "grid":
        mass = np.asarray(spec.get("mass"), dtype=float)
        m = spec.get("m")
        if mass.ndim == 1:
            if m is None:
                m = int(round(np.sqrt(mass.size)))
            if m * m != mass.size:
                raise SpecError(f"grid mass has {mass.size} entries, expected {m}*{m}")
            mass = mass.reshape(m, m)
        elif m is not None and mass.shape != (m, m):
            raise SpecError(f"grid mass has shape {mass.shape}, expected ({m}, {m})")
        return GridCopula(mass)
    if kind == "mixture":
        comps = spec.get("components")
        if not comps:
            raise SpecError("mixture needs a non-empty 'components' list")
        return Mixture([(_weight(c["weight"]), copula_from_spec(c["copula"])) for c in comps])
    if kind == "transformed":
        return apply_transform(element(spec["element"]), copula_from_spec(spec["copula"]))
    raise SpecError(f"unknown copula kind {kind!r}")


def copula_to_spec(C):
    """Inverse of ``copula_from_spec`` for every supported copula."""
    if isinstance(C, GridCopula):
        return {"kind": "grid", "m": C.m, "mass": C.mass.ravel().tolist()}
    if isinstance(C, Mixture):
        return {
            "kind": "mixture",
            "components": [
                {"weight": str(w) if isinstance(w, Fraction) else w, "copula": copula_to_spec(c)}
                for w, c in C.components
            ],
        }
    if isinstance(C, Transformed):
        return {"kind": "transformed", "element": C.element.name, "copula": copula_to_spec(C.copula)}
    if isinstance(C, Copula) and C.kind in _BUILTINS:
        return {"kind": C.kind}
    raise SpecError(f"cannot serialise {C!r}")


def load_copula(source):
    """Load a copula from a JSON file path or a builtin name (``M``, ``W``, ``Pi``, ``E``)."""
    if isinstance(source, str) and source in _BUILTINS:
        return _BUILTINS[source]
    with open(source, encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"{source}: invalid JSON ({exc})") from None
    return copula_from_spec(spec)


def dump_copula(C, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(copula_to_spec(C), fh, indent=2)
        fh.write("\n")


def resolve_generator(spec):
    """Turn ``"spearman"``, ``"gini"``, ``"eq:<q>"`` or a spec path into a generator.

    Copulas loaded from files are checked for Gamma-invariance.
    """
    if isinstance(spec, ConcordanceGenerator):
        return spec
    if isinstance(spec, Copula):
        return make_generator(spec)
    if spec == "spearman":
        return spearman()
    if spec == "gini":
        return gini()
    if isinstance(spec, str) and spec.startswith("eq:"):
        try:
            q = Fraction(spec[3:])
        except ValueError:
            raise SpecError(f"bad interpolation parameter in {spec!r}") from None
        return interpolated_generator(q)
    if isinstance(spec, str) and (os.path.exists(spec) or spec in _BUILTINS):
        return make_generator(load_copula(spec), name=spec)
    raise SpecError(f"unknown generator {spec!r}; use spearman, gini, eq:<q> or a copula spec file")
