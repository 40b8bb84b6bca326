"""Sampling from copulas and Monte Carlo consistency studies."""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from ._jsonfmt import dumps
from .concordance import kappa
from .copulas import GridCopula, LowerBoundCopula, MinCopula, Mixture, ProductCopula, discretize
from .estimator import estimate
from .ranks import Sample

__all__ = [
    "UnsupportedCopula",
    "sample_copula",
    "StudyConfig",
    "run_study",
    "write_report",
    "SCHEMA_ID",
    "SCHEMA_VERSION",
]

SCHEMA_ID = "concordia/study-report"
SCHEMA_VERSION = 1
MATERIALIZE_RESOLUTION = 256


class UnsupportedCopula(TypeError):
    """The copula has no direct sampler; materialise it to a grid first."""


def _draw(C, n, rng):
    if isinstance(C, MinCopula):
        u = rng.random(n)
        return u, u.copy()
    if isinstance(C, LowerBoundCopula):
        u = rng.random(n)
        return u, 1.0 - u
    if isinstance(C, ProductCopula):
        return rng.random(n), rng.random(n)
    if isinstance(C, GridCopula):
        p = C.mass.ravel()
        cells = rng.choice(p.size, size=n, p=p / p.sum())
        i, j = np.divmod(cells, C.m)
        return (i + rng.random(n)) / C.m, (j + rng.random(n)) / C.m
    if isinstance(C, Mixture):
        weights = np.array([float(w) for w, _ in C.components])
        labels = rng.choice(len(weights), size=n, p=weights / weights.sum())
        u1 = np.empty(n)
        u2 = np.empty(n)
        for idx, (_, comp) in enumerate(C.components):
            mask = labels == idx
            if mask.any():
                u1[mask], u2[mask] = _draw(comp, int(mask.sum()), rng)
        return u1, u2
    raise UnsupportedCopula(f"cannot sample {C!r} directly; discretize it to a GridCopula first")


def sample_copula(C, n, seed):
    """Draw ``n`` i.i.d. pairs with copula ``C``; identical seeds give identical samples."""
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = np.random.default_rng(seed)
    u1, u2 = _draw(C, int(n), rng)
    return Sample(np.stack([u1, u2]))


def _samplable(C):
    if isinstance(C, (MinCopula, LowerBoundCopula, ProductCopula, GridCopula)):
        return True
    if isinstance(C, Mixture):
        return all(_samplable(c) for _, c in C.components)
    return False


@dataclass
class StudyConfig:
    """Monte Carlo study description.

    ``copula`` is a copula specification object (see ``concordia.specs``);
    replication ``r`` uses the seed ``seed + r`` at every sample size.
    """

    generator: str
    copula: dict
    sizes: list
    replications: int
    seed: int = 0
    output: str | None = None
    exact: bool = True
    materialize_resolution: int = MATERIALIZE_RESOLUTION

    def __post_init__(self):
        if int(self.replications) < 1:
            raise ValueError("replications must be at least 1")
        if not self.sizes or any(int(n) < 2 for n in self.sizes):
            raise ValueError("sizes must be a non-empty list of integers >= 2")
        self.sizes = [int(n) for n in self.sizes]
        self.replications = int(self.replications)
        self.seed = int(self.seed)

    @classmethod
    def from_dict(cls, data):
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        missing = {"generator", "copula", "sizes", "replications"} - known.keys()
        if missing:
            raise ValueError(f"study config is missing {sorted(missing)}")
        return cls(**known)

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _worker_count():
    try:
        return max(1, int(os.environ.get("CONCORDIA_THREADS", "1")))
    except ValueError:
        return 1


def _replicate(task):
    copula, generator, n, seed, exact = task
    try:
        report = estimate(sample_copula(copula, n, seed), generator, exact)
    except (ValueError, ArithmeticError) as exc:
        return None, f"{type(exc).__name__}: {exc}"
    return float(report.kappa_hat), None


def run_study(cfg, workers=None):
    """Run the study and return the report as a JSON-ready dict.

    Failed replications are recorded with their error message and excluded
    from the summary statistics. The result does not depend on ``workers``.
    """
    from .specs import copula_from_spec, resolve_generator

    g = resolve_generator(cfg.generator)
    target = copula_from_spec(cfg.copula)
    sampled = target if _samplable(target) else discretize(target, cfg.materialize_resolution)
    kappa_exact = kappa(g, sampled)

    tasks = [
        (sampled, g, n, cfg.seed + r, cfg.exact) for n in cfg.sizes for r in range(cfg.replications)
    ]
    workers = workers or _worker_count()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replicate, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_replicate(t) for t in tasks]

    rows = []
    for (_, _, n, seed, _), (value, error) in zip(tasks, results):
        rows.append({"n": n, "replication": seed - cfg.seed, "seed": seed, "kappa_hat": value, "error": error})

    summary = []
    for n in cfg.sizes:
        values = np.array([r["kappa_hat"] for r in rows if r["n"] == n and r["error"] is None])
        ok = int(values.size)
        mean = float(values.mean()) if ok else None
        sd = float(values.std(ddof=1)) if ok > 1 else 0.0
        se = sd / np.sqrt(ok) if ok else None
        summary.append(
            {
                "n": n,
                "replications_ok": ok,
                "failures": cfg.replications - ok,
                "mean": mean,
                "sd": sd,
                "mc_se": float(se) if se is not None else None,
                "abs_error": abs(mean - kappa_exact) if ok else None,
            }
        )

    config = asdict(cfg)
    return {
        "schema": SCHEMA_ID,
        "version": SCHEMA_VERSION,
        "config": config,
        "generator": g.name,
        "kappa_exact": kappa_exact,
        "materialized": sampled is not target,
        "replications": rows,
        "summary": summary,
    }


def write_report(report, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(report) + "\n")
