"""Copula-generated measures of concordance and their rank-based estimators."""

from .biconvex import BiconvexResult, biconvex_form
from .concordance import (
    ConcordanceGenerator,
    NotGammaInvariant,
    check_moc_axioms,
    gini,
    gini_copula,
    interpolated_generator,
    kappa,
    make_generator,
    spearman,
)
from .copulas import E, M, PI, W, GridCopula, Mixture, copula_from_density, discretize, rect_mass
from .estimator import ConcordanceEstimator, SampleTooSmall, estimate, minimal_sample_size
from .group import GAMMA, GAMMA_NU, GAMMA_PI, GAMMA_PI_TAU, GAMMA_TAU, apply_transform, is_invariant, symmetrize
from .ranks import RankTransformer, RelativeRankMatrix, Sample, relative_ranks
from .simulation import StudyConfig, run_study, sample_copula

__version__ = "0.1.0"

__all__ = [
    "BiconvexResult",
    "ConcordanceEstimator",
    "ConcordanceGenerator",
    "E",
    "GAMMA",
    "GAMMA_NU",
    "GAMMA_PI",
    "GAMMA_PI_TAU",
    "GAMMA_TAU",
    "GridCopula",
    "M",
    "Mixture",
    "NotGammaInvariant",
    "PI",
    "RankTransformer",
    "RelativeRankMatrix",
    "Sample",
    "SampleTooSmall",
    "StudyConfig",
    "W",
    "apply_transform",
    "biconvex_form",
    "check_moc_axioms",
    "copula_from_density",
    "discretize",
    "estimate",
    "gini",
    "gini_copula",
    "interpolated_generator",
    "is_invariant",
    "kappa",
    "make_generator",
    "minimal_sample_size",
    "rect_mass",
    "relative_ranks",
    "run_study",
    "sample_copula",
    "spearman",
    "symmetrize",
]
