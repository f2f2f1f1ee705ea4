"""Numerical laboratory for random dynamical systems driven by finitely many maps."""

from .cocycle import (CocycleGenerator, NormPair, ScaledMatrix, cocycle_along, eval_generator,
                      norms, scaled_multiply)
from .dynamics import MapFamily, OrbitSegment, apply_map, apply_word, orbit
from .errors import BudgetError, ConfigError, DomainError, LabError, SingularityError
from .words import Word, WordSource, concat, enumerate_words, sample_word, shift

__version__ = "0.1.0"
