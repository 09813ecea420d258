"""
canon-szego — Corpus
Built-in example specs shipped in corpus/ and the seeded random families
used by the verification suite.
"""

import logging
import os
from fractions import Fraction
from typing import Union

import numpy as np

from tools.hamiltonian import Hamiltonian, Piece, constant, diag, make_hamiltonian
from tools.krein_string import StringSpec, geometric_string
from tools.load_spec import load_any
from tools.muckenhoupt import WeightFunction

logger = logging.getLogger(__name__)

CORPUS_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "corpus")
BETAS = (Fraction(1, 10), Fraction(1, 100), Fraction(1, 1000))
GEOMETRIC_ALPHA = 0.75


def load_corpus(directory: str = CORPUS_DIR) -> dict[str, Union[Hamiltonian, StringSpec]]:
    """Every *.json under directory, keyed by file stem, in sorted order."""
    found = {}
    for name in sorted(os.listdir(directory)):
        if name.endswith(".json"):
            found[name[:-5]] = load_any(os.path.join(directory, name))
    logger.debug("corpus: %s", ", ".join(found))
    return found


def hamiltonians(directory: str = CORPUS_DIR) -> dict[str, Hamiltonian]:
    return {k: v for k, v in load_corpus(directory).items() if isinstance(v, Hamiltonian)}


def strings(directory: str = CORPUS_DIR) -> dict[str, StringSpec]:
    return {k: v for k, v in load_corpus(directory).items() if isinstance(v, StringSpec)}


def bump() -> Hamiltonian:
    """diag(2, 1/2) on [0, 1), identity tail."""
    return make_hamiltonian((0, 1), (diag(2, Fraction(1, 2)),), diag(1, 1))


def constant_example() -> Hamiltonian:
    return constant(2, 8)


def beta_family(betas=BETAS) -> list[Hamiltonian]:
    """diag(1 + b, 1/(1 + b)) on [0, 1), identity tail, for each b."""
    return [make_hamiltonian((0, 1), (diag(1 + b, 1 / (1 + b)),), diag(1, 1)) for b in betas]


def geometric_example(horizon: int = 64) -> StringSpec:
    return geometric_string(GEOMETRIC_ALPHA, horizon)


def random_piecewise(seed: int, max_pieces: int = 4, t_max: float = 10.0) -> Hamiltonian:
    """Positive definite pieces (h12 allowed) on [0, t_K), t_K <= t_max, diagonal det-positive tail."""
    rng = np.random.default_rng(seed)
    count = int(rng.integers(1, max_pieces + 1))
    lengths = rng.uniform(0.2, 1.0, size=count)
    lengths *= min(1.0, t_max / lengths.sum())
    bps = [0.0] + list(np.cumsum(lengths))
    pieces = []
    for _ in range(count):
        a, d = rng.uniform(0.2, 2.0, size=2)
        c = rng.uniform(-0.9, 0.9) * np.sqrt(a * d)
        pieces.append(Piece(float(a), float(c), float(d)))
    a, d = rng.uniform(0.3, 2.0, size=2)
    return make_hamiltonian([float(b) for b in bps], pieces, diag(float(a), float(d)))


def random_two_piece(seed: int) -> Hamiltonian:
    """diag(h, 1/h) on two pieces followed by a diag(c, 1/c) tail."""
    rng = np.random.default_rng(seed)
    lengths = rng.uniform(0.5, 1.5, size=2)
    values = rng.uniform(0.5, 2.0, size=3)
    bps = (0.0, float(lengths[0]), float(lengths.sum()))
    pieces = [diag(float(v), float(1 / v)) for v in values[:2]]
    return make_hamiltonian(bps, pieces, diag(float(values[2]), float(1 / values[2])))


def random_weight(seed: int, pieces: int = 5) -> WeightFunction:
    """Positive piecewise-constant weight with rational breakpoints and values."""
    rng = np.random.default_rng(seed)
    lengths = [Fraction(int(k), 4) for k in rng.integers(1, 9, size=pieces)]
    bps = [Fraction(0)]
    for length in lengths:
        bps.append(bps[-1] + length)
    values = [Fraction(int(k), 8) for k in rng.integers(2, 25, size=pieces + 1)]
    return WeightFunction(tuple(bps), tuple(values[:-1]), values[-1])


def random_alphas(seed: int, count: int = 16) -> tuple[Fraction, ...]:
    """Window lengths alpha_n in [3, 4] on an eighth grid."""
    rng = np.random.default_rng(seed)
    return tuple(Fraction(3) + Fraction(int(k), 8) for k in rng.integers(0, 9, size=count))
