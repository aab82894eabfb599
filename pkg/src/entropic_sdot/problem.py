"""Target atoms and the semi-discrete problem (source density + atoms)."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_atom_positions, check_atom_weights
from .measure import Density

__all__ = ["Atoms", "Problem", "entropy"]


@dataclass(frozen=True, eq=False)
class Atoms:
    """Discrete target measure: positions ``(n, d)`` and probabilities ``(n,)``."""

    positions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pos = check_atom_positions(self.positions)
        w = check_atom_weights(self.weights, len(pos))
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, positions):
        pos = np.asarray(positions, dtype=float)
        n = len(pos)
        return cls(pos, np.full(n, 1.0 / n))

    @property
    def n(self):
        return len(self.weights)

    @property
    def dim(self):
        return self.positions.shape[1]

    def distances(self):
        """Pairwise Euclidean distances ``||y_i - y_j||``."""
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        return np.sqrt((diff**2).sum(-1))


@dataclass(frozen=True, eq=False)
class Problem:
    density: Density
    atoms: Atoms

    def __post_init__(self):
        if self.atoms.dim != self.density.dim:
            raise ValueError(
                f"atoms are {self.atoms.dim}-dimensional but the density is {self.density.dim}-dimensional")

    @property
    def dim(self):
        return self.density.dim


def entropy(weights):
    """Shannon entropy ``-sum w log w`` (natural log) of a probability vector."""
    w = np.asarray(weights, dtype=float)
    w = w[w > 0]
    return float(-(w * np.log(w)).sum())
