"""Balanced projection scheme h: [q] -> [s] built from consecutive intervals.

Colours are 1..q and buckets 1..s. The first (q mod s) intervals hold
ceil(q/s) colours, the rest floor(q/s).
"""
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import BucketOutOfRangeError, ColourOutOfRangeError, InvalidQError


@dataclass(frozen=True)
class ProjectionScheme:
    q: int
    s: int
    # starts[j-1] is the first colour of bucket j; starts[s] == q + 1.
    starts: Tuple[int, ...]

    def bucket_sizes(self) -> Tuple[int, ...]:
        return tuple(b - a for a, b in zip(self.starts, self.starts[1:]))

    def preimage(self, j: int) -> range:
        self._check_bucket(j)
        return range(self.starts[j - 1], self.starts[j])

    def evaluate(self, i: int) -> int:
        if not 1 <= i <= self.q:
            raise ColourOutOfRangeError(f"colour {i} outside [1, {self.q}]")
        return int(np.searchsorted(self._starts_array, i, side="right"))

    def evaluate_many(self, colours: np.ndarray) -> np.ndarray:
        colours = np.asarray(colours, dtype=np.int64)
        if colours.size and (colours.min() < 1 or colours.max() > self.q):
            raise ColourOutOfRangeError(f"colours outside [1, {self.q}]")
        return np.searchsorted(self._starts_array, colours, side="right").astype(np.int64)

    def invert_uniform(self, j: int, rng: np.random.Generator) -> int:
        self._check_bucket(j)
        return int(rng.integers(self.starts[j - 1], self.starts[j]))

    def list_bounds(self, buckets: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Colour lists Q_v as (first colour, size) arrays.

        A bucket of 0 means the vertex is unconstrained and gets all of [q].
        """
        buckets = np.asarray(buckets, dtype=np.int64)
        starts = self._starts_array
        constrained = buckets > 0
        idx = np.where(constrained, buckets - 1, 0)
        lows = np.where(constrained, starts[idx], 1)
        highs = np.where(constrained, starts[idx + constrained], self.q + 1)
        return lows, highs - lows

    @property
    def _starts_array(self) -> np.ndarray:
        return np.asarray(self.starts, dtype=np.int64)

    def _check_bucket(self, j: int) -> None:
        if not 1 <= j <= self.s:
            raise BucketOutOfRangeError(f"bucket {j} outside [1, {self.s}]")


def image_size(q: int) -> int:
    """s = ceil(sqrt(q)), computed without floating point."""
    r = math.isqrt(q)
    return r if r * r == q else r + 1


def build(q: int, s: Optional[int] = None) -> ProjectionScheme:
    """Build h for q colours; `s` overrides ceil(sqrt(q)) for experiments."""
    if q < 1:
        raise InvalidQError(f"q must be >= 1, got {q}")
    if s is None:
        s = image_size(q)
    elif not 1 <= s <= q:
        raise InvalidQError(f"image size s={s} must lie in [1, q={q}]")
    big, rem = divmod(q, s)
    starts = [1]
    for j in range(s):
        starts.append(starts[-1] + big + (1 if j < rem else 0))
    return ProjectionScheme(q=q, s=s, starts=tuple(starts))
