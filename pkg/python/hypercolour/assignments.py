"""Partial assignments of buckets (projected configurations) and colours.

Both are stored as a dense int64 array over all n vertices with 0 marking a
vertex outside the domain, so restriction and lookup are O(1) and the arrays
can be fed straight into numpy indexing.
"""
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from .errors import BucketOutOfRangeError, ColourOutOfRangeError, VertexOutOfRangeError

UNSET = 0


def _dense(n: int, mapping: Mapping[int, int]) -> np.ndarray:
    values = np.zeros(n, dtype=np.int64)
    for v, x in mapping.items():
        if not 0 <= int(v) < n:
            raise VertexOutOfRangeError(f"vertex {v} outside [0, {n})")
        values[int(v)] = int(x)
    return values


@dataclass(frozen=True, eq=False)
class _PartialAssignment:
    values: np.ndarray
    top: int

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.int64)
        if values.ndim != 1:
            raise ValueError("assignment values must be one-dimensional")
        object.__setattr__(self, "values", values)
        if values.size and (values.min() < 0 or values.max() > self.top):
            raise self._range_error(f"values must lie in [1, {self.top}] (0 = unset)")

    @staticmethod
    def _range_error(message: str) -> Exception:
        return ValueError(message)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def domain(self) -> Tuple[int, ...]:
        return tuple(int(v) for v in np.flatnonzero(self.values))

    def __contains__(self, v: object) -> bool:
        return isinstance(v, (int, np.integer)) and 0 <= int(v) < self.n and self.values[int(v)] != UNSET

    def get(self, v: int) -> Optional[int]:
        x = int(self.values[v])
        return None if x == UNSET else x

    def to_dict(self) -> Dict[int, int]:
        return {v: int(self.values[v]) for v in self.domain}

    def to_list(self) -> List[Optional[int]]:
        return [None if x == UNSET else int(x) for x in self.values]

    def _with_values(self, values: np.ndarray):
        return type(self)(values, self.top)

    def without(self, vertices: Iterable[int]):
        values = self.values.copy()
        values[list(vertices)] = UNSET
        return self._with_values(values)

    def restrict(self, vertices: Iterable[int]):
        values = np.zeros_like(self.values)
        idx = list(vertices)
        values[idx] = self.values[idx]
        return self._with_values(values)

    def __eq__(self, other: object) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return self.top == other.top and np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]


class ProjectedConfig(_PartialAssignment):
    """Y ∈ [s]^Λ: bucket values on a domain Λ ⊆ V."""

    @staticmethod
    def _range_error(message: str) -> Exception:
        return BucketOutOfRangeError(message)

    @property
    def s(self) -> int:
        return self.top

    @classmethod
    def from_mapping(cls, n: int, s: int, mapping: Mapping[int, int]) -> "ProjectedConfig":
        return cls(_dense(n, mapping), s)

    @classmethod
    def empty(cls, n: int, s: int) -> "ProjectedConfig":
        return cls(np.zeros(n, dtype=np.int64), s)


class Colouring(_PartialAssignment):
    """X ∈ [q]^S: colour values on a domain S ⊆ V."""

    @staticmethod
    def _range_error(message: str) -> Exception:
        return ColourOutOfRangeError(message)

    @property
    def q(self) -> int:
        return self.top

    @classmethod
    def from_mapping(cls, n: int, q: int, mapping: Mapping[int, int]) -> "Colouring":
        return cls(_dense(n, mapping), q)

    @classmethod
    def empty(cls, n: int, q: int) -> "Colouring":
        return cls(np.zeros(n, dtype=np.int64), q)
