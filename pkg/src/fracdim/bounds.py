"""Computable part of the dimension-based generalization bound.

The mutual-information terms of the full bound cannot be evaluated, so
only the dimension-dependent main term is implemented:

    delta + B / (sqrt(n) - 1)
          + sqrt(2) * B * sqrt((dim * log(1/delta) + log(sqrt(n)/eta)) / n)

with natural logarithms throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidInputs
from .stats import GridRecord


@dataclass(frozen=True)
class BoundInputs:
    dim: float
    n: int
    B: float
    delta: float
    eta: float

    def __post_init__(self):
        if not self.dim > 0 or not math.isfinite(self.dim):
            raise InvalidInputs(f"dim must be positive and finite, got {self.dim}")
        if self.n < 2:
            raise InvalidInputs(f"n must be >= 2, got {self.n}")
        if not self.B > 0:
            raise InvalidInputs(f"B must be positive, got {self.B}")
        if not 0.0 < self.delta < 1.0:
            raise InvalidInputs(f"delta must lie in (0, 1), got {self.delta}")
        if not 0.0 < self.eta < 1.0:
            raise InvalidInputs(f"eta must lie in (0, 1), got {self.eta}")


def computable_bound(x: BoundInputs) -> float:
    """Value of the bound's main term; increasing in dim and B."""
    root_n = math.sqrt(x.n)
    radicand = (x.dim * math.log(1.0 / x.delta) + math.log(root_n / x.eta)) / x.n
    return x.delta + x.B / (root_n - 1.0) + math.sqrt(2.0) * x.B * math.sqrt(radicand)


def bound_table(
    records: list[GridRecord], B: float, delta: float, eta: float, n: int
) -> list[tuple[float, float]]:
    """(gen_gap, bound) pairs for every successful record, pairing the
    observed gap with the bound evaluated at the record's dimension."""
    rows = []
    for r in records:
        if not r.ok:
            continue
        value = computable_bound(BoundInputs(dim=r.dim, n=n, B=B, delta=delta, eta=eta))
        rows.append((r.gen_gap, value))
    return rows
