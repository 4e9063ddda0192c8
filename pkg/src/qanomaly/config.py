"""Numerical tolerances used across the pipeline."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

from .errors import InputError


@dataclass(frozen=True)
class Tolerances:
    """Tolerance set.

    ``cluster`` and ``obstruction`` may be ``None``; they are then derived from
    the data (1e-8 times the spectral range, respectively 1e-8 times the
    commutator scale of the first-order data).
    """

    hermiticity: float = 1e-10
    commute: float = 1e-10
    cluster: Optional[float] = None
    rank: float = 1e-9
    obstruction: Optional[float] = None
    first_order: float = 1e-10

    def updated(self, **overrides) -> "Tolerances":
        """Return a copy with every non-``None`` override applied."""
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise InputError(f"unknown tolerance(s): {sorted(unknown)}")
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()
