"""JSON problem files (schema version "1").

Complex entries are ``[re, im]`` pairs in row-major nested lists::

    {
      "schema_version": "1",
      "dim": 3,
      "H": [[[1, 0], [0, 0], [0, 0]], ...],
      "S": ...,
      "delta_H1": ...,          # required for `anomaly` only
      "delta_S1": null,         # optional
      "tolerances": {"cluster": 1e-8}
    }

Unknown top-level keys are ignored, so a JSON report (which echoes the
problem) can be read back as input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .config import Tolerances
from .deformation import DeformationProblem
from .errors import InputError
from .spectral import SymmetryPair

SCHEMA_VERSION = "1"
TOLERANCE_KEYS = ("hermiticity", "commute", "cluster", "rank", "obstruction", "first_order")


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    # + 0.0 folds negative zeros so reports stay clean and stable
    return [[[float(v.real) + 0.0, float(v.imag) + 0.0] for v in row] for row in m]


def decode_matrix(obj: Any, name: str, dim: int) -> np.ndarray:
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name}: entries must be [re, im] pairs of numbers ({exc})") from None
    if arr.shape != (dim, dim, 2):
        raise InputError(f"{name}: expected shape ({dim}, {dim}, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name}: non-finite entries")
    return arr[..., 0] + 1j * arr[..., 1]


@dataclass
class ProblemFile:
    dim: int
    H: np.ndarray
    S: np.ndarray
    delta_H1: Optional[np.ndarray] = None
    delta_S1: Optional[np.ndarray] = None
    tolerances: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemFile":
        if not isinstance(data, dict):
            raise InputError("problem file must contain a JSON object")
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise InputError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION!r}")
        dim = data.get("dim")
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
            raise InputError(f"dim must be a positive integer, got {dim!r}")
        for key in ("H", "S"):
            if key not in data:
                raise InputError(f"missing required field {key!r}")
        tolerances = data.get("tolerances") or {}
        if not isinstance(tolerances, dict):
            raise InputError("tolerances must be an object")
        unknown = set(tolerances) - set(TOLERANCE_KEYS)
        if unknown:
            raise InputError(f"unknown tolerance key(s): {sorted(unknown)}")
        for k, v in tolerances.items():
            if v is not None and (not isinstance(v, (int, float)) or isinstance(v, bool) or v < 0):
                raise InputError(f"tolerance {k!r} must be a non-negative number or null")

        def optional(key):
            value = data.get(key)
            return None if value is None else decode_matrix(value, key, dim)

        return cls(
            dim=dim,
            H=decode_matrix(data["H"], "H", dim),
            S=decode_matrix(data["S"], "S", dim),
            delta_H1=optional("delta_H1"),
            delta_S1=optional("delta_S1"),
            tolerances=dict(tolerances),
        )

    @classmethod
    def load(cls, path) -> "ProblemFile":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "dim": self.dim,
            "H": encode_matrix(self.H),
            "S": encode_matrix(self.S),
            "delta_H1": None if self.delta_H1 is None else encode_matrix(self.delta_H1),
            "delta_S1": None if self.delta_S1 is None else encode_matrix(self.delta_S1),
            "tolerances": dict(self.tolerances),
        }

    def effective_tolerances(self, **flags) -> Tolerances:
        """File values overridden by any non-``None`` flag values."""
        return Tolerances().updated(**self.tolerances).updated(**flags)

    def pair(self, tol: Tolerances) -> SymmetryPair:
        return SymmetryPair(self.H, self.S, tol.hermiticity, tol.commute)

    def problem(self, tol: Tolerances) -> DeformationProblem:
        if self.delta_H1 is None:
            raise InputError("missing required field 'delta_H1'")
        return DeformationProblem(self.pair(tol), self.delta_H1, self.delta_S1, tol)
