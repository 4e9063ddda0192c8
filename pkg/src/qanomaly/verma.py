"""sl(2) Verma module on truncated polynomials, in exact rational arithmetic.

The module ``C[x]`` with highest weight ``lam`` carries

    e = d/dx,    h = -2 x d/dx + lam,    f = -x^2 d/dx + lam x

Matrices act on the monomial basis ``1, x, ..., x^N`` (column ``k`` is the
image of ``x^k``); multiplication by ``x`` sends ``x^N`` to zero.  Because of
that cut, brackets are only trusted on degrees ``0..N-2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .cecomplex import GeneralCochain, LieAlgebraData, d_general
from .errors import InputError

__all__ = [
    "SL2_BASIS",
    "CocycleCheck",
    "TruncatedPolyOperator",
    "check_deformation_cocycle",
    "check_sl2_relations",
    "sl2_structure_constants",
    "verma_operators",
]

SL2_BASIS = ("e", "h", "f")


@dataclass(frozen=True)
class TruncatedPolyOperator:
    trunc_degree: int
    matrix: np.ndarray  # object array of Fraction, (N+1, N+1)

    def apply(self, coeffs) -> list[Fraction]:
        """Apply to a polynomial given by its coefficients ``[c_0, ..., c_N]``."""
        v = np.array([Fraction(c) for c in coeffs], dtype=object)
        if v.shape != (self.trunc_degree + 1,):
            raise InputError(f"expected {self.trunc_degree + 1} coefficients, got {v.shape}")
        return list(self.matrix @ v)

    def __matmul__(self, other: "TruncatedPolyOperator") -> "TruncatedPolyOperator":
        return TruncatedPolyOperator(self.trunc_degree, self.matrix @ other.matrix)


class VermaOperators(NamedTuple):
    e: TruncatedPolyOperator
    h: TruncatedPolyOperator
    f: TruncatedPolyOperator


def _zeros(n: int) -> np.ndarray:
    m = np.empty((n, n), dtype=object)
    m.fill(Fraction(0))
    return m


def identity(N: int) -> np.ndarray:
    m = _zeros(N + 1)
    for k in range(N + 1):
        m[k, k] = Fraction(1)
    return m


def multiply_by_x_power(N: int, power: int = 1) -> np.ndarray:
    """Multiplication by ``x**power`` with everything above ``x^N`` dropped."""
    m = _zeros(N + 1)
    for k in range(N + 1 - power):
        m[k + power, k] = Fraction(1)
    return m


def verma_operators(lam, N: int) -> VermaOperators:
    if N < 3:
        raise InputError("truncation degree must be at least 3")
    lam = Fraction(lam)
    e, h, f = _zeros(N + 1), _zeros(N + 1), _zeros(N + 1)
    for k in range(N + 1):
        if k >= 1:
            e[k - 1, k] = Fraction(k)
        h[k, k] = lam - 2 * k
        if k < N:
            f[k + 1, k] = lam - k
    return VermaOperators(*(TruncatedPolyOperator(N, m) for m in (e, h, f)))


def sl2_structure_constants() -> np.ndarray:
    """``[h,e] = 2e``, ``[h,f] = -2f``, ``[e,f] = h`` in the basis (e, h, f)."""
    c = np.empty((3, 3, 3), dtype=object)
    c.fill(0)
    e, h, f = range(3)
    c[h, e, e], c[e, h, e] = 2, -2
    c[h, f, f], c[f, h, f] = -2, 2
    c[e, f, h], c[f, e, h] = 1, -1
    return c


def _exact_columns(m: np.ndarray) -> list[int]:
    return [k for k in range(m.shape[1]) if all(v == 0 for v in m[:, k])]


def check_sl2_relations(ops: VermaOperators) -> dict:
    """Exact check of the three brackets, column by column.

    Returns, per relation, the degrees where it holds exactly, whether the
    window ``0..N-2`` is fully exact, and the violation at the top degree.
    """
    N = ops.e.trunc_degree
    E, Hm, F = ops.e.matrix, ops.h.matrix, ops.f.matrix
    defects = {
        "[h,e]=2e": (Hm @ E - E @ Hm) - 2 * E,
        "[h,f]=-2f": (Hm @ F - F @ Hm) + 2 * F,
        "[e,f]=h": (E @ F - F @ E) - Hm,
    }
    report = {}
    window = set(range(N - 1))
    for name, m in defects.items():
        exact = _exact_columns(m)
        report[name] = {
            "exact_degrees": exact,
            "window_exact": window <= set(exact),
            "top_violation": max(abs(v) for v in m[:, N]),
        }
    return report


@dataclass(frozen=True)
class CocycleCheck:
    lam: Fraction
    trunc_degree: int
    passed: bool
    verified_degrees: range
    result: GeneralCochain  # d of the deformation cochain, exact

    def window_values(self) -> dict:
        """Each 2-cochain component restricted to the verified columns."""
        cols = list(self.verified_degrees)
        return {key: m[:, cols] for key, m in self.result.components.items()}


def check_deformation_cocycle(lam, N: int, delta_f_power: int = 1) -> CocycleCheck:
    """Apply ``d`` to ``c^h * 1 + c^f * x**delta_f_power`` and test it vanishes.

    ``delta_f_power = 1`` is the highest-weight shift (a cocycle); other
    powers serve as negative controls.
    """
    if N < 4:
        raise InputError("truncation degree must be at least 4")
    lam = Fraction(lam)
    ops = verma_operators(lam, N)
    g = LieAlgebraData(
        sl2_structure_constants(), (ops.e.matrix, ops.h.matrix, ops.f.matrix), rep_tol=None
    )
    e, h, f = range(3)
    cochain = GeneralCochain(
        1,
        {
            (e,): _zeros(N + 1),
            (h,): identity(N),
            (f,): multiply_by_x_power(N, delta_f_power),
        },
    )
    result = d_general(cochain, g)
    window = range(N - 1)
    passed = all(
        v == 0 for m in result.components.values() for k in window for v in m[:, k]
    )
    return CocycleCheck(lam, N, passed, window, result)
