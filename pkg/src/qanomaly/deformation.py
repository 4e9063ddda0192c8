"""Order-by-order restoration of the symmetry under a perturbation.

Internally everything is anti-Hermitian: ``x_n = i * dH_n`` and
``y_n = i * dS_n``.  The order-``n`` condition for ``[H(t), S(t)] = 0`` reads

    [H, y_n] - [S, x_n] = -sum_{k=1}^{n-1} [x_k, y_{n-k}]

i.e. ``d(c^H x_n + c^S y_n)`` must equal the right-hand side.  Its projection
onto the commutant Z is the obstruction; the off-diagonal part is always
solvable through the contracting homotopy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cecomplex import Cochain, CohomologyReport, cohomology_bruteforce, cohomology_theorem, homotopy
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import FirstOrderObstructed, InputError, NumericalError
from .linalg import (
    AntiHermitianMatrix,
    as_matrix,
    commutator,
    from_coords,
    frobenius,
    hermiticity_defect,
    realify_map,
    to_coords,
    u_basis,
)
from .spectral import (
    CommutantBasis,
    JointSpectrum,
    SymmetryPair,
    block_project,
    commutant_basis,
    joint_diagonalize,
)

__all__ = [
    "AnomalyReport",
    "DeformationProblem",
    "DeformationSeries",
    "ObstructionClass",
    "Obstructed",
    "anomaly_report",
    "completion_residual",
    "continue_series",
    "feasibility_residual",
    "first_order_residual",
    "obstruction_second_order",
    "solve_first_order",
]

SLOPE_TOL = 0.3
FEASIBILITY_MAX_DIM = 12
DEFAULT_T_SAMPLES = np.logspace(-3, -1, 9)


def _hermitian(m, name, tol) -> np.ndarray:
    m = as_matrix(m, name)
    defect = hermiticity_defect(m)
    if defect > tol * max(1.0, frobenius(m)):
        raise InputError(f"{name} is not Hermitian: ||A - A^H||_F = {defect:.3e}")
    return 0.5 * (m + m.conj().T)


def first_order_residual(pair: SymmetryPair, dh1, ds1) -> float:
    """``||[H, dS] - [S, dH]||_F`` in Hermitian form."""
    return frobenius(commutator(pair.hamiltonian, ds1) - commutator(pair.symmetry, dh1))


def _first_order_scale(pair, dh1, ds1) -> float:
    return max(
        1.0,
        frobenius(pair.hamiltonian) * frobenius(ds1) + frobenius(pair.symmetry) * frobenius(dh1),
    )


@dataclass(frozen=True)
class DeformationProblem:
    pair: SymmetryPair
    delta_h1: np.ndarray
    delta_s1: Optional[np.ndarray] = None
    tolerances: Tolerances = DEFAULT_TOLERANCES

    def __post_init__(self):
        tol = self.tolerances
        dh = _hermitian(self.delta_h1, "delta_h1", tol.hermiticity)
        if dh.shape != (self.pair.dim, self.pair.dim):
            raise InputError(f"delta_h1 shape {dh.shape} does not match dim {self.pair.dim}")
        dh.setflags(write=False)
        object.__setattr__(self, "delta_h1", dh)
        if self.delta_s1 is not None:
            ds = _hermitian(self.delta_s1, "delta_s1", tol.hermiticity)
            if ds.shape != dh.shape:
                raise InputError(f"delta_s1 shape {ds.shape} does not match dim {self.pair.dim}")
            resid = first_order_residual(self.pair, dh, ds)
            if resid > tol.first_order * _first_order_scale(self.pair, dh, ds):
                raise InputError(
                    "delta_s1 does not satisfy [H, dS] = [S, dH]: "
                    f"residual {resid:.3e}"
                )
            ds.setflags(write=False)
            object.__setattr__(self, "delta_s1", ds)

    @classmethod
    def from_matrices(cls, hamiltonian, symmetry, delta_h1, delta_s1=None, tolerances=None):
        tolerances = tolerances or DEFAULT_TOLERANCES
        pair = SymmetryPair(
            hamiltonian, symmetry, tolerances.hermiticity, tolerances.commute
        )
        return cls(pair, delta_h1, delta_s1, tolerances)

    def spectrum(self) -> JointSpectrum:
        return joint_diagonalize(self.pair, self.tolerances.cluster)


def solve_first_order(prob: DeformationProblem, spectrum: JointSpectrum | None = None) -> np.ndarray:
    """First-order symmetry correction ``dS`` with ``[H, dS] = [S, dH]``.

    A user-supplied ``delta_s1`` is returned unchanged (it was validated on
    construction).  Otherwise the correction is built block by block with
    zero diagonal-block part; on a block where the Hamiltonian eigenvalues
    agree but the charges differ, the perturbation must vanish, and
    :class:`FirstOrderObstructed` lists the blocks where it does not.
    """
    if prob.delta_s1 is not None:
        return prob.delta_s1
    if spectrum is None:
        spectrum = prob.spectrum()
    dh = prob.delta_h1
    ds = np.zeros_like(dh)
    gap_tol = spectrum.cluster_tol
    bad = []
    for idx in spectrum.off_diagonal_blocks():
        lam, mu = spectrum.gaps(idx)
        block = block_project(dh, spectrum, idx)
        if abs(lam) > gap_tol:
            ds += (mu / lam) * block
        else:
            norm = frobenius(block)
            if norm > prob.tolerances.first_order * max(1.0, frobenius(dh)):
                bad.append(((idx.first, idx.second), norm))
    if bad:
        raise FirstOrderObstructed(
            f"perturbation breaks the symmetry at first order on {len(bad)} block(s)", bad
        )
    ds = 0.5 * (ds + ds.conj().T)
    resid = first_order_residual(prob.pair, dh, ds)
    if resid > prob.tolerances.first_order * _first_order_scale(prob.pair, dh, ds):
        raise NumericalError(f"first-order solution has residual {resid:.3e}")
    return ds


@dataclass(frozen=True)
class ObstructionClass:
    """Z-projection of ``sum_k [x_k, y_{n-k}]`` at the order where it is checked.

    For order 2 this is the projection of ``[i dH1, i dS1]``.  ``hermitian``
    gives the same class as an observable, ``-i * representative``.
    """

    representative: AntiHermitianMatrix
    coefficients: np.ndarray
    norm: float
    tol: float
    order: int = 2

    @property
    def nonzero(self) -> bool:
        return self.norm > self.tol

    @property
    def hermitian(self) -> np.ndarray:
        return self.representative.hermitian()


def _obstruction(acc, spectrum, basis, tol, order) -> ObstructionClass:
    rep = spectrum.diagonal_part(acc)
    rep = 0.5 * (rep - rep.conj().T)
    return ObstructionClass(
        AntiHermitianMatrix(rep), basis.coords(rep), frobenius(rep), float(tol), order
    )


def _obstruction_tol(prob, scale) -> float:
    if prob.tolerances.obstruction is not None:
        return prob.tolerances.obstruction
    return 1e-8 * scale


def obstruction_second_order(
    prob: DeformationProblem,
    ds1,
    spectrum: JointSpectrum | None = None,
    basis: CommutantBasis | None = None,
) -> ObstructionClass:
    """Second-order obstruction class of the first-order data ``(dH1, ds1)``."""
    dh1 = prob.delta_h1
    ds1 = _hermitian(ds1, "delta_s1", prob.tolerances.hermiticity)
    resid = first_order_residual(prob.pair, dh1, ds1)
    if resid > prob.tolerances.first_order * _first_order_scale(prob.pair, dh1, ds1):
        raise InputError(f"(dH1, dS1) is not a 1-cocycle: residual {resid:.3e}")
    if spectrum is None:
        spectrum = prob.spectrum()
    if basis is None:
        basis = commutant_basis(spectrum)
    acc = commutator(1j * dh1, 1j * ds1)
    tol = _obstruction_tol(prob, frobenius(dh1) * frobenius(ds1))
    return _obstruction(acc, spectrum, basis, tol, 2)


def feasibility_residual(pair: SymmetryPair, dh1, ds1) -> float:
    """Least-squares residual of ``[H, dS2] + [dH2, S] + [dH1, dS1] = 0``.

    Solved over all Hermitian ``(dH2, dS2)`` through the realified linear map;
    shares no code with the spectral solver.
    """
    h, s = pair.hamiltonian, pair.symmetry
    n = pair.dim

    def lhs(u, v):
        # u, v anti-Hermitian; -i u, -i v sweep the Hermitian matrices
        dh2, ds2 = -1j * u, -1j * v
        return (commutator(h, ds2) + commutator(dh2, s),)

    A = realify_map(lhs, n, 2)
    rhs = -to_coords(commutator(np.asarray(dh1), np.asarray(ds1)))
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    return float(np.linalg.norm(A @ sol - rhs))


def completion_residual(
    prob: DeformationProblem,
    ds1,
    spectrum: JointSpectrum | None = None,
    basis: CommutantBasis | None = None,
    rank_tol: float = 1e-9,
) -> float:
    """Smallest class norm over all first-order completions of ``dH1``.

    With ``dH1`` fixed, ``dS1`` is only determined up to a Hermitian ``s``
    commuting with ``H``.  The class is affine in ``s``, so its minimum norm
    is a least-squares residual.  Zero means some choice of ``dS1`` lets the
    second order go through, even if the given one does not.
    """
    if spectrum is None:
        spectrum = prob.spectrum()
    if basis is None:
        basis = commutant_basis(spectrum)
    n = prob.pair.dim
    ad_h = realify_map(lambda w: (commutator(prob.pair.H, w),), n, 1)
    _, sv, vt = np.linalg.svd(ad_h)
    rank = int((sv > rank_tol * max(sv[0], frobenius(prob.pair.H))).sum())
    x1, y1 = 1j * prob.delta_h1, 1j * np.asarray(ds1)
    rhs = -basis.coords(spectrum.diagonal_part(commutator(x1, y1)))
    if len(basis) == 0:
        return 0.0
    free = [from_coords(v, u_basis(n)) for v in vt[rank:]]
    if not free:
        return float(np.linalg.norm(rhs))
    M = np.array([basis.coords(spectrum.diagonal_part(commutator(x1, s))) for s in free]).T
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return float(np.linalg.norm(M @ sol - rhs))


@dataclass(frozen=True)
class DeformationSeries:
    order: int
    h_coeffs: list
    s_coeffs: list
    gauge: str
    residual_profile: list
    slope: Optional[float]
    low_order_defect: float

    def evaluate(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        h = sum(t**k * c for k, c in enumerate(self.h_coeffs))
        s = sum(t**k * c for k, c in enumerate(self.s_coeffs))
        return h, s


@dataclass(frozen=True)
class Obstructed:
    order: int
    obstruction: ObstructionClass
    partial: list = field(default_factory=list, repr=False)  # (h_coeffs, s_coeffs) below `order`


HOMOTOPY_GAUGE = (
    "homotopy: off-diagonal parts from the contracting homotopy; commutant parts zero "
    "except least-norm corrections at order n-1 that cancel the commutant part at order n"
)


def _commutator_coefficients(hs, ss, upto):
    """``C_m = sum_{k+l=m} [hs[k], ss[l]]`` for ``m = 0..upto``."""
    N = len(hs) - 1
    out = []
    for m in range(upto + 1):
        acc = np.zeros_like(hs[0])
        for k in range(max(0, m - N), min(m, N) + 1):
            acc = acc + commutator(hs[k], ss[m - k])
        out.append(acc)
    return out


def _commutant_correction(acc, x1, y1, spectrum, basis):
    """Least-norm ``(a, b)`` in Z x Z cancelling the Z-part of ``acc + [x1, b] + [a, y1]``.

    Elements of Z are cocycles, so adding them to the previous order keeps
    that order solved; only their brackets with the first-order data reach
    the current order.
    """
    k = len(basis)
    cols = []
    for e in basis:
        cols.append(basis.coords(spectrum.diagonal_part(commutator(e, y1))))
    for e in basis:
        cols.append(basis.coords(spectrum.diagonal_part(commutator(x1, e))))
    M = np.array(cols).T
    rhs = -basis.coords(spectrum.diagonal_part(acc))
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return basis.combine(sol[:k]), basis.combine(sol[k:])


def _fit_slope(profile) -> Optional[float]:
    pts = [(t, r) for t, r in profile if r > 0.0]
    if len(pts) < 2:
        return None
    lt, lr = np.log10(np.array(pts)).T
    return float(np.polyfit(lt, lr, 1)[0])


def continue_series(
    prob: DeformationProblem,
    order: int,
    spectrum: JointSpectrum | None = None,
    t_samples=DEFAULT_T_SAMPLES,
) -> DeformationSeries | Obstructed:
    """Extend ``(H + t dH1, S + t dS1)`` to a commuting pair up to ``t**order``.

    At order ``n >= 3`` a Z-component of the right-hand side is first
    absorbed by adding commutant elements to the order ``n-1`` coefficients
    (they are cocycles, so order ``n-1`` stays solved).  Returns
    :class:`Obstructed` at the first order where a Z-component above the
    obstruction tolerance survives; at order 2 nothing can be absorbed since
    the first-order data is fixed.  The residual profile
    records ``||[H(t), S(t)]||_F`` for the truncated series; orders up to
    ``order`` cancel identically by construction, so only the ``t**(order+1)``
    and higher coefficients are summed (their cancellation below that order
    is checked separately and reported as ``low_order_defect``).
    """
    if order < 2:
        raise InputError("continue_series needs order >= 2")
    if spectrum is None:
        spectrum = prob.spectrum()
    basis = commutant_basis(spectrum)
    ds1 = solve_first_order(prob, spectrum)

    xs = [prob.pair.H, 1j * prob.delta_h1]
    ys = [prob.pair.S, 1j * ds1]
    for n in range(2, order + 1):
        acc = np.zeros_like(xs[0])
        scale = 0.0
        for k in range(1, n):
            acc = acc + commutator(xs[k], ys[n - k])
            scale += frobenius(xs[k]) * frobenius(ys[n - k])
        tol_n = _obstruction_tol(prob, scale)
        obstruction = _obstruction(acc, spectrum, basis, tol_n, n)
        if obstruction.nonzero and n >= 3:
            a, b = _commutant_correction(acc, xs[1], ys[1], spectrum, basis)
            xs[n - 1] = xs[n - 1] + a
            ys[n - 1] = ys[n - 1] + b
            acc = acc + commutator(xs[1], b) + commutator(a, ys[1])
            obstruction = _obstruction(acc, spectrum, basis, tol_n, n)
        if obstruction.nonzero:
            partial = ([-1j * x for x in xs], [-1j * y for y in ys])
            return Obstructed(n, obstruction, list(partial))
        off = -(acc - spectrum.diagonal_part(acc))
        step = homotopy(Cochain(2, z=off), spectrum)
        xs.append(step.x)
        ys.append(step.y)

    hs = [_herm(-1j * x) for x in xs]
    ss = [_herm(-1j * y) for y in ys]
    coeffs = _commutator_coefficients(hs, ss, 2 * order)
    scale = max(1.0, max(frobenius(h) for h in hs) * max(frobenius(s) for s in ss))
    low = max(frobenius(c) for c in coeffs[: order + 1])
    if low > 1e-9 * scale:
        raise NumericalError(f"series does not cancel through order {order}: {low:.3e}")

    profile = []
    for t in t_samples:
        tail = sum(t**m * coeffs[m] for m in range(order + 1, 2 * order + 1))
        profile.append((float(t), frobenius(tail)))
    slope = _fit_slope(profile)
    if slope is not None and abs(slope - (order + 1)) > SLOPE_TOL:
        raise NumericalError(
            f"truncation residual slope {slope:.3f} differs from {order + 1} by more than {SLOPE_TOL}"
        )
    return DeformationSeries(order, hs, ss, HOMOTOPY_GAUGE, profile, slope, float(low))


def _herm(m):
    return 0.5 * (m + m.conj().T)


@dataclass
class AnomalyReport:
    spectrum: JointSpectrum
    cohomology: dict  # method name -> CohomologyReport
    first_order: Optional[np.ndarray]
    first_order_failure: Optional[list]
    obstruction: Optional[ObstructionClass]
    feasibility: Optional[float]
    anomaly: bool
    anomaly_order: Optional[int]
    gauge_check: Optional[float] = None
    completion: Optional[float] = None
    series: DeformationSeries | Obstructed | None = None


def _random_anti_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a - a.conj().T)


def anomaly_report(
    prob: DeformationProblem,
    order: int | None = None,
    seed: int | None = 0,
    feasibility_max_dim: int = FEASIBILITY_MAX_DIM,
) -> AnomalyReport:
    """Run spectrum, cohomology (both ways), first order, obstruction.

    With ``seed`` set, the obstruction is recomputed after a random
    coboundary shift of the first-order data and the deviation is stored in
    ``gauge_check``.
    """
    tol = prob.tolerances
    spectrum = prob.spectrum()
    theorem = cohomology_theorem(spectrum)
    brute = cohomology_bruteforce(prob.pair, tol.rank)
    if theorem.dims != brute.dims:
        raise NumericalError(f"cohomology mismatch: theorem {theorem.dims} vs brute force {brute.dims}")
    cohomology = {"theorem": theorem, "brute_force": brute}

    try:
        ds1 = solve_first_order(prob, spectrum)
    except FirstOrderObstructed as exc:
        return AnomalyReport(spectrum, cohomology, None, exc.blocks, None, None, True, 1)

    obstruction = obstruction_second_order(prob, ds1, spectrum, theorem.commutant)

    feas = None
    if prob.pair.dim <= feasibility_max_dim:
        feas = feasibility_residual(prob.pair, prob.delta_h1, ds1)
        slack = 1e-8 * max(1.0, frobenius(prob.delta_h1) * frobenius(ds1))
        if abs(feas - obstruction.norm) > slack:
            raise NumericalError(
                f"least-squares residual {feas:.3e} disagrees with obstruction norm {obstruction.norm:.3e}"
            )

    if spectrum.nondegenerate and obstruction.nonzero:
        raise NumericalError("nonzero obstruction on a nondegenerate spectrum")

    gauge_check = None
    if seed is not None:
        rng = np.random.default_rng(seed)
        omega = _random_anti_hermitian(rng, prob.pair.dim)
        dh = prob.delta_h1 + commutator(prob.pair.hamiltonian, omega)
        ds = ds1 + commutator(prob.pair.symmetry, omega)
        shifted = DeformationProblem(prob.pair, dh, ds, tol)
        other = obstruction_second_order(shifted, ds, spectrum, theorem.commutant)
        gauge_check = frobenius(other.representative.inner - obstruction.representative.inner)

    completion = completion_residual(prob, ds1, spectrum, theorem.commutant, tol.rank)

    series = None
    if order is not None and order >= 2:
        series = continue_series(prob, order, spectrum)

    anomaly = obstruction.nonzero
    return AnomalyReport(
        spectrum,
        cohomology,
        ds1,
        None,
        obstruction,
        feas,
        anomaly,
        2 if anomaly else None,
        gauge_check,
        completion,
        series,
    )
