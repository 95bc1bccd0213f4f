"""Bloch band structure of periodic combs of point interactions.

A comb repeats one cell of defects and internal free segments with period
``a``; whatever length the cell's internal segments do not use is filled
by a trailing free segment so that the cell transfer always spans exactly
one period.  Propagating Bloch solutions at momentum k are eigenvalues of
the cell transfer with |lambda| = 1; the quasi-momentum is
q = |arg lambda| / a in [0, pi/a] and the energy is E = k^2.

Combs built purely from spin-flip defects of the derivative-coupling type
block-diagonalize in the rotated spin basis (up +- down)/sqrt(2) into two
scalar value-jump combs, which gives an independent closed-form route to
the same spectrum (:func:`scalar_kp_relation`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .device import Device, FreeSegment, total_transfer
from .errors import FitWindowError, ParameterDomainError
from .extensions import DefectKind, DefectSpec
from .scattering import propagation

__all__ = [
    "PeriodicComb",
    "BandDiagram",
    "Branch",
    "ScalarDefect",
    "ScalarComb",
    "CurvatureFit",
    "SlopeFit",
    "cell_transfer",
    "dispersion",
    "spin_decouple",
    "scalar_cell_transfer",
    "scalar_dispersion",
    "scalar_kp_relation",
    "band_edges",
    "effective_mass",
    "sound_slope",
]


@dataclass(frozen=True)
class PeriodicComb:
    """One repeating cell (defects + internal segments) and its period."""

    cell: Device
    period: float = 1.0

    def __post_init__(self):
        if not self.period > 0:
            raise ParameterDomainError(f"period must be > 0, got {self.period}")
        internal = self.cell.total_length
        if internal > self.period + 1e-12:
            raise ParameterDomainError(
                f"internal free length {internal} exceeds period {self.period}"
            )

    @property
    def fill_length(self) -> float:
        return max(self.period - self.cell.total_length, 0.0)


@dataclass(frozen=True)
class Branch:
    """One continuity-paired set of (q, E) band points."""

    id: int
    k: np.ndarray
    q: np.ndarray
    energy: np.ndarray


@dataclass(eq=False)
class BandDiagram:
    """Propagating Bloch points of a comb over a momentum grid."""

    period: float
    k: np.ndarray
    q: np.ndarray
    energy: np.ndarray
    branch_id: np.ndarray
    lambda_residual: np.ndarray  # | |lambda| - 1 | of the accepted eigenvalue
    flagged_k: tuple[float, ...] = ()
    metadata: dict = field(default_factory=dict)

    def branches(self) -> list[Branch]:
        out = []
        for bid in sorted(set(int(b) for b in self.branch_id)):
            sel = self.branch_id == bid
            out.append(Branch(bid, self.k[sel], self.q[sel], self.energy[sel]))
        return out

    def __len__(self) -> int:
        return len(self.k)


def cell_transfer(comb: PeriodicComb, k: float) -> np.ndarray:
    """Transfer matrix across one full period (cell plus filling segment)."""
    return propagation(k, comb.fill_length) @ total_transfer(comb.cell, k)


def _match_branches(points, active, period):
    """Assign new (q, residual, vec) points to active branches by continuity.

    Minimizes total |dq| with a small eigenvector-overlap bonus so that
    branch crossings in q are resolved by the orthogonality of the two
    spin channels.  Returns a list aligned with ``points`` of branch ids
    (None for a freshly opened branch).
    """
    if not points:
        return []
    if not active:
        return [None] * len(points)
    gate = 0.25 * math.pi / period
    best_combo = None
    best_score = None
    for combo in itertools.product(range(-1, len(active)), repeat=len(points)):
        used = [c for c in combo if c >= 0]
        if len(used) != len(set(used)):
            continue
        dq = 0.0
        overlap = 0.0
        feasible = True
        for pt, c in zip(points, combo):
            if c < 0:
                dq += gate
                continue
            d = abs(pt[0] - active[c]["q"])
            if d > gate:
                feasible = False
                break
            dq += d
            overlap += abs(np.vdot(active[c]["vec"], pt[2]))
        if not feasible:
            continue
        score = dq - 1e-3 * (math.pi / period) * overlap
        if best_score is None or score < best_score:
            best_score = score
            best_combo = combo
    if best_combo is None:
        return [None] * len(points)
    return [active[c]["id"] if c >= 0 else None for c in best_combo]


def dispersion(comb: PeriodicComb, k_grid, *, bloch_tol: float = 1e-8) -> BandDiagram:
    """Compute the band diagram of a comb over a sorted positive k grid.

    For each k the eigenvalues of the cell transfer are computed;
    eigenvalues with ||lambda| - 1| < ``bloch_tol`` are propagating and
    contribute a point (q = |arg lambda|/a, E = k^2).  Conjugate pairs are
    collapsed to a single point, points are stitched into branches by
    nearest-neighbour continuity in q (ties broken by eigenvector
    overlap), and momenta where the eigenvector matrix is numerically
    defective are reported in ``flagged_k``.
    """
    ks = np.asarray(k_grid, dtype=float)
    if ks.ndim != 1 or len(ks) == 0:
        raise ParameterDomainError("k grid must be a non-empty 1d array")
    if not np.all(ks > 0):
        raise ParameterDomainError("k grid values must be > 0")
    if np.any(np.diff(ks) < 0):
        raise ParameterDomainError("k grid must be sorted ascending")
    a = comb.period

    rec_k, rec_q, rec_e, rec_b, rec_res = [], [], [], [], []
    flagged = []
    active: list[dict] = []
    next_id = 0
    for k in ks:
        transfer = cell_transfer(comb, float(k))
        lam, vecs = np.linalg.eig(transfer)
        cond = np.linalg.cond(vecs)
        if not np.isfinite(cond) or cond > 1e8:
            flagged.append(float(k))
        pts = []
        for j in range(4):
            residual = abs(abs(lam[j]) - 1.0)
            if residual < bloch_tol:
                q = abs(float(np.angle(lam[j]))) / a
                pts.append((q, residual, vecs[:, j]))
        pts.sort(key=lambda t: t[0])
        merged: list[tuple] = []
        for q, residual, vec in pts:
            if merged and q - merged[-1][0] < 1e-9 * max(1.0, math.pi / a):
                if residual < merged[-1][1]:
                    merged[-1] = (q, residual, vec)
            else:
                merged.append((q, residual, vec))
        ids = _match_branches(merged, active, a)
        new_active = []
        for (q, residual, vec), bid in zip(merged, ids):
            if bid is None:
                bid = next_id
                next_id += 1
            rec_k.append(float(k))
            rec_q.append(q)
            rec_e.append(float(k) ** 2)
            rec_b.append(bid)
            rec_res.append(residual)
            new_active.append({"id": bid, "q": q, "vec": vec})
        active = new_active

    return BandDiagram(
        period=a,
        k=np.array(rec_k),
        q=np.array(rec_q),
        energy=np.array(rec_e),
        branch_id=np.array(rec_b, dtype=int),
        lambda_residual=np.array(rec_res),
        flagged_k=tuple(flagged),
        metadata={"bloch_tol": bloch_tol},
    )


@dataclass(frozen=True)
class ScalarDefect:
    """Spinless value-jump defect of strength x4 (boundary block [[1,-x4],[0,1]])."""

    x4: float


@dataclass(frozen=True)
class ScalarComb:
    """Scalar (single-channel) comb of value-jump defects."""

    elements: tuple[ScalarDefect | FreeSegment, ...]
    period: float

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.period > 0:
            raise ParameterDomainError(f"period must be > 0, got {self.period}")

    @property
    def fill_length(self) -> float:
        internal = sum(el.length for el in self.elements if isinstance(el, FreeSegment))
        return max(self.period - internal, 0.0)


def spin_decouple(comb: PeriodicComb) -> tuple[ScalarComb, ScalarComb] | None:
    """Split a pure spin-flip comb into its two scalar value-jump channels.

    In the basis (up + down)/sqrt(2), (up - down)/sqrt(2) every spin-flip
    defect of strength r block-diagonalizes into value-jump blocks
    [[1, +r],[0,1]] and [[1, -r],[0,1]], i.e. scalar strengths x4 = -r and
    x4 = +r.  Returns ``(comb with x4=-r, comb with x4=+r)``, or None when
    the cell contains any other defect kind (inapplicable).
    """
    minus: list[ScalarDefect | FreeSegment] = []
    plus: list[ScalarDefect | FreeSegment] = []
    for el in comb.cell.elements:
        if isinstance(el, FreeSegment):
            minus.append(el)
            plus.append(el)
        elif isinstance(el, DefectSpec) and el.kind is DefectKind.R_FLIP:
            minus.append(ScalarDefect(x4=-el.r))
            plus.append(ScalarDefect(x4=+el.r))
        else:
            return None
    return ScalarComb(tuple(minus), comb.period), ScalarComb(tuple(plus), comb.period)


def _scalar_propagation(k: float, length: float) -> np.ndarray:
    c = math.cos(k * length)
    s = math.sin(k * length)
    return np.array([[c, s / k], [-k * s, c]])


def scalar_cell_transfer(comb: ScalarComb, k: float) -> np.ndarray:
    """2x2 transfer across one period of a scalar comb."""
    if not k > 0:
        raise ParameterDomainError(f"momentum must be > 0, got {k}")
    total = np.eye(2)
    for el in comb.elements:
        if isinstance(el, FreeSegment):
            m = _scalar_propagation(k, el.length)
        else:
            m = np.array([[1.0, -el.x4], [0.0, 1.0]])
        total = m @ total
    return _scalar_propagation(k, comb.fill_length) @ total


def scalar_dispersion(comb: ScalarComb, k_grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Propagating (k, q, E) points of a scalar comb via the trace condition.

    The cell transfer has unit determinant, so Bloch solutions exist iff
    |tr T / 2| <= 1, with cos(q a) = tr T / 2.
    """
    ks, qs, es = [], [], []
    for k in np.asarray(k_grid, dtype=float):
        half_trace = float(np.trace(scalar_cell_transfer(comb, float(k)))) / 2.0
        if abs(half_trace) <= 1.0:
            ks.append(float(k))
            qs.append(math.acos(half_trace) / comb.period)
            es.append(float(k) ** 2)
    return np.array(ks), np.array(qs), np.array(es)


def scalar_kp_relation(x4: float, a: float, k: float) -> float:
    """cos(qa) candidate for a one-defect-per-period value-jump comb.

    Returns cos(ka) + (x4*k/2)*sin(ka); k propagates iff the value lies
    in [-1, 1].
    """
    if not k > 0:
        raise ParameterDomainError(f"momentum must be > 0, got {k}")
    return math.cos(k * a) + 0.5 * x4 * k * math.sin(k * a)


def band_edges(x4: float, a: float, k_max: float, *, scan_step: float = 0.01) -> np.ndarray:
    """Band-edge momenta of the one-defect scalar comb below ``k_max``.

    Scans |cos(qa) candidate| - 1 with bracket step ka = ``scan_step`` and
    refines each sign change by root bisection.
    """
    if not k_max > 0:
        raise ParameterDomainError(f"k_max must be > 0, got {k_max}")

    def g(k: float) -> float:
        return abs(scalar_kp_relation(x4, a, k)) - 1.0

    step = scan_step / a
    ks = np.arange(step, k_max + step, step)
    edges = []
    prev_k, prev_g = float(ks[0]), g(float(ks[0]))
    for k in ks[1:]:
        cur_g = g(float(k))
        if prev_g == 0.0:
            edges.append(prev_k)
        elif prev_g * cur_g < 0:
            edges.append(float(brentq(g, prev_k, float(k), xtol=1e-13)))
        prev_k, prev_g = float(k), cur_g
    return np.array(edges)


@dataclass(frozen=True)
class CurvatureFit:
    """Least-squares fit E = c q^2 near q = 0."""

    coefficient: float
    mass: float  # 1/(2c); equals 1/2 for the free branch in these units
    residual: float
    n_points: int


@dataclass(frozen=True)
class SlopeFit:
    """Fit E = v q + w q^2 near q = 0; v isolates the q -> 0 slope."""

    slope: float
    curvature: float
    residual: float
    n_points: int


def _window_points(branch: Branch, q_window, min_points: int):
    q_lo, q_hi = q_window
    sel = (branch.q > q_lo) & (branch.q <= q_hi)
    n = int(np.count_nonzero(sel))
    if n < min_points:
        raise FitWindowError(
            f"branch {branch.id} has {n} points in q-window ({q_lo}, {q_hi}], "
            f"need at least {min_points}"
        )
    return branch.q[sel], branch.energy[sel], n


def effective_mass(branch: Branch, q_window=(0.0, 0.2), min_points: int = 10) -> CurvatureFit:
    """Fit E = c q^2 on a branch near q = 0 and report the curvature.

    The associated mass 1/(2c) follows the E = k^2 normalization of this
    package; ratios of coefficients between branches are normalization
    free.
    """
    q, e, n = _window_points(branch, q_window, min_points)
    q2 = q * q
    c = float(np.dot(q2, e) / np.dot(q2, q2))
    residual = float(np.sqrt(np.mean((e - c * q2) ** 2)))
    return CurvatureFit(coefficient=c, mass=1.0 / (2.0 * c), residual=residual, n_points=n)


def sound_slope(branch: Branch, q_window=(0.0, 0.1), min_points: int = 10) -> SlopeFit:
    """Extract the linear slope of a (near-)massless branch at q -> 0.

    Fits E = v q + w q^2 so that the reported slope v is free of the
    leading curvature bias a plain one-parameter fit would pick up over
    a finite window.
    """
    q, e, n = _window_points(branch, q_window, min_points)
    design = np.column_stack([q, q * q])
    coef, *_ = np.linalg.lstsq(design, e, rcond=None)
    v, w = (float(coef[0]), float(coef[1]))
    residual = float(np.sqrt(np.mean((e - design @ coef) ** 2)))
    return SlopeFit(slope=v, curvature=w, residual=residual, n_points=n)
