"""4-channel scattering matrices at fixed momentum k.

Channel conventions
-------------------
Plane waves on either side of a device are written

    psi_s(x < 0)  = a_Ls * e^{ikx} + b_Ls * e^{-ikx}
    psi_s(x > X)  = b_Rs * e^{ikx} + a_Rs * e^{-ikx}

with left amplitudes referenced to the device entry plane and right
amplitudes to the exit plane.  The scattering matrix maps incoming to
outgoing amplitudes in the grouped channel order

    (left_up, left_down, right_up, right_down).

The closed-form single spin-flip-defect matrix is also provided in its
source ordering (left_up, right_up, left_down, right_down); the frozen
permutation between the two orderings is ``CLOSED_FORM_PERMUTATION`` and
was determined by directly solving the defect's matching equations (the
mapping involves no extra phase).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidTransferError, ParameterDomainError, SpectralSingularityError
from .extensions import current_forms

__all__ = [
    "CHANNELS",
    "CLOSED_FORM_CHANNELS",
    "CLOSED_FORM_PERMUTATION",
    "ScatteringMatrix",
    "ChannelAmplitudes",
    "channel_index",
    "propagation",
    "transfer_to_scattering",
    "closed_form_flip_smatrix",
    "closed_form_to_grouped",
    "channel_probabilities",
    "momentum_from_energy",
]

CHANNELS = ("left_up", "left_down", "right_up", "right_down")

#: Channel order of :func:`closed_form_flip_smatrix`.
CLOSED_FORM_CHANNELS = ("left_up", "right_up", "left_down", "right_down")

#: ``CLOSED_FORM_PERMUTATION[i]`` is the closed-form index of grouped channel i.
CLOSED_FORM_PERMUTATION = (0, 2, 1, 3)

_FORM_X = current_forms()[0].matrix


def channel_index(channel: int | str) -> int:
    """Resolve a channel name or index to its grouped-order index."""
    if isinstance(channel, str):
        try:
            return CHANNELS.index(channel)
        except ValueError:
            raise ParameterDomainError(
                f"unknown channel {channel!r}; expected one of {CHANNELS}"
            ) from None
    idx = int(channel)
    if not 0 <= idx < 4:
        raise ParameterDomainError(f"channel index must be in 0..3, got {channel}")
    return idx


@dataclass(eq=False)
class ScatteringMatrix:
    """Unitary 4x4 map from incoming to outgoing channel amplitudes."""

    matrix: np.ndarray
    k: float

    @property
    def energy(self) -> float:
        return self.k * self.k

    def unitarity_residual(self) -> float:
        s = self.matrix
        return float(np.abs(s.conj().T @ s - np.eye(4)).max())

    def is_unitary(self, tol: float = 1e-10) -> bool:
        return self.unitarity_residual() <= tol

    def probabilities(self, incident: int | str) -> np.ndarray:
        return channel_probabilities(self, incident)

    def apply(self, incoming) -> "ChannelAmplitudes":
        inc = np.asarray(incoming, dtype=complex).reshape(4)
        return ChannelAmplitudes(incoming=inc, outgoing=self.matrix @ inc)


@dataclass(eq=False)
class ChannelAmplitudes:
    """Incoming/outgoing plane-wave amplitudes in grouped channel order."""

    incoming: np.ndarray
    outgoing: np.ndarray

    def flux_mismatch(self) -> float:
        """|outgoing|^2 - |incoming|^2; vanishes for a unitary map."""
        return float(np.sum(np.abs(self.outgoing) ** 2) - np.sum(np.abs(self.incoming) ** 2))


def momentum_from_energy(energy: float) -> float:
    """k for a given E = k^2 (positive branch)."""
    if not energy > 0:
        raise ParameterDomainError(f"energy must be > 0, got {energy}")
    return float(np.sqrt(energy))


def propagation(k: float, length: float) -> np.ndarray:
    """Transfer matrix of a free segment of the given length.

    Block-diagonal over spin with blocks
    [[cos kL, sin kL / k], [-k sin kL, cos kL]]; determinant 1.
    """
    if not k > 0:
        raise ParameterDomainError(f"momentum must be > 0, got {k}")
    if length < 0:
        raise ParameterDomainError(f"length must be >= 0, got {length}")
    c = np.cos(k * length)
    s = np.sin(k * length)
    block = np.array([[c, s / k], [-k * s, c]], dtype=complex)
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = block
    out[2:, 2:] = block
    return out


def _amplitude_transfer(transfer: np.ndarray, k: float) -> np.ndarray:
    """Conjugate a boundary transfer matrix into the plane-wave amplitude basis."""
    w = np.array([[1.0, 1.0], [1j * k, -1j * k]], dtype=complex)
    w4 = np.kron(np.eye(2), w)
    return np.linalg.solve(w4, transfer @ w4)


def _solve_rearrangement(amp_transfer: np.ndarray, k: float) -> np.ndarray:
    """Express outgoing amplitudes through incoming ones.

    The amplitude transfer relates (a_Lu, b_Lu, a_Ld, b_Ld) on the left to
    (b_Ru, a_Ru, b_Rd, a_Rd) on the right; moving the outgoing unknowns
    (b_Lu, b_Ld, b_Ru, b_Rd) to one side gives a 4x4 linear system whose
    solution is the scattering matrix in grouped channel order.
    """
    tt = amp_transfer
    a = np.zeros((4, 4), dtype=complex)
    b = np.zeros((4, 4), dtype=complex)
    a[:, 0] = -tt[:, 1]
    a[:, 1] = -tt[:, 3]
    a[0, 2] = 1.0
    a[2, 3] = 1.0
    b[:, 0] = tt[:, 0]
    b[:, 1] = tt[:, 2]
    b[1, 2] = -1.0
    b[3, 3] = -1.0
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > 1e12:
        raise SpectralSingularityError(k)
    return np.linalg.solve(a, b)


def transfer_to_scattering(
    transfer: np.ndarray, k: float, *, conservation_tol: float = 1e-10
) -> ScatteringMatrix:
    """Convert a 4x4 boundary transfer matrix into a scattering matrix.

    Parameters
    ----------
    transfer:
        Total transfer matrix of the device at momentum ``k``.
    k:
        Momentum, > 0; both asymptotic sides carry the same k.
    conservation_tol:
        Gate on the longitudinal-current condition M^dag F_x M = F_x,
        measured relative to the squared matrix scale so that opaque
        devices with large transfer entries are not rejected for pure
        round-off.

    Raises
    ------
    InvalidTransferError
        If the transfer violates longitudinal-current conservation.
    SpectralSingularityError
        If the in/out rearrangement is (numerically) singular at this k.
    """
    if not k > 0:
        raise ParameterDomainError(f"momentum must be > 0, got {k}")
    t = np.asarray(transfer, dtype=complex)
    if t.shape != (4, 4):
        raise ParameterDomainError(f"transfer matrix must be 4x4, got shape {t.shape}")
    scale = max(1.0, float(np.abs(t).max()) ** 2)
    residual = float(np.abs(t.conj().T @ _FORM_X @ t - _FORM_X).max())
    if residual > conservation_tol * scale:
        raise InvalidTransferError(
            f"transfer does not conserve the longitudinal current "
            f"(residual {residual:.3e}, scale {scale:.3e})"
        )
    s = _solve_rearrangement(_amplitude_transfer(t, k), k)
    return ScatteringMatrix(matrix=s, k=float(k))


def closed_form_flip_smatrix(k: float, r: float) -> np.ndarray:
    """Closed-form S-matrix of a single spin-flip defect of strength ``r``.

    Returned in the source channel order ``CLOSED_FORM_CHANNELS``
    (left_up, right_up, left_down, right_down):

        1/(k^2 r^2 + 4) * [[k2r2, 4, -2ikr, 2ikr],
                           [4, k2r2, 2ikr, -2ikr],
                           [-2ikr, 2ikr, k2r2, 4],
                           [2ikr, -2ikr, 4, k2r2]]

    Unitary for every real r.  Use :func:`closed_form_to_grouped` to
    reorder into the grouped channel convention.
    """
    if not k > 0:
        raise ParameterDomainError(f"momentum must be > 0, got {k}")
    kr = k * r
    d = kr * kr + 4.0
    t = kr * kr / d
    u = 4.0 / d
    f = 2j * kr / d
    return np.array(
        [
            [t, u, -f, f],
            [u, t, f, -f],
            [-f, f, t, u],
            [f, -f, u, t],
        ],
        dtype=complex,
    )


def closed_form_to_grouped(matrix: np.ndarray) -> np.ndarray:
    """Reorder a closed-form-ordered matrix into grouped channel order."""
    perm = np.asarray(CLOSED_FORM_PERMUTATION)
    m = np.asarray(matrix, dtype=complex)
    return m[np.ix_(perm, perm)]


def channel_probabilities(s, incident: int | str) -> np.ndarray:
    """Outgoing-channel probabilities for a unit-amplitude incident channel.

    Squared moduli of the S-matrix column of the incident channel; the
    four entries follow the grouped channel order and sum to 1 for a
    unitary S.
    """
    matrix = s.matrix if isinstance(s, ScatteringMatrix) else np.asarray(s, dtype=complex)
    idx = channel_index(incident)
    return np.abs(matrix[:, idx]) ** 2
