"""Angular-momentum operators and tensor-product embedding.

Basis convention used across the whole package: states of a spin s are
ordered by descending magnetic quantum number, |s, s>, |s, s-1>, ...,
|s, -s>, so index 0 always carries m = +s.  In joint spaces the electron
occupies slot 0 and the nucleus slot 1.  hbar = 1 everywhere; operators
are dimensionless and energies carry frequency units.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# An operator on a (joint) Hilbert space is a dense complex square array.
OperatorMatrix = np.ndarray


@dataclass(frozen=True)
class SpinQuantumNumber:
    """Spin magnitude stored as twice the spin, so s=1/2 <-> two_s=1."""

    two_s: int

    def __post_init__(self):
        if not isinstance(self.two_s, int) or self.two_s < 1:
            raise ValueError(f"two_s must be a positive integer, got {self.two_s!r}")

    @property
    def s(self) -> float:
        return 0.5 * self.two_s

    @property
    def dim(self) -> int:
        return self.two_s + 1


class SpinOperators(NamedTuple):
    sx: OperatorMatrix
    sy: OperatorMatrix
    sz: OperatorMatrix
    splus: OperatorMatrix
    sminus: OperatorMatrix


def spin_operators(spin: SpinQuantumNumber) -> SpinOperators:
    """Spin matrices in the descending-m basis.

    Ladder elements follow <m+1|S+|m> = sqrt(s(s+1) - m(m+1)); with the
    descending ordering S+ sits on the first superdiagonal.

    Parameters
    ----------
    spin : SpinQuantumNumber

    Returns
    -------
    SpinOperators
        Named tuple (sx, sy, sz, splus, sminus) of complex matrices.
    """
    s = spin.s
    m = s - np.arange(spin.dim)
    sz = np.diag(m).astype(np.complex128)
    # column j+1 holds |m> with m = s-(j+1); S+ raises it to row j
    m_low = m[1:]
    coeff = np.sqrt(s * (s + 1.0) - m_low * (m_low + 1.0))
    splus = np.diag(coeff, 1).astype(np.complex128)
    sminus = splus.conj().T.copy()
    sx = 0.5 * (splus + sminus)
    sy = -0.5j * (splus - sminus)
    return SpinOperators(sx, sy, sz, splus, sminus)


def embed(op: OperatorMatrix, slot: int, dims) -> OperatorMatrix:
    """Lift a single-subsystem operator onto the joint space.

    Returns Identity (x) ... (x) op (x) ... (x) Identity with ``op`` in
    position ``slot`` of ``dims``.

    Raises
    ------
    ValueError
        If ``slot`` is out of range or ``op`` does not match dims[slot].
    """
    dims = tuple(int(d) for d in dims)
    if not 0 <= slot < len(dims):
        raise ValueError(f"slot {slot} out of range for dims {dims}")
    op = np.asarray(op, dtype=np.complex128)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(f"operator must be square, got shape {op.shape}")
    if op.shape[0] != dims[slot]:
        raise ValueError(
            f"operator dimension {op.shape[0]} does not match dims[{slot}] = {dims[slot]}"
        )
    out = np.array([[1.0 + 0.0j]])
    for i, d in enumerate(dims):
        out = np.kron(out, op if i == slot else np.eye(d, dtype=np.complex128))
    return out
