"""Excited-state spin model: Hamiltonian, collapse channels, Liouvillian.

All couplings are linear frequencies in MHz, magnetic fields in Gauss,
relaxation times in microseconds.  The 2*pi conversion to angular
frequency happens once, inside :func:`liouvillian`; collapse rates are
inverse microseconds and enter the generator unscaled.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import solver
from ._kernels import liouvillian_dense
from .spinops import OperatorMatrix, SpinQuantumNumber, embed, spin_operators

# Default constants.  gamma_e corresponds to electron g ~ 2; gamma_n is
# the 14N value.  Dissipation defaults are working values meant to be
# overridden or calibrated via calibrate_pump.
GAMMA_E_MHZ_PER_G = 2.8025
GAMMA_N14_MHZ_PER_G = 3.077e-4
D_ES_MHZ = 1400.0
A_HYPERFINE_MHZ = 40.0

ELECTRON_SPIN = SpinQuantumNumber(2)
# index of m_s = 0 in the descending-m spin-1 electron basis (+1, 0, -1)
MS0_INDEX = 1


class CalibrationError(ValueError):
    """Raised when calibrate_pump cannot reach the requested target."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


@dataclass(frozen=True)
class HyperfineTensor:
    """Hyperfine coupling, axial (a_par, a_perp) or full symmetric 3x3.

    When ``matrix`` is given it takes precedence; it must be symmetric
    to 1e-12.  Axial parameters map to diag(a_perp, a_perp, a_par).
    """

    a_par: float = A_HYPERFINE_MHZ
    a_perp: float = A_HYPERFINE_MHZ
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.matrix is not None:
            m = np.asarray(self.matrix, dtype=float)
            if m.shape != (3, 3):
                raise ValueError(f"hyperfine matrix must be 3x3, got {m.shape}")
            if np.abs(m - m.T).max() > 1e-12:
                raise ValueError("hyperfine matrix must be symmetric to 1e-12")
            object.__setattr__(self, "matrix", m)

    def as_matrix(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        return np.diag([self.a_perp, self.a_perp, self.a_par]).astype(float)


@dataclass(frozen=True)
class NVSystemParams:
    """Coherent parameters of the electron (x) nucleus system."""

    d_es: float = D_ES_MHZ
    e_es: float = 0.0
    b_field: tuple = (0.0, 0.0, 0.0)
    gamma_e: float = GAMMA_E_MHZ_PER_G
    gamma_n: float = GAMMA_N14_MHZ_PER_G
    hyperfine: HyperfineTensor = field(default_factory=HyperfineTensor)
    nuclear_spin: SpinQuantumNumber = SpinQuantumNumber(2)

    def __post_init__(self):
        if not self.d_es > 0:
            raise ValueError(f"d_es must be positive, got {self.d_es}")
        if not self.gamma_e > 0:
            raise ValueError(f"gamma_e must be positive, got {self.gamma_e}")
        if not abs(self.gamma_n) < self.gamma_e:
            raise ValueError("expected |gamma_n| < gamma_e")
        b = tuple(float(x) for x in self.b_field)
        if len(b) != 3:
            raise ValueError("b_field must have three components")
        object.__setattr__(self, "b_field", b)

    @property
    def dims(self) -> tuple:
        return (ELECTRON_SPIN.dim, self.nuclear_spin.dim)


@dataclass(frozen=True)
class DissipationParams:
    """Incoherent rates: optical pump plus T1 channels.

    pump_rate is the m_s = +-1 -> 0 transfer rate in MHz (inverse
    microseconds); pump_leak_ratio scales the reverse channels.  A
    relaxation time of math.inf switches that channel off.
    """

    pump_rate: float = 10.0
    pump_leak_ratio: float = 0.0
    t1_electron: float = 100.0
    t1_nuclear: float = 1000.0

    def __post_init__(self):
        if self.pump_rate < 0:
            raise ValueError("pump_rate must be >= 0")
        if not 0.0 <= self.pump_leak_ratio <= 1.0:
            raise ValueError("pump_leak_ratio must lie in [0, 1]")
        if not self.t1_electron > 0 or not self.t1_nuclear > 0:
            raise ValueError("relaxation times must be positive")


@dataclass(frozen=True)
class Liouvillian:
    """Dense vectorized Lindblad generator on an n-dim Hilbert space."""

    matrix: np.ndarray
    hilbert_dim: int

    def __post_init__(self):
        big = self.hilbert_dim * self.hilbert_dim
        if self.matrix.shape != (big, big):
            raise ValueError(
                f"Liouvillian matrix shape {self.matrix.shape} does not match "
                f"hilbert_dim {self.hilbert_dim}"
            )


def build_hamiltonian(p: NVSystemParams) -> OperatorMatrix:
    """Joint-space Hamiltonian in MHz.

    H = d_es (Sz^2 - S(S+1)/3) + e_es (Sx^2 - Sy^2)
        + B . (gamma_e S + gamma_n I) + I . A . S
    """
    dims = p.dims
    es = spin_operators(ELECTRON_SPIN)
    ns = spin_operators(p.nuclear_spin)
    sx, sy, sz = (embed(op, 0, dims) for op in (es.sx, es.sy, es.sz))
    ix, iy, iz = (embed(op, 1, dims) for op in (ns.sx, ns.sy, ns.sz))
    eye = np.eye(dims[0] * dims[1], dtype=np.complex128)
    s_e = ELECTRON_SPIN.s
    ham = p.d_es * (sz @ sz - (s_e * (s_e + 1.0) / 3.0) * eye)
    ham += p.e_es * (sx @ sx - sy @ sy)
    for b_k, s_k, i_k in zip(p.b_field, (sx, sy, sz), (ix, iy, iz)):
        if b_k != 0.0:
            ham += b_k * (p.gamma_e * s_k + p.gamma_n * i_k)
    ham += build_hyperfine(p.hyperfine, dims)
    return ham


def build_hyperfine(h: HyperfineTensor, dims) -> OperatorMatrix:
    """Hyperfine operator sum_ij A_ij I_i S_j on the joint space.

    The axial form equals the full form with diag(a_perp, a_perp, a_par)
    exactly; both are built through the same Cartesian sum so the
    equivalence holds bit for bit.
    """
    a = np.asarray(h.as_matrix(), dtype=float)
    es = spin_operators(ELECTRON_SPIN)
    nspin = SpinQuantumNumber(dims[1] - 1)
    ns = spin_operators(nspin)
    s_ops = [embed(op, 0, dims) for op in (es.sx, es.sy, es.sz)]
    i_ops = [embed(op, 1, dims) for op in (ns.sx, ns.sy, ns.sz)]
    out = np.zeros((dims[0] * dims[1],) * 2, dtype=np.complex128)
    for i in range(3):
        for j in range(3):
            if a[i, j] != 0.0:
                out += a[i, j] * (i_ops[i] @ s_ops[j])
    return out


def _ketbra(dim: int, i: int, j: int) -> np.ndarray:
    op = np.zeros((dim, dim), dtype=np.complex128)
    op[i, j] = 1.0
    return op


def build_collapse_ops(d: DissipationParams, dims) -> list:
    """Collapse channels as (operator, rate) pairs on the joint space.

    Channels: nuclear-conserving optical pump |m_s=0><m_s=+-1| at
    pump_rate with reverse channels at pump_rate * pump_leak_ratio;
    electron thermalization between every ordered m_s pair at
    1/(2 t1_electron); nuclear thermalization between adjacent m_I at
    1/(2 t1_nuclear).  Zero-rate channels are dropped.
    """
    de, dn = dims
    if de != ELECTRON_SPIN.dim:
        raise ValueError(f"electron dimension must be {ELECTRON_SPIN.dim}, got {de}")
    ops = []
    if d.pump_rate > 0:
        for src in (0, 2):
            ops.append((embed(_ketbra(de, MS0_INDEX, src), 0, dims), d.pump_rate))
        leak_rate = d.pump_rate * d.pump_leak_ratio
        if leak_rate > 0:
            for dst in (0, 2):
                ops.append((embed(_ketbra(de, dst, MS0_INDEX), 0, dims), leak_rate))
    rate_e = 0.0 if math.isinf(d.t1_electron) else 1.0 / (2.0 * d.t1_electron)
    if rate_e > 0:
        for i in range(de):
            for j in range(de):
                if i != j:
                    ops.append((embed(_ketbra(de, i, j), 0, dims), rate_e))
    rate_n = 0.0 if math.isinf(d.t1_nuclear) else 1.0 / (2.0 * d.t1_nuclear)
    if rate_n > 0:
        for i in range(dn - 1):
            ops.append((embed(_ketbra(dn, i, i + 1), 1, dims), rate_n))
            ops.append((embed(_ketbra(dn, i + 1, i), 1, dims), rate_n))
    return ops


def liouvillian(ham: OperatorMatrix, collapse: list) -> Liouvillian:
    """Vectorized Lindblad generator (row-stacking convention).

    L = -i 2 pi (H kron I - I kron H^T)
        + sum_k g_k (C_k kron conj(C_k)
                     - (C_k^H C_k kron I + I kron (C_k^H C_k)^T) / 2)

    The 2*pi converts the MHz Hamiltonian to angular frequency; rates
    g_k are inverse microseconds.  vec(I)^H L = 0 (trace preservation)
    holds to 1e-10 by construction.
    """
    ham = np.asarray(ham, dtype=np.complex128)
    n = ham.shape[0]
    if ham.shape != (n, n):
        raise ValueError(f"Hamiltonian must be square, got {ham.shape}")
    for op, _rate in collapse:
        if np.asarray(op).shape != (n, n):
            raise ValueError(
                f"collapse operator shape {np.asarray(op).shape} does not match "
                f"Hamiltonian dimension {n}"
            )
    if collapse:
        cops = np.stack([np.asarray(op, dtype=np.complex128) for op, _ in collapse])
        rates = np.array([float(r) for _, r in collapse])
    else:
        cops = np.zeros((0, n, n), dtype=np.complex128)
        rates = np.zeros(0)
    return Liouvillian(matrix=liouvillian_dense(ham, cops, rates), hilbert_dim=n)


def _electron_polarization_at(leak: float, d: DissipationParams, p: NVSystemParams) -> float:
    diss = replace(d, pump_leak_ratio=leak)
    ham = build_hamiltonian(p)
    lv = liouvillian(ham, build_collapse_ops(diss, p.dims))
    report = solver.steady_state(lv)
    return solver.electron_polarization(report.rho, p.dims)


def calibrate_pump(
    target_electron_polarization: float,
    d: DissipationParams,
    p: NVSystemParams,
    tol: float = 1e-3,
    max_iter: int = 200,
) -> DissipationParams:
    """Adjust pump_leak_ratio so the steady electron polarization at
    B = 0, a_perp = 0 matches the target.

    The calibration point removes the transfer mechanism (a_perp = 0)
    and the field dependence, leaving a monotone decreasing map from
    leak ratio to m_s = 0 population that is bisected on [0, 1].

    Raises
    ------
    CalibrationError
        If the target lies outside the attainable range; the message
        and the ``achieved`` attribute carry the closest bound.
    """
    if not 0.0 < target_electron_polarization < 1.0:
        raise ValueError("target polarization must lie strictly in (0, 1)")
    a_par = float(p.hyperfine.as_matrix()[2, 2])
    p_cal = replace(
        p,
        b_field=(0.0, 0.0, 0.0),
        hyperfine=HyperfineTensor(a_par=a_par, a_perp=0.0),
    )
    if d.pump_rate == 0:
        raise CalibrationError(
            "pump_rate is zero: electron polarization is fixed at the maximally "
            "mixed value and cannot be calibrated",
            achieved=1.0 / 3.0,
        )
    lo, hi = 0.0, 1.0
    p_lo = _electron_polarization_at(lo, d, p_cal)
    if target_electron_polarization > p_lo:
        raise CalibrationError(
            f"target {target_electron_polarization} unreachable: maximum "
            f"achievable electron polarization is {p_lo:.6f} at leak ratio 0",
            achieved=p_lo,
        )
    p_hi = _electron_polarization_at(hi, d, p_cal)
    if target_electron_polarization < p_hi:
        raise CalibrationError(
            f"target {target_electron_polarization} unreachable: minimum "
            f"achievable electron polarization is {p_hi:.6f} at leak ratio 1",
            achieved=p_hi,
        )
    # polarization decreases with leak, so keep the sign convention of a
    # decreasing function: f(lo) >= 0 >= f(hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        p_mid = _electron_polarization_at(mid, d, p_cal)
        if abs(p_mid - target_electron_polarization) <= tol:
            return replace(d, pump_leak_ratio=mid)
        if p_mid > target_electron_polarization:
            lo = mid
        else:
            hi = mid
    raise CalibrationError(
        f"bisection did not reach the target within {max_iter} iterations",
        achieved=p_mid,
    )
