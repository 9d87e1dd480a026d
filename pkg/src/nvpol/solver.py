"""Steady-state extraction, time evolution, and density-matrix observables."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .spinops import SpinQuantumNumber, spin_operators

# relative SVD threshold for the Liouvillian null space
TOL_NULL = 1e-9

DensityMatrix = np.ndarray


class SolverError(Exception):
    """Base class for steady-state solver failures."""


class NoStationaryState(SolverError):
    """The Liouvillian has no null vector within tolerance."""


class DegenerateSteadyState(SolverError):
    """The stationary subspace has dimension > 1."""

    def __init__(self, null_space_dim: int):
        super().__init__(
            f"steady state is degenerate: null space dimension {null_space_dim}; "
            "check that dissipation connects all states"
        )
        self.null_space_dim = null_space_dim


@dataclass(frozen=True)
class SteadyStateReport:
    rho: DensityMatrix
    residual_norm: float
    null_space_dim: int


def validate_density_matrix(rho: np.ndarray, herm_tol=1e-10, trace_tol=1e-10,
                            psd_tol=1e-9) -> None:
    """Check Hermiticity, unit trace, and positivity up to solver tolerance.

    Positivity is validated, never enforced: eigenvalues below -psd_tol
    raise, because projecting them away would mask solver bugs.
    """
    if np.abs(rho - rho.conj().T).max() > herm_tol:
        raise SolverError("density matrix is not Hermitian within tolerance")
    if abs(np.trace(rho) - 1.0) > trace_tol:
        raise SolverError(f"density matrix trace {np.trace(rho)} is not 1")
    evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if evals.min() < -psd_tol:
        raise SolverError(
            f"density matrix has eigenvalue {evals.min():.3e} below -{psd_tol}"
        )


def steady_state(lv) -> SteadyStateReport:
    """Stationary density matrix from the SVD null space of L.

    Singular vectors with singular value < TOL_NULL * sigma_max span the
    null space.  A unique null vector is reshaped (row stacking),
    hermitized to scrub numerical asymmetry, and trace-normalized.  The
    residual ||L vec(rho)||_2 is recomputed on the returned state.

    Raises
    ------
    NoStationaryState
        If the null space is empty within tolerance.
    DegenerateSteadyState
        If its dimension exceeds one; physical models with nonzero pump
        have unique steady states, so degeneracy signals a bad config.
    """
    mat = lv.matrix
    n = lv.hilbert_dim
    _u, sing, vh = np.linalg.svd(mat)
    sigma_max = sing[0] if sing.size else 0.0
    null_dim = int(np.count_nonzero(sing < TOL_NULL * sigma_max)) if sigma_max > 0 else sing.size
    if null_dim == 0:
        raise NoStationaryState(
            f"no singular value below {TOL_NULL:g} * sigma_max = {TOL_NULL * sigma_max:.3e}"
        )
    if null_dim > 1:
        raise DegenerateSteadyState(null_dim)
    rho = vh[-1].conj().reshape(n, n)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho)
    if abs(tr) < 1e-12:
        raise NoStationaryState("null vector is traceless; not a physical state")
    rho = rho / tr
    validate_density_matrix(rho)
    residual = float(np.linalg.norm(mat @ rho.reshape(-1)))
    return SteadyStateReport(rho=rho, residual_norm=residual, null_space_dim=null_dim)


def evolve(rho0: DensityMatrix, lv, t: float) -> DensityMatrix:
    """Propagate rho0 for time t (us): vec(rho_t) = expm(L t) vec(rho0).

    Serves as an independent oracle for steady_state; scaling-and-
    squaring expm keeps trace and Hermiticity to 1e-8.
    """
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    n = lv.hilbert_dim
    rho0 = np.asarray(rho0, dtype=np.complex128)
    if rho0.shape != (n, n):
        raise ValueError(f"state shape {rho0.shape} does not match hilbert_dim {n}")
    vec = scipy.linalg.expm(lv.matrix * t) @ rho0.reshape(-1)
    return vec.reshape(n, n)


def slowest_rate(lv) -> float:
    """Smallest nonzero decay rate |Re(eigenvalue)| of the Liouvillian.

    Sets the relaxation horizon: evolving for ~50 / slowest_rate reaches
    the steady state to well below 1e-6.
    """
    ev = np.linalg.eigvals(lv.matrix)
    rates = np.abs(ev.real)
    cutoff = max(rates.max(), 1.0) * 1e-12
    rates = rates[rates > cutoff]
    if rates.size == 0:
        raise SolverError("Liouvillian has no decaying modes")
    return float(rates.min())


def partial_trace(rho: DensityMatrix, keep: int, dims) -> DensityMatrix:
    """Reduced state of one subsystem of a bipartite density matrix."""
    d0, d1 = (int(d) for d in dims)
    if rho.shape != (d0 * d1, d0 * d1):
        raise ValueError(
            f"state dimension {rho.shape} does not match dims {dims}"
        )
    r = rho.reshape(d0, d1, d0, d1)
    if keep == 0:
        return np.einsum("ijkj->ik", r)
    if keep == 1:
        return np.einsum("ijil->jl", r)
    raise ValueError(f"keep must be 0 or 1, got {keep}")


def nuclear_polarization(rho: DensityMatrix, dims, nuclear_spin: SpinQuantumNumber) -> float:
    """<I_z> / I of the reduced nuclear state, in [-1, 1]."""
    rho_n = partial_trace(rho, 1, dims)
    iz = spin_operators(nuclear_spin).sz
    return float(np.real(np.trace(rho_n @ iz)) / nuclear_spin.s)


def electron_polarization(rho: DensityMatrix, dims) -> float:
    """Population of m_s = 0 in the reduced electron state."""
    if dims[0] != 3:
        raise ValueError("electron subsystem must be spin 1 (dimension 3)")
    rho_e = partial_trace(rho, 0, dims)
    # descending-m basis: index 1 is m_s = 0
    return float(np.real(rho_e[1, 1]))
