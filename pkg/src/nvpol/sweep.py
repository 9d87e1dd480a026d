"""Parameter-sweep engine: field sweeps, field x strain maps, strain-averaged
polarization, and temperature curves.

Grid points are independent and may be evaluated concurrently; results
are merged by index so the output is identical for any thread count.
Failed points are recorded (NaN values plus a status string) instead of
aborting the sweep.  An optional append-only checkpoint file makes long
scans resumable bit for bit.
"""

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .model import (
    DissipationParams,
    NVSystemParams,
    build_collapse_ops,
    build_hamiltonian,
    liouvillian,
)
from .solver import (
    SolverError,
    electron_polarization,
    nuclear_polarization,
    steady_state,
)

AXIS_NAMES = ("b_axial_gauss", "e_es_mhz", "a_perp_mhz", "a_par_mhz")

_CHECKPOINT_MAGIC = "# nvpol checkpoint v1"


@dataclass(frozen=True)
class SweepAxis:
    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"axis name must be one of {AXIS_NAMES}, got {self.name!r}")
        if self.count < 1:
            raise ValueError("axis count must be >= 1")
        if self.start > self.stop:
            raise ValueError("axis start must not exceed stop")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepSpec:
    base: NVSystemParams
    dissipation: DissipationParams
    axis1: SweepAxis
    axis2: SweepAxis | None = None


@dataclass(frozen=True)
class StrainDistribution:
    """Gaussian distribution of the strain splitting e_es, in MHz."""

    mean: float = 0.0
    sigma: float = 0.0
    n_quadrature: int = 32

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.n_quadrature < 1:
            raise ValueError("n_quadrature must be >= 1")


@dataclass(frozen=True)
class SweepResult:
    axis1_name: str
    axis1_values: np.ndarray
    axis2_name: str | None
    axis2_values: np.ndarray | None
    p_nuclear: np.ndarray
    p_electron: np.ndarray
    residual: np.ndarray
    status: np.ndarray

    @property
    def n_failed(self) -> int:
        return int(np.count_nonzero(self.status != "ok"))


def _apply_axis(params: NVSystemParams, name: str, value: float) -> NVSystemParams:
    if name == "b_axial_gauss":
        return replace(params, b_field=(0.0, 0.0, float(value)))
    if name == "e_es_mhz":
        return replace(params, e_es=float(value))
    if name in ("a_perp_mhz", "a_par_mhz"):
        hf = params.hyperfine
        if hf.matrix is not None:
            raise ValueError(f"cannot sweep {name} with a full hyperfine matrix")
        key = "a_perp" if name == "a_perp_mhz" else "a_par"
        return replace(params, hyperfine=replace(hf, **{key: float(value)}))
    raise ValueError(f"unknown axis {name!r}")


def solve_point(params: NVSystemParams, diss: DissipationParams):
    """Steady-state polarization at one parameter point.

    Returns (nuclear polarization, electron polarization, residual).
    """
    ham = build_hamiltonian(params)
    lv = liouvillian(ham, build_collapse_ops(diss, params.dims))
    report = steady_state(lv)
    p_n = nuclear_polarization(report.rho, params.dims, params.nuclear_spin)
    p_e = electron_polarization(report.rho, params.dims)
    return p_n, p_e, report.residual_norm


def _spec_fingerprint(spec: SweepSpec) -> str:
    hf = spec.base.hyperfine
    axes = [spec.axis1] + ([spec.axis2] if spec.axis2 is not None else [])
    payload = {
        "d_es": spec.base.d_es,
        "e_es": spec.base.e_es,
        "b_field": list(spec.base.b_field),
        "gamma_e": spec.base.gamma_e,
        "gamma_n": spec.base.gamma_n,
        "a_par": hf.a_par,
        "a_perp": hf.a_perp,
        "hf_matrix": None if hf.matrix is None else hf.matrix.tolist(),
        "nuclear_two_s": spec.base.nuclear_spin.two_s,
        "dissipation": [
            spec.dissipation.pump_rate,
            spec.dissipation.pump_leak_ratio,
            spec.dissipation.t1_electron,
            spec.dissipation.t1_nuclear,
        ],
        "axes": [[ax.name, ax.start, ax.stop, ax.count] for ax in axes],
    }
    blob = json.dumps(payload, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def _format_row(row) -> str:
    i, j, v1, v2, p_n, p_e, res, status = row
    nums = " ".join("%.17g" % x for x in (v1, v2, p_n, p_e, res))
    return f"{i} {j} {nums} {status}\n"


def _load_checkpoint(path: str, fingerprint: str) -> list:
    if not os.path.exists(path) or os.path.getsize(path) == 0:
        return []
    rows = []
    with open(path) as fh:
        magic = fh.readline().rstrip("\n")
        params_line = fh.readline().rstrip("\n")
        if magic != _CHECKPOINT_MAGIC or not params_line.startswith("# params "):
            raise ValueError(f"{path} is not a recognized checkpoint file")
        if params_line.split()[-1] != fingerprint:
            raise ValueError(
                f"checkpoint {path} was written for different sweep parameters"
            )
        for line in fh:
            parts = line.split()
            if len(parts) != 8:
                break  # partially written trailing line from an interrupted run
            try:
                i, j = int(parts[0]), int(parts[1])
                nums = [float(x) for x in parts[2:7]]
            except ValueError:
                break
            rows.append((i, j, *nums, parts[7]))
    return rows


def _solve_row(point):
    _flat, i, j, v1, v2, params, diss = point
    try:
        p_n, p_e, res = solve_point(params, diss)
        return (i, j, v1, v2, p_n, p_e, res, "ok")
    except SolverError as exc:
        return (i, j, v1, v2, math.nan, math.nan, math.nan, type(exc).__name__)


def _run_grid(spec: SweepSpec, threads: int, checkpoint_path) -> SweepResult:
    vals1 = spec.axis1.values()
    vals2 = spec.axis2.values() if spec.axis2 is not None else None
    points = []
    flat = 0
    for i, v1 in enumerate(vals1):
        p1 = _apply_axis(spec.base, spec.axis1.name, v1)
        if vals2 is None:
            points.append((flat, i, 0, float(v1), math.nan, p1, spec.dissipation))
            flat += 1
        else:
            for j, v2 in enumerate(vals2):
                p2 = _apply_axis(p1, spec.axis2.name, v2)
                points.append((flat, i, j, float(v1), float(v2), p2, spec.dissipation))
                flat += 1

    rows = [None] * len(points)
    start = 0
    fh = None
    if checkpoint_path:
        fingerprint = _spec_fingerprint(spec)
        loaded = _load_checkpoint(checkpoint_path, fingerprint)[: len(points)]
        for k, row in enumerate(loaded):
            rows[k] = row
        start = len(loaded)
        fresh = not os.path.exists(checkpoint_path) or os.path.getsize(checkpoint_path) == 0
        fh = open(checkpoint_path, "a")
        if fresh:
            fh.write(_CHECKPOINT_MAGIC + "\n")
            fh.write(f"# params {fingerprint}\n")
            fh.flush()
    try:
        pending = points[start:]
        if threads > 1 and len(pending) > 1:
            buffered = {}
            next_flush = start
            with ThreadPoolExecutor(max_workers=threads) as ex:
                futures = {ex.submit(_solve_row, pt): pt[0] for pt in pending}
                for fut in as_completed(futures):
                    buffered[futures[fut]] = fut.result()
                    # checkpoint rows stay a strict prefix in flat order
                    while next_flush in buffered:
                        rows[next_flush] = buffered.pop(next_flush)
                        if fh:
                            fh.write(_format_row(rows[next_flush]))
                            fh.flush()
                        next_flush += 1
        else:
            for pt in pending:
                rows[pt[0]] = _solve_row(pt)
                if fh:
                    fh.write(_format_row(rows[pt[0]]))
                    fh.flush()
    finally:
        if fh:
            fh.close()

    shape = (vals1.size,) if vals2 is None else (vals1.size, vals2.size)
    p_n = np.empty(shape)
    p_e = np.empty(shape)
    res = np.empty(shape)
    status = np.empty(shape, dtype=object)
    for row in rows:
        i, j, _v1, _v2, r_pn, r_pe, r_res, r_status = row
        idx = i if vals2 is None else (i, j)
        p_n[idx] = r_pn
        p_e[idx] = r_pe
        res[idx] = r_res
        status[idx] = r_status
    return SweepResult(
        axis1_name=spec.axis1.name,
        axis1_values=vals1,
        axis2_name=spec.axis2.name if spec.axis2 is not None else None,
        axis2_values=vals2,
        p_nuclear=p_n,
        p_electron=p_e,
        residual=res,
        status=status,
    )


def sweep_field(spec: SweepSpec, threads: int = 1, checkpoint_path=None) -> SweepResult:
    """1-D sweep of the axial field; records both polarizations per point."""
    if spec.axis1.name != "b_axial_gauss":
        raise ValueError("sweep_field requires axis1 = b_axial_gauss")
    if spec.axis2 is not None:
        raise ValueError("sweep_field takes a single axis")
    return _run_grid(spec, threads, checkpoint_path)


def scan_field_strain(spec: SweepSpec, threads: int = 1, checkpoint_path=None) -> SweepResult:
    """2-D field x strain map, row-major in (B, E)."""
    if spec.axis2 is None or (spec.axis1.name, spec.axis2.name) != (
        "b_axial_gauss",
        "e_es_mhz",
    ):
        raise ValueError(
            "scan_field_strain requires axes (b_axial_gauss, e_es_mhz)"
        )
    return _run_grid(spec, threads, checkpoint_path)


def strain_averaged_polarization(
    params: NVSystemParams, diss: DissipationParams, dist: StrainDistribution
) -> float:
    """Nuclear polarization averaged over a Gaussian strain distribution.

    Gauss-Hermite quadrature with dist.n_quadrature nodes; sigma = 0 is
    evaluated as a single point so the delta-distribution case is exact.
    Point failures propagate as SolverError.
    """
    if dist.sigma == 0.0:
        p_n, _p_e, _res = solve_point(replace(params, e_es=dist.mean), diss)
        return p_n
    nodes, weights = hermgauss(dist.n_quadrature)
    e_values = dist.mean + math.sqrt(2.0) * dist.sigma * nodes
    weights = weights / math.sqrt(math.pi)
    total = 0.0
    for e_k, w_k in zip(e_values, weights):
        try:
            p_n, _p_e, _res = solve_point(replace(params, e_es=e_k), diss)
        except SolverError as exc:
            raise SolverError(
                f"quadrature node at e_es = {e_k:.6g} MHz failed: {exc}"
            ) from exc
        total += w_k * p_n
    return float(total)


def temperature_curve(
    params: NVSystemParams, diss: DissipationParams, table
) -> list:
    """Map a (temperature, StrainDistribution) table to (temperature, P).

    Temperature enters only through the supplied distribution; rows are
    evaluated with strain_averaged_polarization in the given order.
    """
    table = list(table)
    if not table:
        raise ValueError("temperature table must be nonempty")
    out = []
    for temperature, dist in table:
        out.append((float(temperature), strain_averaged_polarization(params, diss, dist)))
    return out
