"""ODMR/ESODMR forward models, multi-Lorentzian fitting, polarization
extraction from resonance amplitudes, and strain-distribution fitting.

Contrast is stored as a positive dip depth throughout; spectra are
(frequency MHz, contrast) pairs on a strictly increasing grid.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss
from scipy.signal import find_peaks

from ._kernels import esodmr_hermite, esodmr_tan, multi_lorentzian, multi_lorentzian_jac
from .spinops import SpinQuantumNumber
from .sweep import StrainDistribution


@dataclass(frozen=True)
class OdmrSpectrum:
    frequency: np.ndarray
    contrast: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequency, dtype=float)
        c = np.asarray(self.contrast, dtype=float)
        if f.ndim != 1 or c.ndim != 1 or f.size != c.size:
            raise ValueError("frequency and contrast must be equal-length 1-D arrays")
        if f.size < 8:
            raise ValueError(f"spectrum needs at least 8 points, got {f.size}")
        if not np.all(np.diff(f) > 0):
            raise ValueError("frequencies must be strictly increasing")
        object.__setattr__(self, "frequency", f)
        object.__setattr__(self, "contrast", c)


@dataclass(frozen=True)
class LorentzianPeak:
    center: float
    fwhm: float
    amplitude: float

    def __post_init__(self):
        if not self.fwhm > 0:
            raise ValueError("fwhm must be positive")
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")


@dataclass(frozen=True)
class PeakSet:
    peaks: tuple
    baseline: float = 0.0

    def __post_init__(self):
        peaks = tuple(self.peaks)
        if not peaks:
            raise ValueError("peak set must contain at least one peak")
        object.__setattr__(self, "peaks", peaks)


@dataclass(frozen=True)
class PolarizationEstimate:
    p: float
    uncertainty: float

    def __post_init__(self):
        if abs(self.p) > 1.0:
            raise ValueError(f"|p| must not exceed 1, got {self.p}")


@dataclass(frozen=True)
class FitReport:
    """Multi-Lorentzian fit result, peaks sorted by center."""

    peak_set: PeakSet
    baseline_uncertainty: float
    peak_uncertainties: tuple  # (center, fwhm, amplitude) sigma per peak
    residual_norm: float
    converged: bool
    pinned: tuple  # True where an amplitude sits at the zero boundary
    n_iter: int


@dataclass(frozen=True)
class StrainFitReport:
    dist: StrainDistribution
    amplitude: float
    d_es: float
    sigma_uncertainty: float
    amplitude_uncertainty: float
    residual_norm: float
    converged: bool
    sigma_pinned: bool
    unidentifiable: bool


@dataclass(frozen=True)
class MetricResult:
    value: float
    flat_trace: bool


def _pack(ps: PeakSet) -> np.ndarray:
    out = [ps.baseline]
    for pk in ps.peaks:
        out.extend((pk.center, pk.fwhm, pk.amplitude))
    return np.array(out, dtype=float)


def _unpack(params: np.ndarray) -> PeakSet:
    peaks = []
    for k in range((params.size - 1) // 3):
        c, w, a = params[1 + 3 * k : 4 + 3 * k]
        peaks.append(LorentzianPeak(center=float(c), fwhm=float(w), amplitude=float(a)))
    return PeakSet(peaks=tuple(peaks), baseline=float(params[0]))


def model_spectrum(ps: PeakSet, grid) -> OdmrSpectrum:
    """Evaluate a Lorentzian peak set on a frequency grid.

    contrast(f) = baseline + sum_k a_k (w_k/2)^2 / ((f - c_k)^2 + (w_k/2)^2)
    """
    grid = np.asarray(grid, dtype=float)
    return OdmrSpectrum(frequency=grid, contrast=multi_lorentzian(_pack(ps), grid))


def _numeric_jacobian(fun, x, lower, upper, f0):
    jac = np.empty((f0.size, x.size))
    for i in range(x.size):
        h = 1e-6 * max(abs(x[i]), 1e-8)
        xp = x.copy()
        xm = x.copy()
        xp[i] = min(x[i] + h, upper[i])
        xm[i] = max(x[i] - h, lower[i])
        if xp[i] == xm[i]:
            jac[:, i] = 0.0
            continue
        jac[:, i] = (fun(xp) - fun(xm)) / (xp[i] - xm[i])
    return jac


def _lm_least_squares(fun, x0, lower, upper, jac=None, max_iter=200,
                      ftol=1e-12, xtol=1e-12, cost_floor=1e-30):
    """Damped Gauss-Newton (Levenberg-Marquardt) with box clipping.

    Marquardt diagonal scaling keeps the damping meaningful when the
    parameters span orders of magnitude.  An accepted step converges on
    a tiny cost reduction (ftol), a tiny step (xtol), or on cost
    reaching cost_floor; the caller sets cost_floor to the model's own
    evaluation noise, below which relative tests compare noise against
    noise and never fire.  Absence of any descent step also converges;
    hitting max_iter leaves converged False.

    Returns (x, cost, jac_final, converged, n_iter).
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    x = np.clip(np.asarray(x0, dtype=float), lower, upper)
    jac_fn = jac if jac is not None else (
        lambda xx, ff: _numeric_jacobian(fun, xx, lower, upper, ff)
    )
    r = fun(x)
    jmat = jac_fn(x, r) if jac is None else jac(x)
    cost = 0.5 * float(r @ r)
    lam = 1e-3
    converged = False
    n_iter = 0
    if cost <= cost_floor:
        return x, cost, jmat, True, 0
    for n_iter in range(1, max_iter + 1):
        a_mat = jmat.T @ jmat
        grad = jmat.T @ r
        diag = np.diag(a_mat).copy()
        pos = diag > 0
        diag[~pos] = diag[pos].min() if pos.any() else 1.0
        accepted = False
        for _ in range(60):
            try:
                step = np.linalg.solve(a_mat + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            x_new = np.clip(x + step, lower, upper)
            taken = x_new - x
            if not np.any(taken):
                break
            r_new = fun(x_new)
            cost_new = 0.5 * float(r_new @ r_new)
            if cost_new < cost:
                predicted = -(grad @ taken) - 0.5 * float(taken @ (a_mat @ taken))
                ratio = (cost - cost_new) / predicted if predicted > 0 else 1.0
                lam = max(lam * max(1.0 / 3.0, 1.0 - (2.0 * ratio - 1.0) ** 3), 1e-14)
                dcost = cost - cost_new
                x, r, cost = x_new, r_new, cost_new
                jmat = jac_fn(x, r) if jac is None else jac(x)
                accepted = True
                if cost <= cost_floor:
                    converged = True
                elif dcost <= ftol * max(cost, 1e-300) or np.all(
                    np.abs(taken) <= xtol * (np.abs(x) + xtol)
                ):
                    converged = True
                break
            lam *= 4.0
            if lam > 1e13:
                break
        if not accepted:
            converged = True  # no descent step exists: stationary point
            break
        if converged:
            break
    return x, cost, jmat, converged, n_iter


def _smoothed(trace):
    """Short moving average; a single-sample noise excursion must not
    outrank a genuine low peak that is merely wide."""
    window = max(3, (trace.size // 100) | 1)
    return np.convolve(trace, np.full(window, 1.0 / window), mode="same")


def _peak_bounds(freq, n_peaks, amp_cap):
    span = float(freq[-1] - freq[0])
    # a peak narrower than the sampling is a zero-measure needle that can
    # sit between two samples at any amplitude without touching the data
    w_min = float(np.diff(freq).min())
    npar = 1 + 3 * n_peaks
    lower = np.full(npar, -np.inf)
    upper = np.full(npar, np.inf)
    for k in range(n_peaks):
        lower[1 + 3 * k] = freq[0] - 0.5 * span
        upper[1 + 3 * k] = freq[-1] + 0.5 * span
        lower[2 + 3 * k] = w_min
        upper[2 + 3 * k] = 10.0 * span
        lower[3 + 3 * k] = 0.0
        upper[3 + 3 * k] = amp_cap
    return lower, upper


def _seed_peaks(freq, contrast, n_peaks):
    """Initial PeakSet from the most topographically prominent maxima.

    Prominence (height above the highest saddle) beats raw height here:
    a noise bump riding the shoulder of a strong resonance can be taller
    than a genuine weak peak, but it is never more prominent.
    """
    smooth = _smoothed(contrast)
    base = float(smooth.min())
    span = float(freq[-1] - freq[0])
    width = span / (4.0 * n_peaks)
    idx, props = find_peaks(smooth, prominence=0.0)
    order = np.argsort(props["prominences"])[::-1]
    centers = sorted(float(freq[i]) for i in idx[order[:n_peaks]])
    k = 1
    while len(centers) < n_peaks:  # degenerate trace, space seeds evenly
        centers.append(float(freq[0] + span * k / (n_peaks + 1)))
        k += 1
    peaks = []
    for f_c in centers:
        amp = max(float(np.interp(f_c, freq, smooth)) - base, 1e-12)
        peaks.append(LorentzianPeak(center=f_c, fwhm=width, amplitude=amp))
    return PeakSet(peaks=tuple(peaks), baseline=base)


def fit_spectrum(data: OdmrSpectrum, n_peaks: int, init: PeakSet | None = None,
                 jacobian: str = "analytic", max_iter: int = 200) -> FitReport:
    """Least-squares multi-Lorentzian decomposition of a spectrum.

    Damped Gauss-Newton with the analytic Jacobian of the Lorentzian
    model (jacobian="numeric" switches to central differences, kept as a
    cross-check of the analytic derivatives).  Without an init, two
    seeding strategies run and the lower-cost fit wins: all peaks at
    once from prominence-ranked maxima, and greedy peak-by-peak from the
    largest smoothed residual bump.  The first handles clustered peaks
    that a greedy residual merges; the second handles weak peaks that
    prominence ranking buries in noise.  Peaks are returned sorted by
    center with per-parameter uncertainties from the local curvature.
    """
    if n_peaks < 1:
        raise ValueError("n_peaks must be >= 1")
    freq, y = data.frequency, data.contrast
    if freq.size <= 3 * n_peaks + 1:
        raise ValueError(
            f"need more than {3 * n_peaks + 1} points to fit {n_peaks} peaks, "
            f"got {freq.size}"
        )
    if jacobian not in ("analytic", "numeric"):
        raise ValueError("jacobian must be 'analytic' or 'numeric'")
    if init is not None and len(init.peaks) != n_peaks:
        raise ValueError("init peak count does not match n_peaks")
    span = float(freq[-1] - freq[0])
    width0 = span / (4.0 * n_peaks)
    # amplitudes beyond the data range mark the flat degenerate direction
    # (huge width compensated by baseline), not a resonance
    amp_cap = max(10.0 * float(y.max() - y.min()), 1e-12)
    jac_of = (lambda p: multi_lorentzian_jac(p, freq)) if jacobian == "analytic" else None
    # the Lorentzian model evaluates to ~1e-10 relative; residuals below
    # that are noise and count as an exact fit
    floor = max(0.5 * (1e-10 * float(np.linalg.norm(y))) ** 2, 1e-30)

    def refine(x0, k):
        lower, upper = _peak_bounds(freq, k, amp_cap)

        def fun(p):
            return multi_lorentzian(p, freq) - y

        return _lm_least_squares(fun, x0, lower, upper, jac=jac_of,
                                 max_iter=max_iter, cost_floor=floor)

    if init is not None:
        x, cost, jmat, converged, n_iter = refine(_pack(init), n_peaks)
    else:
        prominent = refine(_pack(_seed_peaks(freq, y, n_peaks)), n_peaks)
        x = np.array([float(y.min())])
        for k in range(1, n_peaks + 1):
            bump = _smoothed(y - multi_lorentzian(x, freq))
            idx = int(np.argmax(bump))
            seed = [float(freq[idx]), width0, max(float(bump[idx]), 1e-12)]
            greedy = refine(np.concatenate([x, seed]), k)
            x = greedy[0]
        x, cost, jmat, converged, n_iter = min(
            (prominent, greedy), key=lambda r: r[1]
        )
    # curvature-based uncertainties: sigma^2 = RSS/dof, cov = sigma^2 (J^T J)^+
    npar = 1 + 3 * n_peaks
    dof = freq.size - npar
    rss = 2.0 * cost
    scale = rss / dof if dof > 0 else math.nan
    cov = scale * np.linalg.pinv(jmat.T @ jmat)
    sig = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    order = np.argsort(x[1::3])
    peaks = []
    uncertainties = []
    pinned = []
    amp_scale = max(float(x[3::3].max()), 1e-30)
    for k in order:
        c, w, a = (float(v) for v in x[1 + 3 * k : 4 + 3 * k])
        peaks.append(LorentzianPeak(center=c, fwhm=w, amplitude=a))
        uncertainties.append(tuple(float(v) for v in sig[1 + 3 * k : 4 + 3 * k]))
        pinned.append(a <= 1e-6 * amp_scale)
    return FitReport(
        peak_set=PeakSet(peaks=tuple(peaks), baseline=float(x[0])),
        baseline_uncertainty=float(sig[0]),
        peak_uncertainties=tuple(uncertainties),
        residual_norm=math.sqrt(rss),
        converged=converged,
        pinned=tuple(pinned),
        n_iter=n_iter,
    )


def polarization_from_amplitudes(amplitudes, m_values, nuclear_spin: SpinQuantumNumber,
                                 uncertainties=None) -> PolarizationEstimate:
    """P = sum_i m_i a_i / (I sum_i a_i) with first-order error propagation.

    Amplitudes are the fitted resonance amplitudes assigned to nuclear
    sublevels m_values; the ratio treats them as relative populations.
    Invariant under uniform positive scaling of all amplitudes.
    """
    a = np.asarray(amplitudes, dtype=float)
    m = np.asarray(m_values, dtype=float)
    if a.shape != m.shape or a.ndim != 1:
        raise ValueError("amplitudes and m_values must be equal-length 1-D sequences")
    if np.any(a < 0):
        raise ValueError("amplitudes must be >= 0")
    total = a.sum()
    if total == 0:
        raise ValueError("polarization undefined: all amplitudes are zero")
    spin = nuclear_spin.s
    if np.any(np.abs(m) > spin + 1e-12):
        raise ValueError("m_values must lie within [-I, I]")
    p = float((m * a).sum() / (spin * total))
    p = min(max(p, -1.0), 1.0)  # guard rounding at the boundary
    if uncertainties is None:
        return PolarizationEstimate(p=p, uncertainty=0.0)
    sig = np.asarray(uncertainties, dtype=float)
    if sig.shape != a.shape:
        raise ValueError("uncertainties must match amplitudes in length")
    dp = (m / spin - p) / total
    return PolarizationEstimate(p=p, uncertainty=float(np.sqrt(((dp * sig) ** 2).sum())))


def esodmr_lineshape(dist: StrainDistribution, d_es: float, natural_fwhm: float,
                     grid, amplitude: float = 1.0, n_nodes: int | None = None) -> OdmrSpectrum:
    """Zero-field ESODMR lineshape: branches at d_es +- E, E ~ N(mean, sigma).

    The Lorentzian of width natural_fwhm is convolved with the
    two-branch strain density by quadrature.  The node placement follows
    whichever factor is narrow: Gauss-Hermite nodes on the strain
    Gaussian while sigma <= natural_fwhm, else Gauss-Legendre nodes on
    the Lorentzian angle x = (natural_fwhm/2) tan(theta).  A plain
    Hermite rule degenerates into a comb of spikes once sigma far
    exceeds the natural width, which is why the rule switches.

    n_nodes defaults to max(201, dist.n_quadrature); 201 keeps the worst
    case (the switchover region) accurate to ~1e-3 relative.
    """
    if not natural_fwhm > 0:
        raise ValueError("natural_fwhm must be positive")
    grid = np.asarray(grid, dtype=float)
    if n_nodes is None:
        n_nodes = max(201, dist.n_quadrature)
    gamma = 0.5 * natural_fwhm
    if dist.sigma == 0.0:
        g2 = gamma * gamma
        du = grid - d_es - dist.mean
        dl = grid - d_es + dist.mean
        y = 0.5 * (g2 / (du * du + g2) + g2 / (dl * dl + g2))
    elif dist.sigma <= 2.0 * gamma:
        x, w = hermgauss(n_nodes)
        e_nodes = dist.mean + math.sqrt(2.0) * dist.sigma * x
        y = esodmr_hermite(grid, d_es, gamma, e_nodes, w / math.sqrt(math.pi))
    else:
        t, w = leggauss(n_nodes)
        y = esodmr_tan(grid, d_es, gamma, dist.mean, dist.sigma,
                       0.5 * math.pi * t, 0.5 * math.pi * w)
    return OdmrSpectrum(frequency=grid, contrast=amplitude * y)


def _fwhm_interpolated(freq, y):
    """Full width at half maximum above the trace minimum, linearly
    interpolated at the crossings.  Returns 0.0 for a flat trace."""
    base = float(y.min())
    peak = float(y.max())
    if peak <= base:
        return 0.0
    half = base + 0.5 * (peak - base)
    above = y >= half
    idx = np.flatnonzero(above)
    i0, i1 = idx[0], idx[-1]
    if i0 > 0:
        f_a, f_b = freq[i0 - 1], freq[i0]
        y_a, y_b = y[i0 - 1], y[i0]
        left = f_a + (half - y_a) * (f_b - f_a) / (y_b - y_a)
    else:
        left = freq[0]
    if i1 < y.size - 1:
        f_a, f_b = freq[i1], freq[i1 + 1]
        y_a, y_b = y[i1], y[i1 + 1]
        right = f_a + (half - y_a) * (f_b - f_a) / (y_b - y_a)
    else:
        right = freq[-1]
    return float(right - left)


def fit_strain_distribution(data: OdmrSpectrum, d_es: float, natural_fwhm: float,
                            fit_d_es: bool = False, max_iter: int = 200) -> StrainFitReport:
    """Fit the strain spread sigma (mean fixed at 0) and an overall
    amplitude to a zero-field ESODMR spectrum; optionally refine d_es.

    sigma seeds from the observed width through the Olivero-Longbothum
    Voigt-width relation; the amplitude seeds from the peak height.  A
    flat spectrum is reported as amplitude 0 with sigma unidentifiable.
    """
    freq, y = data.frequency, data.contrast
    if not freq[0] < d_es < freq[-1]:
        raise ValueError(
            f"spectrum window [{freq[0]:g}, {freq[-1]:g}] MHz does not cover d_es = {d_es:g}"
        )
    nq = 32
    peak = float(y.max())
    if peak - float(y.min()) <= 1e-300 or peak <= 0:
        return StrainFitReport(
            dist=StrainDistribution(mean=0.0, sigma=0.0, n_quadrature=nq),
            amplitude=0.0, d_es=d_es, sigma_uncertainty=math.nan,
            amplitude_uncertainty=math.nan, residual_norm=float(np.linalg.norm(y)),
            converged=True, sigma_pinned=True, unidentifiable=True,
        )
    # Gaussian part of the observed width via Olivero-Longbothum:
    # w_voigt ~ 0.5346 w_l + sqrt(0.2166 w_l^2 + w_g^2)
    w_obs = _fwhm_interpolated(freq, y)
    g2 = (w_obs - 0.5346 * natural_fwhm) ** 2 - 0.2166 * natural_fwhm**2
    sigma0 = math.sqrt(g2) / 2.3548 if g2 > 0 else 0.25 * natural_fwhm
    span = float(freq[-1] - freq[0])
    sigma0 = min(sigma0, span)
    # peak height of the unit-amplitude model at the band center: grid[0] = d_es
    h0 = float(
        esodmr_lineshape(
            StrainDistribution(mean=0.0, sigma=sigma0, n_quadrature=nq),
            d_es, natural_fwhm, d_es + np.arange(8.0) * natural_fwhm,
        ).contrast[0]
    )
    amp0 = peak / max(h0, 1e-12)

    if fit_d_es:
        x0 = np.array([amp0, sigma0, d_es])
        lower = np.array([0.0, 0.0, float(freq[0])])
        upper = np.array([np.inf, span, float(freq[-1])])
    else:
        x0 = np.array([amp0, sigma0])
        lower = np.array([0.0, 0.0])
        upper = np.array([np.inf, span])

    def fun(p):
        center = p[2] if fit_d_es else d_es
        dist = StrainDistribution(mean=0.0, sigma=float(p[1]), n_quadrature=nq)
        return esodmr_lineshape(dist, center, natural_fwhm, freq,
                                amplitude=float(p[0])).contrast - y

    # quadrature noise of the lineshape model sits near 1e-10 relative
    floor = 0.5 * (1e-9 * float(np.linalg.norm(y))) ** 2
    x, cost, jmat, converged, _n = _lm_least_squares(
        fun, x0, lower, upper, jac=None, max_iter=max_iter,
        cost_floor=max(floor, 1e-30),
    )
    dof = freq.size - x.size
    scale = 2.0 * cost / dof if dof > 0 else math.nan
    cov = scale * np.linalg.pinv(jmat.T @ jmat)
    sig = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    amp_hat, sigma_hat = float(x[0]), float(x[1])
    return StrainFitReport(
        dist=StrainDistribution(mean=0.0, sigma=sigma_hat, n_quadrature=nq),
        amplitude=amp_hat,
        d_es=float(x[2]) if fit_d_es else d_es,
        sigma_uncertainty=float(sig[1]),
        amplitude_uncertainty=float(sig[0]),
        residual_norm=math.sqrt(2.0 * cost),
        converged=converged,
        sigma_pinned=sigma_hat == 0.0,
        unidentifiable=amp_hat <= 1e-12,
    )


def resonance_metric(data: OdmrSpectrum, central_range) -> MetricResult:
    """Mean baseline-subtracted contrast over the central range times the
    full-trace FWHM (linear interpolation at half maximum).

    The trace minimum serves as the baseline for both factors, which
    makes the metric invariant under an additive offset.  A flat trace
    yields value 0 with the flat_trace flag set.
    """
    lo, hi = (float(v) for v in central_range)
    freq, y = data.frequency, data.contrast
    if not (freq[0] <= lo < hi <= freq[-1]):
        raise ValueError(
            f"central range [{lo:g}, {hi:g}] must lie within the data span "
            f"[{freq[0]:g}, {freq[-1]:g}]"
        )
    base = float(y.min())
    fwhm = _fwhm_interpolated(freq, y)
    if fwhm == 0.0:
        return MetricResult(value=0.0, flat_trace=True)
    mask = (freq >= lo) & (freq <= hi)
    if mask.any():
        mean_c = float(y[mask].mean()) - base
    else:
        mean_c = float(np.interp(0.5 * (lo + hi), freq, y)) - base
    return MetricResult(value=mean_c * fwhm, flat_trace=False)


def load_spectrum(path) -> OdmrSpectrum:
    """Read a two-column (frequency_mhz, contrast) text spectrum.

    Lines starting with '#' are comments.  Raw fluorescence-decrease
    data (dips pointing down relative to the trace median) is negated on
    ingestion so contrast is always a positive dip depth.
    """
    raw = np.loadtxt(path, comments="#", ndmin=2)
    if raw.ndim != 2 or raw.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns (frequency_mhz, contrast)")
    freq, y = raw[:, 0], raw[:, 1]
    med = np.median(y)
    if abs(float(y.min() - med)) > abs(float(y.max() - med)):
        y = -y
    return OdmrSpectrum(frequency=freq, contrast=y)


def save_spectrum(path, spectrum: OdmrSpectrum, header_lines=()) -> None:
    """Write a spectrum in the two-column text format with '#' comments."""
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        for f, c in zip(spectrum.frequency, spectrum.contrast):
            fh.write("%.17g %.17g\n" % (f, c))


def format_fit_report(report: FitReport, polarization: PolarizationEstimate | None = None) -> str:
    """Structured text fit report: parameter, value, uncertainty per line."""
    lines = [
        f"converged {'true' if report.converged else 'false'}",
        "residual_norm %.17g" % report.residual_norm,
        "iterations %d" % report.n_iter,
        "baseline %.17g %.17g" % (report.peak_set.baseline, report.baseline_uncertainty),
    ]
    for k, (pk, unc, pin) in enumerate(
        zip(report.peak_set.peaks, report.peak_uncertainties, report.pinned), start=1
    ):
        suffix = " pinned" if pin else ""
        lines.append("peak %d center_mhz %.17g %.17g" % (k, pk.center, unc[0]))
        lines.append("peak %d fwhm_mhz %.17g %.17g" % (k, pk.fwhm, unc[1]))
        lines.append("peak %d amplitude %.17g %.17g%s" % (k, pk.amplitude, unc[2], suffix))
    if polarization is not None:
        lines.append("polarization %.17g %.17g" % (polarization.p, polarization.uncertainty))
    return "\n".join(lines) + "\n"


def format_strain_report(report: StrainFitReport) -> str:
    lines = [
        f"converged {'true' if report.converged else 'false'}",
        "residual_norm %.17g" % report.residual_norm,
        "sigma_mhz %.17g %.17g" % (report.dist.sigma, report.sigma_uncertainty),
        "amplitude %.17g %.17g" % (report.amplitude, report.amplitude_uncertainty),
        "d_es_mhz %.17g" % report.d_es,
    ]
    if report.sigma_pinned:
        lines.append("sigma_pinned true")
    if report.unidentifiable:
        lines.append("unidentifiable true")
    return "\n".join(lines) + "\n"
