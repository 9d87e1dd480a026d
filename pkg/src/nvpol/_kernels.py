"""Hot numeric kernels, written in the numpy subset numba can compile.

Every function here is wrapped by :func:`nvpol._accel.maybe_jit`, so the
same source serves both the jitted and the pure-numpy backend.  Keep the
code loop-explicit and allocation-light; no Python objects, no kwargs.
"""

import numpy as np

from ._accel import maybe_jit


@maybe_jit
def liouvillian_dense(ham, cops, rates):
    """Assemble the vectorized Lindblad generator as a dense matrix.

    Row-stacking convention: vec(rho) = rho.reshape(n*n) in C order, so
    vec(A rho B) = (A kron B^T) vec(rho).  The Hamiltonian enters as
    -i*2*pi*(H kron I - I kron H^T); each collapse operator C with rate g
    contributes g*(C kron conj(C) - (C^H C kron I + I kron (C^H C)^T)/2).
    The 2*pi converts MHz couplings to angular frequency; rates are
    inverse microseconds and enter unscaled.

    Parameters
    ----------
    ham : (n, n) complex ndarray
    cops : (k, n, n) complex ndarray, stacked collapse operators
    rates : (k,) float ndarray

    Returns
    -------
    (n*n, n*n) complex ndarray
    """
    n = ham.shape[0]
    big = n * n
    out = np.zeros((big, big), np.complex128)
    w = -2j * np.pi
    for a in range(n):
        for c in range(n):
            h_ac = ham[a, c]
            h_ca = ham[c, a]
            for b in range(n):
                out[a * n + b, c * n + b] += w * h_ac
                out[b * n + a, b * n + c] -= w * h_ca
    for k in range(rates.shape[0]):
        g = rates[k]
        cop = cops[k]
        # cdc = C^H C, small enough that explicit loops beat BLAS here
        cdc = np.zeros((n, n), np.complex128)
        for i in range(n):
            for j in range(n):
                acc = 0.0 + 0.0j
                for m in range(n):
                    acc += np.conj(cop[m, i]) * cop[m, j]
                cdc[i, j] = acc
        for a in range(n):
            for c in range(n):
                gac = g * cop[a, c]
                for b in range(n):
                    for d in range(n):
                        out[a * n + b, c * n + d] += gac * np.conj(cop[b, d])
        for a in range(n):
            for c in range(n):
                m_ac = 0.5 * g * cdc[a, c]
                m_ca = 0.5 * g * cdc[c, a]
                for b in range(n):
                    out[a * n + b, c * n + b] -= m_ac
                    out[b * n + a, b * n + c] -= m_ca
    return out


@maybe_jit
def multi_lorentzian(params, freq):
    """Sum of Lorentzian dips on a baseline.

    params = [baseline, c1, w1, a1, c2, w2, a2, ...] with centers c,
    full widths at half maximum w and peak amplitudes a.
    """
    npk = (params.shape[0] - 1) // 3
    out = np.full(freq.shape[0], params[0])
    for k in range(npk):
        c = params[1 + 3 * k]
        w = params[2 + 3 * k]
        a = params[3 + 3 * k]
        hw2 = 0.25 * w * w
        for i in range(freq.shape[0]):
            d = freq[i] - c
            out[i] += a * hw2 / (d * d + hw2)
    return out


@maybe_jit
def multi_lorentzian_jac(params, freq):
    """Analytic Jacobian of :func:`multi_lorentzian` w.r.t. params."""
    npt = freq.shape[0]
    npar = params.shape[0]
    npk = (npar - 1) // 3
    jac = np.zeros((npt, npar))
    for i in range(npt):
        jac[i, 0] = 1.0
    for k in range(npk):
        c = params[1 + 3 * k]
        w = params[2 + 3 * k]
        a = params[3 + 3 * k]
        hw2 = 0.25 * w * w
        for i in range(npt):
            d = freq[i] - c
            den = d * d + hw2
            den2 = den * den
            jac[i, 1 + 3 * k] = a * hw2 * 2.0 * d / den2
            jac[i, 2 + 3 * k] = a * d * d / den2 * (0.5 * w)
            jac[i, 3 + 3 * k] = hw2 / den
    return jac


@maybe_jit
def esodmr_hermite(freq, d_es, gamma, e_nodes, weights):
    """Strain-convolved pair of Lorentzian branches, Gauss-Hermite form.

    Used when the strain spread is narrow against the natural width, so
    the Lorentzian is the smooth factor sampled at Gaussian nodes.
    Returns the unit-amplitude lineshape on ``freq``.
    """
    out = np.zeros(freq.shape[0])
    g2 = gamma * gamma
    for k in range(e_nodes.shape[0]):
        e = e_nodes[k]
        wk = weights[k]
        for i in range(freq.shape[0]):
            du = freq[i] - d_es - e
            dl = freq[i] - d_es + e
            out[i] += wk * 0.5 * (g2 / (du * du + g2) + g2 / (dl * dl + g2))
    return out


@maybe_jit
def esodmr_tan(freq, d_es, gamma, mean, sigma, theta_nodes, weights):
    """Strain-convolved lineshape, tangent-substitution Legendre form.

    Used when the strain spread dominates the natural width: the
    Lorentzian kernel is absorbed into the angular measure x = gamma *
    tan(theta), leaving the smooth Gaussian to be sampled.  Returns the
    unit-amplitude lineshape on ``freq``.
    """
    out = np.zeros(freq.shape[0])
    norm = gamma / (sigma * np.sqrt(2.0 * np.pi))
    inv2s2 = 0.5 / (sigma * sigma)
    for k in range(theta_nodes.shape[0]):
        x = gamma * np.tan(theta_nodes[k])
        wk = weights[k]
        for i in range(freq.shape[0]):
            up = freq[i] - d_es - x
            dm = up - mean
            dp = up + mean
            out[i] += wk * 0.5 * (
                np.exp(-dm * dm * inv2s2) + np.exp(-dp * dp * inv2s2)
            )
    return out * norm
