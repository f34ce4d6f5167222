"""Hilbert-scale norms generated by ``B = (J*J)^(-1/2)`` and Fourier Sobolev norms."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from . import grid


@dataclass(frozen=True, eq=False)
class HilbertScaleBasis:
    """Spectral decomposition of the discrete ``J*J``.

    Attributes
    ----------
    sigma : ndarray
        Eigenvalues in descending order, all positive.
    vectors : ndarray
        ``(n, n)`` array whose columns ``e_k`` are orthonormal in the
        trapezoid inner product.
    null_floor : float
        Value substituted for the numerically vanishing eigenvalue of the
        alternating mode, which the trapezoid rule integrates to zero.
    """

    sigma: np.ndarray
    vectors: np.ndarray
    null_floor: float

    @property
    def n(self):
        return self.sigma.size

    def coefficients(self, x):
        """Expansion coefficients ``<x, e_k>``."""
        x = grid.as_grid_function(x)
        if x.size != self.n:
            raise ValueError(f"grid size mismatch: {x.size} != {self.n}")
        return self.vectors.T @ (grid.trapezoid_weights(self.n) * x)

    def synthesize(self, coeffs):
        return self.vectors @ np.asarray(coeffs, dtype=float)

    def power_weights(self, nu):
        """Eigenvalues of ``B^nu``, i.e. ``sigma^(-nu/2)``."""
        return self.sigma ** (-0.5 * nu)

    def apply_power(self, x, nu):
        """Apply ``B^nu``."""
        return self.synthesize(self.power_weights(nu) * self.coefficients(x))

    def operator(self):
        """Reassemble ``J*J`` from the decomposition."""
        w = grid.trapezoid_weights(self.n)
        return (self.vectors * self.sigma[None, :]) @ (self.vectors.T * w[None, :])


@lru_cache(maxsize=8)
def _build_basis(n):
    sw = np.sqrt(grid.trapezoid_weights(n))
    J = grid.integration_matrix(n)
    # W^(1/2) J*J W^(-1/2) = M^T M with M = W^(1/2) J W^(-1/2), symmetric
    M = sw[:, None] * J / sw[None, :]
    try:
        sigma, V = scipy.linalg.eigh(M.T @ M)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigendecomposition of J*J failed for n={n}") from exc
    sigma, V = sigma[::-1].copy(), V[:, ::-1]
    # the alternating mode is annihilated by the trapezoid rule; give it the
    # smallest resolved eigenvalue so every B^nu stays finite
    floor = sigma[-2] if n > 2 else sigma[0] * np.finfo(float).eps
    if n > 2 and floor <= 0:
        raise RuntimeError(f"J*J has more than one null direction for n={n}")
    sigma[-1] = max(sigma[-1], floor)
    vectors = V / sw[:, None]
    sigma.setflags(write=False)
    vectors.setflags(write=False)
    return HilbertScaleBasis(sigma=sigma, vectors=vectors, null_floor=float(floor))


def build_basis(n=grid.DEFAULT_N):
    """Eigen-decompose the discrete ``J*J`` on an ``n``-point grid (cached)."""
    if int(n) != n or n < 2:
        raise ValueError(f"grid needs at least 2 points, got {n!r}")
    return _build_basis(int(n))


def scale_norm(x, nu, basis):
    """Hilbert-scale norm ``||B^nu x||``."""
    nu = float(nu)
    if not np.isfinite(nu):
        raise ValueError("scale index must be finite")
    c = basis.coefficients(x)
    return float(np.sqrt(np.sum(basis.sigma ** (-nu) * c**2)))


def _extension_length(n, extension):
    if extension == "periodic":
        return n, 1.0
    if extension == "zero":
        # pad to twice the length; the extended period covers [0, 2)
        m = 2 * n
        return m, m / n
    raise ValueError(f"unknown extension {extension!r}; use 'periodic' or 'zero'")


def sobolev_weights(n, s, extension="periodic"):
    """Fourier weights ``(1 + xi^2)^s`` on the DFT frequencies of the extended grid.

    Returns ``(m, period, weights)``; ``weights`` are ordered like
    :func:`numpy.fft.fftfreq`.
    """
    m, period = _extension_length(n, extension)
    xi = 2.0 * np.pi * np.fft.fftfreq(m, d=1.0 / m) / period
    return m, period, (1.0 + xi**2) ** s


def frequencies(n):
    """Angular frequencies ``2 pi k`` of the ``n``-point periodic DFT."""
    return 2.0 * np.pi * np.fft.fftfreq(n, d=1.0 / n)


def sobolev_norm(x, s, extension="periodic"):
    """Discrete ``H^s`` norm from the DFT of the samples.

    The default periodic extension maps a constant ``c`` to ``|c|`` for every
    ``s``.  ``extension="zero"`` pads with zeros instead, which treats the
    function as extended by zero outside [0, 1], so a jump at the boundary
    limits the smoothness to ``s < 1/2``.
    """
    if s < 0:
        raise ValueError("negative Sobolev index; use scale_norm for weak norms")
    x = grid.as_grid_function(x)
    m, period, weights = sobolev_weights(x.size, s, extension)
    X = np.fft.fft(x, n=m)
    return float(np.sqrt(period * np.sum(weights * np.abs(X) ** 2)) / m)


def sobolev_matrix(n, s, extension="periodic"):
    """Square real matrix ``P`` with ``||P x||_2 == sobolev_norm(x, s)``."""
    m, period, weights = sobolev_weights(n, s, extension)
    F = np.fft.fft(np.eye(m)[:, :n], axis=0)
    G = (F.conj().T * (period * weights / m**2)[None, :]) @ F
    lam, Q = scipy.linalg.eigh(G.real)
    return np.sqrt(np.clip(lam, 0.0, None))[:, None] * Q.T


def interpolation_gap(x, t, p, a, basis):
    """``||x||_t - ||x||_{-a}^((p-t)/(p+a)) ||x||_p^((t+a)/(p+a))``, never positive in exact arithmetic."""
    if not -a < t <= p:
        raise ValueError(f"need -a < t <= p, got t={t}, p={p}, a={a}")
    lo, hi = scale_norm(x, -a, basis), scale_norm(x, p, basis)
    theta = (p - t) / (p + a)
    return scale_norm(x, t, basis) - lo**theta * hi ** (1.0 - theta)
