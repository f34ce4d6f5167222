"""Exact solutions for the case studies.

``RS1``-``RS5`` are closed-form reference functions.  The two Fourier
constructions prescribe coefficients on the periodic DFT frequencies
``xi_k = 2 pi k`` and therefore have a controlled Sobolev smoothness:

* ``fourier-log``: ``(|xi| log(|xi|)^2 (1 + xi^2)^p)^(-1/2)`` for ``|xi| >= 2``,
  zero below; lies in ``H^p`` but in no ``H^(p + eps)``.
* ``fourier-power``: ``(1 + xi^2)^(-p/2 - 1/4)``; lies in every
  ``H^(p - eps)`` but not in ``H^p``.
"""

from dataclasses import dataclass

import numpy as np

from . import grid
from .scales import frequencies

REFERENCE_KINDS = ("RS1", "RS2", "RS3", "RS4", "RS5")
FOURIER_KINDS = ("fourier-log", "fourier-power")


@dataclass(frozen=True)
class SolutionSpec:
    kind: str
    n: int = grid.DEFAULT_N
    p: float = 1.0 / 3.0

    def __post_init__(self):
        if self.kind not in REFERENCE_KINDS + FOURIER_KINDS + ("one",):
            raise ValueError(f"unknown solution kind {self.kind!r}")
        if self.kind in FOURIER_KINDS and not 0 < self.p < 0.5:
            raise ValueError(f"Fourier constructions need 0 < p < 1/2, got p={self.p}")

    @property
    def label(self):
        return f"{self.kind}(p={self.p:g})" if self.kind in FOURIER_KINDS else self.kind


def _reference(kind, t):
    if kind == "RS1":
        return np.where(t <= 0.5, 0.0, 1.0)
    if kind == "RS2":
        return t.copy()
    if kind == "RS3":
        # literal definition, jumps from sin(2 pi) = 0 to 1 at t = 0.5
        return np.where(t <= 0.5, np.sin(4.0 * np.pi * t), 1.0)
    if kind == "RS4":
        return 0.2 + 0.36 / (1.0 + 100.0 * (2.05 * t - 0.2) ** 2)
    if kind == "RS5":
        return -((t - 0.5) ** 2) + 0.25
    if kind == "one":
        return np.ones_like(t)
    raise ValueError(f"{kind!r} is not a reference solution")


def make_reference(spec):
    return _reference(spec.kind, grid.nodes(spec.n))


def fourier_coefficients(kind, p, n):
    """Real, even coefficients indexed like :func:`numpy.fft.fftfreq`."""
    xi = np.abs(frequencies(n))
    if kind == "fourier-log":
        c = np.zeros(n)
        big = xi >= 2.0
        c[big] = (xi[big] * np.log(xi[big]) ** 2 * (1.0 + xi[big] ** 2) ** p) ** -0.5
        return c
    if kind == "fourier-power":
        return (1.0 + xi**2) ** (-0.5 * p - 0.25)
    raise ValueError(f"{kind!r} is not a Fourier construction")


def make_fourier_solution(spec):
    if spec.kind not in FOURIER_KINDS:
        raise ValueError(f"{spec.kind!r} is not a Fourier construction")
    c = fourier_coefficients(spec.kind, spec.p, spec.n)
    # unnormalized synthesis: the DFT of the samples divided by n returns c
    x = np.fft.ifft(c * spec.n)
    return x.real.copy()


def make_solution(spec):
    if spec.kind in FOURIER_KINDS:
        return make_fourier_solution(spec)
    return make_reference(spec)
