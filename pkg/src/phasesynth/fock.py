"""Single-mode quantum states in the photon-number basis.

States are stored as normalized complex amplitude vectors ``c_0 .. c_D`` over
number states up to an explicit cutoff ``D``.  Constructors enforce a
truncation-tail bound so that cutting the infinite ladder is an auditable
approximation, and renormalize afterwards so downstream probability
arithmetic stays exact.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-9
TAIL_BOUND = 1e-6


@dataclass(frozen=True)
class FockVector:
    """Normalized pure state ``sum_n c_n |n>`` with ``n = 0 .. cutoff``."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("amplitudes must be a non-empty 1-D sequence")
        norm = np.sum(np.abs(amps) ** 2)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: sum |c_n|^2 = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def cutoff(self) -> int:
        return self.amplitudes.size - 1

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def padded(self, cutoff: int) -> np.ndarray:
        """Amplitudes zero-padded (or unchanged) to length ``cutoff + 1``."""
        if cutoff < self.cutoff:
            raise ValueError("padding target below current cutoff")
        out = np.zeros(cutoff + 1, dtype=complex)
        out[: self.amplitudes.size] = self.amplitudes
        return out


@dataclass(frozen=True)
class SqueezedParams:
    """Parameters of a squeezed coherent state.

    ``alpha`` is the coherent amplitude, ``zeta_mag`` the squeezing parameter
    ``|zeta|`` and ``phi`` the squeezing phase.  The derived quantity
    ``t = exp(i phi) tanh|zeta|`` satisfies ``|t| < 1``.
    """

    alpha: complex = 0.0
    zeta_mag: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if self.zeta_mag < 0:
            raise ValueError("zeta_mag must be non-negative")
        if abs(self.t) >= 1.0:
            raise ValueError("squeezing parameter gives |t| >= 1")

    @property
    def t(self) -> complex:
        return cmath.exp(1j * self.phi) * math.tanh(self.zeta_mag)

    @classmethod
    def from_t(cls, t: complex, alpha: complex = 0.0) -> "SqueezedParams":
        t = complex(t)
        if abs(t) >= 1.0:
            raise ValueError("|t| must be < 1")
        return cls(alpha=complex(alpha), zeta_mag=math.atanh(abs(t)), phi=cmath.phase(t))


@dataclass(frozen=True)
class StateEnsemble:
    """Statistical mixture given as weighted pure states."""

    members: tuple

    def __post_init__(self):
        members = tuple((float(w), s) for w, s in self.members)
        if not members:
            raise ValueError("ensemble needs at least one member")
        if any(w < 0 for w, _ in members):
            raise ValueError("ensemble weights must be non-negative")
        total = sum(w for w, _ in members)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"ensemble weights sum to {total!r}, expected 1")
        object.__setattr__(self, "members", members)


def hermite(n: int, x):
    """Physicists' Hermite polynomial ``H_n(x)`` by the three-term recurrence.

    Accepts real or complex ``x``; stable for the modest orders used here.
    """
    if n < 0:
        raise ValueError("order must be non-negative")
    h_prev, h = 1.0 * (x * 0 + 1), 2 * x
    if n == 0:
        return h_prev
    for k in range(1, n):
        h_prev, h = h, 2 * x * h - 2 * k * h_prev
    return h


def number_state(n: int, cutoff: int | None = None) -> FockVector:
    """Photon number state ``|n>``."""
    if n < 0:
        raise ValueError("photon number must be non-negative")
    if cutoff is None:
        cutoff = n
    if cutoff < n:
        raise ValueError("cutoff below photon number")
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[n] = 1.0
    return FockVector(amps)


def coherent_state(alpha: complex, cutoff: int) -> FockVector:
    """Coherent state with amplitudes ``c_n \\propto alpha^n / sqrt(n!)``.

    The cutoff must leave a truncation tail below ``TAIL_BOUND``; the
    retained amplitudes are renormalized.
    """
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    alpha = complex(alpha)
    mean = abs(alpha) ** 2
    # Poissonian tail of |c_n|^2 beyond the cutoff, evaluated analytically.
    logterms = [-mean + k * math.log(mean) - math.lgamma(k + 1) if mean > 0 else (0.0 if k == 0 else -math.inf)
                for k in range(cutoff + 1)]
    kept = sum(math.exp(v) for v in logterms)
    tail = max(0.0, 1.0 - kept)
    if tail >= TAIL_BOUND:
        raise ValueError(
            f"cutoff {cutoff} too small for |alpha|^2 = {mean:.4g}: tail {tail:.3g} >= {TAIL_BOUND}"
        )
    n = np.arange(cutoff + 1)
    log_mag = n * math.log(abs(alpha)) if abs(alpha) > 0 else np.where(n == 0, 0.0, -np.inf)
    log_fact = np.array([math.lgamma(k + 1) for k in range(cutoff + 1)])
    mags = np.exp(log_mag - 0.5 * log_fact - mean / 2)
    phases = np.exp(1j * n * cmath.phase(alpha)) if abs(alpha) > 0 else np.ones(cutoff + 1)
    amps = mags * phases
    amps = amps / np.linalg.norm(amps)
    return FockVector(amps)


def _squeezed_series(alpha: complex, t: complex, nmax: int) -> np.ndarray:
    """Unnormalized amplitudes ``g_n = (t/2)^{n/2} H_n(x) / sqrt(n!)``.

    Evaluated with a scaled recurrence so large orders neither overflow nor
    hit the 0/0 of the raw Hermite argument when ``t`` is small:
    ``g_{n+1} = x sqrt(2t/(n+1)) g_n - t sqrt(n/(n+1)) g_{n-1}`` with
    ``x = (alpha + t conj(alpha)) / sqrt(2t)``, so ``x sqrt(2t) = alpha + t conj(alpha)``.
    """
    g = np.zeros(nmax + 1, dtype=complex)
    g[0] = 1.0
    drive = alpha + t * np.conjugate(alpha)  # = x * sqrt(2t)
    if nmax >= 1:
        g[1] = drive
    for n in range(1, nmax):
        g[n + 1] = (drive * g[n] - t * math.sqrt(n) * g[n - 1]) / math.sqrt(n + 1)
    return g


def squeezed_state(params: SqueezedParams, cutoff: int) -> FockVector:
    """Squeezed coherent state truncated at ``cutoff`` and renormalized.

    Amplitudes follow ``c_n \\propto (t/2)^{n/2} H_n[(alpha + t alpha*) /
    sqrt(2t)] / sqrt(n!)``; at ``t = 0`` this degenerates analytically to the
    coherent state, which is handled as an explicit branch.  Raises when the
    truncated tail would exceed ``TAIL_BOUND``.
    """
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    t = params.t
    if abs(t) >= 1.0:
        raise ValueError("|t| must be < 1")
    if t == 0:
        return coherent_state(params.alpha, cutoff)
    # Extend well past the cutoff to measure the discarded tail.
    margin = 40
    nmax = cutoff + margin
    while True:
        g = _squeezed_series(complex(params.alpha), t, nmax)
        p = np.abs(g) ** 2
        total = p.sum()
        if p[-margin // 2:].sum() < 1e-15 * total or nmax > cutoff + 400:
            break
        nmax += 80
    tail = p[cutoff + 1:].sum() / total
    if tail >= TAIL_BOUND:
        raise ValueError(
            f"cutoff {cutoff} too small for squeezed state: tail {tail:.3g} >= {TAIL_BOUND}"
        )
    amps = g[: cutoff + 1] / np.linalg.norm(g[: cutoff + 1])
    return FockVector(amps)


def binomial_state(N: int) -> FockVector:
    """State with amplitudes ``2^{-N/2} sqrt(C(N, n))`` for ``n = 0 .. N``."""
    if N < 0:
        raise ValueError("N must be non-negative")
    amps = np.array([math.sqrt(math.comb(N, n)) for n in range(N + 1)], dtype=complex)
    amps *= 2.0 ** (-N / 2.0)
    return FockVector(amps)


def binomial_matching_params(N: int) -> SqueezedParams:
    """Squeezing parameters that approximate ``binomial_state(N)``.

    ``t = 0.5`` throughout.  For ``N = 3`` the coherent amplitude
    ``(2 + sqrt 2)/3`` matches the three highest number-state coefficients
    exactly (the remaining vacuum coefficient comes out 1.0146 times the
    binomial value); for other ``N`` the amplitude ``(2/3) sqrt(N)`` matches
    the low-``n`` coefficients.
    """
    if N < 1:
        raise ValueError("N must be positive")
    if N == 3:
        alpha = (2.0 + math.sqrt(2.0)) / 3.0
    else:
        alpha = (2.0 / 3.0) * math.sqrt(N)
    return SqueezedParams.from_t(0.5, alpha)


def phase_shift(state: FockVector, theta: float) -> FockVector:
    """Apply ``c_n -> exp(i n theta) c_n``; preserves all moduli."""
    n = np.arange(state.amplitudes.size)
    return FockVector(state.amplitudes * np.exp(1j * n * theta))


def mean_photon(state: FockVector) -> float:
    """Expectation value of the photon number."""
    n = np.arange(state.amplitudes.size)
    return float(np.sum(n * state.probabilities()))


def quadrature_variance(state: FockVector, angle: float = 0.0) -> float:
    """Variance of the quadrature ``(a e^{-i angle} + a^dag e^{i angle})/2``.

    The vacuum value in this convention is 1/4.
    """
    c = state.amplitudes
    n = np.arange(c.size)
    exp_a = np.sum(np.conjugate(c[:-1]) * c[1:] * np.sqrt(n[1:])) if c.size > 1 else 0.0
    exp_aa = (
        np.sum(np.conjugate(c[:-2]) * c[2:] * np.sqrt(n[2:] * (n[2:] - 1.0)))
        if c.size > 2
        else 0.0
    )
    exp_n = np.sum(n * np.abs(c) ** 2)
    e = cmath.exp(-1j * angle)
    x_mean = (e * exp_a).real
    x2_mean = (2.0 * (e * e * exp_aa).real + 2.0 * exp_n + 1.0) / 4.0
    return float(x2_mean - x_mean * x_mean)
