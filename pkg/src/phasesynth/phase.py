"""Canonical phase mathematics.

The canonical phase density of a pure state with number amplitudes ``c_n`` is
``P(theta) = |sum_n conj(c_n) exp(i n theta)|^2 / (2 pi)``; mixtures average
the member densities.  Projection synthesis turns joint photocounts into
overlaps with truncated phase states, and ``normalize_counts`` converts the
per-setting event probabilities into phase-density samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import FockVector, StateEnsemble


@dataclass(frozen=True)
class TruncatedPhaseState:
    """Equal-modulus superposition ``sum_n exp(i n theta) |n> / sqrt(N + 1)``."""

    theta: float
    order: int

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be non-negative")

    @property
    def amplitudes(self) -> np.ndarray:
        n = np.arange(self.order + 1)
        return np.exp(1j * n * self.theta) / math.sqrt(self.order + 1)


@dataclass(frozen=True)
class PhaseDistribution:
    """Sampled phase density: angles in radians, values in 1/radian."""

    thetas: np.ndarray
    values: np.ndarray
    stderrs: np.ndarray | None = None
    meta: str = "analytic"

    def __post_init__(self):
        thetas = np.asarray(self.thetas, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if thetas.shape != values.shape or thetas.ndim != 1:
            raise ValueError("thetas and values must be matching 1-D arrays")
        if np.any(values < -1e-15):
            raise ValueError("phase density values must be non-negative")
        stderrs = self.stderrs
        if stderrs is not None:
            stderrs = np.asarray(stderrs, dtype=float)
            if stderrs.shape != thetas.shape:
                raise ValueError("stderrs must match thetas")
            stderrs.setflags(write=False)
        thetas.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "stderrs", stderrs)

    def __len__(self) -> int:
        return self.thetas.size


CSV_HEADER_COMMENT = "# theta [rad], value [1/rad], stderr [1/rad]; 0 stderr = exact"
CSV_COLUMNS = "theta,value,stderr"


def distribution_to_csv(dist: PhaseDistribution) -> str:
    """Serialize with 17 significant digits so values round-trip exactly."""
    lines = [CSV_HEADER_COMMENT, CSV_COLUMNS]
    errs = dist.stderrs if dist.stderrs is not None else np.zeros(len(dist))
    for t, v, e in zip(dist.thetas, dist.values, errs):
        lines.append(f"{t:.17g},{v:.17g},{e:.17g}")
    return "\n".join(lines) + "\n"


def distribution_from_csv(text: str, meta: str = "from-csv") -> PhaseDistribution:
    thetas, values, errs = [], [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("theta"):
            continue
        t, v, e = line.split(",")
        thetas.append(float(t))
        values.append(float(v))
        errs.append(float(e))
    return PhaseDistribution(np.array(thetas), np.array(values), np.array(errs), meta=meta)


def canonical_density(state, thetas) -> np.ndarray:
    """Evaluate the canonical phase density at the given angles."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if isinstance(state, StateEnsemble):
        out = np.zeros_like(thetas)
        for w, member in state.members:
            out += w * canonical_density(member, thetas)
        return out
    c = state.amplitudes
    n = np.arange(c.size)
    amp = np.exp(1j * np.outer(thetas, n)) @ np.conjugate(c)
    return np.abs(amp) ** 2 / (2.0 * math.pi)


def canonical_distribution(state, thetas) -> PhaseDistribution:
    """Canonical phase distribution of a pure state or ensemble at ``thetas``."""
    thetas = np.asarray(thetas, dtype=float)
    return PhaseDistribution(thetas, canonical_density(state, thetas), meta="analytic")


def truncated_phase_state(theta: float, N: int) -> TruncatedPhaseState:
    return TruncatedPhaseState(float(theta), int(N))


def projection_probability(state: FockVector, phase_state: TruncatedPhaseState) -> float:
    """Overlap probability ``|<theta, N | psi>|^2``.

    States with cutoff below ``N`` are zero-padded; number components above
    ``N`` do not contribute.
    """
    N = phase_state.order
    c = state.amplitudes[: N + 1]
    if c.size < N + 1:
        c = np.concatenate([c, np.zeros(N + 1 - c.size, dtype=complex)])
    ov = np.vdot(phase_state.amplitudes, c)
    return float(abs(ov) ** 2)


def normalize_counts(event_probs) -> np.ndarray:
    """Normalize desired-event probabilities into phase-density samples.

    With ``L`` events covering one period, ``y_m = L p_m / (2 pi sum_m p_m)``;
    the values sum to ``L / 2 pi`` so a histogram with bin width ``2 pi / L``
    has unit area.  For the four-detector case this is
    ``y_m = 2 p_m / (pi sum p_m)``.
    """
    p = np.asarray(event_probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("event_probs must be a non-empty 1-D sequence")
    if np.any(p < 0):
        raise ValueError("event probabilities must be non-negative")
    total = p.sum()
    if total == 0.0:
        raise ValueError("degenerate input: all event probabilities are zero")
    return p.size * p / (2.0 * math.pi * total)
