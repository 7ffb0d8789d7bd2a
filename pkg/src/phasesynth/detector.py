"""Photodetection statistics.

Inefficient detectors register each incident photon independently with
probability ``eta``, so ideal joint count statistics are mapped to counted
statistics by a per-detector binomial (Bernoulli) convolution.  The map is
invertible detector by detector; the inverse has alternating signs and grows
as ``eta^-m``, which makes it numerically unstable for small ``eta``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

ETA_MIN_DEFAULT = 0.3
CANCELLATION_WARN_RATIO = 1e6


class CountClass(enum.Enum):
    ZERO = "zero"
    ONE = "one"
    MANY = "many"


def categorize(count: int) -> CountClass:
    """Classify a photocount as zero, one, or more than one."""
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0:
        return CountClass.ZERO
    if count == 1:
        return CountClass.ONE
    return CountClass.MANY


@dataclass(frozen=True)
class DetectorModel:
    """One-photon detection efficiencies, one value per detector.

    A single float applies uniformly; distinct per-detector values are an
    extension beyond the uniform-efficiency convolution formula.
    """

    eta: object = 1.0

    def __post_init__(self):
        eta = self.eta
        if isinstance(eta, (int, float)):
            etas = None
            eta = float(eta)
        else:
            etas = tuple(float(e) for e in eta)
            eta = None
        vals = etas if etas is not None else (eta,)
        if any(e < 0.0 or e > 1.0 for e in vals):
            raise ValueError("efficiencies must lie in [0, 1]")
        object.__setattr__(self, "eta", eta if eta is not None else etas)

    def etas_for(self, num_detectors: int) -> tuple:
        if isinstance(self.eta, float):
            return (self.eta,) * num_detectors
        if len(self.eta) != num_detectors:
            raise ValueError(f"need {num_detectors} efficiencies, got {len(self.eta)}")
        return self.eta

    @property
    def is_ideal(self) -> bool:
        etas = self.eta if isinstance(self.eta, tuple) else (self.eta,)
        return all(e == 1.0 for e in etas)


@dataclass(frozen=True)
class JointCountDistribution:
    """Probability map over joint detector-count tuples."""

    num_detectors: int
    probs: dict
    cutoff: int

    def __post_init__(self):
        clean = {}
        for counts, p in self.probs.items():
            counts = tuple(int(c) for c in counts)
            p = float(p)
            if len(counts) != self.num_detectors or any(c < 0 for c in counts):
                raise ValueError(f"bad count tuple {counts}")
            if max(counts, default=0) > self.cutoff:
                raise ValueError(f"count tuple {counts} exceeds cutoff {self.cutoff}")
            if p < -1e-12:
                raise ValueError("negative probability")
            if p != 0.0:
                clean[counts] = p
        total = sum(clean.values())
        if total > 1.0 + 1e-9:
            raise ValueError(f"total probability {total} exceeds 1")
        object.__setattr__(self, "probs", clean)

    def total(self) -> float:
        return sum(self.probs.values())

    def prob(self, counts) -> float:
        return self.probs.get(tuple(counts), 0.0)

    def to_array(self) -> np.ndarray:
        arr = np.zeros((self.cutoff + 1,) * self.num_detectors)
        for counts, p in self.probs.items():
            arr[counts] = p
        return arr

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "JointCountDistribution":
        cutoff = arr.shape[0] - 1
        probs = {}
        for idx in np.ndindex(arr.shape):
            p = float(arr[idx])
            if p != 0.0:
                probs[idx] = p
        return cls(arr.ndim, probs, cutoff)

    def to_json(self) -> dict:
        counts = sorted(self.probs)
        return {"counts": [list(c) for c in counts],
                "probs": [self.probs[c] for c in counts]}

    @classmethod
    def from_json(cls, data: dict) -> "JointCountDistribution":
        counts = [tuple(c) for c in data["counts"]]
        if not counts:
            return cls(0, {}, 0)
        cutoff = max(max(c) for c in counts)
        return cls(len(counts[0]), dict(zip(counts, data["probs"])), cutoff)


def _bernoulli_matrix(eta: float, cutoff: int) -> np.ndarray:
    """``B[m, s] = C(s, m) eta^m (1 - eta)^(s - m)``: thinning of one detector."""
    b = np.zeros((cutoff + 1, cutoff + 1))
    for s in range(cutoff + 1):
        for m in range(s + 1):
            b[m, s] = math.comb(s, m) * eta ** m * (1.0 - eta) ** (s - m)
    return b


def _inverse_bernoulli_matrix(eta: float, cutoff: int) -> np.ndarray:
    """Closed-form inverse: ``V[s, m] = C(m, s) eta^-m (eta - 1)^(m - s)``."""
    v = np.zeros((cutoff + 1, cutoff + 1))
    for m in range(cutoff + 1):
        for s in range(m + 1):
            v[s, m] = math.comb(m, s) * eta ** (-m) * (eta - 1.0) ** (m - s)
    return v


def _apply_axis_matrices(arr: np.ndarray, matrices) -> np.ndarray:
    out = arr
    for axis, mat in enumerate(matrices):
        out = np.tensordot(mat, out, axes=([1], [axis]))
        out = np.moveaxis(out, 0, axis)
    return out


def apply_efficiency(ideal: JointCountDistribution, model: DetectorModel) -> JointCountDistribution:
    """Counted statistics of inefficient detectors given ideal statistics.

    Equivalent to the joint sum
    ``P_c(m..) = sum_{s.. >= m..} prod_d C(s_d, m_d) eta^{sum m} (1-eta)^{sum s - sum m} P_I(s..)``
    evaluated in product form along each detector axis.
    """
    etas = model.etas_for(ideal.num_detectors)
    if all(e == 1.0 for e in etas):
        return ideal
    arr = ideal.to_array()
    mats = [_bernoulli_matrix(e, ideal.cutoff) for e in etas]
    out = _apply_axis_matrices(arr, mats)
    return JointCountDistribution.from_array(np.maximum(out, 0.0))


def invert_efficiency(counted: JointCountDistribution, model: DetectorModel,
                      eta_min: float = ETA_MIN_DEFAULT) -> JointCountDistribution:
    """Estimate ideal statistics from counted ones (inverse Bernoulli per axis).

    ``invert_efficiency(apply_efficiency(D, model), model)`` reproduces ``D``
    up to the stored cutoff.  Raises for efficiencies at or below ``eta_min``;
    warns when alternating-series cancellation exceeds
    ``CANCELLATION_WARN_RATIO`` times the result magnitude.
    """
    etas = model.etas_for(counted.num_detectors)
    if any(e <= eta_min for e in etas):
        raise ValueError(f"efficiency at or below {eta_min}: inversion numerically unstable")
    if all(e == 1.0 for e in etas):
        return counted
    arr = counted.to_array()
    mats = [_inverse_bernoulli_matrix(e, counted.cutoff) for e in etas]
    out = _apply_axis_matrices(arr, mats)
    gross = _apply_axis_matrices(arr, [np.abs(m) for m in mats])
    denom = np.maximum(np.abs(out), 1e-300)
    worst = float(np.max(np.where(gross > 0, gross / denom, 0.0), initial=0.0))
    if worst > CANCELLATION_WARN_RATIO:
        warnings.warn(
            f"inverse Bernoulli cancellation ratio {worst:.2e} exceeds {CANCELLATION_WARN_RATIO:.0e}; "
            "results may be dominated by rounding error",
            RuntimeWarning,
        )
    # Rounding (or sampling noise, for empirical inputs) can leave small
    # negative cells; clip them rather than report negative probabilities.
    out = np.maximum(out, 0.0)
    return JointCountDistribution.from_array(out)
