"""End-to-end simulation of the multiport phase measurement.

A run assembles the signal (mode 0) and reference (mode 1) states with vacuum
in the remaining inputs, evolves them through the ``N + 1``-mode DFT
multiport, extracts the probabilities of the ``N + 1`` desired events (zero
photocounts at exactly one detector, one at each other), optionally passes
the joint count statistics through a detector-efficiency model, and
normalizes each setting's event probabilities into phase-density samples.

Event ``m`` synthesizes the projection onto the truncated phase state at
``theta_m = 2 pi m / (N + 1)`` provided the reference number-state
coefficients carry alternating signs; the runner therefore shifts the
configured reference by ``pi`` in addition to the sweep offset ``Delta_k``,
after which the sample from event ``m`` at offset ``Delta_k`` sits at
``theta_m + Delta_k`` on the signal's phase distribution.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import detector as det
from . import fock
from . import optics
from . import phase as ph

JOINT_PRUNE_TOL = 1e-16
RNG_ALGORITHM = "numpy PCG64 seeded with SeedSequence([seed, setting_index])"


# ---------------------------------------------------------------------------
# State specification grammar (JSON-friendly dictionaries)
# ---------------------------------------------------------------------------

def _as_complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        re, im = value
        return complex(float(re), float(im))
    return complex(float(value), 0.0)


def _coherent_default_cutoff(mean: float) -> int:
    """Smallest cutoff with Poissonian tail below 1e-10 (floor of 6)."""
    cutoff = max(6, int(math.ceil(mean)))
    while cutoff < 120:
        kept = sum(math.exp(-mean + k * math.log(mean) - math.lgamma(k + 1)) if mean > 0 else (1.0 if k == 0 else 0.0)
                   for k in range(cutoff + 1))
        if 1.0 - kept < 1e-10:
            return cutoff
        cutoff += 1
    raise ValueError(f"no acceptable cutoff for coherent mean {mean}")


def _squeezed_default_cutoff(params: fock.SqueezedParams) -> int:
    """Smallest cutoff with truncated tail below 1e-7 (one notch under the constructor bound)."""
    probe = fock.squeezed_state(params, 260).probabilities()
    kept = np.cumsum(probe)
    for cutoff in range(8, 201):
        if 1.0 - kept[cutoff] < 1e-7:
            return cutoff
    raise ValueError("no acceptable cutoff for squeezed state")


def state_from_spec(spec: dict):
    """Build a state from the JSON grammar ``{"kind": ..., ...}``.

    Kinds:
      coherent:       ``alpha`` (number or ``[re, im]``) or ``mean_photon``; optional ``cutoff``
      squeezed:       ``alpha`` plus either ``t`` or (``zeta_mag``, ``phi``); optional ``cutoff``
      squeezed_approx: ``N`` (binomial-matching squeezed reference); optional ``cutoff``
      binomial:       ``N``
      number:         ``n``; optional ``cutoff``
      ensemble:       ``members``: list of ``{"weight": w, "state": {...}}``
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError(f"state spec must be a dict with a 'kind' field, got {spec!r}")
    kind = spec["kind"]
    if kind == "coherent":
        if "alpha" in spec:
            alpha = _as_complex(spec["alpha"])
        elif "mean_photon" in spec:
            mean = float(spec["mean_photon"])
            if mean < 0:
                raise ValueError("mean_photon must be non-negative")
            alpha = complex(math.sqrt(mean), 0.0)
        else:
            raise ValueError("coherent spec needs 'alpha' or 'mean_photon'")
        cutoff = int(spec.get("cutoff", _coherent_default_cutoff(abs(alpha) ** 2)))
        return fock.coherent_state(alpha, cutoff)
    if kind == "squeezed":
        alpha = _as_complex(spec.get("alpha", 0.0))
        if "t" in spec:
            params = fock.SqueezedParams.from_t(_as_complex(spec["t"]), alpha)
        else:
            params = fock.SqueezedParams(alpha, float(spec.get("zeta_mag", 0.0)),
                                         float(spec.get("phi", 0.0)))
        cutoff = int(spec["cutoff"]) if "cutoff" in spec else _squeezed_default_cutoff(params)
        return fock.squeezed_state(params, cutoff)
    if kind == "squeezed_approx":
        params = fock.binomial_matching_params(int(spec["N"]))
        cutoff = int(spec["cutoff"]) if "cutoff" in spec else _squeezed_default_cutoff(params)
        return fock.squeezed_state(params, cutoff)
    if kind == "binomial":
        return fock.binomial_state(int(spec["N"]))
    if kind == "number":
        n = int(spec["n"])
        return fock.number_state(n, int(spec.get("cutoff", n)))
    if kind == "ensemble":
        members = []
        for entry in spec["members"]:
            members.append((float(entry["weight"]), state_from_spec(entry["state"])))
        return fock.StateEnsemble(tuple(members))
    raise ValueError(f"unknown state kind {kind!r}")


# ---------------------------------------------------------------------------
# Configuration and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """Settings of one simulated measurement campaign."""

    signal: dict
    reference: dict
    multiport_order: int = 3
    settings: int = 4
    trials_per_setting: int = 100_000
    detector: det.DetectorModel = field(default_factory=det.DetectorModel)
    correct_efficiency: bool = False
    seed: int = 0
    photon_limit: int = optics.DEFAULT_PHOTON_LIMIT

    def __post_init__(self):
        if self.multiport_order < 1:
            raise ValueError("multiport order must be at least 1")
        if self.settings < 1:
            raise ValueError("need at least one phase setting")
        if self.trials_per_setting < 1:
            raise ValueError("need at least one trial per setting")

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        detector_spec = data.get("detector", {"eta": 1.0})
        eta = detector_spec["eta"] if isinstance(detector_spec, dict) else detector_spec
        return cls(
            signal=data["signal"],
            reference=data["reference"],
            multiport_order=int(data.get("multiport_order", 3)),
            settings=int(data.get("settings", 4)),
            trials_per_setting=int(data.get("trials_per_setting", 100_000)),
            detector=det.DetectorModel(eta if not isinstance(eta, list) else tuple(eta)),
            correct_efficiency=bool(data.get("correct_efficiency", False)),
            seed=int(data.get("seed", 0)),
            photon_limit=int(data.get("photon_limit", optics.DEFAULT_PHOTON_LIMIT)),
        )

    def to_json(self) -> dict:
        eta = self.detector.eta
        return {
            "signal": self.signal,
            "reference": self.reference,
            "multiport_order": self.multiport_order,
            "settings": self.settings,
            "trials_per_setting": self.trials_per_setting,
            "detector": {"eta": list(eta) if isinstance(eta, tuple) else eta},
            "correct_efficiency": self.correct_efficiency,
            "seed": self.seed,
            "photon_limit": self.photon_limit,
        }


@dataclass(frozen=True)
class SweepResult:
    """Collected sweep output: sampled points plus per-setting raw data."""

    points: ph.PhaseDistribution
    raw_event_probs: tuple
    desired_event_rate: float
    diagnostics: dict


def minimum_point_count(N: int) -> int:
    """Sampling rule for resolving the fastest phase oscillation.

    The density's highest Fourier component is ``exp(i N theta)``; two samples
    per oscillation period with a factor-two margin gives ``4 N`` equally
    spaced values over the full range.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    return 4 * N


# ---------------------------------------------------------------------------
# Core machinery
# ---------------------------------------------------------------------------

def _desired_patterns(N: int):
    d = N + 1
    return [tuple(0 if j == m else 1 for j in range(d)) for m in range(d)]


def _signal_members(state):
    if isinstance(state, fock.StateEnsemble):
        return list(state.members)
    return [(1.0, state)]


class _SectorEngine:
    """Caches single-tuple images through the multiport for reuse across settings."""

    def __init__(self, N: int, photon_limit: int):
        self.N = N
        self.d = N + 1
        self.photon_limit = photon_limit
        self.transform = optics.dft_transform(N)
        self._images = {}

    def image(self, occ):
        if occ not in self._images:
            self._images[occ] = optics.single_term_image(self.transform, occ, self.photon_limit)
        return self._images[occ]

    def outcome_distribution(self, signal: fock.FockVector, reference: fock.FockVector):
        """Exact joint photocount distribution and truncation diagnostics.

        Joint input terms are pruned at probability ``JOINT_PRUNE_TOL`` and at
        the photon limit; the dropped probability mass bounds the absolute
        error of any outcome probability.
        """
        sig = signal.amplitudes
        ref = reference.amplitudes
        d = self.d
        amps_out = {}
        dropped = 0.0
        kept = []
        for n, cs in enumerate(sig):
            for k, cr in enumerate(ref):
                w = cs * cr
                p = abs(w) ** 2
                if p == 0.0:
                    continue
                if p < JOINT_PRUNE_TOL or n + k > self.photon_limit:
                    dropped += p
                    continue
                kept.append((n, k, w))
        if not kept:
            raise ValueError(
                f"no joint input terms within the photon limit {self.photon_limit}"
            )
        for n, k, w in kept:
            occ = (n, k) + (0,) * (d - 2)
            for occ_out, a in self.image(occ).items():
                amps_out[occ_out] = amps_out.get(occ_out, 0j) + w * a
        probs = {}
        for occ_out, a in amps_out.items():
            p = abs(a) ** 2
            if p > 0.0:
                probs[occ_out] = p
        cutoff = max((max(occ) for occ in probs), default=0)
        dist = det.JointCountDistribution(d, probs, cutoff)
        return dist, dropped

    def sample_positions(self, delta: float) -> np.ndarray:
        return np.array([2.0 * math.pi * m / self.d + delta for m in range(self.d)])


def _prepare(config: ExperimentConfig):
    signal = state_from_spec(config.signal)
    reference = state_from_spec(config.reference)
    if isinstance(reference, fock.StateEnsemble):
        raise ValueError("the reference must be a pure state")
    engine = _SectorEngine(config.multiport_order, config.photon_limit)
    deltas = [k * (2.0 * math.pi / (config.multiport_order + 1)) / config.settings
              for k in range(config.settings)]
    return signal, reference, engine, deltas


def _signal_tail_beyond(state, N: int) -> float:
    members = _signal_members(state)
    return float(sum(w * np.sum(member.probabilities()[N + 1:]) for w, member in members))


def _setting_distribution(engine: _SectorEngine, signal, reference: fock.FockVector,
                          delta: float):
    """Ideal joint count distribution at one reference-phase setting."""
    ref_shifted = fock.phase_shift(reference, math.pi + delta)
    members = _signal_members(signal)
    combined = {}
    dropped = 0.0
    cutoff = 0
    for w, member in members:
        dist, drop = engine.outcome_distribution(member, ref_shifted)
        dropped += w * drop
        cutoff = max(cutoff, dist.cutoff)
        for occ, p in dist.probs.items():
            combined[occ] = combined.get(occ, 0.0) + w * p
    return det.JointCountDistribution(engine.d, combined, cutoff), dropped


def _leakage_bound(dropped_mass: float, photon_limit: int, N: int, etas) -> float:
    """Upper bound on the desired-event probability error from pruned terms.

    A pruned ideal event with ``S`` photons can only reach a desired pattern
    (total ``N``) through thinning; the per-event contribution is bounded by
    ``C(S, N) eta_max^N (1 - eta_min)^(S - N)`` and by 1 for ideal detectors.
    """
    if dropped_mass == 0.0:
        return 0.0
    eta_max = max(etas)
    eta_min = min(etas)
    if eta_min == 1.0:
        return 0.0  # desired events need exactly N photons; pruned terms have more
    s = photon_limit + 1
    factor = math.comb(s, N) * eta_max ** N * (1.0 - eta_min) ** (s - N)
    return dropped_mass * min(1.0, factor)


def _max_workers(max_workers: int | None) -> int:
    return max(1, int(max_workers or 1))


def run_exact(config: ExperimentConfig, max_workers: int | None = None) -> SweepResult:
    """Exact-probability sweep over all reference-phase settings."""
    signal, reference, engine, deltas = _prepare(config)
    etas = config.detector.etas_for(engine.d)
    patterns = _desired_patterns(engine.N)

    def one_setting(delta):
        ideal, dropped = _setting_distribution(engine, signal, reference, delta)
        observed = det.apply_efficiency(ideal, config.detector)
        if config.correct_efficiency and not config.detector.is_ideal:
            observed = det.invert_efficiency(observed, config.detector)
        probs = [observed.prob(pat) for pat in patterns]
        return probs, dropped

    workers = _max_workers(max_workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one_setting, deltas))
    else:
        rows = [one_setting(d) for d in deltas]

    thetas, values = [], []
    raw = []
    dropped_total = 0.0
    for delta, (probs, dropped) in zip(deltas, rows):
        y = ph.normalize_counts(probs)
        thetas.extend(engine.sample_positions(delta))
        values.extend(y)
        raw.append(tuple(probs))
        dropped_total = max(dropped_total, dropped)
    order = np.argsort(thetas)
    points = ph.PhaseDistribution(np.asarray(thetas)[order], np.asarray(values)[order],
                                  np.zeros(len(thetas))[order], meta="exact-simulated")
    rate = float(np.mean([sum(p) for p in raw]))
    diagnostics = {
        "mode": "exact",
        "signal_tail_beyond_order": _signal_tail_beyond(signal, engine.N),
        "joint_pruned_mass": dropped_total,
        "pruned_event_prob_bound": _leakage_bound(dropped_total, config.photon_limit,
                                                  engine.N, etas),
        "photon_limit": config.photon_limit,
    }
    return SweepResult(points, tuple(raw), rate, diagnostics)


def _delta_method_stderr(weights: np.ndarray, freqs: np.ndarray, trials: int) -> np.ndarray:
    """Standard errors of ``y_m = L q_m / (2 pi Q)`` with ``q = W f``.

    ``f`` are multinomial cell frequencies over observed patterns (plus the
    implicit rest cell), ``W`` maps them linearly to the desired-event
    estimates ``q``, and the propagation is the first-order (delta-method)
    variance through the normalization ratio.
    """
    L = weights.shape[0]
    q = weights @ freqs
    Q = q.sum()
    if Q <= 0:
        return np.zeros(L)
    scale = L / (2.0 * math.pi)
    # dy_m/df_c = scale * (W[m,c] Q - q_m * colsum(W)[c]) / Q^2
    colsum = weights.sum(axis=0)
    grad = scale * (weights * Q - np.outer(q, colsum)) / (Q * Q)
    # multinomial covariance: Cov(f) = (diag(f) - f f^T) / T
    gf = grad * freqs
    var = (gf * grad).sum(axis=1) - gf.sum(axis=1) ** 2
    var = np.maximum(var, 0.0) / trials
    return np.sqrt(var)


def run_monte_carlo(config: ExperimentConfig, max_workers: int | None = None) -> SweepResult:
    """Sampled sweep: joint outcomes drawn from the exact distribution, then
    per-photon binomial thinning, zero/one/many classification, and tallying.

    Reproducible: identical configuration and seed give identical results
    (per-setting generators are spawned from the master seed).
    """
    signal, reference, engine, deltas = _prepare(config)
    etas = np.array(config.detector.etas_for(engine.d))
    trials = config.trials_per_setting

    def one_setting(item):
        k, delta = item
        ideal, dropped = _setting_distribution(engine, signal, reference, delta)
        tuples = sorted(ideal.probs)
        p = np.array([ideal.probs[t] for t in tuples])
        rest = max(0.0, 1.0 - p.sum())
        rng = np.random.default_rng([config.seed, k])
        draws = rng.choice(len(tuples) + 1, size=trials,
                           p=np.concatenate([p, [rest]]) / (p.sum() + rest))
        counts = np.zeros((trials, engine.d), dtype=np.int64)
        valid = draws < len(tuples)
        counts[valid] = np.asarray(tuples, dtype=np.int64)[draws[valid]]
        thinned = rng.binomial(counts, etas[None, :])
        # desired pattern: exactly one detector in class "zero", rest in class "one"
        ones = thinned == 1
        zeros = thinned == 0
        desired = (ones.sum(axis=1) == engine.N) & (zeros.sum(axis=1) == 1)
        event_index = np.argmax(zeros, axis=1)
        tallies = np.bincount(event_index[desired & valid], minlength=engine.d)
        if config.correct_efficiency and not config.detector.is_ideal:
            return k, _corrected_estimates(thinned[valid], engine, config, trials)
        freqs = tallies / trials
        y = ph.normalize_counts(freqs)
        # identity map: q = freqs directly
        weights = np.eye(engine.d)
        stderr = _delta_method_stderr(weights, freqs, trials)
        return k, (freqs, y, stderr)

    workers = _max_workers(max_workers)
    items = list(enumerate(deltas))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = dict(pool.map(one_setting, items))
    else:
        rows = dict(one_setting(it) for it in items)

    thetas, values, errs = [], [], []
    raw = []
    for k, delta in items:
        freqs, y, stderr = rows[k]
        thetas.extend(engine.sample_positions(delta))
        values.extend(y)
        errs.extend(stderr)
        raw.append(tuple(freqs))
    order = np.argsort(thetas)
    points = ph.PhaseDistribution(np.asarray(thetas)[order], np.asarray(values)[order],
                                  np.asarray(errs)[order], meta="monte-carlo")
    rate = float(np.mean([sum(p) for p in raw]))
    diagnostics = {
        "mode": "monte-carlo",
        "rng": RNG_ALGORITHM,
        "seed": config.seed,
        "trials_per_setting": trials,
        "signal_tail_beyond_order": _signal_tail_beyond(signal, engine.N),
        "photon_limit": config.photon_limit,
    }
    return SweepResult(points, tuple(raw), rate, diagnostics)


def _corrected_estimates(thinned: np.ndarray, engine: _SectorEngine,
                         config: ExperimentConfig, trials: int):
    """Efficiency-corrected desired-event estimates from thinned count samples.

    The empirical joint distribution is inverted per detector axis; the
    desired-event estimates are a linear map of the observed cell
    frequencies, which keeps the delta-method error propagation exact to
    first order.
    """
    d = engine.d
    etas = config.detector.etas_for(d)
    cutoff = int(thinned.max(initial=0))
    observed, obs_counts = np.unique(thinned, axis=0, return_counts=True)
    freqs = obs_counts / trials
    inv_mats = [det._inverse_bernoulli_matrix(e, cutoff) for e in etas]
    patterns = _desired_patterns(engine.N)
    weights = np.zeros((d, observed.shape[0]))
    for m, pat in enumerate(patterns):
        for c, obs in enumerate(observed):
            w = 1.0
            for axis in range(d):
                w *= inv_mats[axis][pat[axis], obs[axis]]
            weights[m, c] = w
    q = np.maximum(weights @ freqs, 0.0)
    y = ph.normalize_counts(q)
    stderr = _delta_method_stderr(weights, freqs, trials)
    return q, y, stderr


def compare_to_canonical(result: SweepResult, truth) -> dict:
    """Deviation metrics between sweep points and the canonical density."""
    expected = ph.canonical_density(truth, result.points.thetas)
    got = result.points.values
    diff = np.abs(got - expected)
    mask = expected > 1e-15
    rel = diff[mask] / expected[mask] if np.any(mask) else np.array([0.0])
    return {
        "max_abs_deviation": float(np.max(diff, initial=0.0)),
        "rms_deviation": float(np.sqrt(np.mean(diff ** 2))) if diff.size else 0.0,
        "max_rel_deviation": float(np.max(rel, initial=0.0)),
    }
