"""Linear-optical elements, networks, and exact Fock-space evolution.

Matrix convention
-----------------
``ModeTransform.matrix`` is the mode-coupling matrix ``U`` in the convention
where annihilation operators transform forward as ``a_i -> sum_j U[i, j] a_j``
(row = input mode, column = output mode).  Creation operators therefore pick
up ``conj(U)``, and the transition amplitude between occupation tuples
``n -> m`` is

    amp(n -> m) = conj(per(U_sub)) / sqrt(prod_i n_i! * prod_j m_j!)

where ``U_sub`` repeats row ``i`` ``n_i`` times and column ``j`` ``m_j``
times.  Two independent engines compute this image: ``evolve`` expands the
transformed creation-operator product directly, ``evolve_sequential`` applies
each network element's exact two-mode (or one-mode) Fock transformation in
order.  ``transition_amplitude`` evaluates the permanent formula itself and
serves as the definitional cross-check for both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement, permutations

import numpy as np

from .fock import FockVector

UNITARITY_TOL = 1e-12
NORM_TOL = 1e-9
DEFAULT_PHOTON_LIMIT = 12


@dataclass(frozen=True)
class ModeTransform:
    """Unitary mode-coupling matrix with an optional global phase."""

    matrix: np.ndarray
    global_phase: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        gram = m.conj().T @ m
        if np.max(np.abs(gram - np.eye(m.shape[0]))) >= UNITARITY_TOL:
            raise ValueError("matrix is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def num_modes(self) -> int:
        return self.matrix.shape[0]

    def to_wire(self) -> list:
        """Row-major ``[[re, im], ...]`` export of the matrix entries."""
        return [[float(z.real), float(z.imag)] for z in self.matrix.reshape(-1)]

    @classmethod
    def from_wire(cls, pairs, global_phase: float = 0.0) -> "ModeTransform":
        flat = np.array([complex(re, im) for re, im in pairs])
        n = math.isqrt(flat.size)
        if n * n != flat.size:
            raise ValueError("wire data is not a square matrix")
        return cls(flat.reshape(n, n), global_phase)


@dataclass(frozen=True)
class BeamSplitter:
    """50:50 symmetric beam splitter coupling two modes."""

    mode_a: int
    mode_b: int

    def __post_init__(self):
        if self.mode_a == self.mode_b:
            raise ValueError("beam splitter modes must differ")


@dataclass(frozen=True)
class PhaseShifter:
    """Shifter multiplying the number state ``|n>`` on one mode by ``exp(i n theta)``."""

    mode: int
    theta: float


@dataclass(frozen=True)
class Network:
    """Ordered list of elements acting on ``num_modes`` optical modes."""

    num_modes: int
    elements: tuple

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        for el in self.elements:
            modes = (el.mode_a, el.mode_b) if isinstance(el, BeamSplitter) else (el.mode,)
            if any(m < 0 or m >= self.num_modes for m in modes):
                raise ValueError(f"element {el} addresses a mode outside 0..{self.num_modes - 1}")


@dataclass(frozen=True)
class MultiModeState:
    """Sparse multimode pure state: occupation tuple -> complex amplitude."""

    num_modes: int
    terms: dict

    def __post_init__(self):
        clean = {}
        for occ, amp in self.terms.items():
            occ = tuple(int(x) for x in occ)
            if len(occ) != self.num_modes or any(x < 0 for x in occ):
                raise ValueError(f"bad occupation tuple {occ}")
            if amp != 0:
                clean[occ] = complex(amp)
        norm = sum(abs(a) ** 2 for a in clean.values())
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: total probability {norm!r}")
        object.__setattr__(self, "terms", clean)

    @classmethod
    def from_product(cls, factors: "list[FockVector]") -> "MultiModeState":
        """Tensor product of single-mode states, one per mode."""
        terms = {(): 1.0 + 0j}
        for state in factors:
            new = {}
            for occ, amp in terms.items():
                for n, c in enumerate(state.amplitudes):
                    if c != 0:
                        new[occ + (n,)] = amp * c
            terms = new
        return cls(len(factors), terms)

    def probabilities(self) -> dict:
        return {occ: abs(a) ** 2 for occ, a in self.terms.items()}

    def max_total(self) -> int:
        return max((sum(occ) for occ in self.terms), default=0)


def beam_splitter_matrix() -> ModeTransform:
    """Mode-coupling matrix of the 50:50 symmetric beam splitter.

    In the annihilation-operator convention used throughout, creation
    operators transform with the conjugate, i.e. ``b+ -> (b+ + i c+)/sqrt 2``,
    so a single photon scatters as ``|1,0> -> (|1,0> + i|0,1>)/sqrt 2``.
    """
    m = np.array([[1.0, -1.0j], [-1.0j, 1.0]]) / math.sqrt(2.0)
    return ModeTransform(m)


def dft_transform(N: int) -> ModeTransform:
    """Discrete-Fourier-transform multiport on ``N + 1`` modes.

    ``U[i, j] = omega^{i j} / sqrt(N + 1)`` with ``omega = exp(-i 2 pi / (N + 1))``.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    d = N + 1
    ij = np.outer(np.arange(d), np.arange(d))
    m = np.exp(-2j * np.pi * ij / d) / math.sqrt(d)
    return ModeTransform(m)


def phase_shifter_matrix(num_modes: int, mode: int, theta: float) -> ModeTransform:
    """Diagonal mode-coupling matrix of a phase shifter (``exp(-i theta)`` on ``mode``)."""
    m = np.eye(num_modes, dtype=complex)
    m[mode, mode] = np.exp(-1j * theta)
    return ModeTransform(m)


def element_matrix(element, num_modes: int) -> np.ndarray:
    """Mode-coupling matrix of one element embedded in the full mode space."""
    if isinstance(element, PhaseShifter):
        return phase_shifter_matrix(num_modes, element.mode, element.theta).matrix.copy()
    if isinstance(element, BeamSplitter):
        bs = beam_splitter_matrix().matrix
        m = np.eye(num_modes, dtype=complex)
        a, b = element.mode_a, element.mode_b
        m[a, a], m[a, b] = bs[0, 0], bs[0, 1]
        m[b, a], m[b, b] = bs[1, 0], bs[1, 1]
        return m
    raise TypeError(f"unknown network element {element!r}")


def compose(network: Network) -> ModeTransform:
    """Ordered product of the element mode-coupling matrices."""
    m = np.eye(network.num_modes, dtype=complex)
    for el in network.elements:
        m = m @ element_matrix(el, network.num_modes)
    return ModeTransform(m)


# Eight-port interferometer geometry.  Four 50:50 beam splitters sit at the
# corners of a square: the first layer couples wire pairs (0, 3) and (1, 2),
# the second layer couples (0, 2) and (1, 3); internal arm 2 carries the
# pi/2 shifter between the layers.  The wiring crosses the two vacuum input
# ports, so the port labelled "input 2" is wire 3 (both carry vacuum in the
# measurement, which is why the assignment is free).  The shifter on wire 3
# and those on outputs 1..3 are fixed by solving for exact agreement with
# dft_transform(3); with these values the composition has global phase 0.
_EIGHT_PORT_IN2_WIRE = 3
_EIGHT_PORT_CONV_IN2 = -math.pi / 2
_EIGHT_PORT_CONV_OUT = (math.pi, -math.pi / 2, -math.pi / 2)

# Input-port-to-wire assignment: signal and reference enter wires 0 and 1,
# the vacuum ports In 2 / In 3 enter on crossed wires 3 / 2.  Detectors sit
# on wires 0..3 in label order.  ``compose`` returns the wire-basis matrix;
# reading its rows in this port order gives the port-basis matrix, which
# equals dft_transform(3).  No uncrossed assignment of four 50:50 splitters
# can reach the transform (phase freedom never cancels a port transposition),
# which is why the crossing is part of the geometry.
EIGHT_PORT_INPUT_PORT_WIRES = (0, 1, 3, 2)


def eight_port_network(ref_phase: float = 0.0) -> Network:
    """Four-mode, four-beam-splitter square realizing the ``N = 3`` multiport.

    Signal enters wire 0, the reference enters wire 1 through a shifter set
    to ``-pi/2 + ref_phase`` (creation-operator factor ``-i`` at zero offset),
    and the remaining two wires carry vacuum.  Detectors sit on wires 0..3.
    ``compose`` of the returned network reproduces ``dft_transform(3)``
    exactly; the shifters on the vacuum input and in front of detectors 1..3
    only adjust bookkeeping phases and drop out of all count probabilities.
    """
    psi1, psi2, psi3 = _EIGHT_PORT_CONV_OUT
    elements = (
        PhaseShifter(1, -math.pi / 2 + ref_phase),
        PhaseShifter(_EIGHT_PORT_IN2_WIRE, _EIGHT_PORT_CONV_IN2),
        BeamSplitter(0, 3),
        BeamSplitter(1, 2),
        PhaseShifter(2, -math.pi / 2),
        BeamSplitter(0, 2),
        BeamSplitter(1, 3),
        PhaseShifter(1, psi1),
        PhaseShifter(2, psi2),
        PhaseShifter(3, psi3),
    )
    return Network(4, elements)


def permanent(matrix: np.ndarray) -> complex:
    """Permanent of a square complex matrix.

    Direct expansion over permutations up to dimension 4, Ryser's
    inclusion-exclusion formula above.
    """
    a = np.asarray(matrix, dtype=complex)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if n <= 4:
        total = 0j
        for perm in permutations(range(n)):
            p = 1.0 + 0j
            for i, j in enumerate(perm):
                p *= a[i, j]
            total += p
        return total
    total = 0j
    for subset in range(1, 1 << n):
        cols = [j for j in range(n) if subset >> j & 1]
        total += (-1) ** len(cols) * complex(np.prod(a[:, cols].sum(axis=1)))
    return total * (-1) ** n


def transition_amplitude(transform: ModeTransform, occ_in, occ_out) -> complex:
    """Definitional amplitude ``conj(per(U_sub)) / sqrt(prod n_i! prod m_j!)``."""
    occ_in = tuple(occ_in)
    occ_out = tuple(occ_out)
    if sum(occ_in) != sum(occ_out):
        return 0j
    rows = [i for i, n in enumerate(occ_in) for _ in range(n)]
    cols = [j for j, m in enumerate(occ_out) for _ in range(m)]
    sub = transform.matrix[np.ix_(rows, cols)]
    norm = math.sqrt(
        math.prod(math.factorial(n) for n in occ_in)
        * math.prod(math.factorial(m) for m in occ_out)
    )
    return complex(np.conjugate(permanent(sub))) / norm


def _check_photon_limit(state: MultiModeState, photon_limit: int):
    worst = state.max_total()
    if worst > photon_limit:
        raise ValueError(
            f"input term with {worst} photons exceeds the photon limit {photon_limit}"
        )


def single_term_image(transform: ModeTransform, occ_in, photon_limit: int = DEFAULT_PHOTON_LIMIT) -> dict:
    """Exact output amplitudes of one occupation tuple through ``transform``.

    Expands the transformed creation-operator product photon by photon; the
    result coincides term-by-term with ``transition_amplitude``.
    """
    occ_in = tuple(int(x) for x in occ_in)
    total = sum(occ_in)
    if total > photon_limit:
        raise ValueError(f"{total} photons exceed the photon limit {photon_limit}")
    w = np.conjugate(transform.matrix)  # creation operators transform with conj(U)
    num_modes = transform.num_modes
    poly = {(0,) * num_modes: 1.0 + 0j}
    for i, n_i in enumerate(occ_in):
        row = w[i]
        for _ in range(n_i):
            new = {}
            for occ, coeff in poly.items():
                for j in range(num_modes):
                    wij = row[j]
                    if wij == 0:
                        continue
                    key = occ[:j] + (occ[j] + 1,) + occ[j + 1:]
                    new[key] = new.get(key, 0j) + coeff * wij
            poly = new
    in_norm = math.sqrt(math.prod(math.factorial(n) for n in occ_in))
    out = {}
    for occ, coeff in poly.items():
        out_norm = math.sqrt(math.prod(math.factorial(m) for m in occ))
        out[occ] = coeff * out_norm / in_norm
    return out


def evolve(state: MultiModeState, transform: ModeTransform,
           photon_limit: int = DEFAULT_PHOTON_LIMIT) -> MultiModeState:
    """Exact Fock-space image of ``state`` under a mode transform.

    Photon number is conserved term by term; every amplitude equals the
    permanent-formula value of ``transition_amplitude``.  Terms whose photon
    total exceeds ``photon_limit`` are rejected (cost guard).
    """
    if transform.num_modes != state.num_modes:
        raise ValueError("mode count mismatch")
    _check_photon_limit(state, photon_limit)
    out = {}
    for occ_in, amp in state.terms.items():
        image = single_term_image(transform, occ_in, photon_limit)
        for occ_out, a in image.items():
            out[occ_out] = out.get(occ_out, 0j) + amp * a
    return MultiModeState(state.num_modes, out)


def _shift_terms(terms: dict, mode: int, theta: float) -> dict:
    return {occ: amp * np.exp(1j * occ[mode] * theta) for occ, amp in terms.items()}


def _beam_splitter_terms(terms: dict, mode_a: int, mode_b: int) -> dict:
    """Exact two-mode beam-splitter action on a sparse term map.

    Uses the creation-operator expansion
    ``(a+)^{na} (b+)^{nb} -> prod (w00 a+ + w01 b+)^{na} (w10 a+ + w11 b+)^{nb}``
    with ``w = conj(U_bs)``.
    """
    w = np.conjugate(beam_splitter_matrix().matrix)
    out = {}
    for occ, amp in terms.items():
        na, nb = occ[mode_a], occ[mode_b]
        base = amp / math.sqrt(math.factorial(na) * math.factorial(nb))
        for p in range(na + 1):
            for q in range(nb + 1):
                j = p + q
                k = na + nb - j
                coeff = (
                    math.comb(na, p) * math.comb(nb, q)
                    * w[0, 0] ** p * w[0, 1] ** (na - p)
                    * w[1, 0] ** q * w[1, 1] ** (nb - q)
                )
                new = list(occ)
                new[mode_a], new[mode_b] = j, k
                key = tuple(new)
                val = base * coeff * math.sqrt(math.factorial(j) * math.factorial(k))
                out[key] = out.get(key, 0j) + val
    return out


def evolve_sequential(state: MultiModeState, network: Network,
                      photon_limit: int = DEFAULT_PHOTON_LIMIT) -> MultiModeState:
    """Apply each network element's exact Fock transformation in order.

    Independent of the permanent/expansion machinery; serves as the oracle
    engine cross-checking ``evolve(state, compose(network))``.
    """
    if network.num_modes != state.num_modes:
        raise ValueError("mode count mismatch")
    _check_photon_limit(state, photon_limit)
    terms = dict(state.terms)
    for el in network.elements:
        if isinstance(el, PhaseShifter):
            terms = _shift_terms(terms, el.mode, el.theta)
        elif isinstance(el, BeamSplitter):
            terms = _beam_splitter_terms(terms, el.mode_a, el.mode_b)
        else:
            raise TypeError(f"unknown network element {el!r}")
    return MultiModeState(state.num_modes, terms)


def network_to_json(network: Network) -> list:
    """Wire format: ordered ``[{"bs": [a, b]} | {"ps": [mode, theta]}]``."""
    out = []
    for el in network.elements:
        if isinstance(el, BeamSplitter):
            out.append({"bs": [el.mode_a, el.mode_b]})
        else:
            out.append({"ps": [el.mode, el.theta]})
    return out


def network_from_json(num_modes: int, data: list) -> Network:
    elements = []
    for entry in data:
        if "bs" in entry:
            a, b = entry["bs"]
            elements.append(BeamSplitter(int(a), int(b)))
        elif "ps" in entry:
            mode, theta = entry["ps"]
            elements.append(PhaseShifter(int(mode), float(theta)))
        else:
            raise ValueError(f"unknown element entry {entry!r}")
    return Network(num_modes, tuple(elements))


def occupations(num_modes: int, total: int) -> list:
    """All occupation tuples of ``num_modes`` modes with the given photon total."""
    out = []
    for combo in combinations_with_replacement(range(num_modes), total):
        occ = [0] * num_modes
        for j in combo:
            occ[j] += 1
        out.append(tuple(occ))
    return out
