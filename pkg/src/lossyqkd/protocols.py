"""Single-photon QKD protocols written as entanglement-based descriptions.

Each protocol is a :class:`ProtocolSpec`: a two-qubit source state, Alice's
POVM on her (compressed) qubit, the tomographic set {sigma_x, sigma_y,
sigma_z} that pins down her reduced state, Bob's POVM on the qubit+vacuum
space, and the list of sifted outcome pairs used for the QBER.

Bob's basis-choice probabilities are folded into the POVM weights, so every
Bob POVM sums to the 3x3 identity, and the last Bob element is always the
vacuum projector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .operators import embed_qubit, ket, pauli_basis, projector

SQRT2 = np.sqrt(2.0)

__all__ = [
    "SignalEnsemble",
    "SiftEvent",
    "ProtocolSpec",
    "compress_source",
    "two_state",
    "four_state",
    "six_state",
    "three_state",
    "trine",
    "four_plus_two",
    "amp",
    "sift_rule",
    "PROTOCOLS",
    "get_protocol",
]


def _fix_phase(vec) -> np.ndarray:
    """Normalise and make the |0> amplitude real and nonnegative."""
    vec = np.asarray(vec, dtype=complex)
    vec = vec / np.linalg.norm(vec)
    if abs(vec[0]) > 1e-15:
        vec = vec * (abs(vec[0]) / vec[0])
    return vec


def _perp(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return _fix_phase([-np.conj(vec[1]), np.conj(vec[0])])


@dataclass(frozen=True)
class SignalEnsemble:
    states: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        states = np.array([_fix_phase(s) for s in self.states])
        probs = np.asarray(self.probs, dtype=float)
        if len(states) != len(probs):
            raise ValueError("need one probability per signal state")
        if np.any(probs < 0) or abs(probs.sum() - 1) > 1e-12:
            raise ValueError("signal probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, states) -> "SignalEnsemble":
        return cls(states, np.full(len(states), 1.0 / len(states)))


class SiftEvent(NamedTuple):
    """One sifted (Alice outcome, Bob outcome) pair.

    ``weight`` is the fraction of such events kept after public discussion; it
    is 1 except where the announcement itself is random (trine).
    """

    alice: int
    bob: int
    same_basis: bool
    error: bool
    weight: float = 1.0


@dataclass(frozen=True)
class ProtocolSpec:
    name: str
    source_state: np.ndarray
    alice_povm: np.ndarray
    alice_tomo: np.ndarray
    bob_povm: np.ndarray
    sift_pairs: tuple[SiftEvent, ...]
    ensemble: SignalEnsemble = field(repr=False)
    alpha: float | None = None
    bob_labels: tuple[str, ...] = ()

    def __post_init__(self):
        psi = np.asarray(self.source_state, dtype=complex)
        if psi.shape != (4,) or abs(np.linalg.norm(psi) - 1) > 1e-12:
            raise ValueError("source state must be a unit vector in C^2 (x) C^2")
        _check_povm(self.alice_povm, 2, "Alice")
        _check_povm(self.bob_povm, 3, "Bob")

    @property
    def rho_source(self) -> np.ndarray:
        return projector(self.source_state)

    @property
    def rho_a(self) -> np.ndarray:
        """Alice's reduced state, fixed by the preparation."""
        psi = self.source_state.reshape(2, 2)
        return psi @ psi.conj().T


def _check_povm(elements, dim: int, who: str, tol: float = 1e-10) -> None:
    elements = np.asarray(elements)
    if elements.shape[1:] != (dim, dim):
        raise ValueError(f"{who} POVM elements must be {dim}x{dim}")
    for el in elements:
        if np.max(np.abs(el - el.conj().T)) > tol or np.linalg.eigvalsh(el)[0] < -tol:
            raise ValueError(f"{who} POVM element is not positive semidefinite")
    if np.max(np.abs(elements.sum(axis=0) - np.eye(dim))) > tol:
        raise ValueError(f"{who} POVM does not sum to the identity")


def compress_source(ensemble: SignalEnsemble) -> tuple[np.ndarray, np.ndarray]:
    """Two-qubit source state and Alice POVM that reproduce ``ensemble``.

    Starts from ``sum_i sqrt(p_i) |a_i>|phi_i>`` with orthonormal ``|a_i>`` in
    ``C^N`` and restricts Alice's side to the support of her reduced state via
    an isometry ``V``.  Guarantees
    ``Tr_A[(A_i (x) 1) |psi><psi|] = p_i |phi_i><phi_i|``.
    """
    states, probs = ensemble.states, ensemble.probs
    if states.shape[1] != 2:
        raise ValueError("signal states must be qubit vectors")
    n = len(states)
    amp = np.sqrt(probs)[:, None] * states        # row i = sqrt(p_i) phi_i
    rho_a = amp @ amp.conj().T                    # <a_i|rho_A|a_j> = sqrt(p_i p_j) <phi_j|phi_i>
    evals, evecs = np.linalg.eigh(rho_a)
    rank = int(np.sum(evals > 1e-12))
    if rank > 2:
        raise ValueError("signal ensemble is not representable on a qubit")
    if n == 2:
        V = np.eye(2, dtype=complex)
    elif n < 2:
        raise ValueError("need at least two signal states")
    else:
        V = evecs[:, ::-1][:, :2].copy()
        for col in range(2):
            pivot = V[np.argmax(np.abs(V[:, col]) > 1e-12), col]
            V[:, col] *= abs(pivot) / pivot
    psi = (V.conj().T @ amp).reshape(4)
    psi = psi / np.linalg.norm(psi)
    povm = np.array([np.outer(V.conj().T[:, i], V[i, :]) for i in range(n)])
    povm = (povm + povm.conj().transpose(0, 2, 1)) / 2
    return psi, povm


def _tomo() -> np.ndarray:
    return pauli_basis().elements[1:].copy()


def _bob(qubit_elements, weights) -> np.ndarray:
    elements = [w * embed_qubit(e) for e, w in zip(qubit_elements, weights)]
    elements.append(projector(ket(3, 2)))
    return np.array(elements)


def _build(name, states, bob_povm, sift, alpha=None, bob_labels=()) -> ProtocolSpec:
    ensemble = SignalEnsemble.uniform(states)
    psi, povm = compress_source(ensemble)
    return ProtocolSpec(name, psi, povm, _tomo(), bob_povm, tuple(sift), ensemble, alpha,
                        tuple(bob_labels))


def _basis_sift(signal_basis, signal_bit, bob_basis, bob_bit):
    events = []
    for i, (sb, sv) in enumerate(zip(signal_basis, signal_bit)):
        for j, (bb, bv) in enumerate(zip(bob_basis, bob_bit)):
            if sb == bb:
                events.append(SiftEvent(i, j, True, sv != bv))
    return events


def _check_alpha(alpha) -> float:
    if alpha is None or not 0 < alpha < 1 / SQRT2:
        raise ValueError(f"alpha must lie in (0, 1/sqrt(2)), got {alpha}")
    return float(alpha)


def _unambiguous_povm(phi0, phi1, beta):
    """Bob's conclusive/inconclusive POVM for the pair ``phi0``, ``phi1``."""
    b0 = projector(_perp(phi1)) / (2 * beta**2)
    b1 = projector(_perp(phi0)) / (2 * beta**2)
    return [b0, b1, np.eye(2) - b0 - b1]


def two_state(alpha: float) -> ProtocolSpec:
    """Two nonorthogonal states ``alpha|0> +- beta|1>`` with an unambiguous POVM."""
    alpha = _check_alpha(alpha)
    beta = np.sqrt(1 - alpha**2)
    phi = [np.array([alpha, beta]), np.array([alpha, -beta])]
    bob = _bob(_unambiguous_povm(*phi, beta), [1, 1, 1])
    sift = [SiftEvent(i, j, True, i != j) for i in range(2) for j in range(2)]
    return _build("two-state", phi, bob, sift, alpha, ("0", "1", "null", "vac"))


def four_state() -> ProtocolSpec:
    z = [ket(2, 0), ket(2, 1)]
    x = [np.array([1, 1]) / SQRT2, np.array([1, -1]) / SQRT2]
    states = z + x
    bob = _bob([projector(s) for s in states], [0.5] * 4)
    sift = _basis_sift("zzxx", [0, 1, 0, 1], "zzxx", [0, 1, 0, 1])
    return _build("four-state", states, bob, sift, bob_labels=("z0", "z1", "x0", "x1", "vac"))


def six_state() -> ProtocolSpec:
    states = [
        ket(2, 0), ket(2, 1),
        np.array([1, 1]) / SQRT2, np.array([1, -1]) / SQRT2,
        np.array([1, 1j]) / SQRT2, np.array([1, -1j]) / SQRT2,
    ]
    bob = _bob([projector(s) for s in states], [1 / 3] * 6)
    sift = _basis_sift("zzxxyy", [0, 1] * 3, "zzxxyy", [0, 1] * 3)
    return _build("six-state", states, bob, sift,
                  bob_labels=("z0", "z1", "x0", "x1", "y0", "y1", "vac"))


def three_state() -> ProtocolSpec:
    z = [ket(2, 0), ket(2, 1)]
    x = [np.array([1, 1]) / SQRT2, np.array([1, -1]) / SQRT2]
    bob = _bob([projector(s) for s in z + x], [0.5] * 4)
    sift = _basis_sift("zzx", [0, 1, 0], "zzxx", [0, 1, 0, 1])
    return _build("three-state", z + x[:1], bob, sift,
                  bob_labels=("z0", "z1", "x0", "x1", "vac"))


def trine() -> ProtocolSpec:
    """Trine states with Bob's exclusion POVM; outcome ``j`` rules out signal ``j``.

    Alice announces a random pair containing her signal; a Bob outcome inside
    the pair excludes one member and he keeps the other.  Outcome ``j = i``
    therefore always sifts as an error, while each ``j != i`` sifts only when
    the announced partner is ``j`` (probability 1/2).
    """
    s3 = np.sqrt(3) / 2
    states = [ket(2, 0), np.array([0.5, s3]), np.array([0.5, -s3])]
    exclusion = [ket(2, 1), np.array([s3, -0.5]), np.array([s3, 0.5])]
    bob = _bob([projector(v) for v in exclusion], [2 / 3] * 3)
    sift = [SiftEvent(i, j, True, i == j, 1.0 if i == j else 0.5)
            for i in range(3) for j in range(3)]
    return _build("trine", states, bob, sift, bob_labels=("0", "1", "2", "vac"))


def four_plus_two(alpha: float) -> ProtocolSpec:
    """Two interleaved two-state schemes, ``alpha|0> +- beta|1>`` and ``alpha|0> +- i beta|1>``.

    Bob picks one of the two unambiguous POVMs with probability 1/2; only
    conclusive outcomes of the POVM that matches Alice's pair are sifted.
    """
    alpha = _check_alpha(alpha)
    beta = np.sqrt(1 - alpha**2)
    real_pair = [np.array([alpha, beta]), np.array([alpha, -beta])]
    imag_pair = [np.array([alpha, 1j * beta]), np.array([alpha, -1j * beta])]
    qubit = _unambiguous_povm(*real_pair, beta) + _unambiguous_povm(*imag_pair, beta)
    bob = _bob(qubit, [0.5] * 6)
    sift = [SiftEvent(2 * pair + i, 3 * pair + j, True, i != j)
            for pair in range(2) for i in range(2) for j in range(2)]
    return _build("four-plus-two", real_pair + imag_pair, bob, sift, alpha,
                  ("r0", "r1", "rnull", "i0", "i1", "inull", "vac"))


def amp() -> ProtocolSpec:
    """Six equatorial signal states, Bob measuring at azimuths -pi/4 and +pi/4.

    The key is formed from the two signals that are eigenstates of Bob's first
    basis; the remaining four only serve to constrain the eavesdropper.
    """
    w = (1 - 1j) / 2
    states = [
        np.array([1, 1]) / SQRT2, np.array([1, -1]) / SQRT2,
        np.array([1, 1j]) / SQRT2, np.array([1, -1j]) / SQRT2,
        np.array([1 / SQRT2, w]), np.array([1 / SQRT2, -w]),
    ]
    bob_vectors = []
    for phi in (np.pi / 4, -np.pi / 4):
        bob_vectors += [np.array([1, np.exp(-1j * phi)]) / SQRT2,
                        np.array([1, -np.exp(-1j * phi)]) / SQRT2]
    bob = _bob([projector(v) for v in bob_vectors], [0.5] * 4)
    sift = [SiftEvent(4 + i, j, True, i != j) for i in range(2) for j in range(2)]
    return _build("amp", states, bob, sift, bob_labels=("a0", "a1", "b0", "b1", "vac"))


def sift_rule(spec: ProtocolSpec) -> list[SiftEvent]:
    return list(spec.sift_pairs)


PROTOCOLS: dict[str, Callable[..., ProtocolSpec]] = {
    "two-state": two_state,
    "four-state": four_state,
    "six-state": six_state,
    "three-state": three_state,
    "trine": trine,
    "four-plus-two": four_plus_two,
    "amp": amp,
}

NEEDS_ALPHA = frozenset({"two-state", "four-plus-two"})


def get_protocol(name: str, alpha: float | None = None) -> ProtocolSpec:
    try:
        builder = PROTOCOLS[name]
    except KeyError:
        raise ValueError(f"unknown protocol {name!r}; choose from {', '.join(PROTOCOLS)}") from None
    if name in NEEDS_ALPHA:
        return builder(alpha)
    return builder()
