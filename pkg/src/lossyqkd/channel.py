"""Lossy depolarising channel with collective rotation, observed data and QBER.

The channel acts on Bob's half of the source state::

    rho_AB = (1-p) [ (1-e) (1 (x) U(theta)) |psi><psi| (1 (x) U(theta))^dag
                     + (e/2) rho_A (x) (1_B - |vac><vac|) ]
             + p rho_A (x) |vac><vac|

Loss events land in Bob's vacuum outcome, which never sifts, so neither QBER
route depends on ``p``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import hermitian, kron, ket, partial_trace, projector
from .protocols import ProtocolSpec, sift_rule

__all__ = [
    "ChannelParams",
    "CorrelationData",
    "unitary_u",
    "apply_channel",
    "correlations",
    "tomography_data",
    "qber_simulated",
    "qber_analytic",
]

VAC = projector(ket(3, 2))


@dataclass(frozen=True)
class ChannelParams:
    p: float = 0.0
    e: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        for name in ("p", "e"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if not 0.0 <= self.theta <= np.pi / 4 + 1e-12:
            raise ValueError(f"theta must lie in [0, pi/4], got {self.theta}")


@dataclass(frozen=True)
class CorrelationData:
    """Measured operators on A (x) B with their expectation values.

    Rows are ordered as all ``A_i (x) B_j`` (row-major in i, j) followed by
    the tomography rows ``C_k (x) 1``.
    """

    operators: np.ndarray
    values: np.ndarray
    dims: tuple[int, int] = (2, 3)
    n_alice: int = 0
    n_bob: int = 0

    def __len__(self) -> int:
        return len(self.values)

    @property
    def joint(self) -> np.ndarray:
        """The ``p_ij`` table (empty for data without a POVM block)."""
        return self.values[: self.n_alice * self.n_bob].reshape(self.n_alice, self.n_bob)


def unitary_u(theta: float) -> np.ndarray:
    """Real rotation by ``theta`` on Bob's qubit block, identity on the vacuum."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=complex)


def apply_channel(spec: ProtocolSpec, params: ChannelParams) -> np.ndarray:
    psi = spec.source_state.reshape(2, 2)
    psi3 = np.zeros((2, 3), dtype=complex)
    psi3[:, :2] = psi
    rotated = (psi3 @ unitary_u(params.theta).T).reshape(6)
    rho_a = spec.rho_a
    qubit_identity = np.eye(3) - VAC
    rho = (1 - params.p) * (
        (1 - params.e) * projector(rotated) + params.e / 2 * kron(rho_a, qubit_identity)
    ) + params.p * kron(rho_a, VAC)
    return hermitian(rho)


def correlations(spec: ProtocolSpec, rho) -> CorrelationData:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (6, 6):
        raise ValueError(f"expected a state on C^2 (x) C^3, got shape {rho.shape}")
    ops = [np.kron(a, b) for a in spec.alice_povm for b in spec.bob_povm]
    ops += [np.kron(c, np.eye(3)) for c in spec.alice_tomo]
    ops = np.array(ops)
    values = np.einsum("kij,ji->k", ops, rho)
    if np.max(np.abs(values.imag)) > 1e-12:
        raise ValueError("expectation values are not real; is rho Hermitian?")
    return CorrelationData(ops, values.real.copy(), (2, 3), len(spec.alice_povm), len(spec.bob_povm))


def tomography_data(rho, basis) -> CorrelationData:
    """Data set measuring every element of ``basis`` (fully determined class)."""
    rho = np.asarray(rho, dtype=complex)
    values = np.einsum("kij,ji->k", basis.elements, rho).real
    dims = tuple(b.dim for b in basis.factors) or (basis.dim,)
    return CorrelationData(basis.elements.copy(), values, dims)


def qber_simulated(spec: ProtocolSpec, rho) -> float:
    """Sifted error probability divided by sifted probability."""
    events = sift_rule(spec)
    if not events:
        raise ValueError(f"protocol {spec.name} has no sifted events")
    data = correlations(spec, rho)
    table = data.joint
    total = sum(ev.weight * table[ev.alice, ev.bob] for ev in events)
    errors = sum(ev.weight * table[ev.alice, ev.bob] for ev in events if ev.error)
    if total <= 0:
        raise ValueError("zero sifted probability")
    return float(errors / total)


def qber_analytic(spec: ProtocolSpec | str, e: float, theta: float, alpha: float | None = None) -> float:
    """Closed-form QBER of each protocol under the channel (independent of loss)."""
    name = spec if isinstance(spec, str) else spec.name
    if alpha is None and not isinstance(spec, str):
        alpha = spec.alpha
    return float(_qber_formula(name, e, theta, alpha))


def _qber_formula(name, e, theta, alpha):
    s2 = np.sin(theta) ** 2
    c2 = np.cos(theta) ** 2
    if name == "six-state":
        return (4 * s2 + (3 - 4 * s2) * e) / 6
    if name == "four-state":
        return s2 + (1 - 2 * s2) * e / 2
    if name == "three-state":
        return 0.5 * (1 + (1 - e) * (s2 - c2))
    if name == "trine":
        return (2 * e + 4 * (1 - e) * s2) / (3 + e + 2 * (1 - e) * s2)
    if name == "amp":
        return 0.5 * ((1 - e) * s2 + e)
    if name in ("two-state", "four-plus-two"):
        if alpha is None:
            raise ValueError(f"{name} QBER needs alpha")
        a2 = alpha**2
        b2 = 1 - a2
        if name == "two-state":
            gamma = 2 * (a2 * s2 + b2 * c2)
            return (2 * s2 + (1 - 2 * s2) * e) / (2 * (2 * b2 + (a2 - b2) * (gamma + (1 - gamma) * e)))
        num = e + (1 - e) * (1 + (a2 - b2) ** 2) * s2
        den = 2 * (e + (1 - e) * (2 * (a2**2 + b2**2) * s2 + 4 * a2 * b2 * c2))
        return num / den
    raise ValueError(f"no closed-form QBER for protocol {name!r}")


def reduced_alice(rho) -> np.ndarray:
    return partial_trace(rho, (2, 3), 1)
