import numpy as np
import pytest

from lossyqkd.channel import (
    ChannelParams,
    apply_channel,
    correlations,
    qber_analytic,
    qber_simulated,
    unitary_u,
)
from lossyqkd.operators import embed_qubit, partial_trace, projector

from lossyqkd.protocols import get_protocol

from _helpers import ALL


def test_unitary_examples():
    assert np.allclose(unitary_u(0), np.eye(3))
    v = unitary_u(np.pi / 4) @ np.array([1, 0, 0])
    assert np.allclose(v, [1 / np.sqrt(2), 1 / np.sqrt(2), 0])
    assert np.allclose(unitary_u(0.3) @ [0, 0, 1], [0, 0, 1])


def test_channel_limits():
    spec = get_protocol("six-state")
    rho = apply_channel(spec, ChannelParams(0, 0, 0))
    psi3 = np.kron(np.eye(2), embed_qubit(np.eye(2))[:, :2]) @ spec.source_state
    assert np.allclose(rho, projector(psi3))
    vac = np.diag([0, 0, 1])
    assert np.allclose(apply_channel(spec, ChannelParams(1, 0.4, 0.2)), np.kron(spec.rho_a, vac))


@pytest.mark.parametrize("name,alpha", ALL)
def test_channel_output_is_state(name, alpha):
    spec = get_protocol(name, alpha)
    for p in (0, 0.3, 1):
        for e in (0, 0.2, 1):
            for th in (0, np.pi / 8):
                rho = apply_channel(spec, ChannelParams(p, e, th))
                assert np.isclose(np.trace(rho).real, 1)
                assert np.linalg.eigvalsh(rho)[0] > -1e-12
                assert np.max(np.abs(partial_trace(rho, (2, 3), 1) - spec.rho_a)) < 1e-12


@pytest.mark.parametrize("name,alpha", ALL)
def test_correlation_rows(name, alpha):
    spec = get_protocol(name, alpha)
    rows = {}
    for p, e, th in [(0.3, 0.2, np.pi / 8), (0.7, 0.5, 0.0)]:
        data = correlations(spec, apply_channel(spec, ChannelParams(p, e, th)))
        assert np.isclose(data.joint.sum(), 1)
        assert np.isclose(data.joint[:, -1].sum(), p)
        rows[p] = data.values[data.n_alice * data.n_bob:]
    assert np.allclose(rows[0.3], rows[0.7])


def test_channel_params_validation():
    with pytest.raises(ValueError):
        ChannelParams(1.5, 0, 0)
    with pytest.raises(ValueError):
        ChannelParams(0, -0.1, 0)
    with pytest.raises(ValueError):
        ChannelParams(0, 0, 1.0)


def test_qber_anchors():
    assert abs(qber_analytic("four-state", 0.5, 0) - 0.25) < 1e-12
    assert abs(qber_analytic("six-state", 0.66, 0) - 0.33) < 1e-12
    assert abs(qber_analytic("amp", 0.292, 0) - 0.146) < 1e-12
    for name, alpha in ALL:
        spec = get_protocol(name, alpha)
        assert abs(qber_analytic(spec, 0, 0)) < 1e-12
        assert abs(qber_simulated(spec, apply_channel(spec, ChannelParams(0, 0, 0)))) < 1e-12
    spec = get_protocol("two-state", 0.4)
    sim = qber_simulated(spec, apply_channel(spec, ChannelParams(0.2, 0.3, np.pi / 8)))
    assert abs(sim - qber_analytic(spec, 0.3, np.pi / 8)) < 1e-9


def test_qber_errors():
    with pytest.raises(ValueError):
        qber_analytic("bb84", 0.1, 0)
    with pytest.raises(ValueError):
        qber_analytic("two-state", 0.1, 0)
    with pytest.raises(ValueError):
        correlations(get_protocol("four-state"), np.eye(4) / 4)


def qber_grid():
    for name, _ in ALL:
        for alpha in (0.2, 0.4):
            for th in (0.0, np.pi / 8):
                for e in np.linspace(0, 1, 5):
                    for p in np.linspace(0, 0.9, 5):
                        yield name, alpha, th, e, p


def qber_grid_max_error():
    worst = 0.0
    for name, alpha, th, e, p in qber_grid():
        spec = get_protocol(name, alpha)
        sim = qber_simulated(spec, apply_channel(spec, ChannelParams(p, e, th)))
        worst = max(worst, abs(sim - qber_analytic(spec, e, th)))
    return worst


def test_qber_oracle_grid():
    assert qber_grid_max_error() < 1e-9
