import numpy as np
import pytest

from lossyqkd.operators import partial_trace, projector
from lossyqkd.protocols import (
    PROTOCOLS,
    SignalEnsemble,
    compress_source,
    four_plus_two,
    get_protocol,
    sift_rule,
    two_state,
)

from _helpers import ALL


def reduced_bob_given(spec, i):
    op = np.kron(spec.alice_povm[i], np.eye(2)) @ spec.rho_source
    return partial_trace(op, (2, 2), 0)


@pytest.mark.parametrize("name,alpha", ALL)
def test_source_reproduces_ensemble(name, alpha):
    spec = get_protocol(name, alpha)
    ens = spec.ensemble
    for i, (phi, p) in enumerate(zip(ens.states, ens.probs)):
        assert np.max(np.abs(reduced_bob_given(spec, i) - p * projector(phi))) < 1e-10


@pytest.mark.parametrize("name,alpha", ALL)
def test_povms_complete(name, alpha):
    spec = get_protocol(name, alpha)
    assert np.allclose(spec.alice_povm.sum(0), np.eye(2), atol=1e-10)
    assert np.allclose(spec.bob_povm.sum(0), np.eye(3), atol=1e-10)
    for el in list(spec.alice_povm) + list(spec.bob_povm):
        assert np.linalg.eigvalsh(el)[0] > -1e-12
    vac = np.zeros((3, 3))
    vac[2, 2] = 1
    assert np.allclose(spec.bob_povm[-1], vac)


def test_two_state_source():
    spec = two_state(0.3)
    b = np.sqrt(1 - 0.09)
    phi0, phi1 = np.array([0.3, b]), np.array([0.3, -b])
    expected = (np.kron([1, 0], phi0) + np.kron([0, 1], phi1)) / np.sqrt(2)
    assert np.allclose(spec.source_state, expected)
    assert np.allclose(spec.alice_povm, [np.diag([1, 0]), np.diag([0, 1])])


def test_orthogonal_ensemble_maximally_entangled():
    psi, povm = compress_source(SignalEnsemble.uniform([[1, 0], [0, 1]]))
    assert np.allclose(partial_trace(projector(psi), (2, 2), 1), np.eye(2) / 2)
    assert np.allclose(povm, [np.diag([1, 0]), np.diag([0, 1])])


def test_unambiguous_povm_block():
    for alpha in (0.2, 0.4):
        spec = two_state(alpha)
        qubit = spec.bob_povm[:3, :2, :2].sum(0)
        assert np.allclose(qubit, np.eye(2))
        assert np.linalg.eigvalsh(spec.bob_povm[2])[0] >= -1e-12
    assert np.isclose(np.sqrt(1 - 0.2**2), np.sqrt(0.96))


def test_six_state_and_trine_povms():
    six = get_protocol("six-state")
    assert len(six.bob_povm) == 7
    tri = get_protocol("trine")
    assert np.allclose(tri.bob_povm[:3].sum(0)[:2, :2], np.eye(2))


def test_amp_states_equatorial():
    sz = np.diag([1, -1])
    for s in get_protocol("amp").ensemble.states:
        assert abs(np.vdot(s, sz @ s)) < 1e-12


def test_sift_rules():
    ev = sift_rule(two_state(0.3))
    assert {(e.alice, e.bob) for e in ev} == {(0, 0), (0, 1), (1, 0), (1, 1)}
    assert all(e.error == (e.alice != e.bob) for e in ev)
    four = get_protocol("four-state")
    z_events = [e for e in sift_rule(four) if e.alice == 0 and e.bob in (0, 1)]
    assert [e.error for e in z_events] == [False, True]
    for name, alpha in ALL:
        spec = get_protocol(name, alpha)
        vac = len(spec.bob_povm) - 1
        assert all(e.bob != vac for e in sift_rule(spec))


def test_four_plus_two_shape():
    spec = four_plus_two(0.4)
    assert len(spec.bob_povm) == 7 and len(spec.ensemble.states) == 4


def test_invalid_inputs():
    with pytest.raises(ValueError):
        get_protocol("bb84")
    with pytest.raises(ValueError):
        two_state(0.8)
    with pytest.raises(ValueError):
        get_protocol("two-state")
    with pytest.raises(ValueError):
        SignalEnsemble([[1, 0]], [0.5])
    assert set(PROTOCOLS) == {n for n, _ in ALL}
