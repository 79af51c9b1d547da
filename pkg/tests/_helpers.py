import numpy as np

from lossyqkd.operators import gellmann_basis, pauli_basis, product_basis

PB = product_basis(pauli_basis(), gellmann_basis())

ALL = [("two-state", 0.3), ("four-state", None), ("six-state", None), ("three-state", None),
       ("trine", None), ("four-plus-two", 0.3), ("amp", None)]


def random_density(dim, rng, rank=None):
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(dim, rng):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (g + g.conj().T) / 2


def random_pure(dim, rng):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)

# lines printed by the acceptance suite, echoed in the terminal summary
ACCEPTANCE = {}
