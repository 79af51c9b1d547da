"""Dense Hermitian operator algebra on small composite Hilbert spaces.

Operators are plain ``numpy`` arrays of shape ``(d, d)``.  Operator bases are
normalised so that ``Tr(e_0) = d`` (identity first) and
``Tr(e_i e_j) = d * delta_ij``; with that convention an operator is recovered
from its coefficients ``x_i = Tr(e_i X)`` as ``X = (1/d) sum_i x_i e_i``.

The qutrit computational basis is ordered ``(|0>, |1>, |vac>)`` so qubit
operators embed in the top-left 2x2 block.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-12

__all__ = [
    "OperatorBasis",
    "hermitian",
    "kron",
    "pauli_basis",
    "gellmann_basis",
    "product_basis",
    "local_basis",
    "expand",
    "assemble",
    "partial_transpose",
    "partial_trace",
    "swap_operator",
    "real_embed",
    "real_unembed",
    "min_eigenvalue",
    "embed_qubit",
    "ket",
    "projector",
    "coeffs_to_json",
    "coeffs_from_json",
]


def hermitian(mat, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``(H + H^dagger) / 2`` after checking ``H`` is Hermitian.

    Raises ``ValueError`` if the anti-Hermitian part exceeds ``tol`` (scaled by
    the operator norm of ``H`` when that is larger than one).
    """
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    scale = max(1.0, float(np.max(np.abs(mat)))) if mat.size else 1.0
    asym = float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0
    if asym > tol * scale:
        raise ValueError(f"matrix is not Hermitian (asymmetry {asym:.3e})")
    return (mat + mat.conj().T) / 2


def kron(*ops) -> np.ndarray:
    return reduce(np.kron, ops)


def ket(dim: int, index: int) -> np.ndarray:
    vec = np.zeros(dim, dtype=complex)
    vec[index] = 1.0
    return vec


def projector(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def embed_qubit(op, dim: int = 3) -> np.ndarray:
    """Place a 2x2 operator (or a qubit vector) in the top-left block of ``dim``."""
    op = np.asarray(op, dtype=complex)
    if op.ndim == 1:
        out = np.zeros(dim, dtype=complex)
        out[:2] = op
        return out
    out = np.zeros((dim, dim), dtype=complex)
    out[:2, :2] = op
    return out


@dataclass(frozen=True)
class OperatorBasis:
    """Hermitian operator basis with the ``Tr(e_i e_j) = d delta_ij`` convention.

    ``elements`` is stacked as an array of shape ``(d*d, d, d)``.  For product
    bases ``factors`` holds the local bases and labels read ``"k,l"``.
    """

    dim: int
    elements: np.ndarray
    labels: tuple[str, ...]
    factors: tuple["OperatorBasis", ...] = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, index) -> np.ndarray:
        return self.elements[index]

    def index(self, label: str) -> int:
        return self.labels.index(label)


def pauli_basis() -> OperatorBasis:
    """Identity followed by sigma_x, sigma_y, sigma_z."""
    elements = np.array(
        [
            [[1, 0], [0, 1]],
            [[0, 1], [1, 0]],
            [[0, -1j], [1j, 0]],
            [[1, 0], [0, -1]],
        ],
        dtype=complex,
    )
    return OperatorBasis(2, elements, ("0", "x", "y", "z"))


def gellmann_basis() -> OperatorBasis:
    """Identity followed by the eight Gell-Mann matrices scaled by sqrt(3/2).

    The standard Gell-Mann set obeys ``Tr(l_i l_j) = 2 delta_ij``; the rescaling
    gives ``3 delta_ij`` so coefficients share the ``1/d`` prefactor of the
    Pauli case.  Ordering follows the usual numbering lambda_1 .. lambda_8.
    """
    lam = np.zeros((9, 3, 3), dtype=complex)
    lam[0] = np.eye(3)
    lam[1][0, 1] = lam[1][1, 0] = 1
    lam[2][0, 1], lam[2][1, 0] = -1j, 1j
    lam[3][0, 0], lam[3][1, 1] = 1, -1
    lam[4][0, 2] = lam[4][2, 0] = 1
    lam[5][0, 2], lam[5][2, 0] = -1j, 1j
    lam[6][1, 2] = lam[6][2, 1] = 1
    lam[7][1, 2], lam[7][2, 1] = -1j, 1j
    lam[8] = np.diag([1, 1, -2]) / np.sqrt(3)
    lam[1:] *= np.sqrt(1.5)
    return OperatorBasis(3, lam, tuple(str(i) for i in range(9)))


def local_basis(dim: int) -> OperatorBasis:
    if dim == 2:
        return pauli_basis()
    if dim == 3:
        return gellmann_basis()
    raise ValueError(f"no built-in operator basis for dimension {dim}")


def product_basis(*bases: OperatorBasis) -> OperatorBasis:
    """Tensor-product basis ``S_kl = a_k (x) b_l``, ordered row-major in (k, l)."""
    if len(bases) < 2:
        raise ValueError("product_basis needs at least two factors")
    elements = bases[0].elements
    labels = list(bases[0].labels)
    for b in bases[1:]:
        elements = np.einsum("aij,bkl->abikjl", elements, b.elements).reshape(
            len(elements) * len(b), elements.shape[1] * b.dim, elements.shape[1] * b.dim
        )
        labels = [f"{p},{q}" for p in labels for q in b.labels]
    dim = int(np.prod([b.dim for b in bases]))
    return OperatorBasis(dim, elements, tuple(labels), tuple(bases))


def expand(op, basis: OperatorBasis) -> np.ndarray:
    """Coefficients ``x_i = Tr(e_i op)`` (real for Hermitian ``op``)."""
    op = np.asarray(op, dtype=complex)
    if op.shape != (basis.dim, basis.dim):
        raise ValueError(f"operator shape {op.shape} does not match basis dimension {basis.dim}")
    vals = np.einsum("kij,ji->k", basis.elements, op)
    if np.max(np.abs(vals.imag), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(op))):
        raise ValueError("operator is not Hermitian; coefficients are complex")
    return vals.real.copy()


def assemble(coeffs, basis: OperatorBasis) -> np.ndarray:
    """Inverse of :func:`expand`: ``(1/d) sum_i x_i e_i``."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (len(basis),):
        raise ValueError(f"expected {len(basis)} coefficients, got {coeffs.shape}")
    return np.tensordot(coeffs, basis.elements, axes=1) / basis.dim


def _check_dims(op: np.ndarray, dims: Sequence[int]) -> None:
    total = int(np.prod(dims))
    if op.shape != (total, total):
        raise ValueError(f"operator shape {op.shape} incompatible with dims {tuple(dims)}")


def partial_transpose(op, dims: Sequence[int] = (2, 3), subsystem: int = 1) -> np.ndarray:
    """Transpose with respect to one tensor factor (default: the second)."""
    op = np.asarray(op)
    dims = tuple(dims)
    _check_dims(op, dims)
    n = len(dims)
    t = op.reshape(dims + dims)
    axes = list(range(2 * n))
    axes[subsystem], axes[n + subsystem] = axes[n + subsystem], axes[subsystem]
    return t.transpose(axes).reshape(op.shape)


def partial_trace(op, dims: Sequence[int], traced: int | Sequence[int]) -> np.ndarray:
    """Trace out the subsystems listed in ``traced``."""
    op = np.asarray(op)
    dims = tuple(dims)
    _check_dims(op, dims)
    traced = sorted({traced} if isinstance(traced, (int, np.integer)) else set(traced))
    n = len(dims)
    t = op.reshape(dims + dims)
    for count, sub in enumerate(traced):
        k = n - count
        t = np.trace(t, axis1=sub - count, axis2=sub - count + k)
    kept = [d for i, d in enumerate(dims) if i not in traced]
    size = int(np.prod(kept)) if kept else 1
    return t.reshape(size, size)


def swap_operator(dims: Sequence[int], i: int, j: int) -> np.ndarray:
    """Permutation matrix exchanging tensor factors ``i`` and ``j``."""
    dims = tuple(dims)
    if dims[i] != dims[j]:
        raise ValueError(f"cannot swap factors of unequal dimension {dims[i]} and {dims[j]}")
    total = int(np.prod(dims))
    perm = list(range(len(dims)))
    perm[i], perm[j] = perm[j], perm[i]
    idx = np.arange(total).reshape(dims).transpose(perm).reshape(total)
    out = np.zeros((total, total))
    out[np.arange(total), idx] = 1.0
    return out


def real_embed(op) -> np.ndarray:
    """Map ``H = A + iB`` to the real symmetric ``[[A, -B], [B, A]]``."""
    op = np.asarray(op, dtype=complex)
    a, b = op.real, op.imag
    return np.block([[a, -b], [b, a]])


def real_unembed(mat) -> np.ndarray:
    """Inverse of :func:`real_embed`, averaging the redundant blocks."""
    mat = np.asarray(mat, dtype=float)
    n = mat.shape[0] // 2
    p, q = mat[:n, :n], mat[:n, n:]
    qt, r = mat[n:, :n], mat[n:, n:]
    return (p + r) / 2 + 1j * (qt - q) / 2


def min_eigenvalue(op) -> float:
    return float(np.linalg.eigvalsh(hermitian(op, tol=1e-9))[0])


def coeffs_to_json(coeffs, basis: OperatorBasis) -> dict[str, float]:
    """Label -> coefficient mapping; reassemble with ``(1/d) sum x_kl S_kl``."""
    coeffs = np.asarray(coeffs, dtype=float)
    return {label: float(v) for label, v in zip(basis.labels, coeffs)}


def coeffs_from_json(mapping: dict[str, float] | str, basis: OperatorBasis) -> np.ndarray:
    if isinstance(mapping, str):
        mapping = json.loads(mapping)
    out = np.zeros(len(basis))
    for label, value in mapping.items():
        out[basis.index(label)] = value
    return out
