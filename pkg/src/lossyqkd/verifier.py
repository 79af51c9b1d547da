"""Secret-key preconditions as SDP feasibility problems, with witness extraction.

Two-way post-processing needs the observed data to rule out every compatible
separable state; on C^2 (x) C^3 this is the PPT test on the whole equivalence
class, ``rho(x) (+) rho(x)^Gamma >= 0``.  One-way post-processing needs the
data to rule out every compatible state with a symmetric extension to two
copies of A (reverse reconciliation) or of B (direct reconciliation).

Each check minimises a uniform shift ``t`` of the relevant LMI.  ``t* > 0``
means no such state exists (``PreconditionHolds``), ``t* < 0`` means one does
(``NoKey``).  The dual optimum is turned into a witness operator whose
expectation on the observed data equals ``-t*``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from .channel import ChannelParams, CorrelationData, apply_channel, correlations
from .operators import (
    OperatorBasis,
    assemble,
    coeffs_to_json,
    expand,
    kron,
    local_basis,
    partial_trace,
    partial_transpose,
    product_basis,
    swap_operator,
)
from .protocols import ProtocolSpec
from .sdp import (
    EPS_FEAS,
    Decision,
    FeasibilityVerdict,
    SdpResult,
    check_feasibility,
    hermitian_dual,
    hermitian_problem,
)

__all__ = [
    "Mode",
    "Outcome",
    "InconsistentDataError",
    "EquivalenceClass",
    "ExtensionLayout",
    "Witness",
    "VerdictReport",
    "build_equivalence_class",
    "two_way_check",
    "build_extension_layout",
    "lift_map",
    "adjoint_lift",
    "one_way_check",
    "extract_witness_two_way",
    "extract_witness_one_way",
    "witness_value",
    "check",
    "check_protocol",
]

WITNESS_TOL = 1e-8


class Mode(str, enum.Enum):
    TWO_WAY = "two-way"
    RR = "rr"
    DR = "dr"


class Outcome(str, enum.Enum):
    PRECONDITION_HOLDS = "PreconditionHolds"
    NO_KEY = "NoKey"
    MARGINAL = "Marginal"


_OUTCOME = {
    Decision.INFEASIBLE: Outcome.PRECONDITION_HOLDS,
    Decision.FEASIBLE: Outcome.NO_KEY,
    Decision.MARGINAL: Outcome.MARGINAL,
}


class InconsistentDataError(ValueError):
    """No operator reproduces the observed expectation values."""


@dataclass(frozen=True)
class EquivalenceClass:
    """Affine set ``rho_fix + span(free_dirs)`` of unit-trace operators matching the data.

    ``free_dirs`` are Hilbert-Schmidt orthonormal and orthogonal to every
    measured operator; ``rho_fix`` is the minimum-norm member.
    """

    rho_fix: np.ndarray
    free_dirs: np.ndarray
    determined_dim: int
    residual: float
    basis: OperatorBasis = field(repr=False)
    data: CorrelationData = field(repr=False)
    fixed_coeffs: np.ndarray = field(repr=False, default=None)

    @property
    def dims(self) -> tuple[int, int]:
        return self.data.dims

    @property
    def free_dim(self) -> int:
        return len(self.free_dirs)

    def state(self, x) -> np.ndarray:
        return self.rho_fix + np.tensordot(np.asarray(x, dtype=float), self.free_dirs, axes=1)


def _data_basis(dims) -> OperatorBasis:
    return product_basis(*(local_basis(d) for d in dims))


def build_equivalence_class(
    data: CorrelationData, sv_tol: float = 1e-10, max_residual: float = 1e-8
) -> EquivalenceClass:
    """Split coefficient space into the part fixed by the data and the free part.

    Rows of the constraint matrix are ``expand(M_r) / D`` (so that the product
    with the coefficient vector is ``Tr(M_r rho)``), normalised to unit length,
    plus the trace row.  A singular value decomposition gives the row space
    (determined directions) and the null space (free directions).
    """
    basis = _data_basis(data.dims)
    D = basis.dim
    rows = [expand(op, basis) / D for op in data.operators]
    rows.append(expand(np.eye(D), basis) / D)
    K = np.array(rows)
    v = np.append(np.asarray(data.values, dtype=float), 1.0)
    norms = np.linalg.norm(K, axis=1)
    keep = norms > 0
    K, v = K[keep] / norms[keep, None], v[keep] / norms[keep]
    U, s, Vt = np.linalg.svd(K)
    rank = int(np.sum(s > sv_tol * max(1.0, s[0])))
    x_fix = Vt[:rank].T @ ((U[:, :rank].T @ v) / s[:rank])
    residual = float(np.max(np.abs(K @ x_fix - v)))
    if residual >= max_residual:
        raise InconsistentDataError(f"observed values are inconsistent (residual {residual:.3e})")
    free = Vt[rank:] * np.sqrt(D)
    free_dirs = np.array([assemble(n, basis) for n in free]).reshape(-1, D, D)
    return EquivalenceClass(assemble(x_fix, basis), free_dirs, rank, residual, basis, data, x_fix)


@dataclass(frozen=True)
class ExtensionLayout:
    """Symmetric extension of rho_AB to a second copy of A (RR) or of B (DR).

    The extension lives on ``extension_dims`` (original A, B, then the copy).
    ``sym_basis[J]`` are swap-invariant products of local basis elements,
    scaled so that ``rho_ext = (1/norm) sum_J f_J sym_basis[J]``;
    ``coupling`` lists ``(J, kl)`` pairs with ``f_J = x_kl`` enforcing
    ``Tr_copy(rho_ext) = rho_AB``.
    """

    mode: Mode
    copied_system: str
    dims: tuple[int, int]
    extension_dims: tuple[int, int, int]
    sym_basis: np.ndarray = field(repr=False)
    sym_labels: tuple[str, ...] = field(repr=False)
    coupling: tuple[tuple[int, int], ...] = field(repr=False)
    swap: np.ndarray = field(repr=False)

    @property
    def copy_dim(self) -> int:
        return self.extension_dims[2]

    @property
    def norm(self) -> int:
        return int(np.prod(self.extension_dims))

    @property
    def size(self) -> int:
        return self.norm

    @property
    def free_indices(self) -> list[int]:
        coupled = {j for j, _ in self.coupling}
        return [j for j in range(len(self.sym_basis)) if j not in coupled]


def build_extension_layout(mode: Mode | str, dims: tuple[int, int] = (2, 3)) -> ExtensionLayout:
    mode = Mode(mode)
    if mode is Mode.TWO_WAY:
        raise ValueError("extension layouts exist only for the one-way modes")
    da, db = dims
    ba, bb = local_basis(da), local_basis(db)
    elements, labels, coupling = [], [], []
    if mode is Mode.RR:
        ext = (da, db, da)
        for k in range(da * da):
            for l in range(db * db):
                for m in range(k + 1):
                    term = kron(ba[k], bb[l], ba[m])
                    if k != m:
                        term = term + kron(ba[m], bb[l], ba[k])
                    if m == 0:
                        coupling.append((len(elements), k * db * db + l))
                    elements.append(term)
                    labels.append(f"{ba.labels[k]},{bb.labels[l]},{ba.labels[m]}")
        swap = swap_operator(ext, 0, 2)
        copied = "A"
    else:
        ext = (da, db, db)
        for k in range(da * da):
            for l in range(db * db):
                for m in range(l + 1):
                    term = kron(ba[k], bb[l], bb[m])
                    if l != m:
                        term = term + kron(ba[k], bb[m], bb[l])
                    if m == 0:
                        coupling.append((len(elements), k * db * db + l))
                    elements.append(term)
                    labels.append(f"{ba.labels[k]},{bb.labels[l]},{bb.labels[m]}")
        swap = swap_operator(ext, 1, 2)
        copied = "B"
    return ExtensionLayout(mode, copied, (da, db), ext, np.array(elements), tuple(labels),
                           tuple(coupling), swap)


def _untouched_part(op, layout: ExtensionLayout) -> np.ndarray:
    """``1 (x) Tr_A(op) (x) 1`` for RR and ``Tr_B(op) (x) 1 (x) 1`` for DR."""
    da, db = layout.dims
    if layout.mode is Mode.RR:
        return kron(np.eye(da), partial_trace(op, (da, db), 0), np.eye(da))
    return kron(partial_trace(op, (da, db), 1), np.eye(db), np.eye(db))


def lift_map(op, layout: ExtensionLayout) -> np.ndarray:
    """Symmetrised lift of an operator on A (x) B to the extension space.

    ``(1/d)[op (x) 1 + P (op (x) 1) P - (1/d) R(op)]`` with ``d`` the copied
    dimension and ``R`` placing the reduced state of the non-copied part back
    next to identities.  Maps ``1/(d_A d_B)`` to the normalised identity and
    satisfies ``Tr_copy(lift_map(op)) = op``.
    """
    op = np.asarray(op, dtype=complex)
    d = layout.copy_dim
    n = layout.dims[0] * layout.dims[1]
    if op.shape != (n, n):
        raise ValueError(f"operator shape {op.shape} does not match dims {layout.dims}")
    P = layout.swap
    ext = np.kron(op, np.eye(d))
    return (ext + P @ ext @ P - _untouched_part(op, layout) / d) / d


def adjoint_lift(Z, layout: ExtensionLayout) -> np.ndarray:
    """Hilbert-Schmidt adjoint of :func:`lift_map`."""
    Z = np.asarray(Z, dtype=complex)
    d = layout.copy_dim
    if Z.shape != (layout.size, layout.size):
        raise ValueError(f"operator shape {Z.shape} does not match extension dims")
    P = layout.swap
    ext = layout.extension_dims
    da, db = layout.dims
    if layout.mode is Mode.RR:
        reduced = kron(np.eye(da), partial_trace(Z, ext, [0, 2]))
    else:
        reduced = kron(partial_trace(Z, ext, [1, 2]), np.eye(db))
    return (partial_trace(Z, ext, 2) + partial_trace(P @ Z @ P, ext, 2) - reduced / d) / d


@dataclass(frozen=True)
class Witness:
    kind: str
    operator: np.ndarray
    value: float
    t_star: float
    certificate: dict = field(repr=False)
    valid: bool = True
    trace: float = 1.0
    max_free_overlap: float = 0.0
    certificate_min_eigenvalues: dict = field(default_factory=dict)
    dims: tuple[int, int] = (2, 3)

    def coefficients(self) -> np.ndarray:
        return expand(self.operator, _data_basis(self.dims))

    def to_dict(self) -> dict:
        basis = _data_basis(self.dims)
        da, db = self.dims
        return {
            "kind": self.kind,
            "dims": [da, db],
            "normalization": f"W = 1/({da}*{db}) * sum_kl w_kl sigma_k (x) sigma_l, "
                             "w_kl = Tr(W sigma_k (x) sigma_l)",
            "labels_A": list(basis.factors[0].labels),
            "labels_B": list(basis.factors[1].labels),
            "coefficients": coeffs_to_json(self.coefficients(), basis),
            "value": self.value,
            "t_star": self.t_star,
            "trace": self.trace,
            "valid": self.valid,
            "max_free_overlap": self.max_free_overlap,
            "certificate_min_eigenvalues": self.certificate_min_eigenvalues,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


@dataclass(frozen=True)
class VerdictReport:
    mode: Mode
    decision: Outcome
    t_star: float
    witness: Witness
    solver: dict
    face_reduced: bool = False
    reduced_t_star: float | None = None
    result: SdpResult | None = field(default=None, repr=False, compare=False)

    @property
    def exit_code(self) -> int:
        return {Outcome.PRECONDITION_HOLDS: 0, Outcome.NO_KEY: 2, Outcome.MARGINAL: 3}[self.decision]

    def summary(self) -> dict:
        return {
            "mode": self.mode.value,
            "decision": self.decision.value,
            "t_star": self.t_star,
            "witness_value": self.witness.value,
            "witness_valid": self.witness.valid,
            "face_reduced": self.face_reduced,
            "reduced_t_star": self.reduced_t_star,
            "solver": self.solver,
        }


def _solver_summary(result: SdpResult) -> dict:
    return {
        "status": result.status.value,
        "iterations": result.iterations,
        "gap": result.gap,
        "primal_residual": result.primal_residual,
        "dual_residual": result.dual_residual,
    }


def _min_eig(op) -> float:
    op = np.asarray(op)
    return float(np.linalg.eigvalsh((op + op.conj().T) / 2)[0])


def _free_overlap(W, ec: EquivalenceClass) -> float:
    if not ec.free_dim:
        return 0.0
    return float(np.max(np.abs(np.einsum("kij,ji->k", ec.free_dirs, W))))


def extract_witness_two_way(result: SdpResult, ec: EquivalenceClass) -> Witness:
    """Decomposable witness ``W = Z1 + Z2^Gamma`` from the block-diagonal dual."""
    D = ec.basis.dim
    Z = hermitian_dual(result.Z)
    Z1, Z2 = Z[:D, :D], Z[D:, D:]
    W = Z1 + partial_transpose(Z2, ec.dims, 1)
    W = (W + W.conj().T) / 2
    t_star = float(result.x[-1])
    value = float(np.real(np.trace(W @ ec.rho_fix)))
    trace = float(np.real(np.trace(W)))
    overlap = _free_overlap(W, ec)
    eigs = {"Z1": _min_eig(Z1), "Z2": _min_eig(Z2)}
    valid = (abs(trace - 1) < WITNESS_TOL and abs(value + t_star) < 1e-6
             and overlap < WITNESS_TOL and min(eigs.values()) > -WITNESS_TOL)
    return Witness("Decomposable-EW", W, value, t_star, {"Z1": Z1, "Z2": Z2}, valid, trace,
                   overlap, eigs, ec.dims)


def extract_witness_one_way(result: SdpResult, layout: ExtensionLayout,
                            ec: EquivalenceClass) -> Witness:
    """Witness ``W* = lift_map^dagger(Z)`` from the swap-symmetrised dual."""
    P = layout.swap
    Z = hermitian_dual(result.Z)
    Z = (Z + P @ Z @ P) / 2
    W = adjoint_lift(Z, layout)
    W = (W + W.conj().T) / 2
    lifted = np.kron(W, np.eye(layout.copy_dim))
    lmi = _min_eig(lifted + P @ lifted @ P)
    t_star = float(result.x[-1])
    value = float(np.real(np.trace(W @ ec.rho_fix)))
    trace = float(np.real(np.trace(W)))
    overlap = _free_overlap(W, ec)
    eigs = {"Z": _min_eig(Z), "lmi": lmi}
    valid = (abs(trace - 1) < WITNESS_TOL and abs(value + t_star) < 1e-6
             and overlap < WITNESS_TOL and lmi > -WITNESS_TOL)
    kind = "SymExt-RR" if layout.mode is Mode.RR else "SymExt-DR"
    return Witness(kind, W, value, t_star, {"Z": Z}, valid, trace, overlap, eigs, ec.dims)


def witness_value(w: Witness, data: CorrelationData, tol: float = 1e-6) -> float:
    """Expectation of ``w`` computed from the measured values alone.

    ``W`` is written as a combination of the measured operators (and the
    identity); the same combination of measured values is returned.
    """
    basis = _data_basis(data.dims)
    rows = np.array([expand(op, basis) for op in data.operators] + [expand(np.eye(basis.dim), basis)])
    vals = np.append(np.asarray(data.values, dtype=float), 1.0)
    target = expand(w.operator, basis)
    coef, *_ = np.linalg.lstsq(rows.T, target, rcond=None)
    miss = float(np.linalg.norm(rows.T @ coef - target))
    if miss > tol * max(1.0, float(np.linalg.norm(target))):
        raise ValueError(f"witness is not determined by the measured operators (residual {miss:.2e})")
    return float(coef @ vals)


# -- facial reduction for data with zero-probability outcomes ---------------

def _zero_outcomes(data: CorrelationData, tol: float = 1e-12) -> list[np.ndarray]:
    out = []
    for op, val in zip(data.operators, data.values):
        if abs(val) <= tol and _min_eig(op) > -1e-12 and np.max(np.abs(op)) > 0:
            out.append(op)
    return out


def _range_basis(ops, n: int, tol: float = 1e-10) -> np.ndarray:
    vecs = []
    for op in ops:
        w, v = np.linalg.eigh((op + op.conj().T) / 2)
        vecs.extend(v[:, w > tol * max(1.0, w[-1])].T)
    if not vecs:
        return np.zeros((n, 0), dtype=complex)
    U, s, _ = np.linalg.svd(np.array(vecs).T, full_matrices=True)
    r = int(np.sum(s > 1e-10))
    return U[:, :r]


def _complement(K: np.ndarray, n: int) -> np.ndarray:
    if K.shape[1] == 0:
        return np.eye(n, dtype=complex)
    U, _, _ = np.linalg.svd(K, full_matrices=True)
    return U[:, K.shape[1]:]


def _reduced_verdict(F0_blocks, F_blocks, kernels, scale, eps) -> FeasibilityVerdict | None:
    """Feasibility on the face forced by the kernels.

    Any PSD solution must vanish on ``kernels[b]`` for block ``b``, which is a
    set of linear equalities on the variables; after eliminating them the LMI
    is restricted to the complement.  Returns ``None`` when the equalities
    already have no solution (the original LMI is then infeasible).
    """
    m = len(F_blocks)
    rows, rhs = [], []
    for b, K in enumerate(kernels):
        if K.shape[1] == 0:
            continue
        cols = [F_blocks[i][b] @ K for i in range(m)]
        a0 = F0_blocks[b] @ K
        for part in (np.real, np.imag):
            rows.append(np.array([part(c).ravel() for c in cols]).T.reshape(-1, m))
            rhs.append(-part(a0).ravel())
    L = np.vstack(rows) if rows else np.zeros((0, m))
    r = np.concatenate(rhs) if rhs else np.zeros(0)
    if m:
        x_p, *_ = np.linalg.lstsq(L, r, rcond=None)
        _, s, Vt = np.linalg.svd(L, full_matrices=True)
        rank = int(np.sum(s > 1e-10 * max(1.0, s[0] if len(s) else 1.0)))
        N = Vt[rank:].T
    else:
        x_p, N = np.zeros(0), np.zeros((0, 0))
    if np.max(np.abs(L @ x_p - r), initial=0.0) > 1e-9:
        return None
    comps = [_complement(K, F.shape[0]) for K, F in zip(kernels, F0_blocks)]
    blocks0 = []
    for b, V in enumerate(comps):
        Fb = F0_blocks[b] + sum(x_p[i] * F_blocks[i][b] for i in range(m))
        blocks0.append(V.conj().T @ Fb @ V)
    blocks = []
    for j in range(N.shape[1]):
        blocks.append(block_diag(*[
            V.conj().T @ sum(N[i, j] * F_blocks[i][b] for i in range(m)) @ V
            for b, V in enumerate(comps)
        ]))
    problem = hermitian_problem(np.zeros(len(blocks)), block_diag(*blocks0), blocks)
    return check_feasibility(problem, scale, eps)


def _report(mode, verdict, witness, refine) -> VerdictReport:
    decision = _OUTCOME[verdict.decision]
    reduced, reduced_t = False, None
    if decision is Outcome.MARGINAL and refine is not None:
        face = refine()
        if face is not False:
            reduced = True
            if face is None:
                decision = Outcome.PRECONDITION_HOLDS
            else:
                reduced_t = face.t_star
                decision = _OUTCOME[face.decision]
    return VerdictReport(mode, decision, verdict.t_star, witness, _solver_summary(verdict.result),
                         reduced, reduced_t, verdict.result)


def two_way_check(ec: EquivalenceClass, eps: float = EPS_FEAS, verbose: bool = False,
                  refine_marginal: bool = True) -> VerdictReport:
    """PPT feasibility of the equivalence class (exact separability on 2 x 3)."""
    dims = ec.dims
    F0_blocks = [ec.rho_fix, partial_transpose(ec.rho_fix, dims, 1)]
    F_blocks = [[G, partial_transpose(G, dims, 1)] for G in ec.free_dirs]
    problem = hermitian_problem(np.zeros(ec.free_dim), block_diag(*F0_blocks),
                                [block_diag(*fb) for fb in F_blocks],
                                meta=tuple(f"x{i}" for i in range(ec.free_dim)))
    verdict = check_feasibility(problem, 1.0, eps, verbose=verbose)
    witness = extract_witness_two_way(verdict.result, ec)

    def refine():
        zero = _zero_outcomes(ec.data)
        if not zero:
            return False
        D = ec.basis.dim
        k1 = _range_basis(zero, D)
        pts = [partial_transpose(op, dims, 1) for op in zero]
        k2 = _range_basis([q for q in pts if _min_eig(q) > -1e-12], D)
        return _reduced_verdict(F0_blocks, F_blocks, [k1, k2], 1.0, eps)

    return _report(Mode.TWO_WAY, verdict, witness, refine if refine_marginal else None)


def _extension_lmi(ec: EquivalenceClass, layout: ExtensionLayout):
    F0 = lift_map(ec.rho_fix, layout)
    Fx = [lift_map(G, layout) for G in ec.free_dirs]
    Fy = [layout.sym_basis[j] / layout.norm for j in layout.free_indices]
    return F0, Fx + Fy


def one_way_check(ec: EquivalenceClass, mode: Mode | str, layout: ExtensionLayout | None = None,
                  eps: float = EPS_FEAS, verbose: bool = False,
                  refine_marginal: bool = True) -> VerdictReport:
    """Symmetric-extension feasibility for RR (copy of A) or DR (copy of B)."""
    mode = Mode(mode)
    layout = layout or build_extension_layout(mode, ec.dims)
    if layout.mode is not mode:
        raise ValueError("layout mode does not match requested mode")
    F0, Fs = _extension_lmi(ec, layout)
    problem = hermitian_problem(np.zeros(len(Fs)), F0, Fs)
    scale = 1.0 / layout.copy_dim
    verdict = check_feasibility(problem, scale, eps, verbose=verbose)
    witness = extract_witness_one_way(verdict.result, layout, ec)

    def refine():
        zero = _zero_outcomes(ec.data)
        if not zero:
            return False
        P = layout.swap
        lifted = [np.kron(op, np.eye(layout.copy_dim)) for op in zero]
        K = _range_basis(lifted + [P @ q @ P for q in lifted], layout.size)
        return _reduced_verdict([F0], [[f] for f in Fs], [K], scale, eps)

    return _report(mode, verdict, witness, refine if refine_marginal else None)


_LAYOUTS: dict[tuple[Mode, tuple[int, int]], ExtensionLayout] = {}


def _cached_layout(mode: Mode, dims: tuple[int, int]) -> ExtensionLayout:
    key = (mode, tuple(dims))
    if key not in _LAYOUTS:
        _LAYOUTS[key] = build_extension_layout(mode, dims)
    return _LAYOUTS[key]


def check(ec: EquivalenceClass, mode: Mode | str, **kwargs) -> VerdictReport:
    mode = Mode(mode)
    if mode is Mode.TWO_WAY:
        return two_way_check(ec, **kwargs)
    return one_way_check(ec, mode, _cached_layout(mode, ec.dims), **kwargs)


def check_protocol(spec: ProtocolSpec, params: ChannelParams, mode: Mode | str, **kwargs) -> VerdictReport:
    """Channel -> observed data -> equivalence class -> precondition check."""
    data = correlations(spec, apply_channel(spec, params))
    return check(build_equivalence_class(data), mode, **kwargs)
