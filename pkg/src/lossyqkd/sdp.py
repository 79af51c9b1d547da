"""Standard-form semidefinite programs and a primal-dual interior-point solver.

Primal::

    minimise    c^T x
    subject to  F(x) = F0 + sum_i x_i F_i  >= 0

Dual::

    maximise    -Tr(F0 Z)
    subject to  Z >= 0,  Tr(F_i Z) = c_i

The solver is an infeasible-start path-following method using the HKM search
direction with Mehrotra's predictor-corrector.  All data are real symmetric;
Hermitian problems go through :func:`hermitian_problem`, which applies
:func:`lossyqkd.operators.real_embed` to every matrix.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import linalg as sla

from .operators import real_embed, real_unembed

log = logging.getLogger(__name__)

EPS_FEAS = 1e-7

__all__ = [
    "Status",
    "Decision",
    "SdpProblem",
    "SdpResult",
    "FeasibilityVerdict",
    "SolverError",
    "hermitian_problem",
    "hermitian_dual",
    "feasibility_transform",
    "solve",
    "check_feasibility",
]


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    MAX_ITERATIONS = "MaxIterations"
    NUMERICAL_FAILURE = "NumericalFailure"


class Decision(str, enum.Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    MARGINAL = "Marginal"


class SolverError(RuntimeError):
    def __init__(self, result: "SdpResult"):
        super().__init__(f"SDP solver stopped with status {result.status.value} "
                         f"after {result.iterations} iterations (gap {result.gap:.2e})")
        self.result = result


@dataclass(frozen=True)
class SdpProblem:
    """``min c^T x`` subject to ``F0 + sum_i x_i Fi[i] >= 0``.

    ``Fi`` is stacked with shape ``(m, n, n)``.  ``x0`` optionally supplies a
    starting point; ``identity_index`` marks the variable introduced by
    :func:`feasibility_transform`.
    """

    c: np.ndarray
    F0: np.ndarray
    Fi: np.ndarray
    meta: tuple[str, ...] = ()
    x0: np.ndarray | None = None
    identity_index: int | None = None
    identity_scale: float = 1.0

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        F0 = np.asarray(self.F0, dtype=float)
        n = F0.shape[0]
        Fi = np.asarray(self.Fi, dtype=float).reshape(-1, n, n)
        if F0.shape != (n, n):
            raise ValueError("F0 must be square")
        if len(c) != len(Fi):
            raise ValueError(f"len(c)={len(c)} does not match {len(Fi)} coefficient matrices")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "F0", F0)
        object.__setattr__(self, "Fi", Fi)

    @property
    def size(self) -> int:
        return self.F0.shape[0]

    @property
    def nvars(self) -> int:
        return len(self.c)

    def F(self, x) -> np.ndarray:
        return self.F0 + np.tensordot(np.asarray(x, dtype=float), self.Fi, axes=1)


@dataclass(frozen=True)
class SdpResult:
    status: Status
    x: np.ndarray
    Z: np.ndarray
    S: np.ndarray
    primal_value: float
    dual_value: float
    gap: float
    iterations: int
    primal_residual: float
    dual_residual: float
    history: tuple[dict, ...] = field(default=(), repr=False)

    @property
    def complementarity(self) -> float:
        return float(np.sum(self.Z * self.S))

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "x": self.x.tolist(),
            "Z": self.Z.tolist(),
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "gap": self.gap,
            "iterations": self.iterations,
            "primal_residual": self.primal_residual,
            "dual_residual": self.dual_residual,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


@dataclass(frozen=True)
class FeasibilityVerdict:
    t_star: float
    x: np.ndarray
    Z: np.ndarray
    decision: Decision
    result: SdpResult


def hermitian_problem(c, F0, Fi, meta: Sequence[str] = ()) -> SdpProblem:
    """Real-embedded SDP for Hermitian ``F0`` and ``Fi``."""
    F0e = real_embed(F0)
    Fie = np.array([real_embed(f) for f in Fi]).reshape(-1, *F0e.shape)
    return SdpProblem(np.asarray(c, dtype=float), F0e, Fie, tuple(meta))


def hermitian_dual(Z) -> np.ndarray:
    """Hermitian certificate for a dual matrix of an embedded problem.

    Scaled so ``Tr(Zh) = Tr(Z)`` and ``Tr(Zh H) = Tr(Z real_embed(H))``.
    """
    return 2.0 * real_unembed(Z)


def feasibility_transform(problem: SdpProblem, scale: float = 1.0) -> SdpProblem:
    """Append ``t * scale * I`` to the LMI and minimise ``t``.

    The result is strictly feasible for ``t > |lambda_min(F0)| / scale``; the
    starting point is ``x = 0`` with ``t = (|lambda_min(F0)| + 1) / scale``.
    """
    if np.any(problem.c != 0):
        raise ValueError("feasibility_transform expects a pure feasibility problem (c = 0)")
    if scale <= 0:
        raise ValueError("identity scale must be positive")
    n, m = problem.size, problem.nvars
    Fi = np.concatenate([problem.Fi, scale * np.eye(n)[None]], axis=0)
    c = np.zeros(m + 1)
    c[-1] = 1.0
    lam_min = float(np.linalg.eigvalsh(problem.F0)[0]) if n else 0.0
    x0 = np.zeros(m + 1)
    x0[-1] = (abs(lam_min) + 1.0) / scale
    return SdpProblem(c, problem.F0, Fi, problem.meta + ("t",), x0, m, scale)


def _max_step(X: np.ndarray, dX: np.ndarray) -> float:
    """Largest ``a`` with ``X + a dX >= 0`` for ``X > 0``."""
    L = np.linalg.cholesky(X)
    tmp = sla.solve_triangular(L, dX, lower=True)
    tmp = sla.solve_triangular(L, tmp.T, lower=True)
    lam = np.linalg.eigvalsh((tmp + tmp.T) / 2)[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _schur_factor(M: np.ndarray, retries: int = 3):
    reg = 1e-12 * max(1.0, float(np.max(np.abs(np.diag(M))))) if M.size else 1e-12
    for attempt in range(retries + 1):
        try:
            return sla.cho_factor(M + attempt * reg * np.eye(len(M)), lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            continue
    return None


def solve(
    problem: SdpProblem,
    max_iter: int = 200,
    gap_tol: float = 1e-9,
    feas_tol: float = 1e-10,
    accept_gap: float = 1e-8,
    accept_feas: float = 1e-9,
    step_fraction: float = 0.98,
    verbose: bool = False,
) -> SdpResult:
    """Solve ``problem`` and return primal ``x``, slack ``S = F(x)`` and dual ``Z``.

    Termination requires ``|c^T x + Tr(F0 Z)| < gap_tol * max(1, |c^T x|)``
    together with primal and dual residuals below ``feas_tol``.  If progress
    stalls in floating point before that, the iterate is still reported as
    optimal when it meets the looser ``accept_gap`` / ``accept_feas`` levels.
    """
    c, F0, A = problem.c, problem.F0, problem.Fi
    m, n = problem.nvars, problem.size
    Avec = A.reshape(m, n * n)

    # Gram matrix of the constraint matrices, used to keep dual steps on Tr(F_i Z) = c_i
    gram = Avec @ Avec.T
    try:
        gram_fac = sla.cho_factor(gram) if m else None
    except np.linalg.LinAlgError:
        gram_fac = None

    x = np.zeros(m) if problem.x0 is None else np.array(problem.x0, dtype=float)
    S = problem.F(x)
    lam = np.linalg.eigvalsh(S)[0]
    if lam <= 0:
        S = S + (abs(lam) + 1.0) * np.eye(n)
    tr = np.trace(A, axis1=1, axis2=2)
    denom = float(tr @ tr)
    tau = float(c @ tr) / denom if denom > 0 else 0.0
    X = (tau if tau > 0 else 1.0 / n) * np.eye(n)

    # verbose forces the trace; otherwise it follows the logger's DEBUG level
    trace = verbose or log.isEnabledFor(logging.DEBUG)
    level = logging.INFO if verbose else logging.DEBUG
    history = []
    status = Status.MAX_ITERATIONS
    it = 0
    stalls = 0
    best = None
    for it in range(max_iter + 1):
        Rp = problem.F(x) - S
        rd = c - Avec @ X.ravel()
        mu = float(np.sum(X * S)) / n
        pval = float(c @ x)
        dval = -float(np.sum(F0 * X))
        gap = pval - dval
        pres = float(np.linalg.norm(Rp))
        dres = float(np.max(np.abs(rd), initial=0.0))
        history.append({"iter": it, "mu": mu, "primal_residual": pres,
                        "dual_residual": dres, "gap": gap,
                        "weak_duality": pval + float(np.sum(X * F0)) - float(np.sum(X * problem.F(x)))})
        if trace:
            log.log(level, "iter %3d  mu %.3e  pres %.3e  dres %.3e  gap %.3e", it, mu, pres, dres, gap)
        scale = max(1.0, abs(pval))
        if abs(gap) < gap_tol * scale and pres < feas_tol and dres < feas_tol:
            status = Status.OPTIMAL
            break
        acceptable = abs(gap) < accept_gap * scale and pres < accept_feas and dres < accept_feas
        if acceptable and (best is None or abs(gap) < best[0]):
            best = (abs(gap), x.copy(), S.copy(), X.copy())
        if it == max_iter:
            break

        try:
            Ls = np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            status = Status.NUMERICAL_FAILURE
            break
        Sinv = sla.cho_solve((Ls, True), np.eye(n))
        Sinv = (Sinv + Sinv.T) / 2
        XA = X @ A                    # (m, n, n)
        G = XA @ Sinv                 # X F_j S^-1
        M = Avec @ G.transpose(0, 2, 1).reshape(m, n * n).T
        M = (M + M.T) / 2
        fac = _schur_factor(M)
        if fac is None:
            status = Status.NUMERICAL_FAILURE
            break
        XRpSinv = X @ Rp @ Sinv
        base = Avec @ XRpSinv.T.ravel()

        def direction(Rc):
            RcSinv = Rc @ Sinv
            h = Avec @ RcSinv.T.ravel() - base - rd
            dx = sla.cho_solve(fac, h, check_finite=False)
            dS = Rp + np.tensordot(dx, A, axes=1)
            dX = RcSinv - X @ dS @ Sinv
            dX = (dX + dX.T) / 2
            if gram_fac is not None:
                # roundoff through S^-1 breaks Tr(F_i dX) = rd_i once mu is tiny
                miss = rd - Avec @ dX.ravel()
                dX = dX + np.tensordot(sla.cho_solve(gram_fac, miss), A, axes=1)
            return dx, dS, dX

        XS = X @ S
        dx_a, dS_a, dX_a = direction(-XS)
        try:
            ap = min(1.0, _max_step(S, dS_a))
            ad = min(1.0, _max_step(X, dX_a))
        except np.linalg.LinAlgError:
            status = Status.NUMERICAL_FAILURE
            break
        mu_aff = float(np.sum((X + ad * dX_a) * (S + ap * dS_a))) / n
        sigma = float(np.clip((mu_aff / mu) ** 3 if mu > 0 else 0.0, 0.05, 0.5))
        Rc = sigma * mu * np.eye(n) - XS - dX_a @ dS_a
        dx, dS, dX = direction(Rc)
        try:
            ap = min(1.0, step_fraction * _max_step(S, dS))
            ad = min(1.0, step_fraction * _max_step(X, dX))
        except np.linalg.LinAlgError:
            status = Status.NUMERICAL_FAILURE
            break
        stalls = stalls + 1 if max(ap, ad) < 1e-10 or mu < 1e-14 else 0
        if stalls >= 3:
            status = Status.NUMERICAL_FAILURE
            break
        x = x + ap * dx
        S = S + ap * dS
        S = (S + S.T) / 2
        X = X + ad * dX
        X = (X + X.T) / 2

    if status is not Status.OPTIMAL and best is not None:
        _, x, S, X = best
        status = Status.OPTIMAL
    pval = float(c @ x)
    dval = -float(np.sum(F0 * X))
    return SdpResult(
        status=status,
        x=x,
        Z=X,
        S=problem.F(x),
        primal_value=pval,
        dual_value=dval,
        gap=abs(pval - dval),
        iterations=it,
        primal_residual=float(np.linalg.norm(problem.F(x) - S)),
        dual_residual=float(np.max(np.abs(c - Avec @ X.ravel()), initial=0.0)),
        history=tuple(history),
    )


def check_feasibility(
    problem: SdpProblem,
    scale_identity_by: float = 1.0,
    eps: float = EPS_FEAS,
    verbose: bool = False,
    **solver_options,
) -> FeasibilityVerdict:
    """Decide whether ``F(x) >= 0`` is satisfiable via ``min t``.

    ``t* > eps`` certifies infeasibility, ``t* < -eps`` feasibility; anything
    in between is reported as :attr:`Decision.MARGINAL`.  The dual ``Z`` has
    ``Tr(Z) = 1 / scale_identity_by``.
    """
    transformed = feasibility_transform(problem, scale_identity_by)
    result = solve(transformed, verbose=verbose, **solver_options)
    if result.status is not Status.OPTIMAL:
        raise SolverError(result)
    t_star = float(result.x[-1])
    if t_star > eps:
        decision = Decision.INFEASIBLE
    elif t_star < -eps:
        decision = Decision.FEASIBLE
    else:
        decision = Decision.MARGINAL
    return FeasibilityVerdict(t_star, result.x[:-1], result.Z, decision, result)
