"""Dense primal-dual interior-point solver for small block SDPs.

Problems are stated over a real vector ``y``::

    minimize    c @ y
    subject to  S_k(y) = F_k0 + sum_i y_i F_ki  >= 0   (PSD, every block k)
                G @ y >= h
                A @ y == b

and the solver also returns the multipliers of the conic dual::

    maximize    -sum_k <F_k0, X_k> + h @ x + b @ mu
    subject to  sum_k F_k^*(X_k) + G.T @ x + A.T @ mu == c,   X_k >= 0, x >= 0

The iteration is an infeasible-start Mehrotra predictor-corrector using the
HKM search direction.  Linear inequalities are carried as a diagonal block of
1x1 cones.  Everything is deterministic: no random initialization.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

__all__ = [
    "Block",
    "SDPProblem",
    "SDPSolution",
    "SolverOptions",
    "ResidualReport",
    "solve",
    "verify",
    "realify",
    "problem_to_json",
    "problem_from_json",
]

log = logging.getLogger(__name__)


@dataclass
class Block:
    """Affine symmetric matrix map ``F0 + sum_i y_i F_i``.

    ``fs`` stores ``vec(F_i)`` (row-major) as column ``i`` of a sparse
    ``(k*k, n)`` matrix.
    """

    f0: np.ndarray
    fs: sp.csc_matrix

    def __post_init__(self) -> None:
        self.f0 = np.asarray(self.f0, dtype=float)
        self.fs = sp.csc_matrix(self.fs, dtype=float)
        k = self.f0.shape[0]
        if self.f0.shape != (k, k):
            raise ValueError("F0 must be square")
        if self.fs.shape[0] != k * k:
            raise ValueError(f"coefficient matrix must have {k * k} rows")

    @property
    def dim(self) -> int:
        return self.f0.shape[0]

    @classmethod
    def from_dense(cls, f0, fis) -> Block:
        f0 = np.asarray(f0, dtype=float)
        cols = [np.asarray(f, dtype=float).ravel() for f in fis]
        fs = sp.csc_matrix(np.column_stack(cols)) if cols else sp.csc_matrix((f0.size, 0))
        return cls(f0, fs)

    def evaluate(self, y: np.ndarray) -> np.ndarray:
        k = self.dim
        return self.f0 + (self.fs @ y).reshape(k, k)

    def adjoint(self, x: np.ndarray) -> np.ndarray:
        return self.fs.T @ x.ravel()


@dataclass
class SDPProblem:
    c: np.ndarray
    blocks: list[Block] = field(default_factory=list)
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    g_ineq: np.ndarray | None = None
    h_ineq: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        for k, blk in enumerate(self.blocks):
            if blk.fs.shape[1] != n:
                raise ValueError(f"block {k} has {blk.fs.shape[1]} coefficient matrices, expected {n}")
            if np.max(np.abs(blk.f0 - blk.f0.T), initial=0) > 1e-12:
                raise ValueError(f"block {k}: F0 not symmetric")
            d = blk.dim
            fs = blk.fs.tocoo()
            rows, cols = np.divmod(fs.row, d)
            transposed = sp.csc_matrix((fs.data, (cols * d + rows, fs.col)), shape=fs.shape)
            if abs(blk.fs - transposed).max() > 1e-12:
                raise ValueError(f"block {k}: coefficient matrices not symmetric")
        self.a_eq, self.b_eq = self._pair(self.a_eq, self.b_eq, n, "equality")
        self.g_ineq, self.h_ineq = self._pair(self.g_ineq, self.h_ineq, n, "inequality")
        if not self.blocks and self.g_ineq.shape[0] == 0 and self.a_eq.shape[0] == 0:
            raise ValueError("problem has no constraints")

    @staticmethod
    def _pair(mat, vec, n, what):
        if mat is None:
            return np.zeros((0, n)), np.zeros(0)
        mat = np.atleast_2d(np.asarray(mat, dtype=float))
        vec = np.asarray(vec, dtype=float).ravel()
        if mat.shape[1] != n or mat.shape[0] != vec.size:
            raise ValueError(f"{what} constraint dimensions inconsistent")
        return mat, vec

    @property
    def n(self) -> int:
        return self.c.size


@dataclass(frozen=True)
class SolverOptions:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iterations: int = 200
    step_fraction: float = 0.98
    # stop once the best combined residual has not dropped by 10% for this many iterations
    stall_iterations: int = 12

    def __post_init__(self) -> None:
        if self.gap_tol <= 0 or self.feas_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not 0 < self.step_fraction < 1:
            raise ValueError("step fraction must lie in (0, 1)")


@dataclass
class SDPSolution:
    y: np.ndarray
    x_blocks: list[np.ndarray]
    x_ineq: np.ndarray
    mu_eq: np.ndarray
    primal_objective: float
    dual_objective: float
    gap: float
    infeasibility: float
    status: str
    iterations: int
    history: list[dict] = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "near-optimal")


def _sym(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def _max_step(x: np.ndarray, dx: np.ndarray) -> float:
    """Largest ``a`` with ``x + a dx`` PSD (``x`` positive definite)."""
    try:
        L = np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        return 0.0
    Linv = sla.solve_triangular(L, np.eye(x.shape[0]), lower=True)
    lam = np.linalg.eigvalsh(_sym(Linv @ dx @ Linv.T))[0]
    return math.inf if lam >= 0 else -1.0 / lam


def _max_step_lp(x: np.ndarray, dx: np.ndarray) -> float:
    neg = dx < 0
    if not np.any(neg):
        return math.inf
    return float(np.min(-x[neg] / dx[neg]))


class _Workspace:
    """Iterates of one solve; nothing here outlives the call."""

    def __init__(self, p: SDPProblem):
        self.p = p
        self.nu = sum(b.dim for b in p.blocks) + p.g_ineq.shape[0]
        scale_f = max([1.0] + [float(np.abs(b.f0).max(initial=0)) for b in p.blocks]
                      + [float(np.abs(p.h_ineq).max(initial=0))])
        scale_c = 1.0 + float(np.abs(p.c).max(initial=0))
        xi = max(10.0, math.sqrt(self.nu), scale_c)
        eta = max(10.0, math.sqrt(self.nu), scale_f)
        self.y = np.zeros(p.n)
        self.S = [eta * np.eye(b.dim) for b in p.blocks]
        self.X = [xi * np.eye(b.dim) for b in p.blocks]
        m = p.g_ineq.shape[0]
        self.s = eta * np.ones(m)
        self.x = xi * np.ones(m)
        self.mu_eq = np.zeros(p.a_eq.shape[0])

    def residuals(self):
        p = self.p
        rp = [b.evaluate(self.y) - S for b, S in zip(p.blocks, self.S)]
        rp_lp = p.g_ineq @ self.y - p.h_ineq - self.s
        rd = p.c - p.g_ineq.T @ self.x - p.a_eq.T @ self.mu_eq
        for b, X in zip(p.blocks, self.X):
            rd = rd - b.adjoint(X)
        re = p.b_eq - p.a_eq @ self.y
        return rp, rp_lp, rd, re

    def complementarity(self) -> float:
        total = sum(float(np.sum(X * S)) for X, S in zip(self.X, self.S)) + float(self.x @ self.s)
        return total / max(self.nu, 1)


def _schur_block(blk: Block, X: np.ndarray, Sinv: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """``M[i, j] = tr(F_i X F_j S^-1)`` for one block.

    Works on the nonzeros of the ``F_i``: with ``F_i[p, q]`` and ``F_j[r, s]``
    the contribution is ``X[q, r] S^-1[s, p]``, so the cost scales with the
    square of the number of nonzeros rather than with ``n k^3``.
    """
    k = blk.dim
    n = blk.fs.shape[1]
    coo = blk.fs.tocoo()
    if coo.nnz == 0:
        return np.zeros((n, n))
    if float(coo.nnz) ** 2 > 4.0 * n * k**3:
        # dense coefficient matrices: form X F_i S^-1 for each i instead
        fi = blk.fs.T.toarray().reshape(n, k, k)
        G = np.matmul(np.matmul(X, fi), Sinv)
        return np.asarray((blk.fs.T @ G.reshape(n, k * k).T).T)
    p, q = np.divmod(coo.row, k)
    P = sp.csr_matrix((coo.data, (np.arange(coo.nnz), coo.col)), shape=(coo.nnz, n))
    Xr = X[:, p]  # X[., r] over all nonzeros, r plays the role of p here
    Sr = Sinv[:, q]  # S^-1[., s]
    M = np.zeros((n, n))
    for start in range(0, coo.nnz, chunk):
        sl = slice(start, min(start + chunk, coo.nnz))
        K = Xr[q[sl], :] * Sr[p[sl], :]
        M += P[sl].T @ (P.T @ K.T).T
    return M


def _factor(M: np.ndarray):
    diag = np.diag(M)
    shift = 0.0
    scale = max(float(diag.max(initial=0)), 1.0)
    for _ in range(8):
        try:
            return sla.cho_factor(M + shift * np.eye(M.shape[0]), lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            shift = scale * 1e-14 if shift == 0 else shift * 100
    raise np.linalg.LinAlgError("Schur complement is not positive definite")


def solve(p: SDPProblem, o: SolverOptions | None = None) -> SDPSolution:
    """Run the interior-point method; never raises on numerical trouble.

    Breakdown is reported through ``status`` (``numerical-failure``,
    ``iteration-limit`` or ``infeasible-detected``) together with the last
    iterate, so callers can still verify whatever bound it carries.
    """
    o = o or SolverOptions()
    w = _Workspace(p)
    n = p.n
    a_eq, g = p.a_eq, p.g_ineq
    status = "iteration-limit"
    history: list[dict] = []
    norm_c = 1.0 + float(np.linalg.norm(p.c))
    norm_b = 1.0 + float(np.linalg.norm(p.b_eq)) + float(np.linalg.norm(p.h_ineq)) + sum(
        float(np.linalg.norm(b.f0)) for b in p.blocks)
    best = None
    last_progress = 0
    progress_score = progress_mu = math.inf
    it = 0
    for it in range(o.max_iterations + 1):
        rp, rp_lp, rd, re = w.residuals()
        mu = w.complementarity()
        pobj = float(p.c @ w.y)
        dobj = (-sum(float(np.sum(b.f0 * X)) for b, X in zip(p.blocks, w.X))
                + float(p.h_ineq @ w.x) + float(p.b_eq @ w.mu_eq))
        pinf = (math.sqrt(sum(float(np.sum(r * r)) for r in rp) + float(rp_lp @ rp_lp) + float(re @ re))) / norm_b
        dinf = float(np.linalg.norm(rd)) / norm_c
        relgap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        history.append({"iter": it, "pobj": pobj, "dobj": dobj, "gap": relgap, "pinf": pinf, "dinf": dinf, "mu": mu})
        log.debug("it %3d pobj % .10e dobj % .10e gap %.2e pinf %.2e dinf %.2e", it, pobj, dobj, relgap, pinf, dinf)
        score = max(relgap, pinf, dinf)
        # relgap saturates near 1 while both objectives are large; until it
        # leaves that regime a falling complementarity also counts as progress
        if score < 0.9 * progress_score or (relgap > 0.5 and mu < 0.9 * progress_mu):
            last_progress = it
            progress_score, progress_mu = min(progress_score, score), min(progress_mu, mu)
        if best is None or score < best[0]:
            best = (score, w.y.copy(), [X.copy() for X in w.X], w.x.copy(), w.mu_eq.copy(), pobj, dobj, relgap,
                    max(pinf, dinf), it)
        if relgap <= o.gap_tol and pinf <= o.feas_tol and dinf <= o.feas_tol:
            status = "optimal"
            break
        if it == o.max_iterations:
            break
        if it - last_progress > o.stall_iterations:
            status = "numerical-failure"
            log.debug("no progress for %d iterations", o.stall_iterations)
            break
        big = max([float(np.abs(w.y).max(initial=0))] + [float(np.abs(X).max()) for X in w.X]
                  + [float(np.abs(w.x).max(initial=0))])
        if big > 1e12:
            status = "infeasible-detected"
            break
        try:
            Sinv = [np.linalg.inv(S) for S in w.S]
            Sinv = [_sym(si) for si in Sinv]
            M = np.zeros((n, n))
            for blk, X, si in zip(p.blocks, w.X, Sinv):
                M += _schur_block(blk, X, si)
            if g.shape[0]:
                M += g.T @ ((w.x / w.s)[:, None] * g)
            M = _sym(M)
            fac = _factor(M)
            if a_eq.shape[0]:
                MinvAT = sla.cho_solve(fac, a_eq.T, check_finite=False)
                schur_eq = _sym(a_eq @ MinvAT)
                fac_eq = sla.cho_factor(schur_eq + 1e-14 * np.eye(a_eq.shape[0]) * max(1.0, np.abs(schur_eq).max()),
                                        lower=True, check_finite=False)
            else:
                MinvAT = fac_eq = None
        except (np.linalg.LinAlgError, ValueError) as err:
            log.debug("factorization failed: %s", err)
            status = "numerical-failure"
            break

        def saddle_solve(rhs, re_):
            Minv_rhs = sla.cho_solve(fac, rhs, check_finite=False)
            if a_eq.shape[0]:
                dmu_ = sla.cho_solve(fac_eq, re_ - a_eq @ Minv_rhs, check_finite=False)
                return Minv_rhs + MinvAT @ dmu_, dmu_
            return Minv_rhs, np.zeros(0)

        def direction(rc_blocks, rc_lp):
            # rhs of  M dy - A^T dmu = F^*(Rc - X rp S^-1) - rd
            rhs = -rd.copy()
            for blk, X, si, rc, r in zip(p.blocks, w.X, Sinv, rc_blocks, rp):
                rhs += blk.adjoint(_sym(rc - X @ r @ si))
            if g.shape[0]:
                rhs += g.T @ (rc_lp - w.x * rp_lp / w.s)
            dy, dmu = saddle_solve(rhs, re)

            def complete(dy):
                dS = [blk.evaluate(dy) - blk.f0 + r for blk, r in zip(p.blocks, rp)]
                dX = [_sym(rc - X @ ds @ si) for rc, X, ds, si in zip(rc_blocks, w.X, dS, Sinv)]
                ds_lp = g @ dy + rp_lp
                dx_lp = rc_lp - w.x * ds_lp / w.s
                return dS, dX, ds_lp, dx_lp

            dS, dX, ds_lp, dx_lp = complete(dy)
            for _ in range(3):
                # iterative refinement on the dual residual of the direction as
                # actually formed; refining only the Schur system lets the
                # rounding of X dS S^-1 accumulate in rd once S is ill-conditioned
                err = rd - g.T @ dx_lp - a_eq.T @ dmu
                for blk, d in zip(p.blocks, dX):
                    err = err - blk.adjoint(d)
                res_e = re - a_eq @ dy
                if max(np.abs(err).max(initial=0), np.abs(res_e).max(initial=0)) <= 1e-14 * (1 + np.abs(rd).max()):
                    break
                ddy, ddmu = saddle_solve(-err, res_e)
                dy, dmu = dy + ddy, dmu + ddmu
                dS, dX, ds_lp, dx_lp = complete(dy)
            return dy, dmu, dS, dX, ds_lp, dx_lp

        def steps(dS, dX, ds_lp, dx_lp):
            ap = min([_max_step(S, d) for S, d in zip(w.S, dS)] + [_max_step_lp(w.s, ds_lp), math.inf])
            ad = min([_max_step(X, d) for X, d in zip(w.X, dX)] + [_max_step_lp(w.x, dx_lp), math.inf])
            return ap, ad

        # predictor
        rc0 = [-X for X in w.X]
        rc0_lp = -w.x
        dy, dmu, dS, dX, ds_lp, dx_lp = direction(rc0, rc0_lp)
        ap, ad = steps(dS, dX, ds_lp, dx_lp)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = (sum(float(np.sum((X + ad * dx) * (S + ap * ds))) for X, dx, S, ds in zip(w.X, dX, w.S, dS))
                  + float((w.x + ad * dx_lp) @ (w.s + ap * ds_lp))) / max(w.nu, 1)
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3 if mu > 0 else 0.0
        # corrector
        rc = [sigma * mu * si - X - _sym(dx @ ds @ si) for si, X, dx, ds in zip(Sinv, w.X, dX, dS)]
        rc_lp = sigma * mu / w.s - w.x - dx_lp * ds_lp / w.s
        dy, dmu, dS, dX, ds_lp, dx_lp = direction(rc, rc_lp)
        ap, ad = steps(dS, dX, ds_lp, dx_lp)
        ap = min(1.0, o.step_fraction * ap)
        ad = min(1.0, o.step_fraction * ad)
        if not (np.all(np.isfinite(dy)) and all(np.all(np.isfinite(d)) for d in dX)):
            status = "numerical-failure"
            break
        history[-1]["ap"], history[-1]["ad"], history[-1]["sigma"] = ap, ad, sigma
        w.y = w.y + ap * dy
        w.S = [_sym(S + ap * ds) for S, ds in zip(w.S, dS)]
        w.s = w.s + ap * ds_lp
        w.X = [_sym(X + ad * dx) for X, dx in zip(w.X, dX)]
        w.x = w.x + ad * dx_lp
        w.mu_eq = w.mu_eq + ad * dmu
        if ap < 1e-10 and ad < 1e-10:
            status = "numerical-failure"
            break

    if status == "optimal":
        y, Xs, x, mu_eq, pobj, dobj, relgap, infeas, iters = (w.y, w.X, w.x, w.mu_eq, pobj, dobj, relgap,
                                                             max(pinf, dinf), it)
    else:
        _, y, Xs, x, mu_eq, pobj, dobj, relgap, infeas, iters = best
        if status in ("iteration-limit", "numerical-failure") and relgap <= 1e3 * o.gap_tol and infeas <= 1e3 * o.feas_tol:
            status = "near-optimal"
    return SDPSolution(y=y, x_blocks=Xs, x_ineq=x, mu_eq=mu_eq, primal_objective=pobj, dual_objective=dobj,
                       gap=relgap, infeasibility=infeas, status=status, iterations=iters, history=history)


@dataclass
class ResidualReport:
    """Feasibility measured independently of the solver iterates."""

    primal_min_eig: float
    primal_ineq_violation: float
    primal_eq_residual: float
    dual_min_eig: float
    dual_residual: np.ndarray
    primal_objective: float
    dual_objective: float
    gap: float

    @property
    def dual_residual_l1(self) -> float:
        return float(np.abs(self.dual_residual).sum())

    @property
    def primal_infeasibility(self) -> float:
        return max(0.0, -self.primal_min_eig, self.primal_ineq_violation, self.primal_eq_residual)

    def lower_bound(self, y_bound: float | np.ndarray) -> float:
        """Valid lower bound on the minimum when feasible ``y`` obey ``|y_i| <= y_bound[i]``.

        ``y_bound`` is a scalar or one bound per variable.
        """
        if np.ndim(y_bound) == 0:
            return self.dual_objective - self.dual_residual_l1 * float(y_bound)
        return self.dual_objective - float(np.abs(self.dual_residual) @ np.asarray(y_bound, dtype=float))


def verify(p: SDPProblem, s: SDPSolution) -> ResidualReport:
    """Recompute residuals and a rigorous dual objective from ``s``.

    Dual matrices are projected onto the PSD cone (and the inequality
    multipliers clipped at zero) before the dual objective and its residual
    ``c - F^*(X) - G^T x - A^T mu`` are formed, so
    ``report.lower_bound(B)`` bounds every feasible objective value whenever
    feasible points satisfy ``|y_i| <= B``.
    """
    y = np.asarray(s.y, dtype=float)
    pmin = math.inf
    for blk in p.blocks:
        pmin = min(pmin, float(np.linalg.eigvalsh(_sym(blk.evaluate(y)))[0]))
    ineq_viol = float(np.max(p.h_ineq - p.g_ineq @ y, initial=0.0))
    eq_res = float(np.max(np.abs(p.a_eq @ y - p.b_eq), initial=0.0))
    dmin = math.inf
    resid = p.c.copy()
    dobj = 0.0
    for blk, X in zip(p.blocks, s.x_blocks):
        lam, vec = np.linalg.eigh(_sym(X))
        dmin = min(dmin, float(lam[0]))
        Xp = (vec * np.clip(lam, 0, None)) @ vec.T
        resid -= blk.adjoint(Xp)
        dobj -= float(np.sum(blk.f0 * Xp))
    x = np.clip(s.x_ineq, 0, None)
    if x.size:
        dmin = min(dmin, float(s.x_ineq.min()))
    resid -= p.g_ineq.T @ x + p.a_eq.T @ s.mu_eq
    dobj += float(p.h_ineq @ x) + float(p.b_eq @ s.mu_eq)
    pobj = float(p.c @ y)
    gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
    return ResidualReport(pmin if p.blocks else 0.0, ineq_viol, eq_res, dmin if math.isfinite(dmin) else 0.0,
                          resid, pobj, dobj, gap)


def scale_variables(p: SDPProblem, d: np.ndarray) -> SDPProblem:
    """Same program in ``y' = y / d``; optimal values are unchanged."""
    d = np.asarray(d, dtype=float)
    if d.shape != (p.n,) or np.any(d <= 0):
        raise ValueError("scales must be positive, one per variable")
    D = sp.diags(d)
    return SDPProblem(
        c=p.c * d,
        blocks=[Block(b.f0, sp.csc_matrix(b.fs @ D)) for b in p.blocks],
        g_ineq=p.g_ineq * d,
        h_ineq=p.h_ineq,
        a_eq=p.a_eq * d,
        b_eq=p.b_eq,
    )


def realify(f0: np.ndarray, fis: list[np.ndarray]) -> Block:
    """Embed a complex Hermitian affine block ``H0 + sum y_i H_i`` (real ``y``).

    ``H = R + iJ`` maps to ``[[R, -J], [J, R]]``, which is PSD exactly when
    ``H`` is, with every eigenvalue doubled in multiplicity.
    """
    mats = [np.asarray(f0, dtype=complex)] + [np.asarray(f, dtype=complex) for f in fis]
    for m in mats:
        if np.max(np.abs(m - m.conj().T), initial=0) > 1e-12:
            raise ValueError("block is not Hermitian")
        if np.max(np.abs(np.diag(m).imag), initial=0) > 1e-12:
            raise ValueError("Hermitian block has complex diagonal")

    def embed(m):
        return np.block([[m.real, -m.imag], [m.imag, m.real]])

    return Block.from_dense(embed(mats[0]), [embed(m) for m in mats[1:]])


def problem_to_json(p: SDPProblem, path: str | Path | None = None) -> dict:
    """Sparse JSON export: per block the F0 and each F_i as (row, col, value) lists."""
    blocks = []
    for blk in p.blocks:
        k = blk.dim
        r0, c0 = np.nonzero(blk.f0)
        fs = blk.fs.tocoo()
        rows, cols = np.divmod(fs.row, k)
        blocks.append({
            "dim": k,
            "f0": [[int(i), int(j), float(blk.f0[i, j])] for i, j in zip(r0, c0)],
            "fs": [[int(v), int(i), int(j), float(val)] for v, i, j, val in zip(fs.col, rows, cols, fs.data)],
        })
    data = {
        "n": p.n,
        "c": p.c.tolist(),
        "blocks": blocks,
        "a_eq": p.a_eq.tolist(),
        "b_eq": p.b_eq.tolist(),
        "g_ineq": p.g_ineq.tolist(),
        "h_ineq": p.h_ineq.tolist(),
    }
    if path is not None:
        Path(path).write_text(json.dumps(data))
    return data


def problem_from_json(data: dict | str | Path) -> SDPProblem:
    if isinstance(data, (str, Path)) and Path(data).exists():
        data = json.loads(Path(data).read_text())
    elif isinstance(data, str):
        data = json.loads(data)
    n = int(data["n"])
    blocks = []
    for b in data["blocks"]:
        k = int(b["dim"])
        f0 = np.zeros((k, k))
        for i, j, v in b["f0"]:
            f0[int(i), int(j)] = v
        entries = np.array(b["fs"], dtype=float).reshape(-1, 4)
        fs = sp.csc_matrix((entries[:, 3], (entries[:, 1].astype(int) * k + entries[:, 2].astype(int),
                                            entries[:, 0].astype(int))), shape=(k * k, n))
        blocks.append(Block(f0, fs))

    def mat(key, rows):
        arr = np.asarray(data.get(key) or [], dtype=float)
        return arr.reshape(rows, n) if rows else None

    b_eq = np.asarray(data.get("b_eq") or [], dtype=float)
    h_ineq = np.asarray(data.get("h_ineq") or [], dtype=float)
    return SDPProblem(
        c=np.asarray(data["c"], dtype=float),
        blocks=blocks,
        a_eq=mat("a_eq", b_eq.size),
        b_eq=b_eq if b_eq.size else None,
        g_ineq=mat("g_ineq", h_ineq.size),
        h_ineq=h_ineq if h_ineq.size else None,
    )
