"""Device-independent randomness bounds for the 2x2 binary Bell scenario.

Two quantities are certified for the outcome pair at settings ``(x*, y*)``:

* min-entropy, from an NPA bound on the adversary's guessing probability
  (one subnormalized moment matrix per guessed outcome pair);
* conditional von Neumann entropy ``H(AB | X=x*, Y=y*, E)`` through the
  Gauss-Radau family of lower bounds, one SDP per quadrature node with
  adversary operators ``Z[a,b]``.

Constraints come in two flavours: a single Bell value that must not be
undershot, or per-correlator inequalities ``C00, C01, C10 >= v`` and
``C11 <= v``.  Every reported bound is computed from the verified dual
objective, so an early-terminated solve can only weaken a bound.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from numpy.polynomial import Legendre

from . import ncalg
from .ncalg import (
    IDENTITY,
    Monomial,
    MomentMatrixSpec,
    Polynomial,
    build_moment_matrix,
    correlator_polynomial,
    generate_basis,
    polynomial_to_functional,
    proj_a,
    proj_b,
    zop,
)
from .qmodel import BellExpression, make_bell
from .sdp import Block, SDPProblem, SDPSolution, SolverOptions, realify, scale_variables, solve, verify

__all__ = [
    "QuadratureRule",
    "ConstraintSet",
    "CertificationTask",
    "CertificationResult",
    "gauss_radau",
    "bell_geq",
    "correlators_ineq",
    "build_guessing_program",
    "min_entropy",
    "build_bff_program",
    "bff_node_program",
    "von_neumann_entropy",
    "certify",
    "finite_stat_adjust",
    "rate_report",
    "max_bell_value",
]

log = logging.getLogger(__name__)

LOG2 = math.log(2)
MAX_BITS = 2.0
LAGRANGE_SCALES = (1.0, 10.0, 30.0, 100.0, 300.0)
PRIMAL_FEAS_LIMIT = 1e-6


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def m(self) -> int:
        return self.nodes.size

    @property
    def coefficients(self) -> np.ndarray:
        """``w_i / (t_i ln 2)``."""
        return self.weights / (self.nodes * LOG2)


def gauss_radau(m: int) -> QuadratureRule:
    """Gauss-Radau rule on ``[0, 1]`` (unit weight) with a node fixed at 1.

    Golub-Welsch on the shifted-Legendre Jacobi matrix, whose last diagonal
    entry is modified so that 1 becomes an eigenvalue.  Exact up to degree
    ``2m - 2``.
    """
    if not isinstance(m, (int, np.integer)) or not 2 <= m <= 64:
        raise ValueError("node count must be an integer in [2, 64]")
    k = np.arange(1, m)
    offdiag = np.sqrt(k**2 / (4.0 * (4.0 * k**2 - 1.0)))  # sqrt(beta_k) on [0, 1]
    diag = np.full(m, 0.5)
    # fix the endpoint: solve (J_{m-1} - I) delta = beta_{m-1} e_{m-1}
    head = np.diag(diag[:-1] - 1.0) + np.diag(offdiag[:-1], 1) + np.diag(offdiag[:-1], -1)
    rhs = np.zeros(m - 1)
    rhs[-1] = offdiag[-1] ** 2
    delta = np.linalg.solve(head, rhs)
    diag[-1] = 1.0 + delta[-1]
    J = np.diag(diag) + np.diag(offdiag, 1) + np.diag(offdiag, -1)
    nodes = np.linalg.eigvalsh(J)
    # polish the free nodes on P_{m-1} - P_m (shifted), then closed-form weights
    p_prev = Legendre.basis(m - 1, domain=[0, 1])
    radau = p_prev - Legendre.basis(m, domain=[0, 1])
    slope = radau.deriv()
    t = nodes[:-1]
    for _ in range(3):
        t = t - radau(t) / slope(t)
    weights = np.append(t / (m * m * p_prev(t) ** 2), 1.0 / (m * m))
    return QuadratureRule(np.append(t, 1.0), weights)


# ---------------------------------------------------------------------------
# constraints and task description


@dataclass(frozen=True)
class ConstraintSet:
    """``mode`` is ``"bell"`` (value of ``expression`` >= ``bell_value``) or
    ``"correlators"`` (``C00, C01, C10 >= v`` and ``C11 <= v``), or ``"none"``."""

    mode: str
    expression: BellExpression | None = None
    bell_value: float | None = None
    correlators: Mapping[tuple[int, int], float] | None = None
    marginals_zero: bool = False

    def __post_init__(self) -> None:
        if self.mode not in ("bell", "correlators", "none"):
            raise ValueError(f"unknown constraint mode {self.mode!r}")
        if self.mode == "bell" and (self.expression is None or self.bell_value is None):
            raise ValueError("Bell constraint needs an expression and a value")
        if self.mode == "correlators":
            if self.correlators is None or set(self.correlators) != {(0, 0), (0, 1), (1, 0), (1, 1)}:
                raise ValueError("correlator constraint needs C(0,0), C(0,1), C(1,0), C(1,1)")

    def polynomials(self) -> list[tuple[Polynomial, float]]:
        """``(p, v)`` pairs meaning ``<p> >= v``."""
        out = []
        if self.mode == "bell":
            poly = Polynomial()
            for (x, y), coef in self.expression.coeffs.items():
                poly = poly + coef * correlator_polynomial(x, y)
            out.append((poly, float(self.bell_value)))
        elif self.mode == "correlators":
            for (x, y), v in sorted(self.correlators.items()):
                sign = -1.0 if (x, y) == (1, 1) else 1.0
                out.append((sign * correlator_polynomial(x, y), sign * float(v)))
        return out

    def marginal_polynomials(self) -> list[Polynomial]:
        """``<A_x> = <B_y> = 0`` as equalities (opt-in)."""
        if not self.marginals_zero:
            return []
        return [2 * Polynomial.of(proj_a(x)) - 1 for x in (0, 1)] + [2 * Polynomial.of(proj_b(y)) - 1 for y in (0, 1)]


def bell_geq(expression: BellExpression, value: float) -> ConstraintSet:
    return ConstraintSet("bell", expression=expression, bell_value=value)


def correlators_ineq(values: Mapping[tuple[int, int], float]) -> ConstraintSet:
    return ConstraintSet("correlators", correlators={tuple(k): float(v) for k, v in values.items()})


@dataclass(frozen=True)
class CertificationTask:
    constraints: ConstraintSet
    method: str = "minentropy"  # or "vonneumann"
    nodes: int = 6
    level: int = 2
    x_star: int = 0
    y_star: int = 0
    basis: str = "products"
    joint: bool = False
    options: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self) -> None:
        if self.method not in ("minentropy", "vonneumann"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.x_star not in (0, 1) or self.y_star not in (0, 1):
            raise ValueError("target settings must be 0 or 1")
        if self.method == "vonneumann" and self.nodes < 2:
            raise ValueError("need at least two quadrature nodes")
        if self.level < 1:
            raise ValueError("relaxation level must be >= 1")


@dataclass
class CertificationResult:
    entropy_bits: float
    method: str
    certified: bool
    guessing_probability: float | None = None
    node_values: list[float] | None = None
    node_contributions: list[float] | None = None
    raw_bits: float | None = None
    residual_adjusted: bool = True
    diagnostics: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# relaxation assembly


class _Relaxation:
    """Maps moment variables of several moment matrices onto one SDP vector.

    In real mode (``hermitian_moments``) each moment is one real unknown.  In
    complex mode a word and its adjoint share a complex unknown split into
    real and imaginary parts, and each block is realified.
    """

    def __init__(self):
        self.n = 0
        self.blocks: list[tuple[MomentMatrixSpec, dict[int, list[tuple[int, complex]]], bool]] = []
        self.bounded: list[bool] = []
        self.words: list[Monomial] = []

    def _new(self, word: Monomial, bounded: bool = True) -> int:
        self.n += 1
        self.bounded.append(bounded)
        self.words.append(word)
        return self.n - 1

    def add(self, spec: MomentMatrixSpec, normalized: bool, bounded=lambda word: True) -> int:
        """Register a block; returns its handle.  ``bounded(word)`` flags
        moments known to satisfy ``|<w>| <= 1`` (projector words)."""
        mapping: dict[int, list[tuple[int, complex]]] = {}
        for var, word in enumerate(spec.words):
            if var == 0 and normalized:
                continue
            if var in mapping:
                continue
            conj = spec.conj[var]
            if spec.hermitian_moments or conj == var:
                mapping[var] = [(self._new(word, bounded(word)), 1.0)]
            else:
                re_, im_ = self._new(word, bounded(word)), self._new(word, bounded(word))
                mapping[var] = [(re_, 1.0), (im_, 1j)]
                mapping[conj] = [(re_, 1.0), (im_, -1j)]
        self.blocks.append((spec, mapping, normalized))
        return len(self.blocks) - 1

    def functional(self, handle: int, p: Polynomial) -> tuple[float, sp.csr_matrix]:
        """Real part of ``<p>`` in block ``handle`` as ``const + row @ y``."""
        spec, mapping, normalized = self.blocks[handle]
        const, coeffs = polynomial_to_functional(p, spec)
        row = np.zeros(self.n, dtype=complex)
        value = 0j
        if normalized:
            value += const
        elif const != 0:
            for idx, w in mapping[0]:
                row[idx] += const * w
        for var, coef in coeffs.items():
            for idx, w in mapping[var]:
                row[idx] += coef * w
        return float(value.real), row.real

    def sdp_blocks(self) -> list[Block]:
        out = []
        for spec, mapping, normalized in self.blocks:
            k = spec.size
            flat = spec.entries.ravel()
            positions = np.arange(k * k)
            f0 = np.zeros(k * k)
            if normalized:
                f0[flat == 0] = 1.0
            if spec.hermitian_moments:
                rows, cols = [], []
                for var, targets in mapping.items():
                    hit = positions[flat == var]
                    rows.append(hit)
                    cols.append(np.full(hit.size, targets[0][0]))
                rows = np.concatenate(rows) if rows else np.zeros(0, int)
                cols = np.concatenate(cols) if cols else np.zeros(0, int)
                fs = sp.csc_matrix((np.ones(rows.size), (rows, cols)), shape=(k * k, self.n))
                out.append(Block(f0.reshape(k, k), fs))
            else:
                fis: dict[int, np.ndarray] = {}
                for var, targets in mapping.items():
                    mask = (flat == var).reshape(k, k)
                    for idx, w in targets:
                        fis.setdefault(idx, np.zeros((k, k), dtype=complex))
                        fis[idx][mask] += w
                used = sorted(fis)
                blk = realify(f0.reshape(k, k), [fis[i] for i in used])
                # scatter the realified columns into the global variable vector
                coo = blk.fs.tocoo()
                cols = np.asarray(used)[coo.col]
                fs = sp.csc_matrix((coo.data, (coo.row, cols)), shape=(4 * k * k, self.n))
                out.append(Block(blk.f0, fs))
        return out


def _is_projector_word(word: Monomial) -> bool:
    return all(l.is_projector for l in word.word)


def _outcome_projector(x: int, y: int, a: int, b: int) -> Polynomial:
    return Polynomial.of(proj_a(x, a), proj_b(y, b))


def _solve_checked(problem: SDPProblem, options: SolverOptions,
                   y_bound: float | np.ndarray) -> tuple[SDPSolution, float, dict]:
    """Solve and return a verified lower bound on the minimum.

    With one bound per variable the program is solved in units of those
    bounds, so the solver's dual residual is the one the verification pays for.
    """
    if np.ndim(y_bound) == 1:
        scales = np.asarray(y_bound, dtype=float)
        problem, y_bound = scale_variables(problem, scales), 1.0
    else:
        scales = None
    sol = solve(problem, options)
    report = verify(problem, sol)
    bound = report.lower_bound(y_bound)
    if scales is not None:
        sol.y = sol.y * scales
    diag = {
        "status": sol.status,
        "iterations": sol.iterations,
        "primal_objective": sol.primal_objective,
        "dual_objective": sol.dual_objective,
        "verified_dual": report.dual_objective,
        "dual_residual_l1": report.dual_residual_l1,
        "primal_infeasibility": report.primal_infeasibility,
        "gap": sol.gap,
        "bound": bound,
    }
    return sol, bound, diag


# ---------------------------------------------------------------------------
# min-entropy


def build_guessing_program(task: CertificationTask) -> tuple[SDPProblem, _Relaxation]:
    """Guessing-probability relaxation as a minimization of ``-P_guess``.

    One subnormalized moment matrix per guess ``(a, b)``; the constraints act
    on the sum of the four blocks, which is the observed behavior.
    """
    basis = generate_basis(task.level)
    spec = build_moment_matrix(basis, hermitian_moments=True)
    rel = _Relaxation()
    handles = {(a, b): rel.add(spec, normalized=False) for a in (0, 1) for b in (0, 1)}
    c = np.zeros(rel.n)
    for (a, b), h in handles.items():
        _, row = rel.functional(h, _outcome_projector(task.x_star, task.y_star, a, b))
        c -= row
    a_rows = []
    b_vals = []
    one = Polynomial.constant(1.0)
    norm = sum(rel.functional(h, one)[1] for h in handles.values())
    a_rows.append(norm)
    b_vals.append(1.0)
    for poly in task.constraints.marginal_polynomials():
        a_rows.append(sum(rel.functional(h, poly)[1] for h in handles.values()))
        b_vals.append(0.0)
    g_rows, h_vals = [], []
    for poly, value in task.constraints.polynomials():
        g_rows.append(sum(rel.functional(h, poly)[1] for h in handles.values()))
        h_vals.append(value)
    problem = SDPProblem(
        c=c,
        blocks=rel.sdp_blocks(),
        a_eq=np.array(a_rows),
        b_eq=np.array(b_vals),
        g_ineq=np.array(g_rows) if g_rows else None,
        h_ineq=np.array(h_vals) if h_vals else None,
    )
    return problem, rel


def _lagrangian_bounds(problem: SDPProblem, sol: SDPSolution, options: SolverOptions, y_bound: float):
    """Bounds from moving the inequalities into the objective.

    For ``lam >= 0`` and any feasible point, ``c.y >= c.y - lam.(G y - h)``,
    so the minimum of the relaxed program is a valid bound.  The relaxed
    program keeps a strictly feasible interior even when the inequalities
    sit on the boundary of the quantum set, where the direct solve stalls.
    """
    if problem.g_ineq is None or sol.x_ineq is None:
        return
    base = np.maximum(np.asarray(sol.x_ineq, dtype=float), 0.0)
    if not np.any(base > 0):
        return
    # the boundary multiplier diverges, so the scan goes well past the stalled one
    tight = replace(options, gap_tol=min(options.gap_tol, 1e-12), feas_tol=min(options.feas_tol, 1e-12))
    for scale in LAGRANGE_SCALES:
        lam = scale * base
        relaxed = SDPProblem(
            c=problem.c - lam @ problem.g_ineq,
            blocks=problem.blocks,
            a_eq=problem.a_eq,
            b_eq=problem.b_eq,
        )
        rsol, rbound, rdiag = _solve_checked(relaxed, tight, y_bound)
        rdiag["lagrange_scale"] = scale
        yield rbound + float(lam @ problem.h_ineq), rdiag


def min_entropy(task: CertificationTask) -> CertificationResult:
    problem, _ = build_guessing_program(task)
    # subnormalized projector moments are bounded by the block weight <= 1
    sol, bound, diag = _solve_checked(problem, task.options, y_bound=1.0)
    diags = [diag]
    certified = sol.ok
    if sol.status != "optimal":
        for rbound, rdiag in _lagrangian_bounds(problem, sol, task.options, 1.0):
            diags.append(rdiag)
            if rdiag["status"] in ("optimal", "near-optimal") and rbound > bound:
                bound = rbound
                certified = True
    pguess = min(1.0, max(0.25, -bound))
    bits = -math.log2(pguess) + 0.0 if certified else 0.0
    return CertificationResult(
        entropy_bits=_clamp(bits, diags[0]),
        method="minentropy",
        certified=certified,
        guessing_probability=pguess,
        raw_bits=-math.log2(max(-bound, 1e-300)),
        diagnostics=diags,
    )


def _clamp(bits: float, diag: dict) -> float:
    if bits < 0:
        diag["clamped"] = f"negative bound {bits:.3e} reported as 0"
        return 0.0
    if bits > MAX_BITS:
        diag["clamped"] = f"bound {bits:.6f} above 2 bits reported as 2"
        return MAX_BITS
    return bits


# ---------------------------------------------------------------------------
# von Neumann entropy


def _pairs():
    return [(a, b) for a in (0, 1) for b in (0, 1)]


BASIS_KINDS = ("products", "standard", "extended")


def bff_basis(level: int, nodes: Sequence[int], x_star: int = 0, y_star: int = 0, kind: str = "products") -> list[Monomial]:
    """Moment basis for the adversary-operator relaxation.

    All kinds start from the NPA words of length ``<= level`` over projectors
    and add, for every adversary operator ``Z`` and its adjoint ``W``:

    ``products``: ``W``, ``p W`` for every single projector ``p`` and
    ``M[0|x] N[0|y] W`` for every setting pair.  The full set of products
    lets the relaxation see that the adversary is uncorrelated with the
    devices near the quantum bound.
    ``standard``: ``Z``, ``Z*``, ``M[0|x*] Z``, ``N[0|y*] Z``, ``M[0|x*] N[0|y*] Z``
    (cheap, loose away from small ``t``).
    ``extended``: ``standard`` plus the same words for ``Z*`` and ``p Z``,
    ``p Z*`` for every single projector.
    """
    if kind not in BASIS_KINDS:
        raise ValueError(f"unknown basis kind {kind!r}; choose from {BASIS_KINDS}")
    extras: list[Monomial] = []
    ma, nb = proj_a(x_star), proj_b(y_star)
    alice = [proj_a(x) for x in (0, 1)]
    bob = [proj_b(y) for y in (0, 1)]
    for i in nodes:
        for a, b in _pairs():
            z, zd = zop(a, b, i), zop(a, b, i, dagger=True)
            if kind == "products":
                for w in (z, zd):
                    extras.append(Monomial((w,)))
                    extras += [Monomial((p, w)) for p in alice + bob]
                    extras += [Monomial((pa, pb, w)) for pa in alice for pb in bob]
                continue
            extras += [Monomial((z,)), Monomial((zd,))]
            extras += [Monomial((ma, z)), Monomial((nb, z)), Monomial((ma, nb, z))]
            if kind == "extended":
                extras += [Monomial((ma, zd)), Monomial((nb, zd)), Monomial((ma, nb, zd))]
                extras += [Monomial((p, z)) for p in alice + bob]
                extras += [Monomial((p, zd)) for p in alice + bob]
    return generate_basis(level, extras=extras)


def _node_objective(t: float, node: int, x_star: int, y_star: int) -> Polynomial:
    """``sum_ab <P_ab (Z + Z* + (1-t) Z* Z)> + t <Z Z*>`` for one node."""
    obj = Polynomial()
    for a, b in _pairs():
        proj = _outcome_projector(x_star, y_star, a, b)
        z = Polynomial.of(zop(a, b, node))
        zd = Polynomial.of(zop(a, b, node, dagger=True))
        obj = obj + proj * (z + zd + (1 - t) * (zd * z)) + t * (z * zd)
    return obj


def norm_bound(t: float) -> float:
    """Operator-norm bound that an optimal adversary operator at node ``t`` obeys."""
    return 1.5 * max(1.0 / t, 1.0 / (1.0 - t)) if t < 1 else 1.5


def _norm_bound_polynomials(basis: Sequence[Monomial], ts: Mapping[int, float]) -> list[Polynomial]:
    """``alpha^2 <u* u> - <u* l* l u> >= 0`` for every basis word ``u l``.

    ``u`` is a projector word and ``l`` a single adversary letter; the
    inequality holds because ``u* u`` commutes with ``alpha^2 - l* l >= 0``.
    Restricting to ``||Z|| <= alpha`` leaves the node infimum unchanged and
    keeps the moments of ``Z* Z`` and ``Z Z*`` bounded.
    """
    alpha2 = {i: norm_bound(t) ** 2 for i, t in ts.items()}
    out = []
    words = set(basis)
    for word in basis:
        letters = word.word
        if not letters or letters[-1].is_projector or not all(l.is_projector for l in letters[:-1]):
            continue
        node = letters[-1].index[2]
        u = Monomial(letters[:-1])
        if u not in words:
            continue
        uu = Polynomial.of(*ncalg.adjoint(u).word, *u.word) if u.word else Polynomial.constant(1.0)
        ell = letters[-1]
        inner = Polynomial.of(*ncalg.adjoint(u).word, ell.adjoint(), ell, *u.word)
        out.append(alpha2[node] * uu - inner)
    return out


def _bff_problem(task: CertificationTask, q: QuadratureRule, nodes: Sequence[int], weights: Sequence[float]):
    basis = bff_basis(task.level, nodes, task.x_star, task.y_star, task.basis)
    spec = build_moment_matrix(basis, hermitian_moments=True)
    rel = _Relaxation()
    h = rel.add(spec, normalized=True, bounded=_is_projector_word)
    c = np.zeros(rel.n)
    const = 0.0
    for i, wgt in zip(nodes, weights):
        k, row = rel.functional(h, _node_objective(float(q.nodes[i]), i, task.x_star, task.y_star))
        c += wgt * row
        const += wgt * k
    g_rows, h_vals = [], []
    for poly, value in task.constraints.polynomials():
        k, row = rel.functional(h, poly)
        g_rows.append(row)
        h_vals.append(value - k)
    for poly in _norm_bound_polynomials(basis, {i: float(q.nodes[i]) for i in nodes}):
        k, row = rel.functional(h, poly)
        g_rows.append(row)
        h_vals.append(-k)
    a_rows, b_vals = [], []
    for poly in task.constraints.marginal_polynomials():
        k, row = rel.functional(h, poly)
        a_rows.append(row)
        b_vals.append(-k)
    problem = SDPProblem(
        c=c,
        blocks=rel.sdp_blocks(),
        g_ineq=np.array(g_rows) if g_rows else None,
        h_ineq=np.array(h_vals) if h_vals else None,
        a_eq=np.array(a_rows) if a_rows else None,
        b_eq=np.array(b_vals) if b_vals else None,
    )
    return problem, const, rel


def bff_node_program(task: CertificationTask, q: QuadratureRule, node: int) -> tuple[SDPProblem, float]:
    """SDP whose minimum (plus the returned constant) is the infimum for one node."""
    problem, const, _ = _bff_problem(task, q, [node], [1.0])
    return problem, const


def build_bff_program(task: CertificationTask, q: QuadratureRule | None = None) -> tuple[SDPProblem, float]:
    """Joint program over all nodes except the fixed endpoint.

    The objective is ``sum_i c_i <node objective i>`` with shared
    state/measurement moments; the returned constant is zero because the
    ``1 +`` terms are added by :func:`von_neumann_entropy`.
    """
    q = q or gauss_radau(task.nodes)
    nodes = list(range(q.m - 1))
    problem, const, _ = _bff_problem(task, q, nodes, q.coefficients[:-1])
    return problem, const


def von_neumann_entropy(task: CertificationTask) -> CertificationResult:
    """Lower bound on ``H(AB | X=x*, Y=y*, E)`` in bits.

    ``sum_{i<m} c_i (1 + v_i)`` where ``v_i`` is the verified lower bound of
    the node program; the endpoint node ``t_m = 1`` is dropped, which only
    lowers the bound since its term is non-negative.  A node whose solve
    stalls still contributes its verified bound, which is valid but looser.
    """
    q = gauss_radau(task.nodes)
    coeffs = q.coefficients
    diagnostics = []
    certified = True
    if task.joint:
        nodes = list(range(q.m - 1))
        problem, const, rel = _bff_problem(task, q, nodes, q.coefficients[:-1])
        sol, bound, diag = _solve_checked(problem, task.options, y_bound=variable_bounds(rel, q))
        diagnostics.append(diag)
        certified = _usable(diag)
        total = float(coeffs[:-1].sum()) + bound + const
        node_values = None
        contributions = None
    else:
        node_values, contributions = [], []
        for i in range(q.m - 1):
            problem, const, rel = _bff_problem(task, q, [i], [1.0])
            sol, bound, diag = _solve_checked(problem, task.options, y_bound=variable_bounds(rel, q))
            diag["node"] = i
            diag["t"] = float(q.nodes[i])
            diagnostics.append(diag)
            certified = certified and _usable(diag)
            value = bound + const
            node_values.append(value)
            contributions.append(float(coeffs[i] * (1 + value)))
        total = float(sum(contributions))
    diag0 = diagnostics[0]
    bits = total if certified else 0.0
    return CertificationResult(
        entropy_bits=_clamp(bits, diag0),
        method="vonneumann",
        certified=certified,
        node_values=node_values,
        node_contributions=contributions,
        raw_bits=total,
        diagnostics=diagnostics,
    )


def moment_bound(q: QuadratureRule, nodes: Sequence[int]) -> float:
    """Bound on every moment variable of the node programs.

    Basis words carry at most one adversary letter, whose norm is capped by
    :func:`norm_bound`, so each diagonal moment and hence (by positivity of
    the moment matrix) every entry is at most ``alpha^2``.
    """
    return max([1.0] + [norm_bound(float(q.nodes[i])) ** 2 for i in nodes])


def variable_bounds(rel: _Relaxation, q: QuadratureRule) -> np.ndarray:
    """Per-variable version of :func:`moment_bound`.

    A moment sits in an entry ``<u* v>`` of the moment matrix, so it is at
    most ``sqrt(<u* u> <v* v>)``; each adversary letter contributes its node's
    norm bound and projectors contribute 1.
    """
    out = np.ones(rel.n)
    for k, word in enumerate(rel.words):
        for letter in word.word:
            if letter.party == "E":
                out[k] *= norm_bound(float(q.nodes[letter.index[2]]))
    return out


def _usable(diag: dict) -> bool:
    # the verified bound is rigorous whenever it is finite; a primal iterate far
    # from feasibility signals constraints no quantum behavior satisfies
    return math.isfinite(diag["bound"]) and diag["primal_infeasibility"] <= PRIMAL_FEAS_LIMIT


def certify(task: CertificationTask) -> CertificationResult:
    if task.method == "minentropy":
        return min_entropy(task)
    return von_neumann_entropy(task)


# ---------------------------------------------------------------------------
# NPA maximization of a Bell expression


def max_bell_value(expression: BellExpression, level: int = 2, options: SolverOptions | None = None) -> float:
    """Upper bound on the quantum value of ``expression`` from the NPA level ``level``."""
    nx, ny = expression.n_settings
    basis = generate_basis(level, nx, ny)
    spec = build_moment_matrix(basis, hermitian_moments=True)
    rel = _Relaxation()
    h = rel.add(spec, normalized=True)
    poly = Polynomial()
    for (x, y), coef in expression.coeffs.items():
        poly = poly + coef * correlator_polynomial(x, y)
    const, row = rel.functional(h, poly)
    problem = SDPProblem(c=-row, blocks=rel.sdp_blocks())
    sol, bound, _ = _solve_checked(problem, options or SolverOptions(), y_bound=1.0)
    return const - bound


# ---------------------------------------------------------------------------
# reporting helpers


def finite_stat_adjust(observed: float, stderr: float, k: float = 1.0) -> float:
    """Bell threshold lowered by ``k`` standard errors."""
    if stderr < 0:
        raise ValueError("stderr must be non-negative")
    return observed - k * stderr


def rate_report(result: CertificationResult | float | Mapping[str, float], events_per_second: float) -> dict[str, float]:
    """Bits per second for each available entropy kind."""
    if events_per_second <= 0:
        raise ValueError("event rate must be positive")
    if isinstance(result, CertificationResult):
        result = {result.method: result.entropy_bits}
    elif not isinstance(result, Mapping):
        result = {"bits": float(result)}
    return {kind: float(bits) * events_per_second for kind, bits in result.items()}
