"""
Resolução de programas lineares.

``dense_simplex`` é um simplex primal de duas fases sobre tableau denso, com
limites superiores tratados implicitamente (variáveis não básicas no limite
inferior ou superior). Após ``BLAND_AFTER`` pivôs degenerados consecutivos a
regra de Bland passa a ser usada até o fim, o que garante término.
``highs_lp`` delega ao HiGHS via ``scipy.optimize.linprog``.

Todos aceitam um ``deadline`` em segundos de ``time.monotonic()``; ao
alcançá-lo a resolução para com ``LpStatus.TIME_LIMIT``.
"""

import logging
import math
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import optimize, sparse

from .exceptions import SolverError

logger = logging.getLogger(__name__)

BLAND_AFTER = 1000
COST_TOL = 1e-9
PIVOT_TOL = 1e-9
FEASIBILITY_TOL = 1e-7
# tableau entries above which the "auto" engine switches to HiGHS
DENSE_LIMIT = 4_000_000
ENGINES = ("auto", "simplex", "highs")


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    TIME_LIMIT = "time_limit"


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    x: np.ndarray | None = None
    value: float | None = None
    iterations: int = 0


def _dense(matrix, n: int) -> np.ndarray:
    if matrix is None:
        return np.zeros((0, n))
    if sparse.issparse(matrix):
        return matrix.toarray()
    return np.asarray(matrix, dtype=float).reshape(-1, n)


def _vector(values, size: int) -> np.ndarray:
    if values is None:
        return np.zeros(size)
    return np.asarray(values, dtype=float).reshape(size)


def _pivot(T: np.ndarray, r: int, j: int):
    T[r] /= T[r, j]
    column = T[:, j].copy()
    column[r] = 0.0
    T -= np.outer(column, T[r])


def _iterate(T, beta, basis, at_upper, U, cost, max_iter, deadline=None):
    """Itera o simplex primal até a otimalidade ou o prazo; retorna (status, iterações)."""
    m, N = T.shape
    is_basic = np.zeros(N, dtype=bool)
    is_basic[basis] = True
    degenerate = 0
    bland = False
    for iteration in range(max_iter):
        if deadline is not None and time.monotonic() >= deadline:
            return LpStatus.TIME_LIMIT, iteration
        reduced = cost - cost[basis] @ T
        can_increase = ~is_basic & ~at_upper & (reduced < -COST_TOL) & (U > 0)
        can_decrease = ~is_basic & at_upper & (reduced > COST_TOL)
        eligible = can_increase | can_decrease
        if not eligible.any():
            return LpStatus.OPTIMAL, iteration
        if bland:
            j = int(np.flatnonzero(eligible)[0])
        else:
            j = int(np.argmax(np.where(eligible, np.abs(reduced), -1.0)))
        direction = 1.0 if can_increase[j] else -1.0
        column = T[:, j].copy()
        alpha = direction * column

        basic_upper = U[basis]
        to_lower = alpha > PIVOT_TOL
        to_upper = (alpha < -PIVOT_TOL) & np.isfinite(basic_upper)
        ratios = np.full(m, math.inf)
        ratios[to_lower] = np.maximum(beta[to_lower], 0.0) / alpha[to_lower]
        ratios[to_upper] = np.maximum(basic_upper[to_upper] - beta[to_upper], 0.0) / -alpha[to_upper]
        theta = float(ratios.min()) if m else math.inf
        if theta >= U[j] - 1e-12:
            theta = U[j]
            leave = -1
        else:
            ties = np.flatnonzero(ratios <= theta + 1e-12)
            if bland:
                leave = int(ties[np.argmin(basis[ties])])
            else:
                leave = int(ties[np.argmax(np.abs(alpha[ties]))])
        if not math.isfinite(theta):
            return LpStatus.UNBOUNDED, iteration

        beta -= direction * theta * column
        if leave < 0:
            at_upper[j] = not at_upper[j]
        else:
            entering_value = theta if direction > 0 else U[j] - theta
            leaving = basis[leave]
            at_upper[leaving] = bool(to_upper[leave])
            is_basic[leaving] = False
            _pivot(T, leave, j)
            beta[leave] = entering_value
            basis[leave] = j
            is_basic[j] = True
            at_upper[j] = False
        degenerate = degenerate + 1 if theta <= 1e-12 else 0
        if degenerate >= BLAND_AFTER and not bland:
            logger.debug("Switching to Bland's rule after %d degenerate pivots", degenerate)
            bland = True
    raise SolverError(f"simplex did not converge in {max_iter} iterations")


def dense_simplex(
    c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, lower=None, upper=None, deadline=None
) -> LpResult:
    """Resolve ``min c x`` sujeito a ``A_ub x <= b_ub``, ``A_eq x = b_eq`` e ``lower <= x <= upper``.

    Parâmetros
    ----------
    c : array_like
        Custos.
    A_ub, A_eq : array_like ou matriz esparsa, opcional
    b_ub, b_eq : array_like, opcional
    lower : array_like, opcional
        Limites inferiores finitos (padrão 0).
    upper : array_like, opcional
        Limites superiores, ``inf`` permitido (padrão ``inf``).
    deadline : float, opcional
        Instante de ``time.monotonic()`` em que a resolução é interrompida.

    Retorna
    -------
    LpResult
        Status, solução e valor ótimo.

    Exceções
    --------
    SolverError
        Em limites inferiores infinitos ou falta de convergência.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    A1 = _dense(A_ub, n)
    A2 = _dense(A_eq, n)
    b1 = _vector(b_ub, A1.shape[0])
    b2 = _vector(b_eq, A2.shape[0])
    lower = np.zeros(n) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(n, math.inf) if upper is None else np.asarray(upper, dtype=float)
    if not np.isfinite(lower).all():
        raise SolverError("dense simplex requires finite lower bounds")
    if (upper < lower - FEASIBILITY_TOL).any():
        return LpResult(LpStatus.INFEASIBLE)

    # shift to x = lower + x', drop fixed columns
    b1 = b1 - A1 @ lower
    b2 = b2 - A2 @ lower
    free = upper - lower > 1e-12
    A1, A2 = A1[:, free], A2[:, free]
    cf = c[free]
    uf = (upper - lower)[free]
    k = int(free.sum())

    # empty rows are checked directly
    keep1 = np.abs(A1).sum(axis=1) > 0 if k else np.zeros(A1.shape[0], dtype=bool)
    keep2 = np.abs(A2).sum(axis=1) > 0 if k else np.zeros(A2.shape[0], dtype=bool)
    if (b1[~keep1] < -FEASIBILITY_TOL).any() or (np.abs(b2[~keep2]) > FEASIBILITY_TOL).any():
        return LpResult(LpStatus.INFEASIBLE)
    A1, b1, A2, b2 = A1[keep1], b1[keep1], A2[keep2], b2[keep2]
    m1, m2 = A1.shape[0], A2.shape[0]
    m = m1 + m2

    def finish(x_free) -> LpResult:
        x = lower.copy()
        x[free] += x_free
        return LpResult(LpStatus.OPTIMAL, x, float(c @ x), iterations)

    iterations = 0
    if m == 0:
        if ((cf < 0) & ~np.isfinite(uf)).any():
            return LpResult(LpStatus.UNBOUNDED)
        return finish(np.where(cf < 0, uf, 0.0))

    flip = np.concatenate([b1 < 0, b2 < 0])
    needs_artificial = np.concatenate([b1 < 0, np.ones(m2, dtype=bool)])
    n_art = int(needs_artificial.sum())
    N = k + m1 + n_art
    T = np.zeros((m, N))
    T[:m1, :k] = A1
    T[m1:, :k] = A2
    T[np.arange(m1), k + np.arange(m1)] = 1.0
    beta = np.concatenate([b1, b2])
    T[flip] *= -1.0
    beta[flip] *= -1.0
    basis = np.empty(m, dtype=int)
    art_rows = np.flatnonzero(needs_artificial)
    T[art_rows, k + m1 + np.arange(n_art)] = 1.0
    basis[:] = k + np.arange(m)
    basis[art_rows] = k + m1 + np.arange(n_art)

    U = np.concatenate([uf, np.full(m1 + n_art, math.inf)])
    at_upper = np.zeros(N, dtype=bool)
    max_iter = 20_000 + 20 * (m + N)

    if n_art:
        phase_one = np.zeros(N)
        phase_one[k + m1 :] = 1.0
        status, iterations = _iterate(T, beta, basis, at_upper, U, phase_one, max_iter, deadline)
        if status is LpStatus.TIME_LIMIT:
            return LpResult(LpStatus.TIME_LIMIT, iterations=iterations)
        infeasibility = float(beta[basis >= k + m1].sum())
        if infeasibility > FEASIBILITY_TOL * max(1.0, float(np.abs(beta).max(initial=0.0))):
            return LpResult(LpStatus.INFEASIBLE, iterations=iterations)
        U[k + m1 :] = 0.0

    cost = np.concatenate([cf, np.zeros(m1 + n_art)])
    status, more = _iterate(T, beta, basis, at_upper, U, cost, max_iter, deadline)
    iterations += more
    if status is LpStatus.TIME_LIMIT:
        return LpResult(LpStatus.TIME_LIMIT, iterations=iterations)
    if status is LpStatus.UNBOUNDED:
        return LpResult(LpStatus.UNBOUNDED, iterations=iterations)

    values = np.where(at_upper, U, 0.0)
    values[basis] = beta
    x_free = np.clip(values[:k], 0.0, uf)
    return finish(x_free)


def highs_lp(
    c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, lower=None, upper=None, deadline=None
) -> LpResult:
    """Mesma interface de ``dense_simplex``, resolvida pelo HiGHS."""
    c = np.asarray(c, dtype=float)
    n = c.size
    lower = np.zeros(n) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(n, math.inf) if upper is None else np.asarray(upper, dtype=float)
    bounds = [
        (lo if math.isfinite(lo) else None, up if math.isfinite(up) else None)
        for lo, up in zip(lower, upper)
    ]

    def nonempty(A, b):
        return (A, b) if A is not None and A.shape[0] else (None, None)

    A_ub, b_ub = nonempty(A_ub, b_ub)
    A_eq, b_eq = nonempty(A_eq, b_eq)
    options = {}
    if deadline is not None:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            return LpResult(LpStatus.TIME_LIMIT)
        options["time_limit"] = remaining
    result = optimize.linprog(
        c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs", options=options
    )
    if result.status == 0:
        x = np.clip(result.x, lower, upper)
        return LpResult(LpStatus.OPTIMAL, x, float(c @ x), int(result.nit))
    if result.status == 1:
        return LpResult(LpStatus.TIME_LIMIT, iterations=int(result.nit or 0))
    if result.status == 2:
        return LpResult(LpStatus.INFEASIBLE)
    if result.status == 3:
        return LpResult(LpStatus.UNBOUNDED)
    raise SolverError(f"HiGHS failed: {result.message}")


def solve_lp(
    c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, lower=None, upper=None, engine="auto", deadline=None
) -> LpResult:
    """Resolve um programa linear com o motor escolhido.

    ``auto`` usa o simplex denso enquanto o tableau couber em
    ``DENSE_LIMIT`` entradas, e o HiGHS acima disso. Com ``deadline`` o
    resultado pode ser ``LpStatus.TIME_LIMIT``.
    """
    if engine not in ENGINES:
        raise SolverError(f"unknown LP engine {engine!r}, expected one of {ENGINES}")
    if engine == "auto":
        rows = (A_ub.shape[0] if A_ub is not None else 0) + (A_eq.shape[0] if A_eq is not None else 0)
        engine = "simplex" if rows * (len(c) + 2 * rows) <= DENSE_LIMIT else "highs"
    if engine == "highs":
        return highs_lp(c, A_ub, b_ub, A_eq, b_eq, lower, upper, deadline)
    return dense_simplex(c, A_ub, b_ub, A_eq, b_eq, lower, upper, deadline)
