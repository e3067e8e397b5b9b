"""
Oráculo por enumeração exaustiva para instâncias minúsculas.

Enumera todos os fluxos de armazenamentos viáveis dia a dia, todas as
bijeções das fontes sobre os arcos ativos e resolve o problema residual de
cada combinação pelo simplex denso. O mínimo global é o valor ótimo do
problema completo (ou do relaxado, sem as bijeções).
"""

import itertools
import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from .exceptions import OracleSizeError
from .instance import Instance
from .model import FlowSolution, build_refill_subproblem, check_routing, extract_solution, initial_flows
from .simplex import LpStatus, dense_simplex
from .teg import TimeExpandedGraph, TimeIndex

logger = logging.getLogger(__name__)

MAX_SOURCES = 2
MAX_DESTINATIONS = 2
MAX_HORIZON = 3
MAX_STORAGES = 4
INTEGRALITY_TOL = 1e-7
PRUNE_TOL = 1e-9


@dataclass(frozen=True)
class OracleResult:
    """Resultado do oráculo.

    Atributos
    ----------
    value : float
        Valor ótimo (``inf`` se nenhum fluxo for viável).
    solution : FlowSolution ou None
    patterns : int
        Fluxos de armazenamentos enumerados.
    residuals : int
        Problemas residuais resolvidos.
    """

    value: float
    solution: FlowSolution | None
    patterns: int
    residuals: int


def check_oracle_size(instance: Instance):
    """Rejeita instâncias fora do alcance da enumeração."""
    limits = (
        ("sources", instance.n_sources, MAX_SOURCES),
        ("destinations", instance.n_destinations, MAX_DESTINATIONS),
        ("days", instance.horizon, MAX_HORIZON),
        ("storages", instance.n_storages, MAX_STORAGES),
    )
    for label, size, limit in limits:
        if size > limit:
            raise OracleSizeError(f"oracle handles at most {limit} {label}, instance has {size}")


def routing_patterns(instance: Instance, teg: TimeExpandedGraph) -> Iterator[np.ndarray]:
    """Gera todos os fluxos de armazenamentos que satisfazem as restrições de roteamento.

    Cada dia escolhe, por destino, nenhuma entrega ou a fonte que entrega, e
    para cada troca a fonte que recebe o armazenamento devolvido. Armazenamentos
    parados ocupam as primeiras vagas.
    """
    start = np.zeros(len(teg), dtype=int)
    for a, (y0, _) in initial_flows(instance, teg).items():
        start[a] = y0
    available = [len(s.initial_storages) for s in instance.sources]
    options = [None, *range(instance.n_sources)]

    def visit(day: int, y: np.ndarray, available: list[int]):
        if day > instance.horizon:
            yield y
            return
        left, right = TimeIndex.left(day), TimeIndex.right(day)
        for choice in itertools.product(options, repeat=instance.n_destinations):
            sent = [sum(1 for c in choice if c == s) for s in range(instance.n_sources)]
            if any(sent[s] > available[s] for s in range(instance.n_sources)):
                continue
            swapped = [d for d, c in enumerate(choice) if c is not None]
            for returns in itertools.product(range(instance.n_sources), repeat=len(swapped)):
                parked = [available[s] - sent[s] for s in range(instance.n_sources)]
                following = list(parked)
                for s in returns:
                    following[s] += 1
                if day < instance.horizon and any(
                    following[s] > source.slot_limit for s, source in enumerate(instance.sources)
                ):
                    continue
                nxt = y.copy()
                for d in range(instance.n_destinations):
                    nxt[teg.dd(d, left)] = nxt[teg.dd(d, right)] = 1
                for d, s in zip(swapped, returns):
                    nxt[teg.sd(choice[d], d, day)] = 1
                    nxt[teg.ds(d, s, right)] = 1
                for s in range(instance.n_sources):
                    for k in range(1, parked[s] + 1):
                        nxt[teg.sk(s, k, left)] = nxt[teg.sk(s, k, right)] = 1
                yield from visit(day + 1, nxt, following)

    yield from visit(1, start, available)


def _bijections(teg: TimeExpandedGraph, instance: Instance, y: np.ndarray):
    """Todas as combinações de bijeções (fonte, dia) entre arcos ativos de entrada e saída."""
    blocks = []
    for day in range(1, instance.horizon + 1):
        for s in range(instance.n_sources):
            active_in = [n for n, a in enumerate(teg.source_in_arcs(s, day)) if y[a]]
            active_out = [m for m, a in enumerate(teg.source_out_arcs(s, day)) if y[a]]
            blocks.append(
                [((s, day), tuple(zip(active_in, perm))) for perm in itertools.permutations(active_out)]
            )
    return itertools.product(*blocks)


class _Residual:
    """Busca em profundidade sobre as binárias restantes de um subproblema."""

    def __init__(self, model):
        form = model.to_arrays()
        self.form = form
        self.A_ub = form.A_ub.toarray()
        self.A_eq = form.A_eq.toarray()
        self.binaries = np.flatnonzero(form.integer)
        self.solved = 0

    def minimum(self, lower, upper, best: float) -> tuple[float, np.ndarray | None]:
        form = self.form
        result = dense_simplex(form.c, self.A_ub, form.b_ub, self.A_eq, form.b_eq, lower, upper)
        self.solved += 1
        if result.status is not LpStatus.OPTIMAL:
            return best, None
        value = result.value + form.offset
        if value >= best - PRUNE_TOL:
            return best, None
        x = result.x
        fractional = [j for j in self.binaries if abs(x[j] - round(x[j])) > INTEGRALITY_TOL]
        if not fractional:
            x = x.copy()
            x[self.binaries] = np.round(x[self.binaries])
            return value, x
        column = fractional[0]
        found = None
        for fixed in (0.0, 1.0):
            lo, up = lower.copy(), upper.copy()
            lo[column] = up[column] = fixed
            candidate, x_child = self.minimum(lo, up, best)
            if x_child is not None:
                best, found = candidate, x_child
        return best, found


def brute_force_oracle(instance: Instance, teg: TimeExpandedGraph, assignment: bool = True) -> OracleResult:
    """Valor ótimo do problema por enumeração.

    Parâmetros
    ----------
    instance : Instance
        Instância com no máximo 2 fontes, 2 destinos, 3 dias e 4 armazenamentos.
    teg : TimeExpandedGraph
    assignment : bool, opcional
        Se ``False``, dispensa as bijeções e devolve o ótimo do problema
        relaxado.

    Retorna
    -------
    OracleResult

    Exceções
    --------
    OracleSizeError
        Se a instância exceder os limites de tamanho.
    """
    check_oracle_size(instance)
    best_value, best_model, best_x = math.inf, None, None
    patterns = residuals = 0
    for y in routing_patterns(instance, teg):
        patterns += 1
        problems = check_routing(instance, teg, y)
        if problems:
            raise AssertionError(f"enumerated routing violates {problems[0]}")
        model = build_refill_subproblem(instance, teg, y, assignment=assignment)
        transport = model.transport_cost.constant
        residual = _Residual(model)
        choices = _bijections(teg, instance, y) if assignment else [()]
        for choice in choices:
            lower = residual.form.lower.copy()
            upper = residual.form.upper.copy()
            for key, pairs in choice:
                chosen = set(pairs)
                for n, row in enumerate(model.beta[key]):
                    for m, beta in enumerate(row):
                        if beta is not None:
                            lower[beta.index] = upper[beta.index] = 1.0 if (n, m) in chosen else 0.0
            value, x = residual.minimum(lower, upper, best_value - transport)
            if x is not None and value + transport < best_value - PRUNE_TOL:
                best_value, best_model, best_x = value + transport, model, x
        residuals += residual.solved
    logger.info("Oracle: %d routing patterns, %d LPs, value %s", patterns, residuals, best_value)
    solution = None
    if best_model is not None:
        solution = extract_solution(best_model, best_x, objective=best_value, bound=best_value)
    return OracleResult(best_value, solution, patterns, residuals)
