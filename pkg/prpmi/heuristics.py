"""
Métodos de resolução: modelo completo (MA), heurística em duas etapas (RH) e
heurística gulosa (GH).

Todos recebem ``solve``, a função que resolve um ``MilpModel`` sob
``SolveLimits`` (``solve_reference`` por padrão, ou um adaptador de
``run_external``).

Classes
-------
GreedyConfig
    Limiar de estoque crítico da heurística gulosa.
MethodResult
    Solução, limite inferior e situação de um método.
"""

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from . import config
from .exceptions import ParameterError, SolverError
from .instance import NOON, Instance
from .milp import MilpModel
from .model import (
    FlowSolution,
    PrpModel,
    build_full_model,
    build_refill_subproblem,
    build_relaxed_model,
    extract_solution,
    initial_flows,
    routing_start,
)
from .solver import SolveLimits, SolveOutcome, Status, relative_gap, solve_reference
from .teg import TimeExpandedGraph, TimeIndex, build_teg

logger = logging.getLogger(__name__)

SolveFunction = Callable[[MilpModel, SolveLimits], SolveOutcome]
METHODS = ("MA", "RH", "GH")


@dataclass(frozen=True)
class GreedyConfig:
    """Configuração da heurística gulosa.

    Atributos
    ----------
    critical_threshold : float
        Estoque (kg) abaixo do qual, inclusive, um destino é crítico.
    """

    critical_threshold: float = 100.0

    def check(self, capacity: float):
        if not 0 <= self.critical_threshold <= capacity:
            raise ParameterError(
                f"critical_threshold must lie in [0, {capacity}], got {self.critical_threshold}"
            )

    @classmethod
    def for_instance(cls, instance: Instance, threshold: float | None = None) -> "GreedyConfig":
        """Limiar informado, ou ``PRPMI_CRITICAL_THRESHOLD``, ou um terço da capacidade."""
        if threshold is None:
            threshold = config.CRITICAL_THRESHOLD
        if threshold is None:
            threshold = instance.storage_capacity / 3
        return cls(float(threshold))


@dataclass(frozen=True)
class MethodResult:
    """Resultado de um método.

    Atributos
    ----------
    method : str
        ``MA``, ``RH`` ou ``GH``.
    status : Status
    solution : FlowSolution ou None
    bound : float ou None
        Limite inferior (MA e RH).
    runtime : float
    message : str
    """

    method: str
    status: Status
    solution: FlowSolution | None = field(default=None, repr=False)
    bound: float | None = None
    runtime: float = 0.0
    message: str = ""

    @property
    def cost(self) -> float | None:
        return None if self.solution is None else self.solution.cost

    @property
    def gap(self) -> float | None:
        return relative_gap(self.cost, self.bound)


@dataclass(frozen=True)
class GreedyDay:
    """Decisões da heurística gulosa em um dia (usado para rastrear execuções)."""

    day: int
    stock_before: tuple[float, ...]
    available: tuple[int, ...]
    critical: tuple[int, ...]
    deliveries: dict[int, int]
    stock_after: tuple[float, ...]


def greedy_trace(instance: Instance, teg: TimeExpandedGraph, greedy: GreedyConfig | None = None):
    """Executa a heurística gulosa e devolve o fluxo ``y`` e as decisões de cada dia.

    Os destinos críticos são atendidos em ordem crescente de estoque (empate
    pelo menor índice), cada um pela fonte disponível de menor g(s, d) (empate
    pela menor fonte). O armazenamento trocado volta à mesma fonte e fica
    disponível no dia seguinte. Os armazenamentos enviados são considerados
    cheios.
    """
    greedy = greedy or GreedyConfig.for_instance(instance)
    greedy.check(instance.storage_capacity)
    capacity = instance.storage_capacity
    y = np.zeros(len(teg), dtype=int)
    for a, (y0, _) in initial_flows(instance, teg).items():
        y[a] = y0
    stock = [float(d.initial_stock) for d in instance.destinations]
    available = [len(s.initial_storages) for s in instance.sources]
    trace = []
    for day in range(1, instance.horizon + 1):
        left, right = TimeIndex.left(day), TimeIndex.right(day)
        remaining = list(available)
        critical = sorted(
            (d for d in range(instance.n_destinations) if stock[d] <= greedy.critical_threshold),
            key=lambda d: (stock[d], d),
        )
        deliveries: dict[int, int] = {}
        for d in critical:
            candidates = [s for s in range(instance.n_sources) if remaining[s] >= 1]
            if not candidates:
                break
            s = min(candidates, key=lambda s: (instance.transport.overhead(s, d), s))
            deliveries[d] = s
            remaining[s] -= 1

        for d in range(instance.n_destinations):
            y[teg.dd(d, left)] = y[teg.dd(d, right)] = 1
        for d, s in deliveries.items():
            y[teg.sd(s, d, day)] = 1
            y[teg.ds(d, s, right)] = 1
        for s in range(instance.n_sources):
            for k in range(1, remaining[s] + 1):
                y[teg.sk(s, k, left)] = y[teg.sk(s, k, right)] = 1

        before = tuple(stock)
        for d in range(instance.n_destinations):
            cumulative = instance.cumulative[d, day - 1]
            swap_hour = instance.swap_hours[deliveries[d], d] if d in deliveries else NOON
            demand_left = cumulative[swap_hour]
            demand_right = cumulative[-1] - demand_left
            kept = stock[d] - min(stock[d], demand_left)
            on_site = capacity if d in deliveries else kept
            stock[d] = on_site - min(on_site, demand_right)
        trace.append(GreedyDay(day, before, tuple(available), tuple(critical), deliveries, tuple(stock)))
        logger.debug("Greedy day %d: critical=%s deliveries=%s", day, critical, deliveries)
        available = [remaining[s] + sum(1 for c in deliveries.values() if c == s) for s in range(instance.n_sources)]
    return y, trace


def greedy_routing(instance: Instance, teg: TimeExpandedGraph, greedy: GreedyConfig | None = None) -> np.ndarray:
    """Fluxo de armazenamentos da heurística gulosa.

    Parâmetros
    ----------
    instance : Instance
    teg : TimeExpandedGraph
    greedy : GreedyConfig, opcional
        Padrão: um terço da capacidade dos armazenamentos.

    Retorna
    -------
    np.ndarray
        Valor 0/1 por arco, viável para as restrições de roteamento.

    Exceções
    --------
    ParameterError
        Se o limiar estiver fora de [0, S̄].
    """
    return greedy_trace(instance, teg, greedy)[0]


def routing_from_values(model: PrpModel, values) -> np.ndarray:
    """Fluxo de armazenamentos arredondado de uma solução de ``model``."""
    return np.array([round(values[model.y[a].index]) for a in range(len(model.teg))], dtype=int)


def solve_from_routing(model: PrpModel, y, limits: SolveLimits, solve: SolveFunction = solve_reference) -> SolveOutcome:
    """Resolve ``model``; o resolvedor de referência parte da solução do fluxo ``y``.

    Resolvedores externos não recebem solução inicial.
    """
    if solve is not solve_reference:
        return solve(model, limits)
    return solve_reference(model, limits, start=routing_start(model, y))


def _refill(
    instance: Instance, teg: TimeExpandedGraph, y, limits: SolveLimits | None, solve: SolveFunction
) -> tuple[SolveOutcome, FlowSolution]:
    limits = limits or SolveLimits()
    model = build_refill_subproblem(instance, teg, y)
    outcome = solve_from_routing(model, y, limits, solve)
    if not outcome.has_incumbent:
        raise SolverError(f"refill subproblem returned {outcome.status.value}: {outcome.message}")
    if outcome.status is not Status.OPTIMAL:
        logger.warning("Refill subproblem on %s ended with %s", instance.name or "instance", outcome.status.value)
    total = outcome.value + model.transport_cost.constant
    return outcome, extract_solution(model, outcome.values, objective=total)


def compute_phi(
    instance: Instance,
    teg: TimeExpandedGraph,
    y,
    limits: SolveLimits | None = None,
    solve: SolveFunction = solve_reference,
) -> tuple[float, FlowSolution]:
    """Valor e solução do subproblema de recarga para o fluxo ``y``.

    O valor devolvido é φ(y) (recarga mais insatisfação); o custo total da
    solução soma o transporte de ``y``. O resolvedor de referência parte da
    recarga gulosa de ``routing_start`` e por isso sempre devolve solução;
    se ``limits`` interromper a busca o valor pode estar acima do ótimo.

    Exceções
    --------
    RoutingInfeasibleError
        Se ``y`` violar as restrições de roteamento.
    SolverError
        Se o resolvedor não encontrar solução.
    """
    outcome, solution = _refill(instance, teg, y, limits, solve)
    return outcome.value, solution


def _combined(*statuses: Status) -> Status:
    return Status.OPTIMAL if all(s is Status.OPTIMAL for s in statuses) else Status.FEASIBLE_TIME_LIMIT


def greedy_method(
    instance: Instance,
    teg: TimeExpandedGraph | None = None,
    limits: SolveLimits | None = None,
    greedy: GreedyConfig | None = None,
    solve: SolveFunction = solve_reference,
) -> MethodResult:
    """GH: roteamento guloso seguido do subproblema de recarga.

    O status é o do subproblema: ``FeasibleTimeLimit`` se ele parar nos
    limites.
    """
    start = time.monotonic()
    teg = teg or build_teg(instance)
    y = greedy_routing(instance, teg, greedy)
    outcome, solution = _refill(instance, teg, y, limits, solve)
    status = _combined(outcome.status)
    return MethodResult("GH", status, solution, None, time.monotonic() - start, outcome.message)


def two_step_heuristic(
    instance: Instance,
    teg: TimeExpandedGraph | None = None,
    limits: SolveLimits | None = None,
    greedy: GreedyConfig | None = None,
    solve: SolveFunction = solve_reference,
) -> MethodResult:
    """RH: resolve o problema relaxado e recalcula o hidrogênio pelo subproblema.

    Parâmetros
    ----------
    instance : Instance
    teg : TimeExpandedGraph, opcional
    limits : SolveLimits, opcional
        Limites de cada etapa.
    greedy : GreedyConfig, opcional
        Roteamento guloso que dá a solução inicial da primeira etapa, e o
        fluxo usado quando ela termina sem solução.
    solve : callable, opcional

    Retorna
    -------
    MethodResult
        Solução viável para o problema completo e o limite do relaxado;
        ``FeasibleTimeLimit`` se alguma etapa parar nos limites.
    """
    start = time.monotonic()
    teg = teg or build_teg(instance)
    limits = limits or SolveLimits()
    relaxed = build_relaxed_model(instance, teg)
    outcome = solve_from_routing(relaxed, greedy_routing(instance, teg, greedy), limits, solve)
    status = outcome.status
    message = ""
    if outcome.has_incumbent:
        y = routing_from_values(relaxed, outcome.values)
    else:
        logger.warning(
            "Relaxed model on %s ended with %s and no incumbent; using greedy routing",
            instance.name or "instance",
            outcome.status.value,
        )
        y = greedy_routing(instance, teg, greedy)
        status = Status.FEASIBLE_TIME_LIMIT
        message = f"relaxed step: {outcome.status.value}; greedy routing used"
    refill, solution = _refill(instance, teg, y, limits, solve)
    bound = outcome.bound
    if bound is not None:
        bound = min(bound, solution.cost)
    solution.bound = bound
    return MethodResult("RH", _combined(status, refill.status), solution, bound, time.monotonic() - start, message)


def full_milp_method(
    instance: Instance,
    teg: TimeExpandedGraph | None = None,
    limits: SolveLimits | None = None,
    solve: SolveFunction = solve_reference,
    greedy: GreedyConfig | None = None,
) -> MethodResult:
    """MA: resolve o problema completo diretamente.

    O resolvedor de referência parte da solução do roteamento guloso.

    Exceções
    --------
    InstanceValidationError
        Se a instância violar alguma hipótese (antes de resolver).
    """
    start = time.monotonic()
    teg = teg or build_teg(instance)
    model = build_full_model(instance, teg)
    outcome = solve_from_routing(model, greedy_routing(instance, teg, greedy), limits or SolveLimits(), solve)
    solution = None
    if outcome.has_incumbent:
        solution = extract_solution(model, outcome.values, objective=outcome.value, bound=outcome.bound)
    return MethodResult("MA", outcome.status, solution, outcome.bound, time.monotonic() - start, outcome.message)


def run_method(
    method: str,
    instance: Instance,
    teg: TimeExpandedGraph | None = None,
    limits: SolveLimits | None = None,
    greedy: GreedyConfig | None = None,
    solve: SolveFunction = solve_reference,
) -> MethodResult:
    """Executa ``MA``, ``RH`` ou ``GH`` (sem diferenciar maiúsculas)."""
    match method.upper():
        case "MA":
            return full_milp_method(instance, teg, limits, solve, greedy)
        case "RH":
            return two_step_heuristic(instance, teg, limits, greedy, solve)
        case "GH":
            return greedy_method(instance, teg, limits, greedy, solve)
    raise ParameterError(f"unknown method {method!r}, expected one of {METHODS}")
