"""
Modelo de fluxo do problema sobre o grafo expandido no tempo.

Três variantes compartilham o mesmo montador:

- ``full``: o problema completo, com a restrição de estoque não decrescente
  nas fontes (matrizes de atribuição);
- ``relaxed``: o mesmo sem as matrizes de atribuição, cujo ótimo é um limite
  inferior do completo;
- ``refill``: fluxo de armazenamentos fixo; só os arcos ativos carregam
  hidrogênio e o objetivo exclui o custo de transporte.

Classes
-------
PrpModel
    ``MilpModel`` com os índices das variáveis do problema.
CostBreakdown
    Parcelas do custo.
FlowSolution
    Valores de todas as variáveis do problema e o custo.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .exceptions import InstanceValidationError, RoutingInfeasibleError
from .instance import NOON, Instance, validate_instance
from .milp import (
    LinExpr,
    MilpModel,
    Sense,
    Variable,
    lin_sum,
    linearize_assignment,
    linearize_implication,
    linearize_min,
    linearize_product,
)
from .teg import ArcKind, TimeExpandedGraph, TimeIndex, build_teg

logger = logging.getLogger(__name__)

FULL = "full"
RELAXED = "relaxed"
REFILL = "refill"
VALUE_TOL = 1e-6


class PrpModel(MilpModel):
    """Modelo do problema com acesso às variáveis por arco, destino e fonte.

    Os dicionários ``y`` e ``f`` mapeiam cada arco para uma ``Variable`` ou,
    na variante ``refill``, para uma constante.
    """

    def __init__(self, name: str, instance: Instance, teg: TimeExpandedGraph, variant: str):
        super().__init__(name)
        self.instance = instance
        self.teg = teg
        self.variant = variant
        self.y: dict[int, Variable | float] = {}
        self.f: dict[int, Variable | float] = {}
        self.z_left: dict[tuple[int, int], Variable] = {}
        self.z_right: dict[tuple[int, int], Variable] = {}
        self.refill: dict[tuple[int, int], Variable] = {}
        self.unmet_flag: dict[tuple[int, int], Variable] = {}
        self.left_flag: dict[tuple[int, int], Variable] = {}
        self.right_flag: dict[tuple[int, int], Variable] = {}
        self.kept: dict[tuple[int, int], Variable] = {}
        self.beta: dict[tuple[int, int], list[list[Variable | None]]] = {}
        self.transport_cost = LinExpr()


def initial_flows(instance: Instance, teg: TimeExpandedGraph) -> dict[int, tuple[int, float]]:
    """Valores (y, f) dos arcos de R0 dados pela instância."""
    r0 = TimeIndex.right(0)
    values = {a: (0, 0.0) for a in teg.arc_ids_at(r0)}
    for d, destination in enumerate(instance.destinations):
        values[teg.dd(d, r0)] = (1, float(destination.initial_stock))
    for s, source in enumerate(instance.sources):
        for k, stock in enumerate(source.initial_storages, start=1):
            values[teg.sk(s, k, r0)] = (1, float(stock))
    return values


def demand_before_swap(instance: Instance, y_delivery, d: int, day: int) -> LinExpr:
    """Demanda da primeira parte do dia, com a hora de troca substituída.

    ``y_delivery[s]`` indica a entrega de ``s`` em ``d``; sem entrega a troca
    é contada ao meio-dia.
    """
    cumulative = instance.cumulative[d, day - 1]
    expr = LinExpr(constant=cumulative[NOON])
    for s, y in enumerate(y_delivery):
        hour = instance.swap_hours[s, d]
        expr.iadd(y, cumulative[hour] - cumulative[NOON])
    return expr


def _check_instance(instance: Instance):
    violations = validate_instance(instance)
    if violations:
        raise InstanceValidationError(violations)


def _build(instance: Instance, teg: TimeExpandedGraph, variant: str, fixed_y=None, assignment: bool | None = None) -> PrpModel:
    if assignment is None:
        assignment = variant != RELAXED
    capacity = instance.storage_capacity
    label = instance.name or "instance"
    model = PrpModel(f"{variant}-{label}", instance, teg, variant)

    for arc in teg.arcs:
        if fixed_y is None:
            model.y[arc.id] = model.add_binary(f"y_{arc.name}")
            model.f[arc.id] = model.add_variable(f"f_{arc.name}", upper=capacity)
        else:
            model.y[arc.id] = float(fixed_y[arc.id])
            model.f[arc.id] = (
                model.add_variable(f"f_{arc.name}", upper=capacity) if fixed_y[arc.id] else 0.0
            )
    y, f = model.y, model.f

    for a, (y0, f0) in initial_flows(instance, teg).items():
        name = teg.arcs[a].name
        if isinstance(y[a], Variable):
            model.add_constraint(y[a], Sense.EQ, y0, f"init_y_{name}")
        if isinstance(f[a], Variable):
            model.add_constraint(f[a], Sense.EQ, f0, f"init_f_{name}")

    for arc in teg.arcs:
        if isinstance(y[arc.id], Variable):
            linearize_implication(model, f[arc.id], y[arc.id], capacity, f"link_{arc.name}")

    for position in range(1, 2 * instance.horizon + 1):
        i = TimeIndex(position)
        for d in range(instance.n_destinations):
            a = teg.dd(d, i)
            if isinstance(y[a], Variable):
                model.add_constraint(y[a], Sense.EQ, 1.0, f"one_storage_d{d}_{i.label}")

    cost = instance.cost
    vdis_terms = LinExpr()
    fdis_terms = LinExpr()
    for day in range(1, instance.horizon + 1):
        left, right, previous = TimeIndex.left(day), TimeIndex.right(day), TimeIndex.right(day - 1)
        for d in range(instance.n_destinations):
            tag = f"d{d}_{day}"
            delivery = [y[teg.sd(s, d, day)] for s in range(instance.n_sources)]
            delivered = lin_sum(delivery)
            total = float(instance.cumulative[d, day - 1, -1])
            demand_left = demand_before_swap(instance, delivery, d, day)
            demand_right = total - demand_left
            stock_before = f[teg.dd(d, previous)]
            stock_left = f[teg.dd(d, left)]

            z_left = model.add_variable(f"zL_{tag}", upper=capacity)
            z_right = model.add_variable(f"zR_{tag}", upper=capacity)
            model.z_left[d, day] = z_left
            model.z_right[d, day] = z_right

            model.add_constraint(stock_left - stock_before + z_left, Sense.EQ, 0.0, f"consume_left_{tag}")
            model.left_flag[d, day] = model.add_binary(f"bL_{tag}")
            linearize_min(
                model, z_left, stock_before, demand_left, model.left_flag[d, day], capacity, f"serve_left_{tag}"
            )
            if not delivered.is_constant:
                model.add_constraint(delivered, Sense.LE, 1.0, f"one_delivery_{tag}")
            returns = lin_sum(y[teg.ds(d, s, right)] for s in range(instance.n_sources))
            if not (delivered - returns).is_constant:
                model.add_constraint(delivered - returns, Sense.EQ, 0.0, f"swap_return_{tag}")

            keep = 1.0 - delivered
            if keep.is_constant:
                kept = keep.constant * LinExpr.of(stock_left)
            else:
                kept = model.add_variable(f"p_{tag}", upper=capacity)
                model.kept[d, day] = kept
                linearize_product(model, kept, keep, stock_left, capacity, f"keep_{tag}")
            returned = lin_sum(f[teg.ds(d, s, right)] for s in range(instance.n_sources))
            swap_out = stock_left - kept - returned
            if not swap_out.is_constant:
                model.add_constraint(swap_out, Sense.EQ, 0.0, f"swap_out_{tag}")

            available = lin_sum(f[teg.sd(s, d, day)] for s in range(instance.n_sources)) + kept
            model.add_constraint(
                f[teg.dd(d, right)] - available + z_right, Sense.EQ, 0.0, f"consume_right_{tag}"
            )
            model.right_flag[d, day] = model.add_binary(f"bR_{tag}")
            linearize_min(
                model, z_right, available, demand_right, model.right_flag[d, day], capacity, f"serve_right_{tag}"
            )

            unmet = total - z_left - z_right
            flag = model.add_binary(f"u_{tag}")
            model.unmet_flag[d, day] = flag
            linearize_implication(model, unmet, flag, capacity, f"unmet_{tag}")
            vdis_terms.iadd(unmet)
            fdis_terms.iadd(flag)

        for s, source in enumerate(instance.sources):
            tag = f"s{s}_{day}"
            incoming = teg.source_in_arcs(s, day)
            outgoing = teg.source_out_arcs(s, day)
            y_in = [y[a] for a in incoming]
            y_out = [y[a] for a in outgoing]
            if not lin_sum(y_in).is_constant:
                model.add_constraint(lin_sum(y_in), Sense.LE, source.slot_limit, f"slots_{tag}")
            if not (lin_sum(y_in) - lin_sum(y_out)).is_constant:
                model.add_constraint(lin_sum(y_in) - lin_sum(y_out), Sense.EQ, 0.0, f"storage_balance_{tag}")

            refill = model.add_variable(f"r_{tag}", upper=source.refill_capacity)
            model.refill[s, day] = refill
            model.add_constraint(
                lin_sum(f[a] for a in incoming) + refill - lin_sum(f[a] for a in outgoing),
                Sense.EQ,
                0.0,
                f"hydrogen_balance_{tag}",
            )

            for k in range(1, source.slot_limit):
                upper_slot = y[teg.sk(s, k + 1, left)]
                lower_slot = y[teg.sk(s, k, left)]
                if not (LinExpr.of(upper_slot) - lower_slot).is_constant:
                    model.add_constraint(upper_slot - LinExpr.of(lower_slot), Sense.LE, 0.0, f"slot_order_{tag}_k{k}")
            for k in range(1, source.slot_limit + 1):
                a_left, a_right = teg.sk(s, k, left), teg.sk(s, k, right)
                if not (LinExpr.of(y[a_right]) - y[a_left]).is_constant:
                    model.add_constraint(y[a_right] - LinExpr.of(y[a_left]), Sense.EQ, 0.0, f"parked_y_{tag}_k{k}")
                if not (LinExpr.of(f[a_right]) - f[a_left]).is_constant:
                    model.add_constraint(f[a_right] - LinExpr.of(f[a_left]), Sense.EQ, 0.0, f"parked_f_{tag}_k{k}")

            if assignment:
                pairs = None
                if fixed_y is not None:
                    active_in = [n for n, a in enumerate(incoming) if fixed_y[a]]
                    active_out = [m for m, a in enumerate(outgoing) if fixed_y[a]]
                    pairs = [(n, m) for n in active_in for m in active_out]
                model.beta[s, day] = linearize_assignment(
                    model,
                    f"s{s}_L{day}",
                    [f[a] for a in incoming],
                    [f[a] for a in outgoing],
                    y_in,
                    y_out,
                    capacity,
                    pairs,
                )

            for d in range(instance.n_destinations):
                travel = instance.travel[s, d]
                model.transport_cost.iadd(y[teg.sd(s, d, day)], cost.transport * travel)
                model.transport_cost.iadd(y[teg.ds(d, s, right)], cost.transport * travel)

    refill_cost = lin_sum(
        instance.sources[s].refill_price * r for (s, _), r in model.refill.items()
    )
    objective = refill_cost + cost.variable_dissatisfaction * vdis_terms + cost.fixed_dissatisfaction * fdis_terms
    if variant != REFILL:
        objective = objective + model.transport_cost
    model.set_objective(objective)
    logger.info("Built %s", model.summary())
    return model


def build_full_model(instance: Instance, teg: TimeExpandedGraph | None = None) -> PrpModel:
    """Monta o problema completo.

    Parâmetros
    ----------
    instance : Instance
    teg : TimeExpandedGraph, opcional
        Grafo da instância; construído se omitido.

    Retorna
    -------
    PrpModel

    Exceções
    --------
    InstanceValidationError
        Se a instância violar alguma hipótese.
    """
    _check_instance(instance)
    return _build(instance, teg or build_teg(instance), FULL)


def build_relaxed_model(instance: Instance, teg: TimeExpandedGraph | None = None) -> PrpModel:
    """Monta o problema sem as matrizes de atribuição (limite inferior do completo)."""
    _check_instance(instance)
    return _build(instance, teg or build_teg(instance), RELAXED)


def build_refill_subproblem(instance: Instance, teg: TimeExpandedGraph, y, assignment: bool = True) -> PrpModel:
    """Monta o subproblema de recarga para um fluxo de armazenamentos fixo.

    Parâmetros
    ----------
    instance : Instance
    teg : TimeExpandedGraph
    y : array_like
        Valor 0/1 de cada arco.
    assignment : bool, opcional
        Se ``False``, omite as matrizes de atribuição (subproblema do
        problema relaxado).

    Retorna
    -------
    PrpModel
        Modelo com hidrogênio apenas nos arcos ativos; o objetivo soma recarga
        e insatisfação da demanda.

    Exceções
    --------
    RoutingInfeasibleError
        Se ``y`` violar as restrições de roteamento.
    """
    _check_instance(instance)
    y = np.asarray(y)
    problems = check_routing(instance, teg, y)
    if problems:
        family, _, detail = problems[0].partition(": ")
        raise RoutingInfeasibleError(family, detail)
    return _build(instance, teg, REFILL, fixed_y=np.round(y).astype(int), assignment=assignment)


def check_routing(instance: Instance, teg: TimeExpandedGraph, y) -> list[str]:
    """Verifica as restrições de roteamento de um fluxo de armazenamentos.

    Retorna
    -------
    list of str
        Uma entrada ``família: detalhe`` por violação; vazia se ``y`` for viável.
    """
    y = np.asarray(y, dtype=float)
    problems = []
    if y.shape != (len(teg),):
        return [f"shape: expected {len(teg)} arc values, got {y.shape}"]
    if (np.abs(y - np.round(y)) > VALUE_TOL).any():
        problems.append("binary: storage flow must be 0 or 1")
    y = np.round(y).astype(int)

    for a, (y0, _) in initial_flows(instance, teg).items():
        if y[a] != y0:
            problems.append(f"initial-storages: arc {teg.arcs[a].name} must be {y0}")
    for position in range(1, 2 * instance.horizon + 1):
        i = TimeIndex(position)
        for d in range(instance.n_destinations):
            if y[teg.dd(d, i)] != 1:
                problems.append(f"one-storage-per-destination: d{d} at {i.label}")
    for day in range(1, instance.horizon + 1):
        right = TimeIndex.right(day)
        left = TimeIndex.left(day)
        for d in range(instance.n_destinations):
            delivered = sum(y[teg.sd(s, d, day)] for s in range(instance.n_sources))
            returned = sum(y[teg.ds(d, s, right)] for s in range(instance.n_sources))
            if delivered > 1:
                problems.append(f"one-delivery-per-destination: d{d} on day {day}")
            if delivered != returned:
                problems.append(f"swap-returns: d{d} on day {day}")
        for s, source in enumerate(instance.sources):
            incoming = sum(y[a] for a in teg.source_in_arcs(s, day))
            outgoing = sum(y[a] for a in teg.source_out_arcs(s, day))
            if incoming > source.slot_limit:
                problems.append(f"source-slots: s{s} on day {day}")
            if incoming != outgoing:
                problems.append(f"source-storage-balance: s{s} on day {day}")
            for k in range(1, source.slot_limit):
                if y[teg.sk(s, k + 1, left)] > y[teg.sk(s, k, left)]:
                    problems.append(f"slot-order: s{s} slot {k + 1} on day {day}")
            for k in range(1, source.slot_limit + 1):
                if y[teg.sk(s, k, right)] != y[teg.sk(s, k, left)]:
                    problems.append(f"parked-storages: s{s} slot {k} on day {day}")
    return problems


def _deliveries(instance: Instance, teg: TimeExpandedGraph, y: np.ndarray) -> list[dict[int, int]]:
    """Fonte de cada entrega, por destino e dia."""
    deliveries: list[dict[int, int]] = [{} for _ in range(instance.n_destinations)]
    for day in range(1, instance.horizon + 1):
        for d in range(instance.n_destinations):
            for s in range(instance.n_sources):
                if y[teg.sd(s, d, day)]:
                    deliveries[d][day] = s
    return deliveries


def _delivery_need(instance: Instance, deliveries: dict[int, int], d: int, day: int) -> float:
    """Demanda servida pelo armazenamento entregue em ``day`` até a troca seguinte."""
    cumulative = instance.cumulative[d]
    need = cumulative[day - 1, -1] - cumulative[day - 1, instance.swap_hours[deliveries[day], d]]
    for later in range(day + 1, instance.horizon + 1):
        if later in deliveries:
            return need + cumulative[later - 1, instance.swap_hours[deliveries[later], d]]
        need += cumulative[later - 1, -1]
    return need


def routing_start(model: PrpModel, y) -> np.ndarray:
    """Solução viável de ``model`` com o fluxo de armazenamentos ``y``.

    Simula o hidrogênio dia a dia. Em cada fonte os armazenamentos que chegam
    mais cheios saem nas entregas de maior necessidade e recebem recarga,
    dentro da capacidade diária, até cobrir a demanda do destino até a troca
    seguinte; os armazenamentos parados não são recarregados. Cada saída
    recebe uma entrada com estoque menor ou igual, o que satisfaz as matrizes
    de atribuição. Nos destinos a demanda é atendida enquanto houver estoque.

    Parâmetros
    ----------
    model : PrpModel
        Qualquer variante; na ``refill`` ``y`` deve ser o fluxo fixado.
    y : array_like
        Valor 0/1 de cada arco.

    Retorna
    -------
    np.ndarray
        Valores das variáveis na ordem das colunas.

    Exceções
    --------
    RoutingInfeasibleError
        Se ``y`` violar as restrições de roteamento.
    """
    instance, teg = model.instance, model.teg
    problems = check_routing(instance, teg, y)
    if problems:
        family, _, detail = problems[0].partition(": ")
        raise RoutingInfeasibleError(family, detail)
    y = np.round(np.asarray(y, dtype=float)).astype(int)
    capacity = instance.storage_capacity
    deliveries = _deliveries(instance, teg, y)
    flow = np.zeros(len(teg))
    for a, (_, f0) in initial_flows(instance, teg).items():
        flow[a] = f0
    values = np.zeros(model.n_variables)

    def put(item, value):
        if isinstance(item, Variable):
            values[item.index] = value

    for day in range(1, instance.horizon + 1):
        left, right, previous = TimeIndex.left(day), TimeIndex.right(day), TimeIndex.right(day - 1)
        for s, source in enumerate(instance.sources):
            incoming = teg.source_in_arcs(s, day)
            outgoing = teg.source_out_arcs(s, day)
            need = {}
            for m, a in enumerate(outgoing):
                arc = teg.arcs[a]
                if y[a] and arc.kind is ArcKind.SOURCE_TO_DEST:
                    need[m] = _delivery_need(instance, deliveries[arc.destination], arc.destination, day)
            arriving = sorted((n for n, a in enumerate(incoming) if y[a]), key=lambda n: (-flow[incoming[n]], n))
            leaving = sorted(
                (m for m, a in enumerate(outgoing) if y[a]), key=lambda m: (m not in need, -need.get(m, 0.0), m)
            )
            budget = source.refill_capacity
            for n, m in zip(arriving, leaving):
                stock = flow[incoming[n]]
                top_up = min(max(need.get(m, 0.0) - stock, 0.0), capacity - stock, budget) if m in need else 0.0
                flow[outgoing[m]] = stock + top_up
                budget -= top_up
                beta = model.beta.get((s, day))
                if beta is not None:
                    put(beta[n][m], 1.0)
            put(model.refill[s, day], source.refill_capacity - budget)
            for k in range(1, source.slot_limit + 1):
                flow[teg.sk(s, k, right)] = flow[teg.sk(s, k, left)]

        for d in range(instance.n_destinations):
            cumulative = instance.cumulative[d, day - 1]
            source_id = deliveries[d].get(day)
            hour = NOON if source_id is None else instance.swap_hours[source_id, d]
            total = float(cumulative[-1])
            demand_left = float(cumulative[hour])
            demand_right = total - demand_left
            stock_before = flow[teg.dd(d, previous)]
            z_left = min(stock_before, demand_left)
            stock_left = stock_before - z_left
            flow[teg.dd(d, left)] = stock_left
            if source_id is None:
                kept = available = stock_left
            else:
                kept = 0.0
                flow[teg.ds(d, source_id, right)] = stock_left
                available = flow[teg.sd(source_id, d, day)]
            z_right = min(available, demand_right)
            flow[teg.dd(d, right)] = available - z_right
            put(model.z_left[d, day], z_left)
            put(model.z_right[d, day], z_right)
            put(model.left_flag[d, day], float(stock_before > demand_left))
            put(model.right_flag[d, day], float(available > demand_right))
            put(model.kept.get((d, day)), kept)
            put(model.unmet_flag[d, day], float(total - z_left - z_right > VALUE_TOL))

    for a in range(len(teg)):
        put(model.y[a], float(y[a]))
        put(model.f[a], flow[a])
    return values


@dataclass(frozen=True)
class CostBreakdown:
    """Parcelas do custo: transporte, recarga, insatisfação variável e fixa."""

    transport: float = 0.0
    refill: float = 0.0
    variable_dissatisfaction: float = 0.0
    fixed_dissatisfaction: float = 0.0

    @property
    def total(self) -> float:
        return self.transport + self.refill + self.variable_dissatisfaction + self.fixed_dissatisfaction

    def as_dict(self) -> dict[str, float]:
        return {
            "transport": self.transport,
            "refill": self.refill,
            "variable_dissatisfaction": self.variable_dissatisfaction,
            "fixed_dissatisfaction": self.fixed_dissatisfaction,
            "total": self.total,
        }


@dataclass
class FlowSolution:
    """Solução do problema.

    Atributos
    ----------
    y : np.ndarray
        Fluxo de armazenamentos (0/1) por arco.
    f : np.ndarray
        Fluxo de hidrogênio (kg) por arco.
    z_left, z_right : np.ndarray
        Demanda atendida antes e depois da troca, destinos × dias.
    refill : np.ndarray
        Hidrogênio comprado, fontes × dias.
    unmet_flag : np.ndarray
        Indicador de demanda não atendida, destinos × dias.
    beta : dict
        (fonte, dia) -> matriz de atribuição N_s × N_s; vazio para soluções
        do problema relaxado.
    swap_hours : np.ndarray
        Hora de fim da troca derivada, dias × fontes × destinos.
    costs : CostBreakdown
        Custo recalculado a partir dos valores.
    objective : float ou None
        Valor informado pelo resolvedor.
    bound : float ou None
        Limite inferior associado, quando houver.
    daily_demand : np.ndarray
        Demanda diária, destinos × dias.
    """

    y: np.ndarray
    f: np.ndarray
    z_left: np.ndarray
    z_right: np.ndarray
    refill: np.ndarray
    unmet_flag: np.ndarray
    beta: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    swap_hours: np.ndarray | None = None
    costs: CostBreakdown = field(default_factory=CostBreakdown)
    objective: float | None = None
    bound: float | None = None
    daily_demand: np.ndarray | None = None

    @property
    def cost(self) -> float:
        return self.costs.total

    @property
    def unmet(self) -> np.ndarray:
        return np.maximum(self.daily_demand - self.z_left - self.z_right, 0.0)

    @property
    def all_demand_met(self) -> bool:
        return bool((self.unmet <= VALUE_TOL).all())

    def to_frame(self, teg: TimeExpandedGraph) -> pd.DataFrame:
        """Uma linha por arco: tipo, tempo, cauda, cabeça, y e f."""
        return pd.DataFrame(
            {
                "arc": [a.name for a in teg.arcs],
                "kind": [a.kind.value for a in teg.arcs],
                "time": [a.time.label for a in teg.arcs],
                "tail": [teg.tail(a).location.label for a in teg.arcs],
                "head": [teg.head(a).location.label for a in teg.arcs],
                "y": self.y.astype(int),
                "f": self.f,
            }
        )

    def summary(self) -> dict:
        data = {"cost": self.costs.as_dict(), "objective": self.objective, "bound": self.bound}
        data["unmet_kg"] = float(self.unmet.sum())
        data["all_demand_met"] = self.all_demand_met
        data["refill_kg"] = float(self.refill.sum())
        return data


def extract_solution(model: PrpModel, values, objective: float | None = None, bound: float | None = None) -> FlowSolution:
    """Lê os valores de um ``PrpModel`` e monta a ``FlowSolution``.

    Binárias são arredondadas; o custo é recalculado por ``evaluate_cost``.
    """
    values = np.asarray(values, dtype=float)
    instance, teg = model.instance, model.teg

    def read(item) -> float:
        if isinstance(item, Variable):
            return float(values[item.index])
        return float(item)

    n_arcs = len(teg)
    y = np.array([round(read(model.y[a])) for a in range(n_arcs)], dtype=int)
    f = np.array([max(read(model.f[a]), 0.0) for a in range(n_arcs)]) * y
    shape = (instance.n_destinations, instance.horizon)
    z_left = np.zeros(shape)
    z_right = np.zeros(shape)
    unmet_flag = np.zeros(shape, dtype=int)
    for (d, day), var in model.z_left.items():
        z_left[d, day - 1] = read(var)
        z_right[d, day - 1] = read(model.z_right[d, day])
        unmet_flag[d, day - 1] = round(read(model.unmet_flag[d, day]))
    refill = np.zeros((instance.n_sources, instance.horizon))
    for (s, day), var in model.refill.items():
        refill[s, day - 1] = read(var)
    beta = {}
    for key, matrix in model.beta.items():
        beta[key] = np.array(
            [[0 if b is None else round(read(b)) for b in row] for row in matrix], dtype=int
        )
    solution = FlowSolution(
        y=y,
        f=f,
        z_left=z_left,
        z_right=z_right,
        refill=refill,
        unmet_flag=unmet_flag,
        beta=beta,
        swap_hours=derived_swap_hours(instance, teg, y),
        objective=objective,
        bound=bound,
        daily_demand=instance.daily_demand,
    )
    solution.costs = evaluate_cost(instance, solution, teg)
    return solution


def derived_swap_hours(instance: Instance, teg: TimeExpandedGraph, y) -> np.ndarray:
    """Hora de fim da troca por dia, fonte e destino: h0 + g(s, d) com entrega, meio-dia sem."""
    hours = np.full((instance.horizon, instance.n_sources, instance.n_destinations), NOON, dtype=int)
    for day in range(1, instance.horizon + 1):
        for s in range(instance.n_sources):
            for d in range(instance.n_destinations):
                if y[teg.sd(s, d, day)]:
                    hours[day - 1, s, d] = instance.swap_hours[s, d]
    return hours


def evaluate_cost(instance: Instance, solution: FlowSolution, teg: TimeExpandedGraph | None = None) -> CostBreakdown:
    """Recalcula as quatro parcelas do custo a partir de y, z, r e da demanda.

    Não usa a linha de objetivo do modelo. O custo fixo de insatisfação conta
    os pares (destino, dia) com demanda não atendida acima de 1e-6 kg.

    Exceções
    --------
    ValueError
        Se algum array da solução tiver dimensão incompatível com a instância.
    """
    teg = teg or build_teg(instance)
    shape = (instance.n_destinations, instance.horizon)
    if solution.y.shape != (len(teg),) or solution.z_left.shape != shape or solution.z_right.shape != shape:
        raise ValueError("solution does not match the instance dimensions")
    if solution.refill.shape != (instance.n_sources, instance.horizon):
        raise ValueError("refill values do not match the instance dimensions")
    cost = instance.cost
    travelled = 0.0
    for arc in teg.arcs:
        if arc.time.position == 0 or not solution.y[arc.id]:
            continue
        if arc.kind in (ArcKind.SOURCE_TO_DEST, ArcKind.DEST_TO_SOURCE):
            travelled += instance.travel[arc.source, arc.destination]
    prices = np.array([s.refill_price for s in instance.sources])
    unmet = np.maximum(instance.daily_demand - solution.z_left - solution.z_right, 0.0)
    return CostBreakdown(
        transport=cost.transport * travelled,
        refill=float(prices @ solution.refill.sum(axis=1)) if instance.n_sources else 0.0,
        variable_dissatisfaction=cost.variable_dissatisfaction * float(unmet.sum()),
        fixed_dissatisfaction=cost.fixed_dissatisfaction * int((unmet > VALUE_TOL).sum()),
    )


def destination_stock_frame(instance: Instance, teg: TimeExpandedGraph, solution: FlowSolution) -> pd.DataFrame:
    """Estoque do armazenamento parado em cada destino, por índice de tempo."""
    rows = []
    for position in range(2 * instance.horizon + 1):
        i = TimeIndex(position)
        for d in range(instance.n_destinations):
            rows.append({"destination": d, "time": i.label, "stock_kg": solution.f[teg.dd(d, i)]})
    return pd.DataFrame(rows, columns=["destination", "time", "stock_kg"])


def swap_hour_frame(instance: Instance, solution: FlowSolution) -> pd.DataFrame:
    """Horas de troca derivadas das entregas efetivas."""
    rows = []
    for day in range(1, instance.horizon + 1):
        for s in range(instance.n_sources):
            for d in range(instance.n_destinations):
                rows.append({"day": day, "source": s, "destination": d, "hour": int(solution.swap_hours[day - 1, s, d])})
    return pd.DataFrame(rows, columns=["day", "source", "destination", "hour"])


def solution_summary(instance: Instance, solution: FlowSolution) -> dict:
    """Resumo serializável em JSON: custos, limite, demanda não atendida e recarga por dia."""
    data = solution.summary()
    data["instance"] = instance.name
    data["unmet_by_day_kg"] = solution.unmet.sum(axis=0).round(9).tolist()
    data["refill_by_day_kg"] = solution.refill.sum(axis=0).round(9).tolist()
    data["deliveries"] = int(
        sum(
            solution.y[a.id]
            for a in build_teg(instance).arcs
            if a.kind is ArcKind.SOURCE_TO_DEST
        )
    )
    return data
