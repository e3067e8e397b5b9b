"""
Decodificação de uma solução de fluxo em planos de transporte por armazenamento.

Cada armazenamento parte de um arco ativo de R0 e segue, camada a camada,
pelas aplicações ``theta_under`` (de Rj-1 para Lj) e ``theta_over`` (de Lj
para Rj), que são bijeções entre camadas consecutivas e preservam o fluxo
de armazenamentos.

Classes
-------
TransportPlan
    Sequência de arcos de um armazenamento.
SourceBijections
    Bijeções estendidas nas fontes e bijeções das trocas nos destinos.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .exceptions import DecodeError
from .model import FlowSolution
from .teg import ArcKind, TimeExpandedGraph, TimeIndex

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransportPlan:
    """Plano de um armazenamento: um arco por índice de tempo, de R0 a RJ."""

    storage_id: int
    arcs: tuple[int, ...]

    def __len__(self):
        return len(self.arcs)


@dataclass
class SourceBijections:
    """Bijeções usadas na decodificação.

    Atributos
    ----------
    sigma_bar : dict
        (fonte, dia) -> tupla ``m = sigma_bar[n]`` sobre as N_s posições.
    sigma_hat : dict
        (destino, dia) -> {fonte de arco de entrega inativo: fonte do arco de
        retorno inativo}.
    """

    sigma_bar: dict[tuple[int, int], tuple[int, ...]] = field(default_factory=dict)
    sigma_hat: dict[tuple[int, int], dict[int, int]] = field(default_factory=dict)


def extend_bijection(beta, y_in, y_out) -> tuple[int, ...]:
    """Estende a bijeção entre entradas e saídas ativas a todas as posições.

    Parâmetros
    ----------
    beta : array_like ou None
        Matriz de atribuição N × N; ``None`` pareia as posições ativas em
        ordem crescente.
    y_in, y_out : array_like
        Presença de armazenamento em cada posição de entrada e de saída.

    Retorna
    -------
    tuple of int
        ``sigma[n]`` é a saída associada à entrada ``n``. Posições inativas
        são pareadas em ordem crescente.

    Exceções
    --------
    DecodeError
        Se os números de entradas e saídas ativas diferirem ou ``beta`` não
        for uma bijeção entre elas.
    """
    y_in = np.asarray(y_in, dtype=int)
    y_out = np.asarray(y_out, dtype=int)
    active_in = np.flatnonzero(y_in == 1)
    active_out = np.flatnonzero(y_out == 1)
    if len(active_in) != len(active_out):
        raise DecodeError(
            f"{len(active_in)} incoming storages but {len(active_out)} outgoing storages"
        )
    sigma = [-1] * len(y_in)
    if beta is None:
        for n, m in zip(active_in, active_out):
            sigma[n] = int(m)
    else:
        beta = np.asarray(beta)
        for n in active_in:
            targets = [m for m in np.flatnonzero(beta[n] == 1) if y_out[m] == 1]
            if len(targets) != 1:
                raise DecodeError(f"assignment row {n} selects {len(targets)} active outputs")
            sigma[n] = int(targets[0])
        if sorted(sigma[n] for n in active_in) != list(active_out):
            raise DecodeError("assignment is not a bijection between active storages")
    inactive_in = np.flatnonzero(y_in == 0)
    inactive_out = np.flatnonzero(y_out == 0)
    for n, m in zip(inactive_in, inactive_out):
        sigma[n] = int(m)
    return tuple(sigma)


def source_bijections(teg: TimeExpandedGraph, solution: FlowSolution) -> SourceBijections:
    """Calcula as bijeções de todas as fontes e destinos em todos os dias."""
    y = solution.y
    result = SourceBijections()
    for day in range(1, teg.horizon + 1):
        for s in range(teg.n_sources):
            y_in = [y[a] for a in teg.source_in_arcs(s, day)]
            y_out = [y[a] for a in teg.source_out_arcs(s, day)]
            try:
                result.sigma_bar[s, day] = extend_bijection(solution.beta.get((s, day)), y_in, y_out)
            except DecodeError as exc:
                raise DecodeError(f"source s{s} on day {day}: {exc}") from exc
        right = TimeIndex.right(day)
        for d in range(teg.n_destinations):
            idle_deliveries = [s for s in range(teg.n_sources) if not y[teg.sd(s, d, day)]]
            idle_returns = [s for s in range(teg.n_sources) if not y[teg.ds(d, s, right)]]
            if len(idle_deliveries) != len(idle_returns):
                raise DecodeError(f"destination d{d} on day {day}: deliveries and returns differ")
            result.sigma_hat[d, day] = dict(zip(idle_deliveries, idle_returns))
    return result


def theta_under(teg: TimeExpandedGraph, bijections: SourceBijections, day: int) -> dict[int, int]:
    """Aplicação dos arcos de R(day-1) nos arcos de L(day).

    Destinos mantêm o armazenamento; arcos que chegam à fonte seguem a
    bijeção estendida da fonte.
    """
    previous, left = TimeIndex.right(day - 1), TimeIndex.left(day)
    mapping = {}
    for arc in teg.arcs_at(previous):
        if arc.kind is ArcKind.DEST_SELF:
            mapping[arc.id] = teg.dd(arc.destination, left)
            continue
        if arc.kind is ArcKind.DEST_TO_SOURCE:
            position = arc.destination
        else:
            position = teg.n_destinations + arc.slot - 1
        sigma = bijections.sigma_bar[arc.source, day]
        mapping[arc.id] = teg.source_out_arcs(arc.source, day)[sigma[position]]
    return mapping


def theta_over(teg: TimeExpandedGraph, solution: FlowSolution, bijections: SourceBijections, day: int) -> dict[int, int]:
    """Aplicação dos arcos de L(day) nos arcos de R(day).

    Um armazenamento entregue fica no destino; o que estava no destino volta
    pelo arco de retorno ativo; sem troca, o destino mantém o seu. Vagas da
    fonte seguem paradas e entregas inativas seguem ``sigma_hat``.
    """
    y = solution.y
    left, right = TimeIndex.left(day), TimeIndex.right(day)
    mapping = {}
    for arc in teg.arcs_at(left):
        match arc.kind:
            case ArcKind.SOURCE_SELF:
                mapping[arc.id] = teg.sk(arc.source, arc.slot, right)
            case ArcKind.SOURCE_TO_DEST if y[arc.id]:
                mapping[arc.id] = teg.dd(arc.destination, right)
            case ArcKind.SOURCE_TO_DEST:
                target = bijections.sigma_hat[arc.destination, day][arc.source]
                mapping[arc.id] = teg.ds(arc.destination, target, right)
            case ArcKind.DEST_SELF:
                d = arc.destination
                returns = [s for s in range(teg.n_sources) if y[teg.ds(d, s, right)]]
                mapping[arc.id] = teg.ds(d, returns[0], right) if returns else teg.dd(d, right)
    return mapping


def check_flow_count(teg: TimeExpandedGraph, solution: FlowSolution) -> pd.Series:
    """Número de arcos ativos em cada índice de tempo de R0 a RJ.

    Em uma solução viável todos os valores são iguais ao número de
    armazenamentos.
    """
    labels, counts = [], []
    for position in range(2 * teg.horizon + 1):
        i = TimeIndex(position)
        labels.append(i.label)
        counts.append(int(sum(solution.y[a] for a in teg.arc_ids_at(i))))
    return pd.Series(counts, index=pd.Index(labels, name="time"), name="active_arcs", dtype=int)


def _check_preserved(teg: TimeExpandedGraph, solution: FlowSolution, mapping: dict[int, int]):
    for a, b in mapping.items():
        if solution.y[a] != solution.y[b]:
            raise DecodeError(
                f"storage flow not conserved between {teg.arcs[a].name} (y={solution.y[a]}) "
                f"and {teg.arcs[b].name} (y={solution.y[b]})"
            )
    if len(set(mapping.values())) != len(mapping):
        raise DecodeError("layer map is not a bijection")


def derive_transport_plans(teg: TimeExpandedGraph, solution: FlowSolution) -> list[TransportPlan]:
    """Decodifica a solução em um plano por armazenamento.

    Parâmetros
    ----------
    teg : TimeExpandedGraph
    solution : FlowSolution
        Solução viável do problema.

    Retorna
    -------
    list of TransportPlan
        Um plano por arco ativo de R0, na ordem dos arcos; os planos não
        compartilham arcos e cobrem todos os arcos ativos.

    Exceções
    --------
    DecodeError
        Se a solução não conservar o fluxo de armazenamentos; a mensagem
        indica o primeiro ponto de violação.
    """
    r0 = TimeIndex.right(0)
    seeds = [a for a in teg.arc_ids_at(r0) if solution.y[a]]
    counts = check_flow_count(teg, solution)
    wrong = counts[counts != len(seeds)]
    if not wrong.empty:
        raise DecodeError(
            f"{wrong.iloc[0]} active arcs at {wrong.index[0]}, expected {len(seeds)}"
        )
    bijections = source_bijections(teg, solution)
    paths = [[a] for a in seeds]
    for day in range(1, teg.horizon + 1):
        for mapping in (
            theta_under(teg, bijections, day),
            theta_over(teg, solution, bijections, day),
        ):
            _check_preserved(teg, solution, mapping)
            for path in paths:
                path.append(mapping[path[-1]])
    logger.debug("Decoded %d transport plans over %d days", len(paths), teg.horizon)
    return [TransportPlan(k, tuple(path)) for k, path in enumerate(paths)]


def physical_itinerary(teg: TimeExpandedGraph, solution: FlowSolution, plan: TransportPlan) -> list[dict]:
    """Local e carga do armazenamento em cada índice de tempo de R0 a RJ.

    O local em cada índice é a cauda do arco do plano, isto é, a cabeça do
    arco anterior; a cabeça do último arco (índice terminal) é descartada.
    """
    return [
        {
            "storage_id": plan.storage_id,
            "time": teg.arcs[a].time.label,
            "location": teg.arcs[a].tail_location.label,
            "carried_kg": float(solution.f[a]),
        }
        for a in plan.arcs
    ]


def plans_frame(teg: TimeExpandedGraph, solution: FlowSolution, plans: list[TransportPlan] | None = None) -> pd.DataFrame:
    """Tabela dos planos: storage_id, time, location, carried_kg."""
    if plans is None:
        plans = derive_transport_plans(teg, solution)
    rows = [row for plan in plans for row in physical_itinerary(teg, solution, plan)]
    return pd.DataFrame(rows, columns=["storage_id", "time", "location", "carried_kg"])
