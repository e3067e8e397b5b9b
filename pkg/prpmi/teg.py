"""
Grafo expandido no tempo.

Os nós são pares (local, índice de tempo) e os arcos ligam índices de tempo
consecutivos. A ordem dos índices é R0 < L1 < R1 < ... < LJ < RJ, onde Lj é a
primeira parte do dia j (antes da troca) e Rj a segunda. Uma camada terminal
virtual sucede RJ para que os arcos que partem de RJ tenham cabeça definida.

Classes
-------
TimeIndex
    Índice de tempo.
ArcKind
    Tipo de arco.
Arc
    Arco do grafo.
TimeExpandedGraph
    Grafo completo com listas de adjacência.
"""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .exceptions import NoPredecessorError, ParameterError
from .instance import Instance


@dataclass(frozen=True, order=True)
class TimeIndex:
    """Índice de tempo.

    ``position`` é 0 para R0, ``2j - 1`` para Lj e ``2j`` para Rj. O índice
    terminal tem ``position = 2J + 1`` e ``terminal = True``.
    """

    position: int
    terminal: bool = False

    @classmethod
    def left(cls, day: int) -> "TimeIndex":
        if day < 1:
            raise ParameterError(f"first-part index needs a day >= 1, got {day}")
        return cls(2 * day - 1)

    @classmethod
    def right(cls, day: int) -> "TimeIndex":
        if day < 0:
            raise ParameterError(f"second-part index needs a day >= 0, got {day}")
        return cls(2 * day)

    @classmethod
    def end(cls, horizon: int) -> "TimeIndex":
        return cls(2 * horizon + 1, terminal=True)

    @property
    def is_left(self) -> bool:
        return not self.terminal and self.position % 2 == 1

    @property
    def is_right(self) -> bool:
        return not self.terminal and self.position % 2 == 0

    @property
    def day(self) -> int:
        return (self.position + 1) // 2

    @property
    def label(self) -> str:
        if self.terminal:
            return "T"
        return f"{'L' if self.is_left else 'R'}{self.day}"

    def __str__(self):
        return self.label


def time_indices(horizon: int) -> list[TimeIndex]:
    """Lista ordenada dos 2J + 1 índices de tempo (sem o terminal)."""
    return [TimeIndex(position) for position in range(2 * horizon + 1)]


def succ(i: TimeIndex, horizon: int) -> TimeIndex:
    """Sucessor de ``i``; o sucessor de RJ é o índice terminal.

    Exceções
    --------
    ParameterError
        Se ``i`` for o terminal ou estiver além do horizonte.
    """
    if i.terminal or i.position > 2 * horizon:
        raise ParameterError(f"{i} has no successor within horizon {horizon}")
    if i.position == 2 * horizon:
        return TimeIndex.end(horizon)
    return TimeIndex(i.position + 1)


def pred(i: TimeIndex) -> TimeIndex:
    """Predecessor de ``i``.

    Exceções
    --------
    NoPredecessorError
        Se ``i`` for R0.
    """
    if i.position == 0:
        raise NoPredecessorError("R0 has no predecessor")
    return TimeIndex(i.position - 1)


class ArcKind(Enum):
    SOURCE_TO_DEST = "source_to_dest"
    DEST_SELF = "dest_self"
    DEST_TO_SOURCE = "dest_to_source"
    SOURCE_SELF = "source_self"


class Location(NamedTuple):
    kind: str
    index: int

    @property
    def label(self) -> str:
        return f"{self.kind}{self.index}"


class Node(NamedTuple):
    location: Location
    time: TimeIndex

    @property
    def label(self) -> str:
        return f"({self.location.label}, {self.time.label})"


def source_location(s: int) -> Location:
    return Location("s", s)


def destination_location(d: int) -> Location:
    return Location("d", d)


@dataclass(frozen=True)
class Arc:
    """Arco do grafo.

    Atributos
    ----------
    id : int
        Identificador denso, igual à posição em ``TimeExpandedGraph.arcs``.
    kind : ArcKind
    time : TimeIndex
        Índice de tempo da cauda.
    source : int ou None
    destination : int ou None
    slot : int ou None
        Vaga ``k`` (a partir de 1) dos arcos fonte-fonte.
    """

    id: int
    kind: ArcKind
    time: TimeIndex
    source: int | None = None
    destination: int | None = None
    slot: int | None = None

    @property
    def tail_location(self) -> Location:
        if self.kind in (ArcKind.SOURCE_TO_DEST, ArcKind.SOURCE_SELF):
            return source_location(self.source)
        return destination_location(self.destination)

    @property
    def head_location(self) -> Location:
        if self.kind in (ArcKind.DEST_TO_SOURCE, ArcKind.SOURCE_SELF):
            return source_location(self.source)
        return destination_location(self.destination)

    @property
    def name(self) -> str:
        """Nome estável, usado nos nomes de variáveis do modelo."""
        t = self.time.label
        match self.kind:
            case ArcKind.SOURCE_TO_DEST:
                return f"s{self.source}_d{self.destination}_{t}"
            case ArcKind.DEST_SELF:
                return f"d{self.destination}_d{self.destination}_{t}"
            case ArcKind.DEST_TO_SOURCE:
                return f"d{self.destination}_s{self.source}_{t}"
            case ArcKind.SOURCE_SELF:
                return f"s{self.source}k{self.slot}_{t}"


_KIND_CODES = {kind: code for code, kind in enumerate(ArcKind)}


class TimeExpandedGraph:
    """Grafo expandido no tempo de uma instância.

    Os arcos de um mesmo índice de tempo ocupam um intervalo contíguo de
    identificadores. Os atributos ``kinds``, ``positions``, ``sources``,
    ``destinations`` e ``slots`` guardam os arcos como arrays (``-1`` quando
    o campo não se aplica).

    Atributos
    ----------
    horizon : int
    n_sources : int
    n_destinations : int
    slot_limits : tuple of int
    arcs : list of Arc
    out_arcs : dict
        Nó -> identificadores dos arcos que saem do nó.
    in_arcs : dict
        Nó -> identificadores dos arcos que chegam ao nó.
    """

    __slots__ = (
        "horizon",
        "n_sources",
        "n_destinations",
        "slot_limits",
        "arcs",
        "kinds",
        "positions",
        "sources",
        "destinations",
        "slots",
        "out_arcs",
        "in_arcs",
        "_layers",
        "_sd",
        "_dd",
        "_ds",
        "_sk",
    )

    def __init__(self, horizon: int, n_sources: int, n_destinations: int, slot_limits):
        self.horizon = horizon
        self.n_sources = n_sources
        self.n_destinations = n_destinations
        self.slot_limits = tuple(slot_limits)
        self.arcs: list[Arc] = []
        self._layers: list[range] = []
        self._sd: dict[tuple[int, int, int], int] = {}
        self._dd: dict[tuple[int, int], int] = {}
        self._ds: dict[tuple[int, int, int], int] = {}
        self._sk: dict[tuple[int, int, int], int] = {}
        self._build_arcs()
        self._build_arrays()
        self._build_adjacency()

    def _add(self, kind, time, source=None, destination=None, slot=None) -> int:
        arc = Arc(len(self.arcs), kind, time, source, destination, slot)
        self.arcs.append(arc)
        return arc.id

    def _build_arcs(self):
        for i in time_indices(self.horizon):
            start = len(self.arcs)
            p = i.position
            if i.is_left:
                for s in range(self.n_sources):
                    for d in range(self.n_destinations):
                        self._sd[s, d, i.day] = self._add(ArcKind.SOURCE_TO_DEST, i, source=s, destination=d)
            else:
                for d in range(self.n_destinations):
                    for s in range(self.n_sources):
                        self._ds[d, s, p] = self._add(ArcKind.DEST_TO_SOURCE, i, source=s, destination=d)
            for d in range(self.n_destinations):
                self._dd[d, p] = self._add(ArcKind.DEST_SELF, i, destination=d)
            for s, limit in enumerate(self.slot_limits):
                for k in range(1, limit + 1):
                    self._sk[s, k, p] = self._add(ArcKind.SOURCE_SELF, i, source=s, slot=k)
            self._layers.append(range(start, len(self.arcs)))

    def _build_arrays(self):
        def column(values):
            return np.array([-1 if v is None else v for v in values], dtype=int)

        self.kinds = np.array([_KIND_CODES[a.kind] for a in self.arcs], dtype=int)
        self.positions = np.array([a.time.position for a in self.arcs], dtype=int)
        self.sources = column(a.source for a in self.arcs)
        self.destinations = column(a.destination for a in self.arcs)
        self.slots = column(a.slot for a in self.arcs)

    def _build_adjacency(self):
        out_arcs: dict[Node, list[int]] = {}
        in_arcs: dict[Node, list[int]] = {}
        for node in self.nodes():
            out_arcs[node] = []
            in_arcs[node] = []
        for arc in self.arcs:
            out_arcs[self.tail(arc)].append(arc.id)
            in_arcs[self.head(arc)].append(arc.id)
        self.out_arcs = {node: tuple(ids) for node, ids in out_arcs.items()}
        self.in_arcs = {node: tuple(ids) for node, ids in in_arcs.items()}

    @classmethod
    def from_instance(cls, instance: Instance) -> "TimeExpandedGraph":
        return cls(
            instance.horizon,
            instance.n_sources,
            instance.n_destinations,
            [s.slot_limit for s in instance.sources],
        )

    @property
    def terminal(self) -> TimeIndex:
        return TimeIndex.end(self.horizon)

    def locations(self) -> list[Location]:
        return [source_location(s) for s in range(self.n_sources)] + [
            destination_location(d) for d in range(self.n_destinations)
        ]

    def nodes(self, include_terminal: bool = True) -> list[Node]:
        times = time_indices(self.horizon)
        if include_terminal:
            times.append(self.terminal)
        return [Node(location, i) for i in times for location in self.locations()]

    def succ(self, i: TimeIndex) -> TimeIndex:
        return succ(i, self.horizon)

    def pred(self, i: TimeIndex) -> TimeIndex:
        return pred(i)

    def arc(self, arc_id: int) -> Arc:
        return self.arcs[arc_id]

    def tail(self, arc: Arc | int) -> Node:
        arc = self.arcs[arc] if isinstance(arc, (int, np.integer)) else arc
        return Node(arc.tail_location, arc.time)

    def head(self, arc: Arc | int) -> Node:
        arc = self.arcs[arc] if isinstance(arc, (int, np.integer)) else arc
        return Node(arc.head_location, self.succ(arc.time))

    def day(self, arc: Arc | int) -> TimeIndex:
        arc = self.arcs[arc] if isinstance(arc, (int, np.integer)) else arc
        return arc.time

    def arc_ids_at(self, i: TimeIndex) -> range:
        """Identificadores dos arcos cuja cauda está no índice ``i``."""
        if i.terminal or not 0 <= i.position <= 2 * self.horizon:
            return range(0)
        return self._layers[i.position]

    def arcs_at(self, i: TimeIndex) -> list[Arc]:
        return [self.arcs[a] for a in self.arc_ids_at(i)]

    def sd(self, s: int, d: int, day: int) -> int:
        """Arco (s, d, Lj)."""
        return self._sd[s, d, day]

    def dd(self, d: int, i: TimeIndex) -> int:
        """Arco (d, d, i)."""
        return self._dd[d, i.position]

    def ds(self, d: int, s: int, i: TimeIndex) -> int:
        """Arco (d, s, i), com ``i`` = R0 ou Rj."""
        return self._ds[d, s, i.position]

    def sk(self, s: int, k: int, i: TimeIndex) -> int:
        """Arco (s:k, i), com ``k`` a partir de 1."""
        return self._sk[s, k, i.position]

    def slot_count(self, s: int) -> int:
        """Tamanho N_s = |D| + κ(s) dos vetores de entrada e saída da fonte ``s``."""
        return self.n_destinations + self.slot_limits[s]

    def source_in_arcs(self, s: int, day: int) -> list[int]:
        """Vetor de arcos de entrada de (s, Lj): (d_n, s, Rj-1) e depois (s:k, Rj-1)."""
        i = TimeIndex.right(day - 1)
        return [self.ds(d, s, i) for d in range(self.n_destinations)] + [
            self.sk(s, k, i) for k in range(1, self.slot_limits[s] + 1)
        ]

    def source_out_arcs(self, s: int, day: int) -> list[int]:
        """Vetor de arcos de saída de (s, Lj): (s, d_n, Lj) e depois (s:k, Lj)."""
        i = TimeIndex.left(day)
        return [self.sd(s, d, day) for d in range(self.n_destinations)] + [
            self.sk(s, k, i) for k in range(1, self.slot_limits[s] + 1)
        ]

    def family_sizes(self) -> dict[str, int]:
        """Tamanho de cada família de arcos: ``under`` (partem de Lj), ``over`` e ``self``."""
        sizes = {"under": 0, "over": 0, "self": 0}
        for arc in self.arcs:
            if arc.kind is ArcKind.SOURCE_SELF:
                sizes["self"] += 1
            elif arc.time.is_left:
                sizes["under"] += 1
            else:
                sizes["over"] += 1
        return sizes

    def __len__(self):
        return len(self.arcs)

    def to_dot(self) -> str:
        """Representação DOT do grafo, com nós rotulados ``(v, i)``."""
        colors = {
            ArcKind.SOURCE_TO_DEST: "green",
            ArcKind.DEST_SELF: "black",
            ArcKind.DEST_TO_SOURCE: "orange",
            ArcKind.SOURCE_SELF: "blue",
        }
        lines = ["digraph teg {", "  rankdir=LR;"]
        for node in self.nodes():
            lines.append(f'  "{node.label}";')
        for arc in self.arcs:
            tail, head = self.tail(arc), self.head(arc)
            label = f' label="k{arc.slot}"' if arc.slot is not None else ""
            lines.append(f'  "{tail.label}" -> "{head.label}" [color={colors[arc.kind]}{label}];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def write_dot(self, path: str | Path):
        Path(path).write_text(self.to_dot(), encoding="utf-8")


def build_teg(instance: Instance) -> TimeExpandedGraph:
    """Constrói o grafo expandido no tempo da instância."""
    return TimeExpandedGraph.from_instance(instance)


def tail(teg: TimeExpandedGraph, arc: Arc | int) -> Node:
    return teg.tail(arc)


def head(teg: TimeExpandedGraph, arc: Arc | int) -> Node:
    return teg.head(arc)


def day(teg: TimeExpandedGraph, arc: Arc | int) -> TimeIndex:
    return teg.day(arc)


def arcs_at(teg: TimeExpandedGraph, i: TimeIndex) -> list[Arc]:
    return teg.arcs_at(i)
