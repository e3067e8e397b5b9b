"""
Instâncias do problema de roteamento com estoques móveis.

Define os tipos de uma instância (fontes, destinos, transporte, custos), o
gerador de instâncias sintéticas, a validação das hipóteses do problema e a
leitura/escrita em JSON.

Classes
-------
SourceSpec
    Fonte de hidrogênio com capacidade e preço de recarga.
DestinationSpec
    Destino com demanda horária e o estoque inicial do seu armazenamento.
TransportSpec
    Tempos de viagem e horários de partida.
CostSpec
    Custos unitários de transporte e de insatisfação da demanda.
Instance
    Instância completa.
GenerationSpec
    Parâmetros do gerador de instâncias.
Violation
    Condição violada por uma instância.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator

from .exceptions import (
    IndexRangeError,
    InstanceSchemaError,
    InstanceValidationError,
    ParameterError,
)

logger = logging.getLogger(__name__)

HOURS = 24
NOON = 12
SCHEMA_VERSION = 1

# (refill capacity kg/day, refill price EUR/kg) of sources s1..s7
SOURCE_TABLE = (
    (1300.0, 9.0),
    (1500.0, 8.0),
    (1700.0, 8.3),
    (1000.0, 8.0),
    (1000.0, 8.0),
    (800.0, 10.0),
    (500.0, 7.0),
)
SLOT_LIMIT = 4
STORAGE_CAPACITY = 300.0
INITIAL_STOCK = 200.0
DEPART_HOUR = 8
LOAD_TIME = 0
SWAP_TIME = 1
SPEED = 60.0
UNIT_TRANSPORT_COST = 2.25
DISTANCE_RANGE = (1, 123)
DEFAULT_HORIZON = 7

PEAK_HOURS = (8, 14, 17)
PEAK_HALF_WIDTH = 3.0
PEAK_WEIGHT_RANGE = (0.5, 1.5)
# day-of-week (0 = first day of the horizon) -> demand factor
WEEKEND_FACTORS = {5: 0.5, 6: 0.25}

DEMAND_MAGNITUDES = (85.0, 130.0)
DISSATISFACTION_PROFILES = ((12.0, 1500.0), (14.0, 2500.0))
DEST_RATIO_RANGE = (4.33, 8.5)
STORAGE_RATIO_RANGE = (1.26, 1.5)
MAX_SOURCES = len(SOURCE_TABLE)


@dataclass(frozen=True)
class SourceSpec:
    """Fonte de hidrogênio.

    Atributos
    ----------
    id : int
        Posição da fonte na instância.
    refill_capacity : float
        Capacidade máxima de recarga por dia (kg).
    refill_price : float
        Preço do hidrogênio (€/kg).
    slot_limit : int
        Número máximo de armazenamentos parados na fonte.
    initial_storages : tuple of float
        Estoque inicial (kg) de cada armazenamento parado na fonte no início.
    """

    id: int
    refill_capacity: float
    refill_price: float
    slot_limit: int
    initial_storages: tuple[float, ...] = ()


@dataclass(frozen=True)
class DestinationSpec:
    """Destino (estação de abastecimento).

    Atributos
    ----------
    id : int
        Posição do destino na instância.
    hourly_demand : tuple of tuple of float
        Demanda horária em kg, uma linha de 24 valores por dia.
    initial_stock : float
        Estoque inicial (kg) do armazenamento parado no destino.
    """

    id: int
    hourly_demand: tuple[tuple[float, ...], ...]
    initial_stock: float


@dataclass(frozen=True)
class TransportSpec:
    """Parâmetros de transporte.

    ``travel_time`` é a grandeza custeada (escala de km, simétrica). As horas
    usadas na divisão do dia são ``ceil(travel_time / speed)``.

    Atributos
    ----------
    travel_time : tuple of tuple
        Matriz fontes × destinos.
    depart_hour : int
        Hora de partida dos caminhões.
    load_time : int
        Horas de carga na fonte.
    swap_time : int
        Horas da troca no destino.
    speed : float
        Unidades de ``travel_time`` percorridas por hora.
    """

    travel_time: tuple[tuple[float, ...], ...]
    depart_hour: int = DEPART_HOUR
    load_time: int = LOAD_TIME
    swap_time: int = SWAP_TIME
    speed: float = SPEED

    def driving_hours(self, s: int, d: int) -> int:
        return math.ceil(self.travel_time[s][d] / self.speed)

    def overhead(self, s: int, d: int) -> int:
        """Horas entre a partida e o fim da troca, g(s, d)."""
        return self.load_time + self.driving_hours(s, d) + self.swap_time

    def swap_hour(self, s: int, d: int) -> int:
        return self.depart_hour + self.overhead(s, d)


@dataclass(frozen=True)
class CostSpec:
    """Custos unitários.

    Atributos
    ----------
    transport : float
        Custo por unidade de ``travel_time`` percorrida.
    variable_dissatisfaction : float
        Custo por kg de demanda não atendida.
    fixed_dissatisfaction : float
        Custo por dia e destino com demanda não atendida.
    """

    transport: float = UNIT_TRANSPORT_COST
    variable_dissatisfaction: float = DISSATISFACTION_PROFILES[0][0]
    fixed_dissatisfaction: float = DISSATISFACTION_PROFILES[0][1]


@dataclass(frozen=True)
class Instance:
    """Instância completa do problema.

    Imutável; os arrays derivados são calculados uma única vez.

    Atributos
    ----------
    sources : tuple of SourceSpec
    destinations : tuple of DestinationSpec
    horizon : int
        Número de dias J.
    storage_capacity : float
        Capacidade S̄ de cada armazenamento (kg).
    cost : CostSpec
    transport : TransportSpec
    name : str
        Rótulo livre.
    """

    sources: tuple[SourceSpec, ...]
    destinations: tuple[DestinationSpec, ...]
    horizon: int
    storage_capacity: float
    cost: CostSpec
    transport: TransportSpec
    name: str = ""

    @property
    def n_sources(self) -> int:
        return len(self.sources)

    @property
    def n_destinations(self) -> int:
        return len(self.destinations)

    @property
    def n_storages(self) -> int:
        return self.n_destinations + sum(len(s.initial_storages) for s in self.sources)

    @property
    def total_slots(self) -> int:
        return sum(s.slot_limit for s in self.sources)

    @cached_property
    def demand(self) -> np.ndarray:
        """Demanda horária, array destinos × dias × 24."""
        if not self.destinations:
            return np.zeros((0, self.horizon, HOURS))
        return np.array([d.hourly_demand for d in self.destinations], dtype=float).reshape(
            self.n_destinations, self.horizon, HOURS
        )

    @cached_property
    def cumulative(self) -> np.ndarray:
        """Demanda acumulada desde a meia-noite, array destinos × dias × 24."""
        return np.cumsum(self.demand, axis=2)

    @cached_property
    def daily_demand(self) -> np.ndarray:
        return self.demand.sum(axis=2)

    @cached_property
    def swap_hours(self) -> np.ndarray:
        """Hora de fim da troca h0 + g(s, d), array fontes × destinos."""
        return np.array(
            [
                [self.transport.swap_hour(s, d) for d in range(self.n_destinations)]
                for s in range(self.n_sources)
            ],
            dtype=int,
        ).reshape(self.n_sources, self.n_destinations)

    @cached_property
    def travel(self) -> np.ndarray:
        return np.array(self.transport.travel_time, dtype=float).reshape(
            self.n_sources, self.n_destinations
        )

    def to_dict(self) -> dict:
        data = {"schema_version": SCHEMA_VERSION}
        data.update(asdict(self))
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "Instance":
        transport = data["transport"]
        return cls(
            sources=tuple(
                SourceSpec(
                    id=s["id"],
                    refill_capacity=s["refill_capacity"],
                    refill_price=s["refill_price"],
                    slot_limit=s["slot_limit"],
                    initial_storages=tuple(s.get("initial_storages", ())),
                )
                for s in data["sources"]
            ),
            destinations=tuple(
                DestinationSpec(
                    id=d["id"],
                    hourly_demand=tuple(tuple(day) for day in d["hourly_demand"]),
                    initial_stock=d["initial_stock"],
                )
                for d in data["destinations"]
            ),
            horizon=data["horizon"],
            storage_capacity=data["storage_capacity"],
            cost=CostSpec(**data["cost"]),
            transport=TransportSpec(
                travel_time=tuple(tuple(row) for row in transport["travel_time"]),
                depart_hour=transport.get("depart_hour", DEPART_HOUR),
                load_time=transport.get("load_time", LOAD_TIME),
                swap_time=transport.get("swap_time", SWAP_TIME),
                speed=transport.get("speed", SPEED),
            ),
            name=data.get("name", ""),
        )


@dataclass(frozen=True)
class GenerationSpec:
    """Parâmetros do gerador de instâncias.

    Atributos
    ----------
    n_sources : int
        Número de fontes, de 1 a 7.
    dest_ratio : float
        Razão destinos/fontes, entre 4.33 e 8.5.
    storage_ratio : float
        Razão armazenamentos/destinos, entre 1.26 e 1.5.
    demand_magnitude : float
        Demanda diária média de um dia útil: 85 ou 130 kg.
    dissatisfaction_profile : tuple of float
        (custo variável €/kg, custo fixo €/evento): (12, 1500) ou (14, 2500).
    rng_seed : int
        Semente do gerador aleatório.
    horizon : int
        Número de dias.
    """

    n_sources: int = 1
    dest_ratio: float = 6.0
    storage_ratio: float = 1.4
    demand_magnitude: float = DEMAND_MAGNITUDES[0]
    dissatisfaction_profile: tuple[float, float] = DISSATISFACTION_PROFILES[0]
    rng_seed: int = 0
    horizon: int = DEFAULT_HORIZON

    def check(self):
        """Valida os intervalos dos parâmetros.

        Exceções
        --------
        ParameterError
            Se algum parâmetro estiver fora do intervalo permitido.
        """
        if not 1 <= self.n_sources <= MAX_SOURCES:
            raise ParameterError(f"n_sources must be in [1, {MAX_SOURCES}], got {self.n_sources}")
        if not DEST_RATIO_RANGE[0] <= self.dest_ratio <= DEST_RATIO_RANGE[1]:
            raise ParameterError(
                f"dest_ratio must be in [{DEST_RATIO_RANGE[0]}, {DEST_RATIO_RANGE[1]}], got {self.dest_ratio}"
            )
        if not STORAGE_RATIO_RANGE[0] <= self.storage_ratio <= STORAGE_RATIO_RANGE[1]:
            raise ParameterError(
                f"storage_ratio must be in [{STORAGE_RATIO_RANGE[0]}, {STORAGE_RATIO_RANGE[1]}], got {self.storage_ratio}"
            )
        if self.demand_magnitude not in DEMAND_MAGNITUDES:
            raise ParameterError(f"demand_magnitude must be one of {DEMAND_MAGNITUDES}")
        if tuple(self.dissatisfaction_profile) not in DISSATISFACTION_PROFILES:
            raise ParameterError(f"dissatisfaction_profile must be one of {DISSATISFACTION_PROFILES}")
        if self.horizon < 0:
            raise ParameterError(f"horizon must be non-negative, got {self.horizon}")


@dataclass(frozen=True)
class Violation:
    """Condição violada.

    Atributos
    ----------
    assumption : str
        Hipótese violada (``A1`` ... ``A8``) ou ``type`` para invariantes de tipo.
    message : str
        Descrição legível.
    """

    assumption: str
    message: str

    def __str__(self):
        return f"[{self.assumption}] {self.message}"


def weekday_profile(magnitude: float, weights) -> np.ndarray:
    """Perfil horário de um dia útil com três picos triangulares.

    Parâmetros
    ----------
    magnitude : float
        Demanda total do dia (kg).
    weights : sequência de float
        Peso de cada pico de ``PEAK_HOURS``.

    Retorna
    -------
    np.ndarray
        24 valores cuja soma é ``magnitude``.
    """
    hours = np.arange(HOURS, dtype=float)
    kernel = np.zeros(HOURS)
    for center, weight in zip(PEAK_HOURS, weights):
        kernel += weight * np.clip(1.0 - np.abs(hours - center) / PEAK_HALF_WIDTH, 0.0, None)
    return magnitude * kernel / kernel.sum()


def demand_factor(day: int) -> float:
    """Fator de escala do dia ``day`` (1 = primeiro dia do horizonte)."""
    return WEEKEND_FACTORS.get((day - 1) % 7, 1.0)


def _hourly_demand(profile: np.ndarray, horizon: int) -> tuple[tuple[float, ...], ...]:
    # weekend factors are powers of two, so the scaled sums stay exact
    return tuple(
        tuple(float(v) for v in demand_factor(day) * profile) for day in range(1, horizon + 1)
    )


def _storage_count(storage_ratio: float, n_destinations: int, total_slots: int) -> int:
    count = round(storage_ratio * n_destinations)
    low = math.ceil(STORAGE_RATIO_RANGE[0] * n_destinations - 1e-9)
    high = math.floor(STORAGE_RATIO_RANGE[1] * n_destinations + 1e-9)
    count = min(max(count, low), high)
    return n_destinations + min(count - n_destinations, total_slots)


def _round_robin(n_surplus: int, n_sources: int, slot_limit: int) -> list[int]:
    counts = [0] * n_sources
    s = 0
    for _ in range(n_surplus):
        while counts[s] >= slot_limit:
            s = (s + 1) % n_sources
        counts[s] += 1
        s = (s + 1) % n_sources
    return counts


def _build_instance(
    rng: np.random.Generator,
    n_sources: int,
    n_destinations: int,
    n_storages: int,
    horizon: int,
    demand_magnitude: float,
    dissatisfaction_profile: tuple[float, float],
    slot_limit: int,
    initial_stock: float,
    storage_capacity: float,
    name: str,
) -> Instance:
    low, high = DISTANCE_RANGE
    travel = rng.integers(low, high + 1, size=(n_sources, n_destinations))
    weights = rng.uniform(*PEAK_WEIGHT_RANGE, size=(n_destinations, len(PEAK_HOURS)))
    parked = _round_robin(n_storages - n_destinations, n_sources, slot_limit)
    sources = tuple(
        SourceSpec(
            id=s,
            refill_capacity=SOURCE_TABLE[s][0],
            refill_price=SOURCE_TABLE[s][1],
            slot_limit=slot_limit,
            initial_storages=(initial_stock,) * parked[s],
        )
        for s in range(n_sources)
    )
    destinations = tuple(
        DestinationSpec(
            id=d,
            hourly_demand=_hourly_demand(weekday_profile(demand_magnitude, weights[d]), horizon),
            initial_stock=initial_stock,
        )
        for d in range(n_destinations)
    )
    variable, fixed = dissatisfaction_profile
    return Instance(
        sources=sources,
        destinations=destinations,
        horizon=horizon,
        storage_capacity=storage_capacity,
        cost=CostSpec(
            transport=UNIT_TRANSPORT_COST,
            variable_dissatisfaction=float(variable),
            fixed_dissatisfaction=float(fixed),
        ),
        transport=TransportSpec(travel_time=tuple(tuple(int(t) for t in row) for row in travel)),
        name=name,
    )


def generate_instance(spec: GenerationSpec) -> Instance:
    """Gera uma instância sintética determinística.

    O número de destinos é ``round(n_sources * dest_ratio)``; os armazenamentos
    excedentes são distribuídos entre as fontes em rodízio, respeitando o
    limite de vagas.

    Parâmetros
    ----------
    spec : GenerationSpec
        Parâmetros do gerador.

    Retorna
    -------
    Instance
        Instância gerada; a mesma semente gera a mesma instância.

    Exceções
    --------
    ParameterError
        Se ``spec`` estiver fora dos intervalos permitidos.
    """
    spec.check()
    rng = np.random.default_rng(spec.rng_seed)
    n_destinations = round(spec.n_sources * spec.dest_ratio)
    n_storages = _storage_count(spec.storage_ratio, n_destinations, spec.n_sources * SLOT_LIMIT)
    instance = _build_instance(
        rng,
        n_sources=spec.n_sources,
        n_destinations=n_destinations,
        n_storages=n_storages,
        horizon=spec.horizon,
        demand_magnitude=spec.demand_magnitude,
        dissatisfaction_profile=tuple(spec.dissatisfaction_profile),
        slot_limit=SLOT_LIMIT,
        initial_stock=INITIAL_STOCK,
        storage_capacity=STORAGE_CAPACITY,
        name=f"s{spec.n_sources}-d{n_destinations}-b{n_storages}-seed{spec.rng_seed}",
    )
    logger.info(
        "Generated instance %s (J=%d, |S|=%d, |D|=%d, |B|=%d)",
        instance.name,
        instance.horizon,
        instance.n_sources,
        instance.n_destinations,
        instance.n_storages,
    )
    return instance


def generate_small_instance(
    seed: int = 0,
    n_sources: int = 1,
    n_destinations: int = 2,
    n_storages: int = 3,
    horizon: int = 2,
    slot_limit: int = 2,
    demand_magnitude: float = DEMAND_MAGNITUDES[0],
    dissatisfaction_profile: tuple[float, float] = DISSATISFACTION_PROFILES[0],
    initial_stock: float = INITIAL_STOCK,
    storage_capacity: float = STORAGE_CAPACITY,
) -> Instance:
    """Gera uma instância pequena, fora das razões do gerador principal.

    Usa o mesmo perfil de demanda e os mesmos dados de fontes de
    ``generate_instance``; serve para testes e para o oráculo exaustivo.

    Exceções
    --------
    ParameterError
        Se os tamanhos forem incoerentes.
    """
    if not 1 <= n_sources <= MAX_SOURCES:
        raise ParameterError(f"n_sources must be in [1, {MAX_SOURCES}], got {n_sources}")
    if n_storages < n_destinations:
        raise ParameterError("n_storages must be at least n_destinations")
    if n_storages - n_destinations > n_sources * slot_limit:
        raise ParameterError("surplus storages exceed the source slots")
    if horizon < 0:
        raise ParameterError(f"horizon must be non-negative, got {horizon}")
    return _build_instance(
        np.random.default_rng(seed),
        n_sources=n_sources,
        n_destinations=n_destinations,
        n_storages=n_storages,
        horizon=horizon,
        demand_magnitude=demand_magnitude,
        dissatisfaction_profile=tuple(dissatisfaction_profile),
        slot_limit=slot_limit,
        initial_stock=initial_stock,
        storage_capacity=storage_capacity,
        name=f"small-s{n_sources}-d{n_destinations}-b{n_storages}-j{horizon}-seed{seed}",
    )


def cumulative_demand(instance: Instance, d: int, j: int, h: int) -> float:
    """Demanda acumulada do destino ``d`` no dia ``j`` da meia-noite até a hora ``h``.

    Parâmetros
    ----------
    instance : Instance
    d : int
        Posição do destino.
    j : int
        Dia, de 1 a J.
    h : int
        Hora, de 0 a 23.

    Retorna
    -------
    float
        Soma de ``q[d, j, 0..h]`` em kg.

    Exceções
    --------
    IndexRangeError
        Se algum índice estiver fora do intervalo.
    """
    if not 0 <= d < instance.n_destinations:
        raise IndexRangeError(f"destination {d} out of range [0, {instance.n_destinations})")
    if not 1 <= j <= instance.horizon:
        raise IndexRangeError(f"day {j} out of range [1, {instance.horizon}]")
    if not 0 <= h < HOURS:
        raise IndexRangeError(f"hour {h} out of range [0, {HOURS})")
    return float(instance.cumulative[d, j - 1, h])


def validate_instance(instance: Instance) -> list[Violation]:
    """Verifica os invariantes de tipo e as hipóteses verificáveis.

    Parâmetros
    ----------
    instance : Instance

    Retorna
    -------
    list of Violation
        Vazia se e somente se a instância é válida.
    """
    violations = []

    def report(assumption, message):
        violations.append(Violation(assumption, message))

    capacity = instance.storage_capacity
    if not capacity > 0:
        report("A1", f"storage capacity must be positive, got {capacity}")
    if instance.horizon < 0:
        report("type", f"horizon must be non-negative, got {instance.horizon}")
        return violations

    for field_name in ("transport", "variable_dissatisfaction", "fixed_dissatisfaction"):
        value = getattr(instance.cost, field_name)
        if value < 0:
            report("type", f"cost.{field_name} must be non-negative, got {value}")

    for position, source in enumerate(instance.sources):
        if source.id != position:
            report("type", f"source at position {position} has id {source.id}")
        if source.refill_capacity < 0 or source.refill_price < 0:
            report("type", f"source {position}: refill capacity and price must be non-negative")
        if source.slot_limit < 1:
            report("type", f"source {position}: slot limit must be a positive integer")
        if len(source.initial_storages) > source.slot_limit:
            report(
                "A6",
                f"source {position} holds {len(source.initial_storages)} storages, "
                f"slot limit is {source.slot_limit}",
            )
        for stock in source.initial_storages:
            if not 0 <= stock <= capacity:
                report("A1", f"source {position}: initial stock {stock} outside [0, {capacity}]")

    shape_ok = True
    for position, destination in enumerate(instance.destinations):
        if destination.id != position:
            report("type", f"destination at position {position} has id {destination.id}")
        if not 0 <= destination.initial_stock <= capacity:
            report(
                "A1",
                f"destination {position}: initial stock {destination.initial_stock} outside [0, {capacity}]",
            )
        rows = destination.hourly_demand
        if len(rows) != instance.horizon or any(len(row) != HOURS for row in rows):
            report("type", f"destination {position}: hourly demand must be {instance.horizon}x{HOURS}")
            shape_ok = False

    travel = instance.transport.travel_time
    travel_ok = len(travel) == instance.n_sources and all(
        len(row) == instance.n_destinations for row in travel
    )
    if not travel_ok:
        report("type", f"travel_time must be {instance.n_sources}x{instance.n_destinations}")

    if shape_ok:
        demand = instance.demand
        if (demand < 0).any():
            report("type", "hourly demand must be non-negative")
        for d, j in zip(*np.nonzero(instance.daily_demand > capacity)):
            report(
                "A2",
                f"destination {d} day {j + 1}: demand {instance.daily_demand[d, j]:.6g} "
                f"exceeds storage capacity {capacity}",
            )

    transport = instance.transport
    if not 0 <= transport.depart_hour < HOURS:
        report("A5", f"depart hour {transport.depart_hour} outside [0, {HOURS})")
    if transport.load_time < 0 or transport.swap_time < 0 or transport.speed <= 0:
        report("type", "load/swap times must be non-negative and speed positive")
    elif travel_ok and instance.n_sources and instance.n_destinations:
        if instance.travel.min() < 1:
            report("A5", "travel times must be at least 1")
        latest = int(instance.swap_hours.max())
        if latest > HOURS - 1:
            report("A5", f"latest swap ends at hour {latest}, after hour {HOURS - 1}")
    return violations


INSTANCE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "prpmi instance",
    "type": "object",
    "required": ["horizon", "storage_capacity", "cost", "transport", "sources", "destinations"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"type": "integer", "const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "horizon": {"type": "integer", "minimum": 0},
        "storage_capacity": {"type": "number"},
        "cost": {
            "type": "object",
            "required": ["transport", "variable_dissatisfaction", "fixed_dissatisfaction"],
            "additionalProperties": False,
            "properties": {
                "transport": {"type": "number"},
                "variable_dissatisfaction": {"type": "number"},
                "fixed_dissatisfaction": {"type": "number"},
            },
        },
        "transport": {
            "type": "object",
            "required": ["travel_time"],
            "additionalProperties": False,
            "properties": {
                "travel_time": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "number"}},
                },
                "depart_hour": {"type": "integer"},
                "load_time": {"type": "integer"},
                "swap_time": {"type": "integer"},
                "speed": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "sources": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "refill_capacity", "refill_price", "slot_limit"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "integer", "minimum": 0},
                    "refill_capacity": {"type": "number"},
                    "refill_price": {"type": "number"},
                    "slot_limit": {"type": "integer"},
                    "initial_storages": {"type": "array", "items": {"type": "number"}},
                },
            },
        },
        "destinations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "hourly_demand", "initial_stock"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "integer", "minimum": 0},
                    "initial_stock": {"type": "number"},
                    "hourly_demand": {
                        "type": "array",
                        "items": {
                            "type": "array",
                            "items": {"type": "number"},
                            "minItems": HOURS,
                            "maxItems": HOURS,
                        },
                    },
                },
            },
        },
    },
}


def _schema_errors(data) -> list[str]:
    validator = Draft202012Validator(INSTANCE_SCHEMA)
    errors = []
    for error in sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path)):
        where = "/".join(str(part) for part in error.absolute_path) or "<root>"
        errors.append(f"{where}: {error.message}")
    return errors


def save_instance(instance: Instance, path: str | Path):
    """Grava a instância em um arquivo JSON UTF-8."""
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(instance.to_dict(), handle, indent=2)
        handle.write("\n")


def load_instance(path: str | Path, validate: bool = True) -> Instance:
    """Lê uma instância de um arquivo JSON.

    Parâmetros
    ----------
    path : str ou Path
        Arquivo gravado por ``save_instance`` ou escrito à mão no mesmo formato.
    validate : bool, opcional
        Se verdadeiro (padrão), aplica ``validate_instance`` após a leitura.

    Retorna
    -------
    Instance
        A instância lida.

    Exceções
    --------
    InstanceSchemaError
        Se o arquivo não seguir ``INSTANCE_SCHEMA``; lista todos os campos inválidos.
    InstanceValidationError
        Se a instância violar alguma hipótese.
    """
    with open(path, encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise InstanceSchemaError([f"<root>: invalid JSON ({exc})"]) from exc
    errors = _schema_errors(data)
    if errors:
        raise InstanceSchemaError(errors)
    instance = Instance.from_dict(data)
    if validate:
        violations = validate_instance(instance)
        if violations:
            raise InstanceValidationError(violations)
    return instance
