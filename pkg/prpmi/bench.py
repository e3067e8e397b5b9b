"""
Protocolo experimental: geração do conjunto de instâncias, execução dos
métodos e estatísticas.

Classes
-------
BenchRecord
    Resultado de um método em uma instância.
TrendReport
    Verificação qualitativa das tendências esperadas do benchmark.

Funções
-------
build_suite
    Conjunto de instâncias distribuído igualmente entre as faixas de destinos.
run_suite
    Executa os métodos em paralelo (``asyncio`` com um semáforo).
summarize / boxplot_frame / method_deltas
    Estatísticas no estilo de boxplot e diferenças percentuais entre métodos.
write_outputs
    Grava ``records.csv``, ``summary.csv``, ``boxplot.csv``, ``deltas.csv`` e
    ``runtimes.csv``.
"""

import asyncio
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .exceptions import ParameterError
from .heuristics import METHODS, GreedyConfig, SolveFunction, run_method
from .instance import (
    DEFAULT_HORIZON,
    DEMAND_MAGNITUDES,
    DEST_RATIO_RANGE,
    DISSATISFACTION_PROFILES,
    MAX_SOURCES,
    STORAGE_RATIO_RANGE,
    GenerationSpec,
    Instance,
    generate_instance,
)
from .solver import SolveLimits, Status, solve_reference
from .teg import build_teg

logger = logging.getLogger(__name__)

DESTINATION_BINS = {"Q1": (10, 18), "Q2": (19, 27), "Q3": (28, 35), "Q4": (36, 48)}
WHISKER = 1.5
UNMET_TOL = 1e-6
RECORD_COLUMNS = (
    "instance",
    "method",
    "status",
    "cost",
    "bound",
    "gap",
    "q_destination",
    "s_demand",
    "n_sources",
    "n_destinations",
    "n_storages",
)
BOXPLOT_COLUMNS = ("method", "group", "median", "mean", "q1", "q3", "lo_whisker", "hi_whisker", "outliers")


def destination_bin(n_destinations: int) -> str | None:
    """Faixa ``Q1``..``Q4`` do número de destinos, ou ``None`` fora das faixas."""
    for label, (low, high) in DESTINATION_BINS.items():
        if low <= n_destinations <= high:
            return label
    return None


@dataclass(frozen=True)
class BenchRecord:
    """Resultado de um método em uma instância.

    Atributos
    ----------
    instance : str
    method : str
    status : str
    cost : float ou None
    bound : float ou None
        Apenas MA e RH.
    gap : float ou None
        ``(cost - bound) / cost``.
    q_destination : str ou None
    s_demand : str
        ``yes`` se toda a demanda foi atendida.
    n_sources, n_destinations, n_storages : int
    runtime : float
        Segundos; gravado à parte em ``runtimes.csv``.
    message : str
    """

    instance: str
    method: str
    status: str
    cost: float | None
    bound: float | None
    gap: float | None
    q_destination: str | None
    s_demand: str
    n_sources: int
    n_destinations: int
    n_storages: int
    runtime: float = 0.0
    message: str = ""


def _bin_counts(count: int) -> list[int]:
    base, extra = divmod(count, len(DESTINATION_BINS))
    return [base + (1 if b < extra else 0) for b in range(len(DESTINATION_BINS))]


def build_suite(seed: int, count: int, horizon: int = DEFAULT_HORIZON) -> list[Instance]:
    """Gera o conjunto de instâncias do benchmark.

    O número de destinos é sorteado uniformemente dentro de cada faixa, com
    o mesmo número de instâncias por faixa (as primeiras faixas recebem o
    resto). O número de fontes é sorteado entre os valores que mantêm a razão
    destinos/fontes em [4.33, 8.5]; magnitudes de demanda e perfis de
    insatisfação se alternam.

    Parâmetros
    ----------
    seed : int
    count : int
        Número de instâncias, ao menos 4.
    horizon : int, opcional

    Retorna
    -------
    list of Instance

    Exceções
    --------
    ParameterError
        Se ``count < 4``.
    """
    if count < len(DESTINATION_BINS):
        raise ParameterError(f"count must be at least {len(DESTINATION_BINS)}, got {count}")
    rng = np.random.default_rng(seed)
    instances = []
    for (label, (low, high)), size in zip(DESTINATION_BINS.items(), _bin_counts(count)):
        for k in range(size):
            n_destinations = int(rng.integers(low, high + 1))
            fewest = math.ceil(n_destinations / DEST_RATIO_RANGE[1])
            most = min(MAX_SOURCES, math.floor(n_destinations / DEST_RATIO_RANGE[0]))
            n_sources = int(rng.integers(fewest, most + 1))
            spec = GenerationSpec(
                n_sources=n_sources,
                dest_ratio=n_destinations / n_sources,
                storage_ratio=float(rng.uniform(*STORAGE_RATIO_RANGE)),
                demand_magnitude=DEMAND_MAGNITUDES[k % 2],
                dissatisfaction_profile=DISSATISFACTION_PROFILES[(k // 2) % 2],
                rng_seed=int(rng.integers(2**31)),
                horizon=horizon,
            )
            instance = generate_instance(spec)
            logger.debug("Suite instance %s in %s", instance.name, label)
            instances.append(instance)
    return instances


def run_record(
    instance: Instance,
    method: str,
    limits: SolveLimits | None = None,
    greedy_threshold: float | None = None,
    solve: SolveFunction = solve_reference,
) -> BenchRecord:
    """Executa um método em uma instância; falhas viram registros com status ``Error``."""
    common = dict(
        instance=instance.name,
        method=method.upper(),
        q_destination=destination_bin(instance.n_destinations),
        n_sources=instance.n_sources,
        n_destinations=instance.n_destinations,
        n_storages=instance.n_storages,
    )
    try:
        greedy = GreedyConfig.for_instance(instance, greedy_threshold)
        result = run_method(method, instance, build_teg(instance), limits, greedy, solve)
    except Exception as exc:
        logger.error("%s on %s failed: %s", method, instance.name, exc)
        return BenchRecord(
            status=Status.ERROR.value, cost=None, bound=None, gap=None, s_demand="no", message=str(exc), **common
        )
    solution = result.solution
    met = solution is not None and bool((solution.unmet <= UNMET_TOL).all())
    return BenchRecord(
        status=result.status.value,
        cost=result.cost,
        bound=result.bound,
        gap=result.gap,
        s_demand="yes" if met else "no",
        runtime=result.runtime,
        message=result.message,
        **common,
    )


def _method_order(method: str) -> int:
    return METHODS.index(method) if method in METHODS else len(METHODS)


async def run_suite(
    instances: Sequence[Instance],
    methods: Sequence[str],
    limits: SolveLimits | None = None,
    workers: int = 1,
    greedy_threshold: float | None = None,
    solve: SolveFunction = solve_reference,
) -> list[BenchRecord]:
    """Executa cada método em cada instância.

    Parâmetros
    ----------
    instances : sequência de Instance
    methods : sequência de str
        Subconjunto de ``MA``, ``RH`` e ``GH``.
    limits : SolveLimits, opcional
    workers : int, opcional
        Tarefas simultâneas.
    greedy_threshold : float, opcional
    solve : callable, opcional

    Retorna
    -------
    list of BenchRecord
        Um registro por (instância, método), ordenados por instância e método.

    Exceções
    --------
    ParameterError
        Se ``methods`` for vazio, contiver um método desconhecido ou
        ``workers < 1``.
    """
    methods = [m.upper() for m in methods]
    if not methods:
        raise ParameterError("at least one method is required")
    unknown = sorted(set(methods) - set(METHODS))
    if unknown:
        raise ParameterError(f"unknown methods {unknown}, expected a subset of {METHODS}")
    if workers < 1:
        raise ParameterError(f"workers must be positive, got {workers}")
    semaphore = asyncio.Semaphore(workers)

    async def job(instance: Instance, method: str) -> BenchRecord:
        async with semaphore:
            return await asyncio.to_thread(run_record, instance, method, limits, greedy_threshold, solve)

    records = await asyncio.gather(*(job(i, m) for i in instances for m in methods))
    logger.info("Benchmark finished: %d records", len(records))
    return sorted(records, key=lambda r: (r.instance, _method_order(r.method)))


def boxplot_stats(values: Iterable[float]) -> dict:
    """Mediana, média, quartis, bigodes a 1.5 IQR limitados aos dados e pontos fora.

    Exceções
    --------
    ParameterError
        Se não houver valores.
    """
    data = np.sort(np.asarray([v for v in values if v is not None and not pd.isna(v)], dtype=float))
    if data.size == 0:
        raise ParameterError("no values to summarize")
    q1, median, q3 = np.percentile(data, [25, 50, 75])
    spread = WHISKER * (q3 - q1)
    inside = data[(data >= q1 - spread) & (data <= q3 + spread)]
    return {
        "median": float(median),
        "mean": float(data.mean()),
        "q1": float(q1),
        "q3": float(q3),
        "lo_whisker": float(inside.min()),
        "hi_whisker": float(inside.max()),
        "outliers": [float(v) for v in data if v < q1 - spread or v > q3 + spread],
    }


def records_frame(records: Sequence[BenchRecord]) -> pd.DataFrame:
    """Registros sem tempos de execução, nas colunas de ``records.csv``."""
    rows = [{k: v for k, v in asdict(r).items() if k in RECORD_COLUMNS} for r in records]
    return pd.DataFrame(rows, columns=list(RECORD_COLUMNS))


def runtimes_frame(records: Sequence[BenchRecord]) -> pd.DataFrame:
    return pd.DataFrame(
        [{"instance": r.instance, "method": r.method, "runtime": r.runtime} for r in records],
        columns=["instance", "method", "runtime"],
    )


def _groups(frame: pd.DataFrame):
    yield "all", frame
    for label in DESTINATION_BINS:
        yield label, frame[frame["q_destination"] == label]
    for answer in ("yes", "no"):
        yield f"s_demand={answer}", frame[frame["s_demand"] == answer]


def summarize(records: Sequence[BenchRecord], metrics: Sequence[str] = ("cost", "gap")) -> pd.DataFrame:
    """Estatísticas por método, métrica e grupo (todos, faixa de destinos, demanda atendida).

    Grupos sem valores são omitidos.

    Exceções
    --------
    ParameterError
        Se ``records`` for vazio.
    """
    if not records:
        raise ParameterError("no records to summarize")
    frame = records_frame(records)
    rows = []
    for method in sorted(frame["method"].unique(), key=_method_order):
        by_method = frame[frame["method"] == method]
        for metric in metrics:
            for group, subset in _groups(by_method):
                values = subset[metric].dropna()
                if values.empty:
                    continue
                stats = boxplot_stats(values)
                stats["outliers"] = ";".join(f"{v:.10g}" for v in stats["outliers"])
                rows.append({"method": method, "metric": metric, "group": group, "count": len(values), **stats})
    columns = ["method", "metric", "group", "count", *BOXPLOT_COLUMNS[2:]]
    return pd.DataFrame(rows, columns=columns)


def boxplot_frame(records: Sequence[BenchRecord]) -> pd.DataFrame:
    """Dados de boxplot do custo por método e grupo."""
    summary = summarize(records, metrics=("cost",))
    return summary.loc[:, list(BOXPLOT_COLUMNS)].reset_index(drop=True)


def method_deltas(records: Sequence[BenchRecord]) -> pd.DataFrame:
    """Diferença percentual de mediana e média de custo entre cada par de métodos.

    ``delta = 100 * (a - b) / b``; negativo quando ``a`` custa menos.
    """
    if not records:
        raise ParameterError("no records to compare")
    frame = records_frame(records)
    methods = sorted(frame["method"].unique(), key=_method_order)
    rows = []
    for group, subset in _groups(frame):
        costs = {m: subset.loc[subset["method"] == m, "cost"].dropna() for m in methods}
        for a in methods:
            for b in methods:
                if a == b or costs[a].empty or costs[b].empty:
                    continue
                row = {"method_a": a, "method_b": b, "group": group}
                for stat in ("median", "mean"):
                    va, vb = getattr(costs[a], stat)(), getattr(costs[b], stat)()
                    row[f"{stat}_delta_pct"] = 0.0 if va == vb else (100.0 * (va - vb) / vb if vb else math.nan)
                rows.append(row)
    return pd.DataFrame(rows, columns=["method_a", "method_b", "group", "median_delta_pct", "mean_delta_pct"])


@dataclass(frozen=True)
class TrendReport:
    """Tendências esperadas: melhor entre MA e RH abaixo de GH e gap de RH abaixo do de MA.

    Verificações sem dados ficam ``None``.
    """

    best_median: float | None
    greedy_median: float | None
    best_beats_greedy: bool | None
    largest_bin: str | None
    rh_gap_mean: float | None
    ma_gap_mean: float | None
    rh_gap_below_ma: bool | None


def trend_check(records: Sequence[BenchRecord]) -> TrendReport:
    """Verifica as tendências do benchmark e registra as violações no log.

    Compara a mediana de min(MA, RH) por instância com a mediana de GH, e o
    gap médio de RH com o de MA na maior faixa de destinos presente.
    """
    frame = records_frame(records)
    costs = frame.pivot_table(index="instance", columns="method", values="cost", aggfunc="first")
    best_median = greedy_median = beats = None
    candidates = [m for m in ("MA", "RH") if m in costs]
    if candidates and "GH" in costs:
        best = costs[candidates].min(axis=1, skipna=True)
        for name, value in best.items():
            greedy = costs.at[name, "GH"]
            if not pd.isna(value) and not pd.isna(greedy) and value > greedy + UNMET_TOL:
                logger.warning("min(MA, RH) above GH on %s: %.6g > %.6g", name, value, greedy)
        best_median = float(best.median())
        greedy_median = float(costs["GH"].median())
        beats = best_median <= greedy_median + UNMET_TOL
        if not beats:
            logger.warning("Median of min(MA, RH) %.6g above GH median %.6g", best_median, greedy_median)

    largest = rh_gap = ma_gap = below = None
    present = [label for label in DESTINATION_BINS if (frame["q_destination"] == label).any()]
    if present:
        largest = present[-1]
        in_bin = frame[frame["q_destination"] == largest]
        rh = in_bin.loc[in_bin["method"] == "RH", "gap"].dropna()
        ma = in_bin.loc[in_bin["method"] == "MA", "gap"].dropna()
        if not rh.empty and not ma.empty:
            rh_gap, ma_gap = float(rh.mean()), float(ma.mean())
            below = rh_gap <= ma_gap + UNMET_TOL
            if not below:
                logger.warning("Mean RH gap %.4f above mean MA gap %.4f in %s", rh_gap, ma_gap, largest)
    return TrendReport(best_median, greedy_median, beats, largest, rh_gap, ma_gap, below)


def write_outputs(records: Sequence[BenchRecord], out_dir: str | Path) -> dict[str, Path]:
    """Grava os arquivos CSV do benchmark em ``out_dir``.

    Retorna
    -------
    dict
        Nome lógico -> caminho gravado.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    frames = {
        "records": records_frame(records),
        "summary": summarize(records),
        "boxplot": boxplot_frame(records),
        "deltas": method_deltas(records),
        "runtimes": runtimes_frame(records),
    }
    paths = {}
    for name, frame in frames.items():
        path = out_dir / f"{name}.csv"
        frame.to_csv(path, index=False, float_format="%.10g")
        paths[name] = path
    return paths

