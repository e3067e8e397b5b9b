"""
Resolução de modelos lineares inteiros mistos.

Classes
-------
Status
    Situação final de uma resolução.
SolveLimits
    Limites de tempo, de nós e de gap.
SolveOutcome
    Resultado de uma resolução.

Funções
-------
solve_reference
    Branch-and-bound de referência com relaxações pelo simplex denso.
export_lp / read_lp
    Escrita e leitura no formato LP do CPLEX.
run_external
    Resolução por um executável externo que lê arquivos LP.
"""

import heapq
import logging
import math
import re
import shlex
import subprocess
import tempfile
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
import pandas as pd

from . import config
from .exceptions import ParameterError, SolverError
from .milp import LinExpr, MilpModel, Sense, VarKind
from .simplex import ENGINES, LpStatus, solve_lp

logger = logging.getLogger(__name__)

INTEGRALITY_TOL = 1e-6
ABSOLUTE_GAP = 1e-6
OFFSET_VARIABLE = "__offset"
EXTERNAL_GRACE = 2.0
TERMS_PER_LINE = 8
ROUNDING_EVERY = 25


class Status(Enum):
    OPTIMAL = "Optimal"
    FEASIBLE_TIME_LIMIT = "FeasibleTimeLimit"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ERROR = "Error"


@dataclass(frozen=True)
class SolveLimits:
    """Limites de uma resolução.

    Atributos
    ----------
    wall_clock : float
        Tempo máximo em segundos.
    gap_tolerance : float
        Gap relativo abaixo do qual a busca termina.
    node_limit : int ou None
        Número máximo de nós do branch-and-bound.
    lp_engine : str
        ``auto``, ``simplex`` ou ``highs``.
    """

    wall_clock: float = config.DEFAULT_WALL_CLOCK
    gap_tolerance: float = config.GAP_TOLERANCE
    node_limit: int | None = None
    lp_engine: str = "auto"

    def __post_init__(self):
        if not self.wall_clock > 0:
            raise ParameterError(f"wall_clock must be positive, got {self.wall_clock}")
        if not self.gap_tolerance > 0:
            raise ParameterError(f"gap_tolerance must be positive, got {self.gap_tolerance}")
        if self.node_limit is not None and self.node_limit < 1:
            raise ParameterError(f"node_limit must be positive, got {self.node_limit}")
        if self.lp_engine not in ENGINES:
            raise ParameterError(f"lp_engine must be one of {ENGINES}, got {self.lp_engine!r}")

    @classmethod
    def from_settings(cls, settings: config.Settings) -> "SolveLimits":
        return cls(
            wall_clock=settings.time_limit,
            gap_tolerance=settings.gap_tolerance,
            node_limit=settings.node_limit,
            lp_engine=settings.lp_engine,
        )


def relative_gap(upper: float | None, lower: float | None) -> float | None:
    """Gap ``(UB - LB) / UB``, limitado a [0, 1]; zero quando ``UB`` e ``LB`` coincidem."""
    if upper is None or lower is None or not math.isfinite(upper) or not math.isfinite(lower):
        return None
    difference = max(upper - lower, 0.0)
    if difference <= ABSOLUTE_GAP:
        return 0.0
    if abs(upper) <= ABSOLUTE_GAP:
        return 1.0
    return min(difference / abs(upper), 1.0)


@dataclass(frozen=True)
class SolveOutcome:
    """Resultado de uma resolução.

    Atributos
    ----------
    status : Status
    value : float ou None
        Valor da melhor solução encontrada.
    values : np.ndarray ou None
        Valores das variáveis da melhor solução, na ordem das colunas.
    bound : float ou None
        Melhor limite inferior.
    nodes : int
    runtime : float
        Segundos de relógio.
    message : str
        Diagnóstico ou saída do resolvedor externo.
    bound_history, incumbent_history : tuple of float
        Evolução do limite e da melhor solução ao longo da busca.
    """

    status: Status
    value: float | None = None
    values: np.ndarray | None = field(default=None, repr=False)
    bound: float | None = None
    nodes: int = 0
    runtime: float = 0.0
    message: str = ""
    bound_history: tuple[float, ...] = field(default=(), repr=False)
    incumbent_history: tuple[float, ...] = field(default=(), repr=False)

    @property
    def has_incumbent(self) -> bool:
        return self.values is not None

    @property
    def gap(self) -> float | None:
        return relative_gap(self.value, self.bound)

    def solution_series(self, model: MilpModel) -> pd.Series:
        """Valores da melhor solução indexados pelo nome das variáveis."""
        if self.values is None:
            return pd.Series(dtype=float)
        return pd.Series({v.name: self.values[v.index] for v in model.variables}, dtype=float)


@dataclass(order=True)
class _Node:
    bound: float
    sequence: int
    fixings: tuple = field(compare=False, default=())
    depth: int = field(compare=False, default=0)


class _BranchAndBound:
    """Estado de uma busca; uma instância por chamada de ``solve_reference``."""

    def __init__(self, model: MilpModel, limits: SolveLimits):
        self.model = model
        self.limits = limits
        self.form = model.to_arrays()
        self.binaries = np.flatnonzero(self.form.integer)
        self.start = time.monotonic()
        self.deadline = self.start + limits.wall_clock
        self.nodes = 0
        self.sequence = 0
        self.upper = math.inf
        self.incumbent: np.ndarray | None = None
        self.lower = -math.inf
        self.bound_history: list[float] = []
        self.incumbent_history: list[float] = []

    def elapsed(self) -> float:
        return time.monotonic() - self.start

    def bounds(self, fixings) -> tuple[np.ndarray, np.ndarray]:
        lower = self.form.lower.copy()
        upper = self.form.upper.copy()
        for column, value in fixings:
            lower[column] = upper[column] = value
        return lower, upper

    def relax(self, lower, upper):
        form = self.form
        result = solve_lp(
            form.c,
            form.A_ub,
            form.b_ub,
            form.A_eq,
            form.b_eq,
            lower,
            upper,
            self.limits.lp_engine,
            deadline=self.deadline,
        )
        if result.status is LpStatus.OPTIMAL:
            return result, result.value + form.offset
        return result, None

    def prune_level(self) -> float:
        if not math.isfinite(self.upper):
            return math.inf
        return self.upper - max(ABSOLUTE_GAP, self.limits.gap_tolerance * abs(self.upper))

    def record_bound(self, open_bounds):
        candidate = min(min(open_bounds, default=self.upper), self.upper)
        if math.isfinite(candidate) and candidate > self.lower:
            self.lower = candidate
            self.bound_history.append(candidate)

    def offer(self, values: np.ndarray, value: float) -> bool:
        """Guarda ``values`` como melhor solução se for viável e melhorar o valor."""
        if value >= self.upper - ABSOLUTE_GAP:
            return False
        if self.model.max_violation(values) > config.FEASIBILITY_TOLERANCE:
            return False
        self.upper = value
        self.incumbent = values
        self.incumbent_history.append(value)
        logger.debug("New incumbent %.6f after %d nodes", value, self.nodes)
        return True

    def try_incumbent(self, x: np.ndarray):
        """Arredonda as binárias, refaz a relaxação contínua e guarda se melhorar."""
        rounded = np.round(x[self.binaries])
        lower = self.form.lower.copy()
        upper = self.form.upper.copy()
        lower[self.binaries] = upper[self.binaries] = rounded
        result, value = self.relax(lower, upper)
        if value is None:
            return
        values = result.x.copy()
        values[self.binaries] = rounded
        self.offer(values, value)

    def branch_column(self, x: np.ndarray) -> int | None:
        values = x[self.binaries]
        distance = np.abs(values - np.round(values))
        if distance.max(initial=0.0) <= INTEGRALITY_TOL:
            return None
        # most fractional, lowest column on ties (argmin returns the first)
        return int(self.binaries[np.argmin(np.abs(values - 0.5))])

    def limit_reached(self) -> bool:
        if time.monotonic() >= self.deadline:
            return True
        return self.limits.node_limit is not None and self.nodes >= self.limits.node_limit

    def stopped(self) -> SolveOutcome:
        if self.incumbent is None:
            return self.outcome(Status.ERROR, "limit reached without an incumbent")
        return self.outcome(Status.FEASIBLE_TIME_LIMIT)

    def run(self) -> SolveOutcome:
        root, root_value = self.relax(self.form.lower, self.form.upper)
        self.nodes = 1
        if root.status is LpStatus.TIME_LIMIT:
            return self.stopped()
        if root.status is LpStatus.INFEASIBLE:
            return self.outcome(Status.INFEASIBLE)
        if root.status is LpStatus.UNBOUNDED:
            return self.outcome(Status.UNBOUNDED)
        self.record_bound([root_value])

        heap: list[_Node] = []
        dive: list[_Node] = []
        pending = self.expand(_Node(root_value, 0), root.x, root_value, heap)
        if pending:
            dive.append(pending)
        limit_hit = False
        while dive or heap:
            self.record_bound([n.bound for n in heap] + [n.bound for n in dive])
            if self.incumbent is not None and self.lower >= self.prune_level():
                break
            if self.limit_reached():
                limit_hit = True
                break
            node = dive.pop() if dive else heapq.heappop(heap)
            if node.bound >= self.prune_level():
                continue
            lower, upper = self.bounds(node.fixings)
            result, value = self.relax(lower, upper)
            if result.status is LpStatus.TIME_LIMIT:
                heapq.heappush(heap, node)
                limit_hit = True
                break
            self.nodes += 1
            if value is None:
                if result.status is LpStatus.UNBOUNDED:
                    raise SolverError("unbounded relaxation below a bounded root")
                continue
            if value >= self.prune_level():
                continue
            preferred = self.expand(node, result.x, value, heap)
            if preferred is not None:
                dive.append(preferred)

        if limit_hit:
            open_bounds = [n.bound for n in heap] + [n.bound for n in dive]
            self.record_bound(open_bounds)
            return self.stopped()
        if self.incumbent is None:
            return self.outcome(Status.INFEASIBLE)
        if not dive and not heap:
            self.record_bound([])
        return self.outcome(Status.OPTIMAL)

    def expand(self, node: _Node, x: np.ndarray, value: float, heap: list) -> _Node | None:
        """Ramifica um nó resolvido; devolve o filho a mergulhar e empilha o outro.

        Nós fracionários também são arredondados na raiz e a cada
        ``ROUNDING_EVERY`` nós.
        """
        column = self.branch_column(x)
        if column is None:
            self.try_incumbent(x)
            return None
        if self.nodes == 1 or self.nodes % ROUNDING_EVERY == 0:
            self.try_incumbent(x)
        up_first = x[column] >= 0.5
        children = []
        for fixed in (1.0, 0.0) if up_first else (0.0, 1.0):
            self.sequence += 1
            children.append(_Node(value, self.sequence, node.fixings + ((column, fixed),), node.depth + 1))
        heapq.heappush(heap, children[1])
        return children[0]

    def outcome(self, status: Status, message: str = "") -> SolveOutcome:
        bound = None
        if status in (Status.OPTIMAL, Status.FEASIBLE_TIME_LIMIT, Status.ERROR) and math.isfinite(self.lower):
            bound = min(self.lower, self.upper)
        return SolveOutcome(
            status=status,
            value=self.upper if self.incumbent is not None else None,
            values=self.incumbent,
            bound=bound,
            nodes=self.nodes,
            runtime=self.elapsed(),
            message=message,
            bound_history=tuple(self.bound_history),
            incumbent_history=tuple(self.incumbent_history),
        )


def solve_reference(
    model: MilpModel, limits: SolveLimits | None = None, start: np.ndarray | None = None
) -> SolveOutcome:
    """Resolve o modelo pelo branch-and-bound de referência.

    Ramifica na binária mais fracionária (menor coluna em caso de empate),
    mergulha em profundidade no filho mais próximo do arredondamento e, ao
    fim de cada mergulho, recomeça pelo nó aberto de menor limite. O prazo
    ``wall_clock`` também interrompe as relaxações em andamento.

    Parâmetros
    ----------
    model : MilpModel
        Modelo a resolver.
    limits : SolveLimits, opcional
        Limites da busca.
    start : np.ndarray, opcional
        Solução inicial, na ordem das colunas. Se for viável torna-se a
        primeira incumbente; caso contrário é descartada com um aviso.

    Retorna
    -------
    SolveOutcome
        Falhas numéricas resultam em ``Status.ERROR`` com diagnóstico em
        ``message``; a melhor solução encontrada até a falha é preservada.
    """
    limits = limits or SolveLimits()
    search = _BranchAndBound(model, limits)
    logger.info("Branch-and-bound on %s", model.summary())
    if start is not None:
        start = np.asarray(start, dtype=float)
        if not search.offer(start.copy(), model.objective_value(start)):
            logger.warning(
                "Initial solution for %s rejected: violation %.3g", model.name, model.max_violation(start)
            )
    try:
        outcome = search.run()
    except SolverError as exc:
        logger.error("Reference solver failed on %s: %s", model.name, exc)
        outcome = search.outcome(Status.ERROR, str(exc))
    logger.info(
        "%s: status=%s value=%s bound=%s gap=%s nodes=%d time=%.2fs",
        model.name,
        outcome.status.value,
        outcome.value,
        outcome.bound,
        outcome.gap,
        outcome.nodes,
        outcome.runtime,
    )
    return outcome


_NAME_FORBIDDEN = re.compile(r"[^A-Za-z0-9_!\"#$%&()/,.;?@`'{}|~]")


def lp_name(name: str) -> str:
    """Nome válido no formato LP (caracteres proibidos viram ``_``)."""
    cleaned = _NAME_FORBIDDEN.sub("_", name)
    if not cleaned or cleaned[0].isdigit() or cleaned[0] in ".eE":
        cleaned = "_" + cleaned
    return cleaned


def _number(value: float) -> str:
    return format(float(value), ".17g")


def _terms(coefs: dict[int, float], names: list[str]) -> list[str]:
    return [f"{'-' if c < 0 else '+'} {_number(abs(c))} {names[j]}" for j, c in coefs.items()]


def _wrapped(prefix: str, terms: list[str], suffix: str = "") -> list[str]:
    lines = []
    for start in range(0, len(terms), TERMS_PER_LINE):
        chunk = " ".join(terms[start : start + TERMS_PER_LINE])
        lines.append((prefix if start == 0 else "   ") + chunk)
    if suffix:
        lines[-1] += suffix
    return lines


def export_lp(model: MilpModel, path: str | Path):
    """Grava o modelo no formato LP do CPLEX.

    A constante do objetivo é escrita como coeficiente da variável
    ``__offset``, fixada em 1 na seção ``Bounds``. Coeficientes usam 17
    algarismos significativos.

    Exceções
    --------
    OSError
        Se o arquivo não puder ser gravado.
    """
    names = [lp_name(v.name) for v in model.variables] + [OFFSET_VARIABLE]
    offset_column = len(model.variables)
    objective = dict(model.objective.terms)
    objective[offset_column] = model.objective.constant
    lines = [
        f"\\ prpmi model {model.name}",
        f"\\ objective constant carried by {OFFSET_VARIABLE}, fixed to 1",
        "Minimize",
    ]
    lines += _wrapped(" obj: ", _terms(objective, names))
    lines.append("Subject To")
    senses = {Sense.LE: "<=", Sense.EQ: "=", Sense.GE: ">="}
    for con in model.constraints:
        coefs = con.coefs or {offset_column: 0.0}
        lines += _wrapped(
            f" {lp_name(con.name)}: ", _terms(coefs, names), f" {senses[con.sense]} {_number(con.rhs)}"
        )
    lines.append("Bounds")
    for v, name in zip(model.variables, names):
        if v.lower == v.upper:
            lines.append(f" {name} = {_number(v.lower)}")
        elif math.isinf(v.lower) and math.isinf(v.upper):
            lines.append(f" {name} free")
        else:
            lo = "-inf" if math.isinf(v.lower) else _number(v.lower)
            up = "+inf" if math.isinf(v.upper) else _number(v.upper)
            lines.append(f" {lo} <= {name} <= {up}")
    lines.append(f" {OFFSET_VARIABLE} = 1")
    binaries = [name for v, name in zip(model.variables, names) if v.is_binary]
    if binaries:
        lines.append("Binaries")
        lines += [" " + " ".join(binaries[i : i + TERMS_PER_LINE]) for i in range(0, len(binaries), TERMS_PER_LINE)]
    lines.append("End")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


_SECTIONS = {
    "minimize": "objective",
    "subject to": "rows",
    "bounds": "bounds",
    "binaries": "binaries",
    "end": "end",
}
_TERM = re.compile(r"([+-])\s*(\S+)\s+(\S+)")


def read_lp(path: str | Path) -> MilpModel:
    """Lê um arquivo gravado por ``export_lp``.

    A variável ``__offset`` volta a ser a constante do objetivo.
    """
    section = None
    statements: dict[str, list[str]] = {"objective": [], "rows": [], "bounds": [], "binaries": []}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("\\", 1)[0].rstrip()
        key = line.strip().lower()
        if key in _SECTIONS:
            section = _SECTIONS[key]
            continue
        if not line.strip() or section in (None, "end"):
            continue
        if raw.startswith("   ") and statements[section]:
            statements[section][-1] += " " + line.strip()
        else:
            statements[section].append(line.strip())

    def parse_terms(text: str) -> list[tuple[float, str]]:
        return [(float(value) * (-1.0 if sign == "-" else 1.0), name) for sign, value, name in _TERM.findall(text)]

    order: list[str] = []

    def remember(name: str):
        if name != OFFSET_VARIABLE and name not in order:
            order.append(name)

    objective_terms = []
    for statement in statements["objective"]:
        objective_terms += parse_terms(statement.split(":", 1)[1])
    rows = []
    for statement in statements["rows"]:
        label, body = statement.split(":", 1)
        match = re.match(r"(.*?)(<=|>=|=)\s*(\S+)$", body.strip())
        lhs, sense, rhs = match.groups()
        rows.append((label.strip(), parse_terms(lhs), sense, float(rhs)))
    # columns follow the Bounds section, which lists every variable in order
    bounds: dict[str, tuple[float, float]] = {}
    for statement in statements["bounds"]:
        parts = statement.split()
        if len(parts) == 2 and parts[1] == "free":
            bounds[parts[0]] = (-math.inf, math.inf)
        elif len(parts) == 3 and parts[1] == "=":
            bounds[parts[0]] = (float(parts[2]), float(parts[2]))
        elif len(parts) == 5:
            bounds[parts[2]] = (float(parts[0]), float(parts[4]))
        else:
            raise SolverError(f"unsupported bound statement {statement!r}")
        remember(parts[2] if len(parts) == 5 else parts[0])
    for _, name in objective_terms:
        remember(name)
    for _, terms, _, _ in rows:
        for _, name in terms:
            remember(name)
    binaries = set()
    for statement in statements["binaries"]:
        for name in statement.split():
            binaries.add(name)
            remember(name)

    model = MilpModel(Path(path).stem)
    for name in order:
        if name in binaries:
            model.add_variable(name, VarKind.BINARY)
        else:
            lo, up = bounds.get(name, (0.0, math.inf))
            model.add_variable(name, VarKind.CONTINUOUS, lo, up)
    index = {name: model.index_of(name) for name in order}

    def expression(terms):
        expr = LinExpr()
        for coef, name in terms:
            if name == OFFSET_VARIABLE:
                expr.constant += coef
            else:
                expr.terms[index[name]] = expr.terms.get(index[name], 0.0) + coef
        return expr

    model.set_objective(expression(objective_terms))
    symbols = {"<=": Sense.LE, "=": Sense.EQ, ">=": Sense.GE}
    for label, terms, sense, rhs in rows:
        model.add_constraint(expression(terms), symbols[sense], rhs, label)
    return model


def _status_from_text(text: str) -> Status | None:
    lowered = text.lower()
    if "infeasible" in lowered:
        return Status.INFEASIBLE
    if "unbounded" in lowered:
        return Status.UNBOUNDED
    if "optimal" in lowered:
        return Status.OPTIMAL
    if "time" in lowered or "limit" in lowered or "feasible" in lowered:
        return Status.FEASIBLE_TIME_LIMIT
    return None


def parse_solution(text: str) -> tuple[dict[str, float], Status | None, float | None]:
    """Lê um arquivo de solução.

    Aceita dois formatos:

    - XML no estilo ``.sol`` do CPLEX: ``<header solutionStatusString=...
      bestBound=...>`` e elementos ``<variable name=... value=...>``;
    - texto com uma linha ``nome valor`` por variável; linhas iniciadas por
      ``#`` são comentários, exceto ``# status <texto>`` e ``# bound <valor>``.

    Retorna
    -------
    tuple
        (valores por nome, status declarado ou None, limite declarado ou None)

    Exceções
    --------
    SolverError
        Se o conteúdo não puder ser interpretado.
    """
    stripped = text.strip()
    values: dict[str, float] = {}
    status = None
    bound = None
    if stripped.startswith("<"):
        try:
            root = ET.fromstring(stripped)
        except ET.ParseError as exc:
            raise SolverError(f"unparsable XML solution: {exc}") from exc
        header = root.find(".//header")
        if header is not None:
            status = _status_from_text(header.get("solutionStatusString", ""))
            if header.get("bestBound") is not None:
                bound = float(header.get("bestBound"))
        for element in root.iter("variable"):
            values[element.get("name")] = float(element.get("value"))
        return values, status, bound
    for number, line in enumerate(stripped.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            words = line[1:].split(None, 1)
            if len(words) == 2 and words[0].lower() == "status":
                status = _status_from_text(words[1])
            elif len(words) == 2 and words[0].lower() == "bound":
                bound = float(words[1])
            continue
        parts = line.split()
        if len(parts) != 2:
            raise SolverError(f"line {number}: expected 'name value', got {line!r}")
        try:
            values[parts[0]] = float(parts[1])
        except ValueError as exc:
            raise SolverError(f"line {number}: invalid value {parts[1]!r}") from exc
    return values, status, bound


def _outcome_from_solution(model: MilpModel, text: str, runtime: float, raw: str, timed_out: bool) -> SolveOutcome:
    by_name, status, bound = parse_solution(text)
    if status in (Status.INFEASIBLE, Status.UNBOUNDED):
        return SolveOutcome(status, runtime=runtime, message=raw)
    if not by_name:
        return SolveOutcome(Status.ERROR, runtime=runtime, message="solution file has no values\n" + raw)
    values = np.zeros(model.n_variables)
    missing = 0
    for v in model.variables:
        name = lp_name(v.name)
        if name in by_name:
            values[v.index] = by_name[name]
        else:
            missing += 1
    if missing:
        logger.warning("External solution omits %d variables; taking them as zero", missing)
    violation = model.max_violation(values)
    if violation > config.FEASIBILITY_TOLERANCE:
        return SolveOutcome(
            Status.ERROR,
            runtime=runtime,
            message=f"external assignment violates the model by {violation:.3g}\n" + raw,
        )
    value = model.objective_value(values)
    if timed_out:
        status = Status.FEASIBLE_TIME_LIMIT
    elif status is None:
        status = Status.OPTIMAL
    if bound is None and status is Status.OPTIMAL:
        bound = value
    return SolveOutcome(
        status,
        value=value,
        values=values,
        bound=bound,
        runtime=runtime,
        message=raw,
        incumbent_history=(value,),
        bound_history=(bound,) if bound is not None else (),
    )


def run_external(model: MilpModel, solver_command: str, limits: SolveLimits | None = None) -> SolveOutcome:
    """Resolve o modelo com um executável externo.

    O executável é chamado como ``solver_command modelo.lp --time-limit S
    --sol solucao.sol`` e deve terminar com código 0 depois de gravar a
    solução. O processo é interrompido após ``wall_clock`` mais uma pequena
    folga; se já tiver gravado uma solução ela é aproveitada com status
    ``FeasibleTimeLimit``.

    Parâmetros
    ----------
    model : MilpModel
    solver_command : str
        Comando, possivelmente com argumentos próprios.
    limits : SolveLimits, opcional

    Retorna
    -------
    SolveOutcome
        ``Status.ERROR`` com a saída bruta em ``message`` em caso de falha.
    """
    limits = limits or SolveLimits()
    start = time.monotonic()
    with tempfile.TemporaryDirectory(prefix="prpmi-") as workdir:
        lp_path = Path(workdir) / "model.lp"
        sol_path = Path(workdir) / "model.sol"
        export_lp(model, lp_path)
        argv = shlex.split(solver_command) + [
            str(lp_path),
            "--time-limit",
            _number(limits.wall_clock),
            "--sol",
            str(sol_path),
        ]
        logger.info("Running external solver: %s", " ".join(argv))
        timed_out = False
        try:
            process = subprocess.run(
                argv,
                timeout=limits.wall_clock + EXTERNAL_GRACE,
                stdout=subprocess.PIPE,
                stderr=subprocess.STDOUT,
                universal_newlines=True,
                check=False,
            )
            raw = process.stdout or ""
            returncode = process.returncode
        except FileNotFoundError as exc:
            return SolveOutcome(Status.ERROR, runtime=time.monotonic() - start, message=str(exc))
        except subprocess.TimeoutExpired as exc:
            timed_out = True
            output = exc.output or ""
            raw = output.decode(errors="replace") if isinstance(output, bytes) else output
            returncode = None
        runtime = time.monotonic() - start
        logger.info("External solver returned %s after %.2fs", returncode, runtime)
        if not timed_out and returncode != 0:
            return SolveOutcome(
                Status.ERROR, runtime=runtime, message=f"solver exited with code {returncode}\n{raw}"
            )
        if not sol_path.exists():
            reason = "time limit reached without a solution file" if timed_out else "no solution file written"
            return SolveOutcome(Status.ERROR, runtime=runtime, message=f"{reason}\n{raw}")
        try:
            return _outcome_from_solution(model, sol_path.read_text(encoding="utf-8"), runtime, raw, timed_out)
        except SolverError as exc:
            return SolveOutcome(Status.ERROR, runtime=runtime, message=f"{exc}\n{raw}")
