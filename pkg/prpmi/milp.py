"""
Modelo linear inteiro misto abstrato e linearizações.

``MilpModel`` guarda variáveis (contínuas ou binárias, com limites),
restrições lineares esparsas e um objetivo de minimização. As funções
``linearize_*`` acrescentam a um modelo as restrições lineares equivalentes a
relações não lineares (implicação, produto, mínimo e atribuição).
"""

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import sparse

from .exceptions import ParameterError

logger = logging.getLogger(__name__)


class VarKind(Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"


class Sense(Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class _Arithmetic:
    """Operadores comuns a ``Variable`` e ``LinExpr``."""

    def __add__(self, other):
        return LinExpr.of(self).iadd(other)

    def __radd__(self, other):
        return LinExpr.of(self).iadd(other)

    def __sub__(self, other):
        return LinExpr.of(self).iadd(other, -1.0)

    def __rsub__(self, other):
        return LinExpr.of(other).iadd(self, -1.0)

    def __mul__(self, factor):
        return LinExpr.of(self).scaled(factor)

    def __rmul__(self, factor):
        return LinExpr.of(self).scaled(factor)

    def __neg__(self):
        return LinExpr.of(self).scaled(-1.0)


@dataclass(frozen=True, eq=False)
class Variable(_Arithmetic):
    """Variável do modelo.

    Atributos
    ----------
    index : int
        Coluna da variável.
    name : str
    kind : VarKind
    lower : float
    upper : float
    """

    index: int
    name: str
    kind: VarKind = VarKind.CONTINUOUS
    lower: float = 0.0
    upper: float = math.inf

    @property
    def is_binary(self) -> bool:
        return self.kind is VarKind.BINARY

    def __repr__(self):
        return f"Variable({self.name!r})"


class LinExpr(_Arithmetic):
    """Expressão linear ``sum(coef * var) + constant``."""

    __slots__ = ("terms", "constant")

    def __init__(self, terms: dict[int, float] | None = None, constant: float = 0.0):
        self.terms = dict(terms) if terms else {}
        self.constant = float(constant)

    @classmethod
    def of(cls, value) -> "LinExpr":
        if isinstance(value, LinExpr):
            return cls(value.terms, value.constant)
        if isinstance(value, Variable):
            return cls({value.index: 1.0})
        if isinstance(value, (int, float, np.integer, np.floating)):
            return cls(constant=float(value))
        raise TypeError(f"cannot build a linear expression from {type(value).__name__}")

    def iadd(self, other, factor: float = 1.0) -> "LinExpr":
        """Soma ``factor * other`` a esta expressão, no lugar."""
        if isinstance(other, Variable):
            self.terms[other.index] = self.terms.get(other.index, 0.0) + factor
        elif isinstance(other, LinExpr):
            for index, coef in other.terms.items():
                self.terms[index] = self.terms.get(index, 0.0) + factor * coef
            self.constant += factor * other.constant
        elif isinstance(other, (int, float, np.integer, np.floating)):
            self.constant += factor * float(other)
        else:
            raise TypeError(f"cannot add {type(other).__name__} to a linear expression")
        return self

    def scaled(self, factor) -> "LinExpr":
        if not isinstance(factor, (int, float, np.integer, np.floating)):
            raise TypeError("linear expressions can only be multiplied by numbers")
        factor = float(factor)
        return LinExpr({i: c * factor for i, c in self.terms.items()}, self.constant * factor)

    @property
    def is_constant(self) -> bool:
        return all(c == 0.0 for c in self.terms.values())

    def value(self, values: np.ndarray) -> float:
        return self.constant + sum(c * values[i] for i, c in self.terms.items())

    def __repr__(self):
        return f"LinExpr({self.terms!r}, {self.constant!r})"


def lin_sum(items: Iterable) -> LinExpr:
    """Soma de variáveis, expressões e números."""
    total = LinExpr()
    for item in items:
        total.iadd(item)
    return total


@dataclass(frozen=True)
class Constraint:
    """Restrição ``sum(coefs[j] * x[j]) sense rhs``."""

    name: str
    coefs: dict[int, float]
    sense: Sense
    rhs: float

    def activity(self, values: np.ndarray) -> float:
        return sum(c * values[j] for j, c in self.coefs.items())

    def violation(self, values: np.ndarray) -> float:
        lhs = self.activity(values)
        if self.sense is Sense.LE:
            return max(0.0, lhs - self.rhs)
        if self.sense is Sense.GE:
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)


@dataclass(frozen=True)
class MatrixForm:
    """Forma matricial ``min c x + offset``, ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``lower <= x <= upper``."""

    c: np.ndarray
    offset: float
    A_ub: sparse.csr_matrix
    b_ub: np.ndarray
    A_eq: sparse.csr_matrix
    b_eq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    integer: np.ndarray


class MilpModel:
    """Modelo linear inteiro misto de minimização.

    Atributos
    ----------
    name : str
    variables : list of Variable
    constraints : list of Constraint
    objective : LinExpr
    """

    def __init__(self, name: str = ""):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.objective = LinExpr()
        self._by_name: dict[str, Variable] = {}
        self._matrix: MatrixForm | None = None

    def add_variable(
        self,
        name: str,
        kind: VarKind = VarKind.CONTINUOUS,
        lower: float = 0.0,
        upper: float = math.inf,
    ) -> Variable:
        """Cria uma variável.

        Variáveis binárias têm sempre limites {0, 1}.

        Exceções
        --------
        ParameterError
            Se o nome já existir ou os limites forem incoerentes.
        """
        if name in self._by_name:
            raise ParameterError(f"duplicate variable name {name!r}")
        if kind is VarKind.BINARY:
            lower, upper = 0.0, 1.0
        if lower > upper:
            raise ParameterError(f"variable {name!r} has lower bound {lower} > upper bound {upper}")
        variable = Variable(len(self.variables), name, kind, float(lower), float(upper))
        self.variables.append(variable)
        self._by_name[name] = variable
        self._matrix = None
        return variable

    def add_binary(self, name: str) -> Variable:
        return self.add_variable(name, VarKind.BINARY)

    def add_constraint(self, lhs, sense: Sense, rhs=0.0, name: str | None = None) -> Constraint:
        """Acrescenta a restrição ``lhs sense rhs``.

        ``lhs`` e ``rhs`` podem ser variáveis, expressões ou números. Termos
        repetidos são somados e coeficientes nulos descartados.
        """
        expr = LinExpr.of(lhs).iadd(rhs, -1.0)
        coefs = {j: c for j, c in sorted(expr.terms.items()) if c != 0.0}
        for j in coefs:
            if not 0 <= j < len(self.variables):
                raise ParameterError(f"constraint {name!r} references unknown column {j}")
        constraint = Constraint(name or f"c{len(self.constraints)}", coefs, sense, -expr.constant)
        self.constraints.append(constraint)
        self._matrix = None
        return constraint

    def set_objective(self, expr):
        self.objective = LinExpr.of(expr)
        self._matrix = None

    def variable(self, name: str) -> Variable:
        return self._by_name[name]

    def index_of(self, name: str) -> int:
        return self._by_name[name].index

    def name_of(self, index: int) -> str:
        return self.variables[index].name

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    @property
    def n_binaries(self) -> int:
        return sum(1 for v in self.variables if v.is_binary)

    @property
    def binary_indices(self) -> np.ndarray:
        return np.array([v.index for v in self.variables if v.is_binary], dtype=int)

    def to_arrays(self) -> MatrixForm:
        """Forma matricial do modelo (calculada uma vez e reaproveitada)."""
        if self._matrix is not None:
            return self._matrix
        n = self.n_variables
        c = np.zeros(n)
        for j, coef in self.objective.terms.items():
            c[j] += coef
        ub_rows, ub_cols, ub_vals, b_ub = [], [], [], []
        eq_rows, eq_cols, eq_vals, b_eq = [], [], [], []
        for con in self.constraints:
            if con.sense is Sense.EQ:
                row = len(b_eq)
                eq_rows += [row] * len(con.coefs)
                eq_cols += list(con.coefs)
                eq_vals += list(con.coefs.values())
                b_eq.append(con.rhs)
            else:
                sign = 1.0 if con.sense is Sense.LE else -1.0
                row = len(b_ub)
                ub_rows += [row] * len(con.coefs)
                ub_cols += list(con.coefs)
                ub_vals += [sign * v for v in con.coefs.values()]
                b_ub.append(sign * con.rhs)
        self._matrix = MatrixForm(
            c=c,
            offset=self.objective.constant,
            A_ub=sparse.csr_matrix((ub_vals, (ub_rows, ub_cols)), shape=(len(b_ub), n)),
            b_ub=np.array(b_ub, dtype=float),
            A_eq=sparse.csr_matrix((eq_vals, (eq_rows, eq_cols)), shape=(len(b_eq), n)),
            b_eq=np.array(b_eq, dtype=float),
            lower=np.array([v.lower for v in self.variables], dtype=float),
            upper=np.array([v.upper for v in self.variables], dtype=float),
            integer=np.array([v.is_binary for v in self.variables], dtype=bool),
        )
        return self._matrix

    def objective_value(self, values: np.ndarray) -> float:
        return self.objective.value(values)

    def max_violation(self, values: np.ndarray) -> float:
        """Maior violação de limites, integralidade ou restrições por ``values``."""
        values = np.asarray(values, dtype=float)
        worst = 0.0
        for v in self.variables:
            x = values[v.index]
            worst = max(worst, v.lower - x, x - v.upper)
            if v.is_binary:
                worst = max(worst, abs(x - round(x)))
        for con in self.constraints:
            worst = max(worst, con.violation(values))
        return worst

    def violated(self, values: np.ndarray, tolerance: float = 1e-6) -> list[str]:
        """Nomes das restrições violadas além de ``tolerance``."""
        values = np.asarray(values, dtype=float)
        return [con.name for con in self.constraints if con.violation(values) > tolerance]

    def summary(self) -> str:
        return (
            f"{self.name}: {self.n_variables} variables ({self.n_binaries} binary), "
            f"{self.n_constraints} constraints"
        )


def _check_bound(M: float):
    if not M > 0:
        raise ParameterError(f"big-M bound must be positive, got {M}")


def linearize_implication(model: MilpModel, x, b, M: float, name: str = "imp"):
    """Impõe ``x > 0 => b = 1`` por meio de ``x <= M b``.

    Parâmetros
    ----------
    model : MilpModel
    x : Variable ou LinExpr
        Quantidade contínua em [0, M].
    b : Variable ou LinExpr
        Binária.
    M : float
        Limite superior de ``x``.

    Exceções
    --------
    ParameterError
        Se ``M <= 0``.
    """
    _check_bound(M)
    model.add_constraint(LinExpr.of(x) - M * LinExpr.of(b), Sense.LE, 0.0, name)


def linearize_product(model: MilpModel, p, b, x, M: float, name: str = "prod"):
    """Impõe ``p = b x`` para ``b`` binária e ``x`` em [0, M].

    Acrescenta ``p <= x``, ``p <= M b``, ``p >= x - M (1 - b)`` e ``p >= 0``
    (esta última como restrição apenas se o limite inferior de ``p`` for
    negativo).

    Exceções
    --------
    ParameterError
        Se ``M <= 0``.
    """
    _check_bound(M)
    p_expr, b_expr, x_expr = LinExpr.of(p), LinExpr.of(b), LinExpr.of(x)
    model.add_constraint(p_expr - x_expr, Sense.LE, 0.0, f"{name}_le_x")
    model.add_constraint(p_expr - M * b_expr, Sense.LE, 0.0, f"{name}_le_mb")
    model.add_constraint(p_expr - x_expr - M * b_expr, Sense.GE, -M, f"{name}_ge")
    if not isinstance(p, Variable) or p.lower < 0:
        model.add_constraint(p_expr, Sense.GE, 0.0, f"{name}_nonneg")


def linearize_min(model: MilpModel, z, x1, x2, b, M: float, name: str = "min"):
    """Impõe ``z = min(x1, x2)`` com a binária auxiliar ``b``.

    ``b = 1`` seleciona ``x2`` e ``b = 0`` seleciona ``x1``.

    Exceções
    --------
    ParameterError
        Se ``M <= 0``.
    """
    _check_bound(M)
    z_expr, x1_expr, x2_expr, b_expr = (LinExpr.of(v) for v in (z, x1, x2, b))
    model.add_constraint(z_expr - x1_expr, Sense.LE, 0.0, f"{name}_le_x1")
    model.add_constraint(z_expr - x2_expr, Sense.LE, 0.0, f"{name}_le_x2")
    model.add_constraint(z_expr - x1_expr + M * b_expr, Sense.GE, 0.0, f"{name}_ge_x1")
    model.add_constraint(z_expr - x2_expr - M * b_expr, Sense.GE, -M, f"{name}_ge_x2")


def linearize_assignment(
    model: MilpModel,
    name: str,
    f_in: Sequence,
    f_out: Sequence,
    y_in: Sequence,
    y_out: Sequence,
    M: float,
    pairs: Iterable[tuple[int, int]] | None = None,
) -> list[list[Variable | None]]:
    """Impõe a existência de uma bijeção entre entradas e saídas ativas.

    Cria binárias ``beta[n][m]`` com somas de linha iguais a ``y_in[n]``,
    somas de coluna iguais a ``y_out[m]`` e ``f_in[n] <= f_out[m]`` sempre
    que ``beta[n][m] = 1``.

    Parâmetros
    ----------
    model : MilpModel
    name : str
        Prefixo dos nomes criados.
    f_in, f_out : sequência
        Hidrogênio nos arcos de entrada e de saída.
    y_in, y_out : sequência
        Presença de armazenamento nos arcos de entrada e de saída.
    M : float
        Capacidade dos armazenamentos.
    pairs : iterável de (int, int), opcional
        Pares ``(n, m)`` permitidos; os demais ``beta`` são fixados em zero
        e não são criados. Padrão: todos os pares.

    Retorna
    -------
    list of list
        Matriz ``beta`` (``None`` nos pares não criados).

    Exceções
    --------
    ParameterError
        Se os vetores tiverem tamanhos diferentes ou ``M <= 0``.
    """
    _check_bound(M)
    size = len(f_in)
    if not len(f_out) == len(y_in) == len(y_out) == size:
        raise ParameterError(
            f"assignment vectors differ in length: f_in={len(f_in)}, f_out={len(f_out)}, "
            f"y_in={len(y_in)}, y_out={len(y_out)}"
        )
    allowed = (
        [(n, m) for n in range(size) for m in range(size)]
        if pairs is None
        else sorted(set(pairs))
    )
    beta: list[list[Variable | None]] = [[None] * size for _ in range(size)]
    for n, m in allowed:
        beta[n][m] = model.add_binary(f"beta_{name}_{n}_{m}")
    for n in range(size):
        row = [beta[n][m] for m in range(size) if beta[n][m] is not None]
        if row or not LinExpr.of(y_in[n]).is_constant or LinExpr.of(y_in[n]).constant:
            model.add_constraint(lin_sum(row), Sense.EQ, y_in[n], f"{name}_row_{n}")
    for m in range(size):
        column = [beta[n][m] for n in range(size) if beta[n][m] is not None]
        if column or not LinExpr.of(y_out[m]).is_constant or LinExpr.of(y_out[m]).constant:
            model.add_constraint(lin_sum(column), Sense.EQ, y_out[m], f"{name}_col_{m}")
    for n, m in allowed:
        model.add_constraint(
            LinExpr.of(f_in[n]) - f_out[m] + M * beta[n][m],
            Sense.LE,
            M,
            f"{name}_order_{n}_{m}",
        )
    return beta
