"""
Configuração do pacote.

Os valores padrão vêm de variáveis de ambiente e podem ser sobrescritos por
um arquivo TOML (``--config`` na linha de comando) e, por fim, pelas opções
da linha de comando.

Variáveis de ambiente
---------------------
PRPMI_TIME_LIMIT
    Tempo máximo de cada resolução, em segundos (padrão 60).
PRPMI_GAP_TOLERANCE
    Tolerância relativa de gap (padrão 1e-6).
PRPMI_NODE_LIMIT
    Limite de nós do branch-and-bound (padrão: sem limite).
PRPMI_LP_ENGINE
    ``auto`` (padrão), ``simplex`` ou ``highs``.
PRPMI_WORKERS
    Número de tarefas simultâneas no benchmark (padrão 1).
PRPMI_CRITICAL_THRESHOLD
    Limiar crítico da heurística gulosa, em kg (padrão: S̄/3).
PRPMI_SOLVER_COMMAND
    Executável de um resolvedor externo (padrão: nenhum).
PRPMI_LOG_LEVEL
    Nível de log da linha de comando (padrão WARNING).
"""

import dataclasses
import os
import tomllib
from dataclasses import dataclass
from pathlib import Path

from .exceptions import ParameterError


def _optional(name: str, cast):
    value = os.getenv(name)
    return cast(value) if value else None


TIME_LIMIT = float(os.getenv("PRPMI_TIME_LIMIT") or 60.0)
GAP_TOLERANCE = float(os.getenv("PRPMI_GAP_TOLERANCE") or 1e-6)
NODE_LIMIT = _optional("PRPMI_NODE_LIMIT", int)
LP_ENGINE = os.getenv("PRPMI_LP_ENGINE") or "auto"
WORKERS = int(os.getenv("PRPMI_WORKERS") or 1)
CRITICAL_THRESHOLD = _optional("PRPMI_CRITICAL_THRESHOLD", float)
SOLVER_COMMAND = os.getenv("PRPMI_SOLVER_COMMAND") or None
LOG_LEVEL = os.getenv("PRPMI_LOG_LEVEL") or "WARNING"

FEASIBILITY_TOLERANCE = 1e-6
DEFAULT_WALL_CLOCK = 1200.0


@dataclass(frozen=True)
class Settings:
    """Parâmetros de execução.

    Atributos
    ----------
    time_limit : float
        Tempo máximo de cada resolução, em segundos.
    gap_tolerance : float
        Tolerância relativa de gap.
    node_limit : int ou None
        Limite de nós do branch-and-bound.
    lp_engine : str
        Resolvedor das relaxações lineares.
    workers : int
        Tarefas simultâneas no benchmark.
    critical_threshold : float ou None
        Limiar crítico da heurística gulosa; ``None`` usa S̄/3.
    solver_command : str ou None
        Resolvedor externo opcional.
    log_level : str
        Nível de log.
    """

    time_limit: float = TIME_LIMIT
    gap_tolerance: float = GAP_TOLERANCE
    node_limit: int | None = NODE_LIMIT
    lp_engine: str = LP_ENGINE
    workers: int = WORKERS
    critical_threshold: float | None = CRITICAL_THRESHOLD
    solver_command: str | None = SOLVER_COMMAND
    log_level: str = LOG_LEVEL

    def replace(self, **changes) -> "Settings":
        """Retorna uma cópia com os campos não nulos de ``changes`` aplicados."""
        return dataclasses.replace(
            self, **{key: value for key, value in changes.items() if value is not None}
        )


def load_settings(path: str | Path | None = None) -> Settings:
    """Carrega as configurações, aplicando um arquivo TOML opcional.

    Parâmetros
    ----------
    path : str ou Path, opcional
        Arquivo TOML cujas chaves são os nomes dos campos de ``Settings``.

    Retorna
    -------
    Settings
        Configurações resultantes.

    Exceções
    --------
    ParameterError
        Se o arquivo contiver chaves desconhecidas.
    """
    settings = Settings()
    if path is None:
        return settings
    with open(path, "rb") as handle:
        data = tomllib.load(handle)
    known = {field.name for field in dataclasses.fields(Settings)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ParameterError(f"Unknown configuration keys in {path}: {', '.join(unknown)}")
    return dataclasses.replace(settings, **data)
