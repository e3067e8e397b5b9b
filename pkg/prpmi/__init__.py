"""
prpmi - Roteamento de armazenamentos móveis de hidrogênio
=========================================================

Este pacote modela a distribuição de hidrogênio em armazenamentos móveis
trocados nos destinos como um problema de fluxo em um grafo expandido no
tempo, resolve-o de forma exata (branch-and-bound de referência ou resolvedor
externo) e por heurísticas, e decodifica as soluções em planos de transporte
por armazenamento.

.. versionadded:: 0.1.0

Exemplo
-------

.. code-block:: python

    >>> from prpmi import generate_small_instance, build_teg, two_step_heuristic
    >>> instance = generate_small_instance(seed=1)
    >>> result = two_step_heuristic(instance, build_teg(instance))
    >>> result.bound <= result.cost
    True
"""

from .exceptions import (
    DecodeError,
    InstanceSchemaError,
    InstanceValidationError,
    NoPredecessorError,
    OracleSizeError,
    ParameterError,
    PrpmiError,
    RoutingInfeasibleError,
    SolverError,
)
from .heuristics import (
    GreedyConfig,
    MethodResult,
    compute_phi,
    full_milp_method,
    greedy_method,
    greedy_routing,
    two_step_heuristic,
)
from .instance import (
    SCHEMA_VERSION,
    GenerationSpec,
    Instance,
    cumulative_demand,
    generate_instance,
    generate_small_instance,
    load_instance,
    save_instance,
    validate_instance,
)
from .model import (
    FlowSolution,
    build_full_model,
    build_refill_subproblem,
    build_relaxed_model,
    check_routing,
    evaluate_cost,
)
from .oracle import brute_force_oracle
from .planning import TransportPlan, check_flow_count, derive_transport_plans, plans_frame
from .solver import SolveLimits, SolveOutcome, Status, export_lp, run_external, solve_reference
from .teg import TimeExpandedGraph, TimeIndex, build_teg

__version__ = "0.1.0"
__author__ = "prpmi developers"

MODEL_SCHEMA_VERSION = SCHEMA_VERSION

__all__ = [
    "DecodeError",
    "FlowSolution",
    "GenerationSpec",
    "GreedyConfig",
    "Instance",
    "InstanceSchemaError",
    "InstanceValidationError",
    "MethodResult",
    "NoPredecessorError",
    "OracleSizeError",
    "ParameterError",
    "PrpmiError",
    "RoutingInfeasibleError",
    "SolveLimits",
    "SolveOutcome",
    "SolverError",
    "Status",
    "TimeExpandedGraph",
    "TimeIndex",
    "TransportPlan",
    "brute_force_oracle",
    "build_full_model",
    "build_refill_subproblem",
    "build_relaxed_model",
    "build_teg",
    "check_flow_count",
    "check_routing",
    "compute_phi",
    "cumulative_demand",
    "derive_transport_plans",
    "evaluate_cost",
    "export_lp",
    "full_milp_method",
    "generate_instance",
    "generate_small_instance",
    "greedy_method",
    "greedy_routing",
    "load_instance",
    "plans_frame",
    "run_external",
    "save_instance",
    "solve_reference",
    "two_step_heuristic",
    "validate_instance",
]
