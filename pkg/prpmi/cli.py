"""
Linha de comando ``prpmi``.

Subcomandos
-----------
generate
    Gera uma instância e grava o arquivo JSON.
solve
    Resolve uma instância por MA, RH ou GH e grava a solução, as trocas e os planos.
bench
    Executa o benchmark e grava os arquivos CSV.

Códigos de saída: 0 sucesso, 2 uso ou entrada inválida, 3 sem solução
dentro dos limites, 4 instância ou modelo inviável.
"""

import argparse
import asyncio
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from . import MODEL_SCHEMA_VERSION, __version__
from .bench import build_suite, run_suite, trend_check, write_outputs
from .config import Settings, load_settings
from .exceptions import InstanceSchemaError, InstanceValidationError, ParameterError, PrpmiError
from .heuristics import METHODS, GreedyConfig, run_method
from .instance import (
    DEFAULT_HORIZON,
    DEMAND_MAGNITUDES,
    DISSATISFACTION_PROFILES,
    GenerationSpec,
    generate_instance,
    load_instance,
    save_instance,
    validate_instance,
)
from .model import (
    build_full_model,
    build_relaxed_model,
    destination_stock_frame,
    solution_summary,
    swap_hour_frame,
)
from .planning import derive_transport_plans, plans_frame
from .solver import SolveLimits, Status, export_lp, run_external, solve_reference
from .teg import build_teg

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_SOLUTION = 3
EXIT_INFEASIBLE = 4


@dataclass(frozen=True)
class CliConfig:
    """Opções resolvidas de uma execução.

    Atributos
    ----------
    subcommand : str
    settings : Settings
        Ambiente, arquivo ``--config`` e opções, nessa ordem de prioridade crescente.
    output : Path
    """

    subcommand: str
    settings: Settings
    output: Path

    @property
    def limits(self) -> SolveLimits:
        return SolveLimits.from_settings(self.settings)

    def solve_function(self):
        command = self.settings.solver_command
        if not command:
            return solve_reference
        return lambda model, limits: run_external(model, command, limits)


def _methods(text: str) -> list[str]:
    methods = [m.strip().upper() for m in text.split(",") if m.strip()]
    unknown = sorted(set(methods) - set(METHODS))
    if not methods or unknown:
        raise argparse.ArgumentTypeError(f"expected a comma-separated subset of {','.join(METHODS).lower()}")
    return methods


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prpmi",
        description="Roteamento de armazenamentos móveis de hidrogênio: modelo, heurísticas e benchmark.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"prpmi {__version__} (model schema {MODEL_SCHEMA_VERSION})",
    )
    parser.add_argument("--config", type=Path, help="arquivo TOML com as configurações")
    parser.add_argument("--log-level", help="nível de log (DEBUG, INFO, WARNING, ERROR)")
    commands = parser.add_subparsers(dest="subcommand", required=True)

    generate = commands.add_parser("generate", help="gera uma instância")
    generate.add_argument("--sources", type=int, default=1, help="número de fontes (1 a 7)")
    generate.add_argument("--dest-ratio", type=float, default=6.0, help="destinos por fonte (4.33 a 8.5)")
    generate.add_argument("--storage-ratio", type=float, default=1.4, help="armazenamentos por destino (1.26 a 1.5)")
    generate.add_argument("--magnitude", type=float, default=DEMAND_MAGNITUDES[0], help="demanda diária média (kg)")
    generate.add_argument(
        "--profile",
        type=int,
        choices=range(len(DISSATISFACTION_PROFILES)),
        default=0,
        help="perfil de insatisfação: 0 = (12, 1500), 1 = (14, 2500)",
    )
    generate.add_argument("--horizon", type=int, default=DEFAULT_HORIZON, help="número de dias")
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("-o", "--output", type=Path, required=True, help="arquivo JSON de saída")

    solve = commands.add_parser("solve", help="resolve uma instância")
    solve.add_argument("instance", type=Path, help="arquivo JSON da instância")
    solve.add_argument("--method", type=str.upper, choices=METHODS, default="GH")
    solve.add_argument("--limit", type=float, help="tempo máximo por resolução (s)")
    solve.add_argument("--node-limit", type=int)
    solve.add_argument("--gap", type=float, help="tolerância relativa de gap")
    solve.add_argument("--lp-engine", choices=("auto", "simplex", "highs"))
    solve.add_argument("--critical-threshold", type=float, help="limiar crítico da heurística gulosa (kg)")
    solve.add_argument("--solver-command", help="resolvedor externo que lê arquivos LP")
    solve.add_argument("--export-lp", type=Path, help="grava o modelo em formato LP e termina")
    solve.add_argument("-o", "--output", type=Path, default=Path("."), help="diretório de saída")

    bench = commands.add_parser("bench", help="executa o benchmark")
    bench.add_argument("--methods", type=_methods, required=True, help="métodos separados por vírgula, ex. gh,rh")
    bench.add_argument("--count", type=int, default=16, help="número de instâncias (mínimo 4)")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--horizon", type=int, default=DEFAULT_HORIZON)
    bench.add_argument("--limit", type=float, help="tempo máximo por resolução (s)")
    bench.add_argument("--node-limit", type=int)
    bench.add_argument("--workers", type=int)
    bench.add_argument("--critical-threshold", type=float)
    bench.add_argument("--solver-command")
    bench.add_argument("-o", "--output", type=Path, default=Path("bench"), help="diretório de saída")
    return parser


def _settings(args: argparse.Namespace) -> Settings:
    settings = load_settings(args.config)
    return settings.replace(
        log_level=args.log_level,
        time_limit=getattr(args, "limit", None),
        node_limit=getattr(args, "node_limit", None),
        gap_tolerance=getattr(args, "gap", None),
        lp_engine=getattr(args, "lp_engine", None),
        workers=getattr(args, "workers", None),
        critical_threshold=getattr(args, "critical_threshold", None),
        solver_command=getattr(args, "solver_command", None),
    )


def cmd_generate(args: argparse.Namespace, cli: CliConfig) -> int:
    spec = GenerationSpec(
        n_sources=args.sources,
        dest_ratio=args.dest_ratio,
        storage_ratio=args.storage_ratio,
        demand_magnitude=args.magnitude,
        dissatisfaction_profile=DISSATISFACTION_PROFILES[args.profile],
        rng_seed=args.seed,
        horizon=args.horizon,
    )
    instance = generate_instance(spec)
    save_instance(instance, cli.output)
    violations = validate_instance(instance)
    if violations:
        for violation in violations:
            print(violation)
    else:
        print(f"{cli.output}: valid ({instance.n_sources} sources, {instance.n_destinations} destinations, {instance.n_storages} storages)")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace, cli: CliConfig) -> int:
    instance = load_instance(args.instance)
    teg = build_teg(instance)
    if args.export_lp is not None:
        if args.method == "GH":
            raise ParameterError("--export-lp needs --method ma or rh")
        model = build_full_model(instance, teg) if args.method == "MA" else build_relaxed_model(instance, teg)
        export_lp(model, args.export_lp)
        print(f"{args.export_lp}: {model.summary()}")
        return EXIT_OK

    greedy = GreedyConfig.for_instance(instance, cli.settings.critical_threshold)
    result = run_method(args.method, instance, teg, cli.limits, greedy, cli.solve_function())
    if result.solution is None:
        logger.error("%s on %s: %s %s", result.method, instance.name, result.status.value, result.message)
        return EXIT_INFEASIBLE if result.status is Status.INFEASIBLE else EXIT_NO_SOLUTION

    out = cli.output
    out.mkdir(parents=True, exist_ok=True)
    solution = result.solution
    summary = solution_summary(instance, solution)
    summary.update({"method": result.method, "status": result.status.value, "bound": result.bound, "gap": result.gap})
    (out / "solution.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    solution.to_frame(teg).to_csv(out / "flows.csv", index=False)
    destination_stock_frame(instance, teg, solution).to_csv(out / "stocks.csv", index=False)
    swap_hour_frame(instance, solution).to_csv(out / "swaps.csv", index=False)
    plans = derive_transport_plans(teg, solution)
    plans_frame(teg, solution, plans).to_csv(out / "plans.csv", index=False)

    line = f"{result.method} {result.status.value} cost={solution.cost:.6f}"
    if result.bound is not None:
        line += f" bound={result.bound:.6f} gap={result.gap:.6f}"
    print(line)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace, cli: CliConfig) -> int:
    instances = build_suite(args.seed, args.count, args.horizon)
    records = asyncio.run(
        run_suite(
            instances,
            args.methods,
            cli.limits,
            cli.settings.workers,
            cli.settings.critical_threshold,
            cli.solve_function(),
        )
    )
    paths = write_outputs(records, cli.output)
    report = trend_check(records)
    logger.info("Trend check: %s", report)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "solve": cmd_solve, "bench": cmd_bench}


def main(argv: list[str] | None = None) -> int:
    """Ponto de entrada; devolve o código de saída."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = _settings(args)
    except (OSError, ParameterError) as exc:
        parser.error(str(exc))
    logging.basicConfig(
        level=settings.log_level.upper(),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )
    cli = CliConfig(args.subcommand, settings, args.output)
    try:
        return COMMANDS[args.subcommand](args, cli)
    except (ParameterError, InstanceSchemaError, OSError) as exc:
        print(f"prpmi {args.subcommand}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InstanceValidationError as exc:
        print(f"prpmi {args.subcommand}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except PrpmiError as exc:
        logger.error("%s failed: %s", args.subcommand, exc)
        return EXIT_NO_SOLUTION


if __name__ == "__main__":
    sys.exit(main())
