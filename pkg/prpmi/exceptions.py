"""Exceções do pacote prpmi."""


class PrpmiError(Exception):
    """Erro base de todas as exceções do pacote."""


class ParameterError(PrpmiError, ValueError):
    """Parâmetro fora do intervalo permitido."""


class IndexRangeError(ParameterError, IndexError):
    """Índice (destino, dia ou hora) fora do intervalo."""


class InstanceSchemaError(PrpmiError):
    """Arquivo de instância malformado.

    Atributos
    ----------
    errors : list of str
        Um item por campo inválido, no formato ``caminho: mensagem``.
    """

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("Invalid instance file: " + "; ".join(self.errors))


class InstanceValidationError(PrpmiError):
    """Instância que viola invariantes de tipo ou hipóteses do problema.

    Atributos
    ----------
    violations : list of Violation
        As violações encontradas por ``validate_instance``.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        details = "; ".join(f"[{v.assumption}] {v.message}" for v in self.violations)
        super().__init__(f"Instance violates {len(self.violations)} condition(s): {details}")


class NoPredecessorError(PrpmiError):
    """O primeiro índice de tempo não tem predecessor."""


class RoutingInfeasibleError(PrpmiError):
    """Fluxo de armazenamentos que viola as restrições de roteamento.

    Atributos
    ----------
    constraint : str
        Nome da primeira família de restrições violada.
    """

    def __init__(self, constraint: str, detail: str = ""):
        self.constraint = constraint
        message = f"Routing constraint '{constraint}' violated"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class DecodeError(PrpmiError):
    """Solução que não pode ser decomposta em planos de transporte."""


class OracleSizeError(PrpmiError):
    """Instância grande demais para a enumeração exaustiva."""


class SolverError(PrpmiError):
    """Falha numérica do resolvedor de programação linear."""
