class CfdroError(Exception):
    """
    base class of every error raised by the numerical core
    """


class DimensionError(CfdroError, ValueError):
    pass


class ScmDefinitionError(CfdroError, ValueError):
    """
    cycle in the parent graph, undeclared parent, unknown structural function,
    empty or out of range sensitive set, missing exogenous spec
    """


class NonlinearScmError(CfdroError, ValueError):
    pass


class InterventionError(CfdroError, ValueError):
    pass


class LossSpecError(CfdroError, ValueError):
    pass


class NotDifferentiableError(CfdroError, ValueError):
    pass


class DatasetError(CfdroError, ValueError):
    """
    ingestion / dataset error. `column` and `row` name the offending cell when known.
    """

    def __init__(self, message, column=None, row=None):
        super().__init__(message)
        self.column = column
        self.row = row


class RankDeficiencyError(CfdroError, ArithmeticError):
    pass


class DivergenceError(CfdroError, ArithmeticError):
    pass


class OracleBudgetError(CfdroError):
    pass


class AllocationError(CfdroError, ArithmeticError):
    pass


class TrainerConfigError(CfdroError, ValueError):
    pass


class OracleInputError(CfdroError, ValueError):
    """
    transport weights that do not sum to one, bound parameters out of range
    """


class ArtifactError(CfdroError):
    """
    artifact directory missing, empty or holding malformed reports
    """
