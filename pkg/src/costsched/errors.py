"""Exception taxonomy.

DataError covers malformed or unusable inputs (CLI exit code 2),
ComputationError covers failures of the numerical machinery (exit code 3).
"""


class CostschedError(Exception):
    pass


class DataError(CostschedError):
    pass


class ComputationError(CostschedError):
    pass


class InvalidVariableIndex(DataError):
    pass


class InvalidCost(DataError):
    pass


class InvalidCorrelation(DataError):
    pass


class InconsistentProfile(DataError):
    pass


class EmptyDataset(DataError):
    pass


class UnknownLabelColumn(DataError):
    pass


class ParseError(DataError):
    def __init__(self, row, col, message=""):
        self.row = row
        self.col = col
        super().__init__(f"row {row}, column {col}: {message}" if message
                         else f"row {row}, column {col}")


class DatasetTooSmall(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class DegenerateLabels(DataError):
    pass


class EmptyEvaluationSet(DataError):
    pass


class TooFewPoints(DataError):
    pass


class ProblemTooLarge(DataError):
    pass


class EngineNeedsTwoVariables(DataError):
    pass


class ConvergenceFailure(ComputationError):
    def __init__(self, class_index, lam, message=""):
        self.class_index = class_index
        self.lam = lam
        detail = f"class {class_index}, lambda {lam:g}"
        super().__init__(f"{detail}: {message}" if message else detail)


class NoFeasibleModel(ComputationError):
    pass
