class DAQPError(Exception):
    """Base class for every error raised by the package"""


# ===== FACTORIZATION =====

class FactorError(DAQPError):
    pass


class NotSymmetric(FactorError):
    pass


class IndefiniteMatrix(FactorError):
    pass


class SingularBase(FactorError):
    """Row addition attempted on a factor that already has a zero pivot"""


class NegativePivot(FactorError):
    """New pivot is negative beyond tolerance (accumulated roundoff)"""


class IndexOutOfRange(FactorError, IndexError):
    pass


class SingularFactor(FactorError):
    pass


class NotSingular(FactorError):
    pass


# ===== PROBLEM DATA =====

class ProblemError(DAQPError):
    pass


class NotPositiveDefinite(ProblemError):
    pass


class TriviallyInfeasible(ProblemError):
    """Two-sided bounds with b_lower > b_upper in some row"""


class DimensionMismatch(ProblemError, ValueError):
    pass


# ===== FILE FORMAT =====

class FormatError(ProblemError):
    pass


class BadMagic(FormatError):
    pass


class MissingSection(FormatError):
    pass


class BadNumber(FormatError):
    pass


# ===== SOLVER =====

class SolverError(DAQPError):
    pass


class DegenerateDirection(SolverError):
    pass


class WarmStartError(SolverError):
    pass


# ===== ORACLE =====

class OracleError(DAQPError):
    pass


class NoFeasibleCandidate(OracleError):
    pass


class OracleBudgetExceeded(OracleError):
    pass
