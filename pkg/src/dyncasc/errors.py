"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the command line
front end can report failures on stderr in a stable form.
"""


class DyncascError(Exception):
    code = "error"


class InfeasibleKernel(DyncascError):
    code = "infeasible_kernel"


class InsufficientHistory(DyncascError):
    code = "insufficient_history"


class DegenerateGraph(DyncascError):
    code = "degenerate_graph"


class ConvergenceFailure(DyncascError):
    code = "convergence_failure"


class InfeasibleConfig(DyncascError):
    code = "infeasible_config"


class RangeViolation(DyncascError):
    code = "range_violation"


class DimensionMismatch(DyncascError):
    code = "dimension_mismatch"


class EmptyCommunity(DyncascError):
    code = "empty_community"


class InsufficientFuture(DyncascError):
    code = "insufficient_future"


class TooFewAssets(DyncascError):
    code = "too_few_assets"


class DegenerateSeries(DyncascError):
    code = "degenerate_series"


class FormatError(DyncascError):
    code = "format_error"
