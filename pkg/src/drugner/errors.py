"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, DataError
exits 2, NumericError exits 3.
"""


class DrugNerError(Exception):
    """Base class for all package-specific failures."""


class DataError(DrugNerError):
    """Malformed or inconsistent input data (corpora, checkpoints, reports)."""


class NumericError(DrugNerError):
    """Non-finite values encountered where finite ones are required."""
