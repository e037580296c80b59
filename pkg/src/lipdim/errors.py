"""Exception taxonomy shared across the package and the CLI.

The CLI maps these onto exit codes: :class:`SpecError` -> 2 (invalid or
over-budget space/map/experiment spec), :class:`SchemaError` -> 3 (I/O or
schema violations), :class:`ClaimFailure` -> 1 (a reproduce-run claim check
failed).
"""

from __future__ import annotations


class LipdimError(Exception):
    """Base class for package-specific errors."""


class SpecError(LipdimError):
    """A space/map/experiment specification is invalid or exceeds the budget."""


class SchemaError(LipdimError):
    """A file does not conform to the serialization schema."""


class ClaimFailure(LipdimError):
    """A quantitative claim checked by an experiment did not hold."""
