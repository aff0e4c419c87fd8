"""Exception types raised for bad input data or configuration."""

from __future__ import annotations


class AuditError(ValueError):
    """Base class for every data or configuration error the package raises."""


class SchemaError(AuditError):
    """Input is structurally wrong: missing column, missing field, wrong type."""


class ParseError(AuditError):
    """A single cell could not be parsed. Carries its location."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            # Data rows are numbered from 1; the header is line 1 of the file.
            where.append(f"row {row} (line {row + 1})")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ScenarioError(SchemaError):
    """Invalid scenario definition. ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = "$"):
        self.path = path
        self.reason = message
        super().__init__(f"{path}: {message}")

    def under(self, prefix: str) -> "ScenarioError":
        """Same error re-rooted below ``prefix`` (e.g. ``$.groups[2]``)."""
        rel = self.path[1:] if self.path.startswith("$") else "." + self.path
        return ScenarioError(self.reason, prefix + rel)
