"""Exception taxonomy shared across the toolkit.

Every error raised by the public API derives from DefectForgeError so
callers (CLI, service) can map failures to exit codes / HTTP statuses
with a single except clause. ``code`` is the stable machine-readable
identifier used in error envelopes.
"""

from __future__ import annotations


class DefectForgeError(Exception):
    """Base class for all toolkit errors."""

    code = "error"


class ContractError(DefectForgeError):
    """Precondition violated by the caller (bad argument, out of range)."""

    code = "contract_error"


class FormatError(DefectForgeError):
    """Malformed input file (PLY/XYZ/JSON/TOML)."""

    code = "format_error"


class ValidationError(DefectForgeError):
    """Instruction rejected by the validator.

    ``report`` carries the structured per-check findings.
    """

    code = "validation_error"

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report


class DegenerateGeometryError(DefectForgeError):
    """Geometry too degenerate for the requested operation."""

    code = "degenerate_geometry"


class UnreachableAnchorError(DegenerateGeometryError):
    """Anchor pair not connected in the neighbor graph."""

    code = "unreachable_anchor"


class UndefinedMetricError(DefectForgeError):
    """Metric undefined for the given inputs (e.g. single-class AUROC)."""

    code = "undefined_metric"


class ConfigurationError(DefectForgeError):
    """Missing or inconsistent configuration."""

    code = "configuration_error"


class TransportError(DefectForgeError):
    """Network failure talking to the external model endpoint."""

    code = "transport_error"


class ResourceLimitError(DefectForgeError):
    """Input exceeds a configured size cap."""

    code = "resource_limit"
