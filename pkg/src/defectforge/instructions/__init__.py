"""Instruction schema, validation, templates and dispatch."""

from .engine import ORIGIN_MODEL, ORIGIN_RULE, execute, resolve
from .llm import ENV_KEY, ENV_MODEL, ENV_URL, LlmConfig, mllm_generate
from .schema import (
    DEFECT_TYPES,
    OPERATORS,
    SCHEMA_VERSION,
    TYPE_TO_OPERATOR,
    CategoryMetadata,
    SynthesisInstruction,
    parse_instruction,
)
from .templates import fallback_template
from .validator import (
    DIRECTION_PINS,
    REL_MAX,
    REL_MIN,
    ResolvedInstruction,
    ValidationReport,
    materialize,
    reference_radius,
    validate,
)

__all__ = [
    "ORIGIN_MODEL",
    "ORIGIN_RULE",
    "execute",
    "resolve",
    "ENV_KEY",
    "ENV_MODEL",
    "ENV_URL",
    "LlmConfig",
    "mllm_generate",
    "DEFECT_TYPES",
    "OPERATORS",
    "SCHEMA_VERSION",
    "TYPE_TO_OPERATOR",
    "CategoryMetadata",
    "SynthesisInstruction",
    "parse_instruction",
    "fallback_template",
    "DIRECTION_PINS",
    "REL_MAX",
    "REL_MIN",
    "ResolvedInstruction",
    "ValidationReport",
    "materialize",
    "reference_radius",
    "validate",
]
