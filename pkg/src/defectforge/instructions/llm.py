"""Client for an optional external chat-completions endpoint.

Everything here is bypassed in offline runs; the rest of the system
only ever sees instruction text coming back from `mllm_generate`, and
falls back to rule templates when that call is not configured or fails.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources

import httpx

from ..errors import ConfigurationError, TransportError
from .schema import CategoryMetadata

ENV_URL = "DEFECTFORGE_LLM_URL"
ENV_KEY = "DEFECTFORGE_LLM_KEY"
ENV_MODEL = "DEFECTFORGE_LLM_MODEL"

DEFAULT_TIMEOUT = 30.0


@dataclass
class LlmConfig:
    url: str
    key: str
    model: str
    timeout: float = DEFAULT_TIMEOUT

    @classmethod
    def from_env(cls, env=None) -> "LlmConfig":
        env = os.environ if env is None else env
        return cls(
            url=env.get(ENV_URL, ""),
            key=env.get(ENV_KEY, ""),
            model=env.get(ENV_MODEL, ""),
        )


def system_prompt() -> str:
    return (
        resources.files("defectforge.instructions")
        .joinpath("prompt_template.txt")
        .read_text(encoding="utf-8")
    )


def user_prompt(meta: CategoryMetadata) -> str:
    lines = [f"Category: {meta.name}"]
    if meta.t_spec:
        lines.append(f"Specification: {meta.t_spec}")
    if meta.e_prior:
        lines.append(f"Expert notes: {meta.e_prior}")
    if meta.images:
        lines.append("Reference views: " + ", ".join(meta.images))
    lines.append("Produce one instruction JSON object.")
    return "\n".join(lines)


def mllm_generate(meta: CategoryMetadata, config: LlmConfig, transport=None) -> str:
    """Ask the endpoint for candidate instruction text.

    Returns the first choice's content verbatim; parsing and validation
    are the caller's job. transport is an httpx transport override for
    tests.
    """
    if not (config.url and config.key and config.model):
        raise ConfigurationError(
            f"external model endpoint not configured; set {ENV_URL}, "
            f"{ENV_KEY} and {ENV_MODEL}"
        )
    payload = {
        "model": config.model,
        "messages": [
            {"role": "system", "content": system_prompt()},
            {"role": "user", "content": user_prompt(meta)},
        ],
    }
    headers = {"Authorization": f"Bearer {config.key}"}
    try:
        with httpx.Client(transport=transport, timeout=config.timeout) as client:
            response = client.post(config.url, json=payload, headers=headers)
    except httpx.HTTPError as exc:
        raise TransportError(f"endpoint request failed: {exc}") from exc
    if response.status_code // 100 != 2:
        raise TransportError(f"endpoint returned status {response.status_code}")
    try:
        return response.json()["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise TransportError(f"malformed endpoint response: {exc}") from exc
