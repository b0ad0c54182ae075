"""Versioned prompt templates shipped as package resources.

Templates are configuration, not code: each is a UTF-8 text file with
``{placeholder}`` slots filled by str.format. ``prompt_hash`` fingerprints a
template so run records can tell which prompt produced them.
"""

from __future__ import annotations

import hashlib
from importlib import resources
from pathlib import Path

JUDGE_SYSTEM_PROMPT = (
    "You follow the task instructions exactly and answer only in the requested format."
)
SEGMENT_SYSTEM_PROMPT = (
    "You are a meticulous legal assistant that segments contracts into clauses."
)


def load_template(name: str) -> str:
    """Load a built-in template by bare name, or any path to a template file."""
    path = Path(name)
    if path.suffix == ".txt" and path.exists():
        return path.read_text(encoding="utf-8")
    return resources.files(__package__).joinpath(f"{name}.txt").read_text(encoding="utf-8")


def prompt_hash(template: str) -> str:
    return hashlib.sha256(template.encode("utf-8")).hexdigest()[:16]
