from math import isinf
from pathlib import Path
from typing import Any

from jinja2 import Template

from supercurves.records import format_value

TEMPLATES_DIR = Path(__file__).parent / "templates"


def _short(value: float) -> str:
    if isinf(value):
        return "infinity"
    return f"{value:.6e}"


def render(name: str, **context: Any) -> str:
    """Render ``templates/<name>.jinja``; ``full`` and ``short`` format floats."""
    with open(TEMPLATES_DIR / f"{name}.jinja", encoding="utf-8") as file:
        template = Template(file.read(), trim_blocks=True, lstrip_blocks=True)
    return template.render(full=format_value, short=_short, **context).rstrip() + "\n"
