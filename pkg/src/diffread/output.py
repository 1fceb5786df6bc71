"""CSV rendering of experiment results.

The format is deterministic: `#`-prefixed metadata comment lines (tool
version, config hash, master seed), one header row naming the columns, then
data rows with floats in shortest round-trip form. Identical (config, seed)
pairs therefore produce byte-identical files.
"""

from __future__ import annotations

from .models import ExperimentResult, ProfileResult


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(result: ExperimentResult | ProfileResult) -> str:
    lines = [f"# {key} = {result.meta[key]}" for key in sorted(result.meta)]
    lines.append(",".join(result.columns))
    if isinstance(result, ExperimentResult):
        for row in result.rows:
            dumped = row.model_dump()
            lines.append(",".join(_format_value(dumped[c])
                                  for c in result.columns))
    else:
        for row in result.rows:
            lines.append(",".join(_format_value(v) for v in row))
    return "\n".join(lines) + "\n"
