"""Collects one verdict line per acceptance criterion for the terminal summary."""

from __future__ import annotations

LINES: list[str] = []


def record(label: str, ok: bool, detail: str, tolerance: str) -> None:
    line = f"criterion {label}: {'PASS' if ok else 'FAIL'} - {detail} [tolerance: {tolerance}]"
    LINES.append(line)
    print(line)
