"""Collects one verdict line per acceptance criterion for the terminal summary."""

LINES: list[str] = []


def record(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)
