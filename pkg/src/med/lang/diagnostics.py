"""Diagnostics shared by the tokenizer, parser and type checker."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    line: int
    col: int
    code: str

    def render(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.col}: {self.severity}: {self.message} [{self.code}]"

    def to_json(self, filename: str = "<input>") -> dict:
        return {
            "file": filename,
            "line": self.line,
            "col": self.col,
            "code": self.code,
            "message": self.message,
        }


class SpecError(Exception):
    """Parse or type failure; always carries at least one diagnostic."""

    def __init__(self, diagnostics: list[Diagnostic], filename: str = "<input>"):
        self.diagnostics = list(diagnostics)
        self.filename = filename
        super().__init__(
            "\n".join(d.render(filename) for d in self.diagnostics) or "invalid model"
        )
