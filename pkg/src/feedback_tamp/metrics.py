"""Per-trial call counters shared by the planner, LLM and motion layers."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass
class Counters:
    llm_calls: int = 0
    mp_calls: int = 0

    def as_dict(self) -> dict[str, int]:
        return {"llm_calls": self.llm_calls, "mp_calls": self.mp_calls}
