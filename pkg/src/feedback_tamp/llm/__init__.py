from .backends import (
    BackendError,
    BudgetExhausted,
    HeuristicBackend,
    HttpChatBackend,
    QueryBudget,
    RandomBackend,
    ReplayBackend,
    TransportError,
    make_backend,
    query,
)
from .prompts import PromptBundle, Strategy, build_prompt, corrective_prompt, render_trace
from .response import LlmResponse, MalformedResponse, format_response, parse_response
from .sampling import grid_packing, sample_params_random

__all__ = [
    "BackendError", "BudgetExhausted", "HeuristicBackend", "HttpChatBackend", "QueryBudget",
    "RandomBackend", "ReplayBackend", "TransportError", "make_backend", "query",
    "PromptBundle", "Strategy", "build_prompt", "corrective_prompt", "render_trace",
    "LlmResponse", "MalformedResponse", "format_response", "parse_response",
    "grid_packing", "sample_params_random",
]
