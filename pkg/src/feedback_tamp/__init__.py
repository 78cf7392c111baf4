"""LLM-guided task and motion planning for tabletop packing."""

__version__ = "0.1.0"
