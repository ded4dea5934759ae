"""Edge voice-assistant gateway: speech front-end, semantic cache, LLM routing, device actions."""

__version__ = "0.1.0"
