"""The deployable daemon: config, orchestration, HTTP API, CLI and session replay."""

from edgeassist.gateway.config import GatewayConfig, load_config, parse_config
from edgeassist.gateway.service import Gateway, InteractRequest, InteractResponse, canonical_json

__all__ = ["Gateway", "GatewayConfig", "InteractRequest", "InteractResponse", "canonical_json", "load_config", "parse_config"]
