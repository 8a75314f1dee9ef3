"""
errors.py

Exception hierarchy shared by every simulator module.
"""


class SimulationError(Exception):
    """Base class for all simulator failures."""


class GeometryError(SimulationError, ValueError):
    """Footprint / elevation / distance outside its geometric domain."""


class ConfigError(SimulationError, ValueError):
    """Bad scenario or sweep configuration."""

    def __init__(self, message, *, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
        self.message = message


class AirtimeError(SimulationError, ValueError):
    """Payload that cannot be framed in a single LoRa packet."""


class OracleError(SimulationError):
    """Reference implementation used outside its guard rails."""
