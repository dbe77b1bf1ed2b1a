"""
Configuration management for Rendezvous Lab.

Handles the run-wide constants (kappa, default seed, round budget, worker
count) and plain ``key=value`` scenario files with schema versioning and
defensive error handling.
"""

import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict


logger = logging.getLogger(__name__)

# Schema version
SCHEMA_VERSION = 1

# Termination constant of the early-stopping colouring: a node with label x
# finishes within KAPPA * log*(x) rounds.
KAPPA = 60

# Committed default seed so every command is reproducible out of the box
DEFAULT_SEED = 20240611

KAPPA_ENV_VAR = "RLAB_KAPPA"

# Default configuration (v1). max_rounds 0 means "derive from the bound".
# kappa is left out so that resolve_kappa() applies unless a file sets it.
DEFAULT_CONFIG = {
    "schema_version": SCHEMA_VERSION,
    "seed": DEFAULT_SEED,
    "max_rounds": 0,
    "workers": 1,
}

_INT_KEYS = {
    "schema_version": 1,
    "kappa": 1,
    "seed": None,
    "max_rounds": 0,
    "workers": 1,
}


def resolve_kappa() -> int:
    """
    Resolve the kappa constant in effect.

    Checks the RLAB_KAPPA environment variable first; a value that is not a
    positive integer is ignored with a warning.

    Returns:
        The kappa value to use
    """
    env_kappa = os.environ.get(KAPPA_ENV_VAR)
    if env_kappa:
        try:
            value = int(env_kappa.strip())
        except ValueError:
            value = 0
        if value >= 1:
            return value
        logger.warning("Ignoring invalid %s=%r, using kappa=%d", KAPPA_ENV_VAR, env_kappa, KAPPA)
    return KAPPA


def _coerce(key: str, raw: str) -> Any:
    """Coerce a raw string for a known integer key; unknown keys stay strings."""
    if key not in _INT_KEYS:
        return raw
    value = int(raw)
    minimum = _INT_KEYS[key]
    if minimum is not None and value < minimum:
        raise ValueError(f"{key} must be >= {minimum}, got {value}")
    return value


def parse_config_text(text: str) -> Dict[str, Any]:
    """
    Parse key=value text into a dictionary.

    Blank lines and lines starting with ``#`` are skipped.

    Raises:
        ValueError: On a line without '=' or an invalid integer value
    """
    parsed: Dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        parsed[key] = _coerce(key, raw.strip())
    return parsed


def load_config(config_path: str, return_status: bool = False):
    """
    Load configuration from a key=value file.

    Returns default configuration if:
    - File does not exist
    - A line cannot be parsed

    Never raises exceptions - always returns a valid config dict.

    Args:
        config_path: Path to the configuration file
        return_status: If True, returns tuple (config, status) where status is
                      "ok", "missing", or "invalid"

    Returns:
        Dictionary containing the loaded configuration merged with defaults,
        or tuple (config, status) if return_status=True
    """
    config_file = Path(config_path)

    if not config_file.is_file():
        if return_status:
            return (DEFAULT_CONFIG.copy(), "missing")
        return DEFAULT_CONFIG.copy()

    try:
        with open(config_file, "r", encoding="utf-8") as f:
            loaded = parse_config_text(f.read())
    except (ValueError, OSError) as exc:
        logger.warning("Could not read config %s: %s", config_file, exc)
        if return_status:
            return (DEFAULT_CONFIG.copy(), "invalid")
        return DEFAULT_CONFIG.copy()

    config = DEFAULT_CONFIG.copy()
    config.update(loaded)
    config["schema_version"] = SCHEMA_VERSION

    if return_status:
        return (config, "ok")
    return config


def save_config(config_path: str, config: Dict[str, Any]) -> bool:
    """
    Save configuration to a key=value file atomically.

    Writes to a temporary file first, then renames it to the target path.

    Args:
        config_path: Path where the configuration file should be saved
        config: Configuration dictionary to save

    Returns:
        True if save was successful, False otherwise
    """
    if not isinstance(config, dict):
        return False

    config_file = Path(config_path)

    config_to_save = DEFAULT_CONFIG.copy()
    config_to_save.update(config)
    config_to_save["schema_version"] = SCHEMA_VERSION

    lines = []
    for key, value in config_to_save.items():
        text = str(value)
        if "\n" in text or "=" in str(key):
            return False
        lines.append(f"{key}={text}\n")

    tmp_path = None
    try:
        config_file.parent.mkdir(parents=True, exist_ok=True)

        # Write atomically: write to temp file, then rename
        with tempfile.NamedTemporaryFile(
            mode="w",
            encoding="utf-8",
            dir=config_file.parent,
            delete=False,
            suffix=".tmp",
        ) as tmp_file:
            tmp_path = tmp_file.name
            tmp_file.writelines(lines)

        os.replace(tmp_path, config_file)
        return True

    except OSError:
        if tmp_path is not None:
            try:
                os.unlink(tmp_path)
            except OSError:
                pass
        return False
