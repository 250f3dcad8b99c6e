import json
import logging
from pathlib import Path

logger = logging.getLogger(__name__)

# --- Data Structures ---
# Populated once when the module is first imported.
_schemas: dict[str, dict] = {}

_JSON_TYPES = {
    "integer": int,
    "number": (int, float),
    "string": str,
    "boolean": bool,
    "array": list,
    "object": dict,
}


def _load_schemas():
    """
    Loads every field-spec schema shipped next to this module.

    Each ``<name>.json`` maps a field name to {"type", "required", "nullable"}.
    Files that fail to parse are skipped with a warning; records of that kind
    then fail validation with an "unknown schema" error.
    """
    global _schemas

    loaded = {}
    for path in sorted(Path(__file__).parent.glob("*.json")):
        try:
            with open(path, "r") as f:
                loaded[path.stem] = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.warning("Could not load or parse schema %s: %s", path.name, e)
    _schemas = loaded
    logger.debug("Successfully loaded %d record schemas.", len(_schemas))


def _matches(value, json_type: str) -> bool:
    # bool is an int subclass; JSON keeps them apart
    if json_type in ("integer", "number") and isinstance(value, bool):
        return False
    return isinstance(value, _JSON_TYPES[json_type])


def schema_names() -> list[str]:
    return sorted(_schemas)


def get_schema(name: str) -> dict:
    """
    Returns the field-spec schema registered under ``name``.

    Raises:
        KeyError: if no such schema file was loaded.
    """
    return _schemas[name]


def validate_record(data, name: str) -> dict[str, str]:
    """
    Validates a JSON record against the named field-spec schema.

    Args:
        data: The decoded JSON value.
        name: Schema name, e.g. "pmf" or "simulate".

    Returns:
        An empty dict when valid; otherwise a dict of field -> message.
    """
    if name not in _schemas:
        return {"_schema": f"Unknown schema '{name}'."}
    if not isinstance(data, dict):
        return {"_record": f"Record must be a JSON object, but got {type(data).__name__}."}

    errors = {}
    for field, specs in _schemas[name].items():
        if field not in data:
            if specs["required"]:
                errors[field] = f"'{field}' is a required field."
            continue
        value = data[field]
        if value is None:
            if not specs.get("nullable", False):
                errors[field] = f"'{field}' must not be null."
            continue
        if not _matches(value, specs["type"]):
            errors[field] = f"'{field}' must be of type {specs['type']}, but got {type(value).__name__}."
    return errors


# --- Main execution block for the module ---
_load_schemas()
