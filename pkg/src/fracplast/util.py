import json, os
from copy import deepcopy
from pathlib import Path
from typing import Any, Dict, Union
from .errors import ScenarioError

OUTPUT_DIR_ENV = "FRACPLAST_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "fracplast-output"


class Util:

    @classmethod
    def load_json(cls, path: Union[str, Path]) -> Dict[str, Any]:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ScenarioError(f"Cannot read scenario file {path}: {e}") from e
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ScenarioError(f"Error parsing JSON in {path}", [f"line {e.lineno}, column {e.colno}: {e.msg}"]) from e
        if not isinstance(data, dict):
            raise ScenarioError(f"Scenario file {path} must contain a JSON object")
        return data

    @classmethod
    def deep_merge(cls, base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
        """Nested dictionaries merge key by key; any other value in `override` replaces the base value."""
        merged = deepcopy(base)
        for key, value in override.items():
            if isinstance(value, dict) and isinstance(merged.get(key), dict):
                merged[key] = cls.deep_merge(merged[key], value)
            else:
                merged[key] = deepcopy(value)
        return merged

    @classmethod
    def output_dir(cls, explicit: Union[str, Path, None] = None) -> Path:
        if explicit:
            return Path(explicit)
        return Path(os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR))
