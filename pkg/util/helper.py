import hashlib
import json
import logging
import math
import os
from typing import Any, Iterable, List, Sequence

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
CSV_FLOAT_FORMAT = "%.17g"


class DocumentError(ValueError):
    """A config document that is not valid JSON; carries the 1-based position."""

    def __init__(self, path: str, message: str, line: int = 0, column: int = 0):
        self.path = path
        self.line = line
        self.column = column
        where = f"{path}:{line}:{column}" if line else path
        super().__init__(f"{where}: {message}")


def configure_logging(verbosity: int = 0) -> None:
    """
    Single stream handler on the root logger.
    :param verbosity: 1 or more for DEBUG, 0 for INFO, negative for WARNING
    """
    level = logging.DEBUG if verbosity > 0 else logging.WARNING if verbosity < 0 else logging.INFO
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(level)


def safe_json_parse(raw: str, path: str = "<config>") -> dict:
    """
    Parse a JSON object document.
    :param raw: document text
    :param path: name used in diagnostics
    :return: Parsed dict
    :raises DocumentError: with line and column of the first syntax error, or when the top level is not an object
    """
    if not raw or not raw.strip():
        raise DocumentError(path, "document is empty")
    try:
        parsed = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DocumentError(path, exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(parsed, dict):
        raise DocumentError(path, f"top level must be an object, got {type(parsed).__name__}")
    return parsed


def read_document(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise DocumentError(path, exc.strerror or str(exc)) from exc


def _csv_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return CSV_FLOAT_FORMAT % value
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """
    Header line plus one line per row; floats as %.17g, '\\n' line endings.
    :return: the path written
    """
    lines: List[str] = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_cell(v) for v in row))
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")
    return path


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if hasattr(value, "tolist"):
        return _json_safe(value.tolist())
    if hasattr(value, "item"):
        return _json_safe(value.item())
    return value


def dump_json(payload: Any) -> str:
    return json.dumps(_json_safe(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path: str, payload: Any) -> str:
    """sort_keys, indent 2; NaN and inf written as null."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(dump_json(payload))
    return path


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
