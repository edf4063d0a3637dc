"""Reading input documents and writing CSV / JSON results with provenance."""
from __future__ import annotations

import csv
import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Sequence, TextIO, Union

import numpy as np

from .errors import ConfigError
from .schemas import Provenance

_LOGGER = logging.getLogger(__name__)

PathLike = Union[str, Path]


def load_document(value: str) -> Any:
    """Parse inline JSON, or the JSON file named after an ``@``.

    Raises:
        ConfigError: If the file is unreadable or the text is not JSON.
    """
    source = "inline argument"
    try:
        if value.startswith("@"):
            source = value[1:]
            value = Path(source).read_text(encoding="utf-8")
        return json.loads(value)
    except OSError as err:
        raise ConfigError(f"cannot read {source}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"{source} is not valid JSON: {err}") from err


def format_value(value: Any) -> str:
    """Floats with 17 significant digits; everything else as text."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    if isinstance(value, (list, tuple)):
        return json.dumps([v.item() if hasattr(v, "item") else v for v in value])
    return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.integer, np.floating, np.bool_)):
        return value.item()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


@contextmanager
def _open(path: Optional[PathLike]) -> Iterator[TextIO]:
    if path is None or str(path) == "-":
        yield sys.stdout
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        yield handle
    _LOGGER.info("Wrote %s", path)


def write_csv(
    columns: Sequence[str],
    rows: Sequence[Sequence[Any]],
    provenance: Provenance,
    path: Optional[PathLike] = None,
) -> None:
    """CSV with a ``#``-prefixed provenance header; stdout when no path is given."""
    with _open(path) as handle:
        for line in provenance.header_lines():
            handle.write(f"# {line}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def write_json(
    payload: Dict[str, Any],
    provenance: Provenance,
    path: Optional[PathLike] = None,
) -> None:
    document = {"provenance": provenance.model_dump(), **payload}
    with _open(path) as handle:
        json.dump(document, handle, indent=2, sort_keys=True, default=_jsonable)
        handle.write("\n")
