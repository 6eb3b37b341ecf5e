"""Summary files: JSON with the run configuration in front, or plot-ready CSV."""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Tuple

from pydantic import BaseModel

from greedy_cli.config import OutputFormat, RunConfig

logger = logging.getLogger(__name__)


def summary_path(config: RunConfig, stem: str) -> Path:
    """output_path if given, else <stem>-seed<seed>.<format> in the working directory."""
    if config.output_path is not None:
        return config.output_path
    fmt = config.format or OutputFormat.JSON
    return Path(f"{stem}-seed{config.seed}.{fmt.value}")


def _scalars(data: Dict[str, Any]) -> Dict[str, Any]:
    flat = {}
    for key, value in data.items():
        if isinstance(value, dict):
            flat.update({f"{key}.{k}": v for k, v in value.items() if not isinstance(v, (dict, list))})
        elif not isinstance(value, list):
            flat[key] = value
    return flat


def _table(result: BaseModel) -> Tuple[List[str], List[List[Any]]]:
    data = result.model_dump(by_alias=True)
    if "points" in data:
        items = [_scalars(p) for p in data["points"]]
    elif "rows" in data:
        items = [_scalars(r) for r in data["rows"]]
    elif "table" in data:
        items = [
            {"pattern": key, "chain": counts[0], "oracle": counts[1]}
            for key, counts in data["table"].items()
        ]
    else:
        items = [_scalars(data)]
    header = list(items[0]) if items else []
    for item in items[1:]:
        header += [key for key in item if key not in header]
    return header, [[item.get(key, "") for key in header] for item in items]


def write_summary(result: BaseModel, config: RunConfig, path: Path) -> Path:
    fmt = config.format or OutputFormat.JSON
    if fmt is OutputFormat.JSONL:
        raise ValueError("summaries are written as json or csv, not jsonl")
    config_json = json.dumps(config.echo())
    with open(path, "w", encoding="utf-8", newline="") as f:
        if fmt is OutputFormat.CSV:
            f.write(f'# {{"config": {config_json}}}\n')
            header, rows = _table(result)
            writer = csv.writer(f)
            writer.writerow(header)
            writer.writerows(rows)
        else:
            body = result.model_dump_json(by_alias=True)
            f.write(f'{{"config": {config_json}, "result": {body}}}\n')
    logger.info(f"[output] wrote {type(result).__name__} to {path}")
    return path
