'''
Utility functions for baby-hgrn.

This module provides helpers for JSON / JSONL files, config-file
parsing, output-directory resolution and tabular rendering shared by
the data, training, evaluation and CLI layers.
'''

import json
import os
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Union

import polars as pl
from dotenv import load_dotenv

from baby_hgrn.errors import ConfigError, IngestionError

PathLike = Union[str, os.PathLike]

OUTPUT_ROOT_ENV = 'BABY_HGRN_OUTPUT_ROOT'
WORKERS_ENV = 'BABY_HGRN_WORKERS'


def count_words(text: str) -> int:
    '''Whitespace-split word count.'''
    return len(text.split())


def read_jsonl(path: PathLike) -> Iterator[Dict[str, Any]]:
    '''
    Iterate over the JSON objects of a line-delimited file.

    Blank lines are skipped.

    Raises:
        IngestionError: If the file cannot be opened or a line is not a
            JSON object.
    '''
    try:
        fh = open(path, 'r', encoding='utf-8')
    except OSError as exc:
        raise IngestionError(f'Cannot read {str(path)!r}: {exc}') from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestionError(f'{str(path)!r} line {lineno}: {exc}') from exc
            if not isinstance(record, dict):
                raise IngestionError(
                    f'{str(path)!r} line {lineno}: expected a JSON object'
                )
            yield record


def write_jsonl(path: PathLike, rows: Iterable[Dict[str, Any]]) -> str:
    '''Write rows as UTF-8 JSONL, creating parent directories.  Returns the path.'''
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + '\n')
    return str(path)


def append_jsonl(path: PathLike, row: Dict[str, Any]) -> None:
    '''Append one JSON line (append-only metrics logs).'''
    with open(path, 'a', encoding='utf-8') as fh:
        fh.write(json.dumps(row, ensure_ascii=False) + '\n')


def write_json(data: Any, path: PathLike) -> str:
    '''
    Write JSON to disk with stable key order.

    Args:
        data: JSON-serialisable object
        path: Destination file; parent directories are created

    Returns:
        Path to the written file
    '''
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write('\n')
    return str(path)


def load_json(path: PathLike) -> Any:
    '''Load a JSON file, raising :class:`IngestionError` on failure.'''
    try:
        with open(path, 'r', encoding='utf-8') as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestionError(f'Cannot load {str(path)!r}: {exc}') from exc


def _parse_scalar(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def load_config_file(path: PathLike) -> Dict[str, Any]:
    '''
    Load a config file as a flat mapping.

    Two formats are accepted:

    * a JSON object;
    * plain-text ``key=value`` lines, ``#`` comments allowed.  Values are
      parsed as JSON literals when possible (``3``, ``1e-3``, ``true``,
      ``[1, 2]``) and kept as strings otherwise.

    Raises:
        ConfigError: On malformed lines or a non-object JSON document.
        IngestionError: If the file cannot be read.
    '''
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as exc:
        raise IngestionError(f'Cannot read config {str(path)!r}: {exc}') from exc

    stripped = text.lstrip()
    if stripped.startswith('{'):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f'Config {str(path)!r} is not valid JSON: {exc}') from exc
        return dict(data)

    config: Dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f'Config {str(path)!r} line {lineno}: expected key=value')
        key, raw = line.split('=', 1)
        config[key.strip().replace('-', '_')] = _parse_scalar(raw.strip())
    return config


def output_root(override: Optional[PathLike] = None) -> Path:
    '''
    Resolve the directory under which runs are written.

    Order: explicit ``override``, then ``BABY_HGRN_OUTPUT_ROOT`` (a
    ``.env`` file in the working directory is honoured), then ``runs``.
    '''
    if override:
        return Path(override)
    load_dotenv()
    return Path(os.getenv(OUTPUT_ROOT_ENV, 'runs'))


def default_workers() -> int:
    '''Worker cap from ``BABY_HGRN_WORKERS`` (default 1, deterministic).'''
    load_dotenv()
    raw = os.getenv(WORKERS_ENV, '1')
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f'{WORKERS_ENV} must be an integer, got {raw!r}') from None


def to_table(
    rows: List[Dict[str, Any]], schema: Optional[Dict[str, Any]] = None
) -> pl.DataFrame:
    '''Convert a list of dictionaries to a polars DataFrame.'''
    if not rows and schema is not None:
        return pl.DataFrame(schema=schema)
    return pl.DataFrame(rows, schema=schema)


def format_table(df: pl.DataFrame, max_rows: int = 50) -> str:
    '''Render a DataFrame for stdout without truncating typical reports.'''
    with pl.Config(
        tbl_rows=max_rows, tbl_hide_dataframe_shape=True, fmt_str_lengths=60
    ):
        return str(df)
