'''
Utility functions for baby-hgrn.
'''

from baby_hgrn.utils.helpers import (
    append_jsonl,
    count_words,
    default_workers,
    format_table,
    load_config_file,
    load_json,
    output_root,
    read_jsonl,
    to_table,
    write_json,
    write_jsonl,
)

__all__ = [
    'append_jsonl',
    'count_words',
    'default_workers',
    'format_table',
    'load_config_file',
    'load_json',
    'output_root',
    'read_jsonl',
    'to_table',
    'write_json',
    'write_jsonl',
]
