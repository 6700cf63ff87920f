'''
Basic tests for baby-hgrn package structure, errors and utilities.
'''

import json

import pytest


def test_package_imports():
    '''Test that the top-level API can be imported.'''
    from baby_hgrn import (
        BabyHGRNError,
        LMScorer,
        PackedDataset,
        build_model,
        distill_pipeline,
        train,
        train_bpe,
    )

    assert BabyHGRNError is not None
    assert LMScorer is not None
    assert PackedDataset is not None
    assert build_model is not None
    assert distill_pipeline is not None
    assert train is not None
    assert train_bpe is not None


def test_subpackage_imports():
    '''Test that every subpackage exposes its public names.'''
    import baby_hgrn.data as data
    import baby_hgrn.evaluation as evaluation
    import baby_hgrn.models as models
    import baby_hgrn.tensor as tensor
    import baby_hgrn.training as training

    for module in (data, evaluation, models, tensor, training):
        for name in module.__all__:
            assert getattr(module, name) is not None, f'{module.__name__}.{name}'


@pytest.mark.parametrize(
    'name, builtin, code',
    [
        ('UsageError', ValueError, 2),
        ('DimensionError', ValueError, 3),
        ('NumericError', ArithmeticError, 4),
        ('ConfigError', ValueError, 5),
        ('PlanError', ValueError, 6),
        ('IngestionError', OSError, 7),
        ('DataError', ValueError, 8),
        ('TrainingError', RuntimeError, 9),
        ('CheckpointError', ValueError, 10),
    ],
)
def test_error_hierarchy(name, builtin, code):
    '''Test that each error is catchable as its builtin and has an exit code.'''
    from baby_hgrn import errors

    cls = getattr(errors, name)
    assert issubclass(cls, errors.BabyHGRNError)
    assert issubclass(cls, builtin)
    assert cls.exit_code == code


def test_exit_codes_are_distinct():
    '''Test that no two categories share an exit code.'''
    from baby_hgrn import errors

    classes = [
        obj
        for obj in vars(errors).values()
        if isinstance(obj, type) and issubclass(obj, errors.BabyHGRNError)
    ]
    codes = [cls.exit_code for cls in classes]
    categories = [cls.category for cls in classes]
    assert len(set(codes)) == len(codes)
    assert len(set(categories)) == len(categories)


def test_key_value_config(tmp_path):
    '''Test key=value config parsing with comments and JSON literals.'''
    from baby_hgrn.utils import load_config_file

    path = tmp_path / 'run.cfg'
    path.write_text(
        '# comment\n'
        'epochs = 3\n'
        'learning-rate = 1e-3\n'
        'scheduler = linear  # trailing\n'
        'grid = [0.001, 0.0001]\n'
        'resume = true\n'
    )
    config = load_config_file(path)

    assert config == {
        'epochs': 3,
        'learning_rate': 1e-3,
        'scheduler': 'linear',
        'grid': [0.001, 0.0001],
        'resume': True,
    }


def test_json_config(tmp_path):
    '''Test JSON config parsing and its error cases.'''
    from baby_hgrn.errors import ConfigError, IngestionError
    from baby_hgrn.utils import load_config_file

    good = tmp_path / 'run.json'
    good.write_text(json.dumps({'model': {'hidden_size': 8}}))
    assert load_config_file(good) == {'model': {'hidden_size': 8}}

    broken = tmp_path / 'broken.json'
    broken.write_text('{"epochs": ')
    with pytest.raises(ConfigError):
        load_config_file(broken)

    no_equals = tmp_path / 'bad.cfg'
    no_equals.write_text('epochs 3\n')
    with pytest.raises(ConfigError, match='line 1'):
        load_config_file(no_equals)

    with pytest.raises(IngestionError):
        load_config_file(tmp_path / 'missing.cfg')


def test_jsonl_helpers(tmp_path):
    '''Test JSONL write/append/read, including blank lines and bad records.'''
    from baby_hgrn.errors import IngestionError
    from baby_hgrn.utils import append_jsonl, read_jsonl, write_jsonl

    path = tmp_path / 'nested' / 'rows.jsonl'
    write_jsonl(path, [{'text': 'the fox'}, {'text': 'ünïcödé'}])
    append_jsonl(path, {'text': 'last'})
    with open(path, 'a', encoding='utf-8') as fh:
        fh.write('\n')
    assert [r['text'] for r in read_jsonl(path)] == ['the fox', 'ünïcödé', 'last']

    path.write_text('[1, 2]\n')
    with pytest.raises(IngestionError, match='JSON object'):
        list(read_jsonl(path))


def test_output_root(tmp_path, monkeypatch):
    '''Test output directory resolution order.'''
    from baby_hgrn.utils import output_root

    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv('BABY_HGRN_OUTPUT_ROOT', raising=False)
    assert str(output_root()) == 'runs'

    monkeypatch.setenv('BABY_HGRN_OUTPUT_ROOT', str(tmp_path / 'elsewhere'))
    assert output_root() == tmp_path / 'elsewhere'
    assert str(output_root('explicit')) == 'explicit'


def test_default_workers(tmp_path, monkeypatch):
    '''Test the worker cap from the environment.'''
    from baby_hgrn.errors import ConfigError
    from baby_hgrn.utils import default_workers

    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv('BABY_HGRN_WORKERS', raising=False)
    assert default_workers() == 1

    monkeypatch.setenv('BABY_HGRN_WORKERS', '4')
    assert default_workers() == 4

    monkeypatch.setenv('BABY_HGRN_WORKERS', 'many')
    with pytest.raises(ConfigError):
        default_workers()


def test_tables():
    '''Test table construction with and without rows.'''
    import polars as pl

    from baby_hgrn.utils import format_table, to_table

    schema = {'Task': pl.Utf8, 'Accuracy (%)': pl.Float64}
    empty = to_table([], schema)
    assert empty.height == 0
    assert empty.columns == ['Task', 'Accuracy (%)']

    table = to_table([{'Task': 'pairs', 'Accuracy (%)': 50.0}], schema)
    assert 'pairs' in format_table(table)
