'''
Tests for the model zoo.

Covers:
  - Configs and the preset registry
  - Per-layer forget-gate lower bounds
  - HGRN2 recurrence: hand-computed steps, scan/sequential equivalence,
    state carry, causality
  - LSTM baseline
  - End-to-end gradient check of a small HGRN2 language model
  - Checkpoint container
'''

import math

import numpy as np
import pytest


def _tiny_config(**overrides):
    from baby_hgrn.models import ModelConfig

    settings = dict(
        vocab_size=20,
        hidden_size=8,
        num_layers=2,
        expand_ratio=2,
        num_heads=2,
        hidden_ratio=2,
        block_size=3,
    )
    settings.update(overrides)
    return ModelConfig(**settings)


def _f64_model(config, seed=0):
    from baby_hgrn.models import build_model
    from baby_hgrn.tensor import default_dtype

    with default_dtype(np.float64):
        return build_model(config, seed=seed)


def _ids(shape, vocab=20, seed=0):
    return np.random.default_rng(seed).integers(0, vocab, size=shape)


# ======================================================================
# Config and presets
# ======================================================================


class TestConfig:
    '''ModelConfig validation and the preset registry.'''

    def test_desk_preset(self):
        from baby_hgrn.models import get_preset

        config = get_preset('hgrn2-desk').config()
        assert config.hidden_size == 64
        assert (config.num_layers, config.expand_ratio) == (4, 8)
        assert config.heads == 8
        assert config.vocab_size == 2000

    def test_published_presets(self):
        from baby_hgrn.models import get_preset

        big = get_preset('hgrn2-360m').config()
        assert (big.hidden_size, big.num_layers, big.hidden_ratio) == (1024, 26, 4)
        assert big.expand_ratio == 128
        assert get_preset('lstm-appendix').config().hidden_size == 9120

    def test_overrides(self):
        from baby_hgrn.models import get_preset

        config = get_preset('hgrn2-desk').config(vocab_size=321, num_layers=2)
        assert config.vocab_size == 321
        assert config.num_layers == 2

    def test_unknown_preset(self):
        from baby_hgrn.models import get_preset

        with pytest.raises(KeyError, match='Available presets'):
            get_preset('gpt-5')

    def test_documentation_only_preset(self):
        from baby_hgrn.errors import ConfigError
        from baby_hgrn.models import get_preset, list_presets

        assert 'not implemented' in list_presets()['mamba-360m']
        with pytest.raises(ConfigError):
            get_preset('mamba-360m').config()

    @pytest.mark.parametrize(
        'overrides',
        [
            {'hidden_size': 10, 'num_heads': 3},
            {'num_layers': 0},
            {'expand_ratio': 0},
            {'architecture': 'mamba'},
            {'dropout': 1.0},
        ],
    )
    def test_invalid_configs(self, overrides):
        from baby_hgrn.errors import ConfigError

        with pytest.raises(ConfigError):
            _tiny_config(**overrides).validate()

    def test_from_dict_rejects_unknown_keys(self):
        from baby_hgrn.errors import ConfigError
        from baby_hgrn.models import ModelConfig

        with pytest.raises(ConfigError, match='Unknown model config keys'):
            ModelConfig.from_dict({'hidden_size': 8, 'depth': 3})

    def test_parameter_count_independent_of_expand_ratio(self):
        '''State expansion adds no parameters when heads follow d / e.'''
        from baby_hgrn.models import build_model

        counts = {}
        for e in (2, 8):
            config = _tiny_config(hidden_size=16, expand_ratio=e, num_heads=None)
            model = build_model(config)
            counts[e] = model.num_parameters(by_module=True)['layers.0']
        assert counts[2] == counts[8]

    @pytest.mark.parametrize('source', ['defaults', 'hgrn2-desk'])
    def test_shipped_configs_are_expand_ratio_neutral(self, source):
        from baby_hgrn.models import ModelConfig, build_model, get_preset

        counts = {}
        for e in (2, 8):
            if source == 'defaults':
                config = ModelConfig(expand_ratio=e, num_layers=1)
            else:
                config = get_preset(source).config(expand_ratio=e, num_layers=1)
            model = build_model(config)
            counts[e] = model.num_parameters(by_module=True)['layers.0']
        assert counts[2] == counts[8]

    @pytest.mark.parametrize('name', ['hgrn2-desk', 'hgrn2-360m', 'hgrn2-1.2b'])
    def test_preset_key_width_tracks_hidden_size(self, name):
        from baby_hgrn.models import get_preset

        preset = get_preset(name)
        for e in (2, 8, preset.config().expand_ratio):
            config = preset.config(expand_ratio=e)
            assert config.heads * config.expand_ratio == config.hidden_size

    def test_parameter_breakdown_sums_to_total(self):
        from baby_hgrn.models import build_model

        model = build_model(_tiny_config())
        parts = model.num_parameters(by_module=True)
        assert set(parts) == {'embed', 'layers.0', 'layers.1', 'norm', 'lm_head'}
        assert sum(parts.values()) == model.num_parameters()


# ======================================================================
# Lower bounds
# ======================================================================


class TestLowerBounds:
    '''Cumulative-softmax forget-gate floors.'''

    def test_single_layer_is_zero(self):
        from baby_hgrn.models import lower_bounds
        from baby_hgrn.tensor import Tensor

        bounds = lower_bounds(Tensor(np.random.default_rng(0).normal(size=(1, 6))))
        np.testing.assert_array_equal(bounds.data, np.zeros((1, 6)))

    def test_equal_logits_three_layers(self):
        from baby_hgrn.models import lower_bounds
        from baby_hgrn.tensor import Tensor

        bounds = lower_bounds(Tensor(np.zeros((3, 4)))).data
        np.testing.assert_allclose(bounds[:, 0], [0.0, 1 / 3, 2 / 3], atol=1e-6)
        np.testing.assert_allclose(bounds, np.repeat(bounds[:, :1], 4, axis=1))

    def test_random_logits_are_monotone_and_below_one(self):
        from baby_hgrn.models import lower_bounds
        from baby_hgrn.tensor import Tensor

        gammas = np.random.default_rng(1).normal(scale=3.0, size=(5, 16))
        bounds = lower_bounds(Tensor(gammas)).data
        assert np.all(bounds >= 0.0)
        assert np.all(bounds < 1.0)
        assert np.all(np.diff(bounds, axis=0) >= 0.0)

    def test_model_bounds_shape(self):
        from baby_hgrn.models import build_model

        model = build_model(_tiny_config(num_layers=3))
        bounds = model.lower_bounds()
        assert bounds.shape == (3, 2 * 2)
        np.testing.assert_allclose(bounds[:, 0], [0.0, 1 / 3, 2 / 3], atol=1e-6)

    def test_lstm_has_no_bounds(self):
        from baby_hgrn.models import build_model

        model = build_model(_tiny_config(architecture='lstm'))
        assert model.lower_bounds() is None

    def test_gates_respect_floor(self):
        from baby_hgrn.models import HGRN2Mixer
        from baby_hgrn.tensor import Tensor

        mixer = HGRN2Mixer(8, 2, 4, np.random.default_rng(0))
        x = Tensor(np.random.default_rng(1).normal(size=(2, 7, 8)))
        _, f, k, _ = mixer.gates(x, Tensor(np.full(8, 0.7)))
        assert f.data.min() >= 0.7 - 1e-6
        assert f.data.max() < 1.0
        np.testing.assert_allclose(k.data, 1.0 - f.data, atol=1e-6)


# ======================================================================
# HGRN2 recurrence
# ======================================================================


class TestRecurrence:
    '''Sequential reference path and the blockwise scan.'''

    @pytest.fixture(autouse=True)
    def _float64(self):
        from baby_hgrn.tensor import default_dtype

        with default_dtype(np.float64):
            yield

    @staticmethod
    def _hand_inputs():
        from baby_hgrn.tensor import Tensor

        ones = np.ones((1, 1, 3, 1))
        v = np.array([[2.0, 0.0], [0.0, 2.0], [2.0, 2.0]]).reshape(1, 1, 3, 2)
        return (
            Tensor(ones),
            Tensor(0.5 * ones),
            Tensor(0.5 * ones),
            Tensor(v),
            Tensor(np.zeros((1, 1, 1, 2))),
        )

    def test_hand_unrolled_steps(self):
        from baby_hgrn.models import recurrence_sequential

        o, state = recurrence_sequential(*self._hand_inputs())
        expected = [[1.0, 0.0], [0.5, 1.0], [1.25, 1.5]]
        np.testing.assert_allclose(o.data[0, 0], expected)
        np.testing.assert_allclose(state.data[0, 0, 0], [1.25, 1.5])

    @pytest.mark.parametrize('block', [2, 3])
    def test_hand_unrolled_steps_blockwise(self, block):
        from baby_hgrn.models import recurrence_chunkwise

        o, state = recurrence_chunkwise(*self._hand_inputs(), block=block)
        np.testing.assert_allclose(o.data[0, 0], [[1.0, 0.0], [0.5, 1.0], [1.25, 1.5]])
        np.testing.assert_allclose(state.data[0, 0, 0], [1.25, 1.5])

    def test_unit_forget_gate_keeps_state(self):
        from baby_hgrn.models import recurrence_chunkwise, recurrence_sequential
        from baby_hgrn.tensor import Tensor

        rng = np.random.default_rng(2)
        shape = (1, 2, 5, 3)
        q = Tensor(rng.normal(size=shape))
        v = Tensor(rng.normal(size=(1, 2, 5, 4)))
        s0 = Tensor(rng.normal(size=(1, 2, 3, 4)))
        f = Tensor(np.ones(shape))
        k = Tensor(np.zeros(shape))
        _, seq_state = recurrence_sequential(q, f, k, v, s0)
        _, scan_state = recurrence_chunkwise(q, f, k, v, s0, block=2)
        np.testing.assert_allclose(seq_state.data, s0.data)
        np.testing.assert_allclose(scan_state.data, s0.data)

    def test_zero_input_gives_zero_mixing(self):
        from baby_hgrn.models import HGRN2Mixer, hgrn2_forward_sequential
        from baby_hgrn.tensor import Tensor

        mixer = HGRN2Mixer(8, 2, 2, np.random.default_rng(0))
        x = Tensor(np.zeros((1, 4, 8)))
        out, state = hgrn2_forward_sequential(
            mixer, x, Tensor(np.zeros(4)), mixer.zero_state(1, np.float64)
        )
        np.testing.assert_array_equal(out.data, 0.0)
        np.testing.assert_array_equal(state.data, 0.0)

    @pytest.mark.parametrize('block', [1, 2, 4, 5, 13])
    def test_scan_matches_sequential(self, block):
        model = _f64_model(_tiny_config(block_size=block))
        ids = _ids((2, 13), seed=block)
        seq_logits, seq_state = model.forward_mode(ids, 'sequential')
        scan_logits, scan_state = model.forward_mode(ids, 'scan')
        assert np.max(np.abs(seq_logits.data - scan_logits.data)) <= 1e-5
        for a, b in zip(seq_state.layers, scan_state.layers):
            assert np.max(np.abs(a.data - b.data)) <= 1e-5

    @pytest.mark.parametrize('seed', range(100))
    def test_random_inputs_blockwise_matches_sequential(self, seed):
        '''Blocks of 1, 4 and T agree with the step-by-step path to 1e-5.'''
        from baby_hgrn.models import recurrence_chunkwise, recurrence_sequential
        from baby_hgrn.tensor import Tensor

        rng = np.random.default_rng(seed)
        fixed_lengths = {0: 1, 1: 4, 2: 8, 3: 64}
        total = fixed_lengths.get(seed, int(rng.integers(1, 65)))
        batch, heads = int(rng.integers(1, 3)), int(rng.integers(1, 5))
        e, dv = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        f = 1.0 / (1.0 + np.exp(-3.0 * rng.normal(size=(batch, heads, total, e))))
        inputs = (
            Tensor(rng.normal(size=(batch, heads, total, e))),
            Tensor(f),
            Tensor(1.0 - f),
            Tensor(rng.normal(size=(batch, heads, total, dv))),
            Tensor(rng.normal(size=(batch, heads, e, dv))),
        )
        seq_o, seq_state = recurrence_sequential(*inputs)
        for block in sorted({1, 4, total}):
            scan_o, scan_state = recurrence_chunkwise(*inputs, block=block)
            assert np.max(np.abs(scan_o.data - seq_o.data)) <= 1e-5, block
            assert np.max(np.abs(scan_state.data - seq_state.data)) <= 1e-5, block

    @pytest.mark.parametrize('total', [1, 8, 29])
    def test_model_scan_matches_sequential_for_any_length(self, total):
        model = _f64_model(_tiny_config(hidden_size=16, block_size=4, num_heads=None))
        ids = _ids((2, total), seed=total)
        seq_logits, _ = model.forward_mode(ids, 'sequential')
        scan_logits, _ = model.forward_mode(ids, 'scan')
        assert np.max(np.abs(seq_logits.data - scan_logits.data)) <= 1e-5

    def test_closed_forget_gate_stays_finite_blockwise(self):
        '''A gate that underflows to exactly zero resets the state in both paths.'''
        from baby_hgrn.models import (
            HGRN2Mixer,
            hgrn2_forward_scan,
            hgrn2_forward_sequential,
        )
        from baby_hgrn.tensor import Tensor

        mixer = HGRN2Mixer(8, 2, 2, np.random.default_rng(0))
        mixer.f_proj.weight.data[...] = -200.0
        x = Tensor(np.ones((1, 6, 8)))
        beta = Tensor(np.zeros(4))
        _, f, _, _ = mixer.gates(x, beta)
        assert np.all(f.data == 0.0)

        seq_out, seq_state = hgrn2_forward_sequential(
            mixer, x, beta, mixer.zero_state(1, np.float64)
        )
        scan_out, scan_state = hgrn2_forward_scan(
            mixer, x, beta, mixer.zero_state(1, np.float64), block=3
        )
        assert np.all(np.isfinite(scan_out.data))
        np.testing.assert_allclose(scan_out.data, seq_out.data, atol=1e-10)
        np.testing.assert_allclose(scan_state.data, seq_state.data, atol=1e-10)

        scan_out.sum().backward()
        for name, param in mixer.named_parameters():
            assert np.all(np.isfinite(param.grad)), name

    def test_block_of_one_is_the_sequential_path(self):
        from baby_hgrn.models import recurrence_chunkwise, recurrence_sequential

        inputs = self._hand_inputs()
        seq_o, _ = recurrence_sequential(*inputs)
        scan_o, _ = recurrence_chunkwise(*inputs, block=1)
        np.testing.assert_array_equal(seq_o.data, scan_o.data)

    def test_state_carry_across_calls(self):
        model = _f64_model(_tiny_config())
        ids = _ids((1, 10), seed=4)
        full, full_state = model(ids)
        head, state = model(ids[:, :4])
        tail, state = model(ids[:, 4:], state)
        np.testing.assert_allclose(
            np.concatenate([head.data, tail.data], axis=1), full.data, atol=1e-10
        )
        assert state.position == 10
        np.testing.assert_allclose(state.layers[1].data, full_state.layers[1].data)

    def test_invalid_mode(self):
        from baby_hgrn.errors import UsageError

        model = _f64_model(_tiny_config())
        with pytest.raises(UsageError):
            model.forward_mode(_ids((1, 3)), 'parallel')

    def test_invalid_block(self):
        from baby_hgrn.errors import UsageError
        from baby_hgrn.models import recurrence_chunkwise

        with pytest.raises(UsageError):
            recurrence_chunkwise(*self._hand_inputs(), block=0)


# ======================================================================
# Language model contract
# ======================================================================


class TestLanguageModel:
    '''Shapes, causality and id validation.'''

    @pytest.mark.parametrize('architecture', ['hgrn2', 'lstm'])
    def test_shapes(self, architecture):
        from baby_hgrn.models import build_model

        model = build_model(_tiny_config(architecture=architecture))
        logits, _ = model(_ids((7,)))
        assert logits.shape == (7, 20)
        batched, state = model(_ids((3, 5)))
        assert batched.shape == (3, 5, 20)
        assert len(state.layers) == 2

    @pytest.mark.parametrize('mode', ['scan', 'sequential'])
    def test_future_tokens_do_not_change_past_logits(self, mode):
        from baby_hgrn.models import build_model

        model = build_model(_tiny_config(block_size=4))
        ids = _ids((10,), seed=1)
        perturbed = ids.copy()
        perturbed[6:] = (perturbed[6:] + 7) % 20
        a, _ = model.forward_mode(ids, mode)
        b, _ = model.forward_mode(perturbed, mode)
        np.testing.assert_array_equal(a.data[:6], b.data[:6])
        assert not np.array_equal(a.data[6:], b.data[6:])

    def test_lstm_is_causal(self):
        from baby_hgrn.models import build_model, lm_forward

        model = build_model(_tiny_config(architecture='lstm')).eval()
        ids = _ids((8,), seed=2)
        perturbed = ids.copy()
        perturbed[5:] = (perturbed[5:] + 3) % 20
        np.testing.assert_array_equal(
            lm_forward(ids, model).data[:5], lm_forward(perturbed, model).data[:5]
        )

    def test_zero_head_is_uniform(self):
        from baby_hgrn.models import build_model
        from baby_hgrn.training import ce_loss

        model = build_model(_tiny_config())
        model.lm_head.weight.data[...] = 0.0
        ids = _ids((1, 9), seed=3)
        logits, _ = model(ids[:, :-1])
        loss = ce_loss(logits, ids[:, 1:])
        assert loss.item() == pytest.approx(math.log(20), rel=1e-6)

    @pytest.mark.parametrize(
        'ids, error',
        [
            (np.array([1, 2, 20]), 'DataError'),
            (np.array([-1, 2]), 'DataError'),
            (np.zeros((0,), dtype=np.int64), 'DataError'),
            (np.array([0.5, 1.0]), 'DataError'),
            (np.zeros((1, 2, 3), dtype=np.int64), 'UsageError'),
        ],
    )
    def test_bad_ids(self, ids, error):
        from baby_hgrn import errors
        from baby_hgrn.models import build_model

        model = build_model(_tiny_config())
        with pytest.raises(getattr(errors, error)):
            model(ids)

    def test_same_seed_same_weights(self):
        from baby_hgrn.models import build_model

        a = build_model(_tiny_config(), seed=5).state_dict()
        b = build_model(_tiny_config(), seed=5).state_dict()
        c = build_model(_tiny_config(), seed=6).state_dict()
        assert all(np.array_equal(a[k], b[k]) for k in a)
        assert not all(np.array_equal(a[k], c[k]) for k in a)


# ======================================================================
# LSTM
# ======================================================================


class TestLSTM:
    '''The recurrent baseline.'''

    def test_zero_weights_give_zero_output(self):
        from baby_hgrn.models import LSTMLayer, lstm_forward
        from baby_hgrn.tensor import Tensor

        layer = LSTMLayer(3, 4, np.random.default_rng(0))
        for param in layer.parameters():
            param.data[...] = 0.0
        y, (h, c) = lstm_forward(layer, Tensor(np.ones((2, 5, 3))))
        np.testing.assert_array_equal(y.data, 0.0)
        np.testing.assert_array_equal(c.data, 0.0)

    def test_carry_matches_single_pass(self):
        from baby_hgrn.models import LSTMLayer
        from baby_hgrn.tensor import Tensor, default_dtype

        with default_dtype(np.float64):
            layer = LSTMLayer(3, 4, np.random.default_rng(0))
            x = np.random.default_rng(1).normal(size=(1, 2, 3))
            both, (h_both, c_both) = layer(Tensor(x))
            first, carry = layer(Tensor(x[:, :1]))
            second, (h, c) = layer(Tensor(x[:, 1:]), carry)
        np.testing.assert_allclose(both.data[:, :1], first.data, rtol=1e-12)
        np.testing.assert_allclose(both.data[:, 1:], second.data, rtol=1e-12)
        np.testing.assert_allclose(c_both.data, c.data, rtol=1e-12)

    def test_two_step_gradients(self):
        from baby_hgrn.models import LSTMLayer
        from baby_hgrn.tensor import Tensor, check_gradients, default_dtype, sum_

        with default_dtype(np.float64):
            layer = LSTMLayer(3, 4, np.random.default_rng(0))
            x_data = np.random.default_rng(1).normal(size=(1, 2, 3))
            x = Tensor(x_data, requires_grad=True)
            w = np.random.default_rng(2).normal(size=(1, 2, 4))
            inputs = dict(layer.named_parameters(), x=x)
            results = check_gradients(lambda: sum_(layer(x)[0] * w), inputs, h=1e-5)
        for name, result in results.items():
            assert result.max_error <= 1e-4, name

    def test_dropout_only_in_training(self):
        from baby_hgrn.models import build_model

        model = build_model(_tiny_config(architecture='lstm', dropout=0.5), seed=0)
        ids = _ids((1, 6))
        model.eval()
        a, _ = model(ids)
        b, _ = model(ids)
        np.testing.assert_array_equal(a.data, b.data)
        model.train()
        c, _ = model(ids)
        assert not np.array_equal(a.data, c.data)


# ======================================================================
# End-to-end gradients
# ======================================================================


class TestModelGradients:
    '''Finite-difference check of every parameter of a two-layer model.'''

    def test_hgrn2_language_model(self):
        from baby_hgrn.tensor import check_gradients, default_dtype
        from baby_hgrn.training import ce_loss

        model = _f64_model(_tiny_config())
        ids = _ids((1, 7), seed=8)
        with default_dtype(np.float64):
            # non-zero gammas so the lower bounds differ per coordinate
            for layer in model.layers:
                layer.gamma.data[...] = np.random.default_rng(9).normal(size=4)

            def loss():
                logits, _ = model(ids[:, :-1])
                return ce_loss(logits, ids[:, 1:])

            results = check_gradients(loss, dict(model.named_parameters()), h=1e-5)
        assert set(results) == {name for name, _ in model.named_parameters()}
        for name, result in results.items():
            assert result.max_error <= 1e-3, name


# ======================================================================
# Checkpoints
# ======================================================================


class TestCheckpoint:
    '''Binary checkpoint container.'''

    @pytest.mark.parametrize('architecture', ['hgrn2', 'lstm'])
    def test_round_trip(self, tmp_path, architecture):
        from baby_hgrn.models import build_model, load_checkpoint, save_checkpoint

        model = build_model(_tiny_config(architecture=architecture), seed=3).eval()
        path = save_checkpoint(model, tmp_path / 'model.bin')
        loaded = load_checkpoint(path).eval()
        assert loaded.config == model.config
        ids = _ids((1, 6))
        np.testing.assert_array_equal(model(ids)[0].data, loaded(ids)[0].data)

    def test_bytes_are_deterministic(self, tmp_path):
        from baby_hgrn.models import build_model, load_checkpoint, save_checkpoint

        model = build_model(_tiny_config(), seed=3)
        first = save_checkpoint(model, tmp_path / 'a.bin')
        second = save_checkpoint(load_checkpoint(first), tmp_path / 'b.bin')
        assert (tmp_path / 'a.bin').read_bytes() == (tmp_path / 'b.bin').read_bytes()
        assert second.endswith('b.bin')

    def test_entries_are_named_and_shaped(self, tmp_path):
        from baby_hgrn.models import build_model, read_checkpoint, save_checkpoint

        model = build_model(_tiny_config())
        state, config = read_checkpoint(save_checkpoint(model, tmp_path / 'm.bin'))
        assert list(state) == [name for name, _ in model.named_parameters()]
        assert state['layers.0.mixer.q_proj.weight'].shape == (8, 4)
        assert config.to_dict() == model.config.to_dict()

    @pytest.mark.parametrize(
        'mutate',
        [
            lambda blob: b'XXXX' + blob[4:],
            lambda blob: blob[:-10],
            lambda blob: blob + b'\0',
        ],
    )
    def test_corrupt_files(self, tmp_path, mutate):
        from baby_hgrn.errors import CheckpointError
        from baby_hgrn.models import build_model, load_checkpoint, save_checkpoint

        path = tmp_path / 'm.bin'
        save_checkpoint(build_model(_tiny_config()), path)
        path.write_bytes(mutate(path.read_bytes()))
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_missing_file(self, tmp_path):
        from baby_hgrn.errors import IngestionError
        from baby_hgrn.models import load_checkpoint

        with pytest.raises(IngestionError):
            load_checkpoint(tmp_path / 'absent.bin')

    def test_shape_mismatch_on_load(self):
        from baby_hgrn.errors import CheckpointError
        from baby_hgrn.models import build_model

        small = build_model(_tiny_config())
        wide = build_model(_tiny_config(hidden_size=12, num_heads=2))
        with pytest.raises(CheckpointError):
            wide.load_state_dict(small.state_dict())
