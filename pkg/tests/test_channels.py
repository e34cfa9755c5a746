"""Channel models: sampling semantics, determinism, and the worked tables."""

import numpy as np
import pytest

from osplit.channels import (
    ConstantChannel,
    DiscreteJointChannel,
    IidUniformChannel,
    chain_channel,
    correlated_example_channel,
    make_channel,
    sample_slot,
)


class TestIidUniform:
    def test_sample_shape_and_range(self):
        ch = IidUniformChannel(5)
        s = sample_slot(ch, np.random.default_rng(1))
        assert s.gains.shape == (5,)
        assert np.all((s.gains >= 0) & (s.gains <= 1))
        assert s.aux is None
        assert np.all(np.diff(s.order_stats) >= 0)

    def test_seed_determinism(self):
        ch = IidUniformChannel(3)
        a = sample_slot(ch, np.random.default_rng(42)).gains
        b = sample_slot(ch, np.random.default_rng(42)).gains
        np.testing.assert_array_equal(a, b)

    def test_batch_rows_equal_sequential_draws(self):
        # Slot i of a batch is the i-th block of the master stream.
        ch = IidUniformChannel(4)
        gains, _ = ch.sample_batch(np.random.default_rng(7), 10)
        rng = np.random.default_rng(7)
        for i in range(10):
            np.testing.assert_array_equal(gains[i], sample_slot(ch, rng).gains)


class TestConstant:
    def test_gains_equal_aux_distinct(self):
        ch = ConstantChannel(3)
        s = sample_slot(ch, np.random.default_rng(3))
        assert np.all(s.gains == s.gains[0])
        assert len(set(s.aux.tolist())) == 3
        np.testing.assert_array_equal(s.contention_values(), s.aux)

    def test_batch_shapes(self):
        gains, aux = ConstantChannel(3).sample_batch(np.random.default_rng(0), 100)
        assert gains.shape == aux.shape == (100, 3)
        assert np.all(gains == gains[0, 0])


class TestDiscreteJoint:
    def test_state_frequencies(self):
        ch = correlated_example_channel(0.0)
        gains, _ = ch.sample_batch(np.random.default_rng(11), 100_000)
        states = np.asarray(ch.states)
        for k, state in enumerate(states):
            freq = np.mean(np.all(gains == state, axis=1))
            sigma = np.sqrt((1 / 7) * (6 / 7) / 100_000)
            assert abs(freq - 1 / 7) <= 3 * sigma

    def test_candidate_thresholds_are_odd_integers(self):
        ch = correlated_example_channel(0.0)
        assert ch.candidate_thresholds() == [3.0, 5.0, 7.0, 9.0, 11.0, 13.0, 15.0]

    def test_chain_probabilities_with_tilt(self):
        eps = 1e-4
        ch = chain_channel(7, eps)
        expected = [1 / 7 - (6 - i) * eps for i in range(6)] + [1 / 7 + 21 * eps]
        np.testing.assert_allclose(ch.probs, expected, atol=1e-15)
        assert abs(ch.probs.sum() - 1.0) <= 1e-12

    def test_chain_states_overlap(self):
        ch = chain_channel(7)
        assert ch.states[0] == (4.0, 2.0)
        assert ch.states[-1] == (16.0, 14.0)
        for s1, s2 in zip(ch.states, ch.states[1:]):
            assert len(set(s1) & set(s2)) == 1

    def test_validation(self):
        with pytest.raises(ValueError):
            DiscreteJointChannel([(1.0, 2.0)], [0.5])
        with pytest.raises(ValueError):
            DiscreteJointChannel([(1.0, 2.0), (2.0, 3.0)], [0.6, 0.5])
        with pytest.raises(ValueError):
            DiscreteJointChannel([(1.0,)], [1.0])


class TestFactory:
    def test_names(self):
        assert make_channel("iid", 4).n_users == 4
        assert make_channel("constant", 3).kind == "constant"
        assert len(make_channel("correlated").states) == 7
        with pytest.raises(ValueError):
            make_channel("bogus")
