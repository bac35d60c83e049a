import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wta_anneal import (
    GeneratorConfig,
    ParseError,
    ValidationError,
    WtaInstance,
    decode_index,
    encode_assignment,
    evaluate_objective,
    generate_instance,
    is_feasible,
    parse_instance,
    serialize_instance,
)


def make(m, n, values, probs):
    return WtaInstance(m=m, n=n, values=np.array(values, dtype=float),
                       probs=np.array(probs, dtype=float))


class TestObjective:
    def test_empty_engagement_leaves_full_threat(self):
        inst = make(1, 1, [1.0], [[0.8]])
        assert evaluate_objective(inst, [[0]]) == pytest.approx(1.0)

    def test_single_engagement(self):
        inst = make(1, 1, [1.0], [[0.8]])
        assert evaluate_objective(inst, [[1]]) == pytest.approx(0.2)

    def test_two_weapons_one_target(self):
        inst = make(2, 1, [1.0], [[0.5], [0.5]])
        assert evaluate_objective(inst, [[1], [1]]) == pytest.approx(0.25)

    def test_infeasible_assignment_still_evaluates(self):
        inst = make(1, 2, [1.0, 1.0], [[0.5, 0.5]])
        assert evaluate_objective(inst, [[1, 1]]) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        inst = make(2, 2, [1.0, 1.0], [[0.5, 0.5], [0.5, 0.5]])
        with pytest.raises(ValidationError):
            evaluate_objective(inst, [[1, 0]])

    def test_all_zero_equals_total_threat(self):
        inst = generate_instance(3, 4, seed=3)
        zero = np.zeros((3, 4), dtype=int)
        assert evaluate_objective(inst, zero) == pytest.approx(float(inst.values.sum()))

    def test_monotone_in_engagements(self):
        rng = np.random.default_rng(0)
        inst = generate_instance(3, 3, seed=5)
        for _ in range(50):
            bits = rng.integers(0, 2, size=(3, 3))
            base = evaluate_objective(inst, bits)
            zeros = np.argwhere(bits == 0)
            if len(zeros) == 0:
                continue
            i, j = zeros[rng.integers(len(zeros))]
            more = bits.copy()
            more[i, j] = 1
            assert evaluate_objective(inst, more) <= base + 1e-12


class TestFeasibility:
    def test_all_zero_is_feasible(self):
        assert is_feasible(np.zeros((3, 3), dtype=int))

    def test_double_assignment_in_row(self):
        assert not is_feasible(np.array([[1, 1]]))

    def test_one_per_row(self):
        assert is_feasible(np.array([[1, 0], [0, 1]]))


class TestEncoding:
    def test_all_zero(self):
        assert encode_assignment(np.zeros((2, 2), dtype=int)) == 0

    def test_second_weapon_first_target(self):
        bits = np.zeros((2, 2), dtype=int)
        bits[1, 0] = 1
        assert encode_assignment(bits) == 2

    def test_first_weapon_second_target(self):
        bits = np.zeros((2, 2), dtype=int)
        bits[0, 1] = 1
        assert encode_assignment(bits) == 4

    def test_decode_zero(self):
        assert np.array_equal(decode_index(0, 2, 3), np.zeros((2, 3)))

    def test_decode_all_ones(self):
        assert np.array_equal(decode_index(2 ** 6 - 1, 2, 3), np.ones((2, 3)))

    def test_decode_out_of_range(self):
        with pytest.raises(ValidationError):
            decode_index(16, 2, 2)
        with pytest.raises(ValidationError):
            decode_index(-1, 2, 2)

    @pytest.mark.parametrize("m,n", [(4, 3), (6, 2), (2, 6)])
    def test_bijection_exhaustive(self, m, n):
        for k in range(1 << (m * n)):
            assert encode_assignment(decode_index(k, m, n)) == k

    @given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2 ** 16 - 1))
    @settings(max_examples=100)
    def test_round_trip_random(self, m, n, raw):
        k = raw % (1 << (m * n))
        assert encode_assignment(decode_index(k, m, n)) == k


class TestGenerate:
    def test_shapes_and_sizes(self):
        inst = generate_instance(4, 3, seed=1)
        assert inst.num_qubits == 12 and inst.dim == 4096
        inst = generate_instance(2, 6, seed=1)
        assert inst.num_qubits == 12 and inst.dim == 4096

    def test_every_row_has_high_probability(self):
        for seed in range(20):
            inst = generate_instance(4, 3, seed=seed)
            assert (inst.probs.max(axis=1) >= 0.9).all()

    def test_threshold_configurable(self):
        config = GeneratorConfig(high_prob_threshold=0.8)
        inst = generate_instance(5, 2, seed=3, config=config)
        assert (inst.probs.max(axis=1) >= 0.8).all()

    def test_deterministic(self):
        assert generate_instance(3, 3, seed=11) == generate_instance(3, 3, seed=11)

    def test_invalid_dims(self):
        with pytest.raises(ValidationError):
            generate_instance(0, 3, seed=0)

    def test_invalid_ranges(self):
        with pytest.raises(ValidationError):
            GeneratorConfig(prob_range=(0.5, 1.5))
        with pytest.raises(ValidationError):
            GeneratorConfig(value_range=(-1.0, 1.0))


class TestSerialization:
    def test_round_trip(self):
        inst = generate_instance(3, 4, seed=9)
        assert parse_instance(serialize_instance(inst)) == inst

    def test_out_of_range_probability_names_field(self):
        text = '{"m": 1, "n": 2, "values": [1.0, 2.0], "probs": [[0.5, 1.2]]}'
        with pytest.raises(ParseError, match=r"probs\[0\]\[1\]"):
            parse_instance(text)

    def test_missing_values(self):
        text = '{"m": 1, "n": 1, "probs": [[0.5]]}'
        with pytest.raises(ParseError, match="values"):
            parse_instance(text)

    def test_not_json(self):
        with pytest.raises(ParseError):
            parse_instance("not json {")

    def test_wrong_row_length(self):
        text = '{"m": 2, "n": 2, "values": [1.0, 1.0], "probs": [[0.5, 0.5], [0.5]]}'
        with pytest.raises(ParseError, match=r"probs\[1\]"):
            parse_instance(text)


class TestInstanceValidation:
    def test_negative_value_rejected(self):
        with pytest.raises(ValidationError):
            make(1, 1, [-1.0], [[0.5]])

    def test_probability_above_one_rejected(self):
        with pytest.raises(ValidationError):
            make(1, 1, [1.0], [[1.5]])

    def test_immutable_arrays(self):
        inst = generate_instance(2, 2, seed=0)
        with pytest.raises(ValueError):
            inst.probs[0, 0] = 0.5
