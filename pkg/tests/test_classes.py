from __future__ import annotations

import math

import numpy as np
import pytest

from tvlab.classes import (
    BenedekItaiInstance,
    CategoricalInstance,
    ExampleOracle,
    NoisyCubeInstance,
    categorical_distance_closed_form,
    categorical_rates,
    cube_distance_closed_form,
    label,
    sample,
)
from tvlab.core import (
    DimensionError,
    LabeledSample,
    brute_force_distance_matrix,
    dictator,
    distance_matrix,
    exact_distance,
)


def test_first_categorical_rate_is_one_eighth():
    rates = categorical_rates(3)
    assert rates[0] == 1 / 8
    assert rates[1] == 1 / math.log2(257)
    assert rates[0] > rates[1] > rates[2]


@pytest.mark.parametrize("rho", [0.0, 0.05, 0.25])
def test_cube_closed_form_matches_brute_force(rho):
    inst = NoisyCubeInstance(6, rho)
    center = np.array([0, 1, 1, 0, 1, 0], dtype=np.uint8)
    brute = brute_force_distance_matrix(inst.distribution(center), inst.hypotheses)
    for i in range(6):
        for j in range(i + 1, 6):
            assert abs(cube_distance_closed_form(center, rho, i, j) - brute[i, j]) <= 1e-12


def test_cube_family_enumerates_every_center():
    family = NoisyCubeInstance(3, 0.1).family()
    assert len(family) == 8
    assert family[0].center.tolist() == [0, 0, 0]
    assert family[5].center.tolist() == [1, 0, 1]


def test_cube_distribution_checks_length():
    with pytest.raises(DimensionError):
        NoisyCubeInstance(3, 0.1).distribution([0, 1])


def test_categorical_closed_form_matches_brute_force():
    inst = CategoricalInstance(7)
    for special in range(7):
        brute = brute_force_distance_matrix(inst.distribution(special), inst.hypotheses)
        closed = inst.distance_matrix(special)
        assert np.abs(closed - brute).max() <= 1e-12
        for j in range(7):
            for k in range(j + 1, 7):
                assert categorical_distance_closed_form(inst, special, j, k) == closed[j, k]


def test_categorical_closed_form_first_and_257th():
    inst = CategoricalInstance(512)
    assert categorical_distance_closed_form(inst, 5, 0, 256) == pytest.approx(5 / 24, abs=1e-15)
    assert categorical_distance_closed_form(inst, 0, 0, 256) == 0.5


def test_categorical_closed_form_rejects_bad_indices():
    inst = CategoricalInstance(4)
    with pytest.raises(ValueError):
        categorical_distance_closed_form(inst, 0, 1, 1)
    with pytest.raises(DimensionError):
        categorical_distance_closed_form(inst, 0, 1, 9)


def test_categorical_means():
    inst = CategoricalInstance(4)
    means = inst.means(2)
    assert means[2] == 0.5
    assert means[0] == 1 / 8


def test_benedek_itai_witness_fits_sample_and_is_far():
    inst = BenedekItaiInstance(1000)
    rng = np.random.default_rng(3)
    labeled = label(sample(inst.distribution, 20, rng), inst.all_ones)
    witness = inst.uc_witness(labeled)
    assert np.array_equal(witness(labeled.points), labeled.labels)
    true_error = exact_distance(inst.distribution, witness, inst.all_ones)
    assert true_error >= 1 - 20 / 1000 - 1e-12


def test_benedek_itai_subset_bound():
    inst = BenedekItaiInstance(10, k=2)
    with pytest.raises(ValueError):
        inst.subset_indicator({1, 2, 3})
    with pytest.raises(DimensionError):
        inst.subset_indicator({11})


def test_example_oracle_is_deterministic_given_stream():
    inst = NoisyCubeInstance(5, 0.2)
    dist = inst.distribution([1, 0, 1, 0, 1])
    a = ExampleOracle(dist, dictator(2), np.random.default_rng(9)).labeled(30)
    b = ExampleOracle(dist, dictator(2), np.random.default_rng(9)).labeled(30)
    assert np.array_equal(a.points.points, b.points.points)
    assert np.array_equal(a.labels, b.labels)
    assert np.array_equal(a.labels, a.points.points[:, 2])


def test_label_checks_dimension():
    dist = NoisyCubeInstance(3, 0.1).distribution([0, 0, 0])
    pts = dist.sample(4, np.random.default_rng(0))
    with pytest.raises(DimensionError):
        label(pts, dictator(3))
    assert isinstance(label(pts, dictator(1)), LabeledSample)


def test_sample_needs_positive_size():
    dist = NoisyCubeInstance(3, 0.1).distribution([0, 0, 0])
    with pytest.raises(ValueError):
        sample(dist, 0, np.random.default_rng(0))


def test_distance_matrix_matches_closed_form_at_scale():
    inst = CategoricalInstance(512)
    exact = distance_matrix(inst.distribution(7), inst.hypotheses)
    assert np.abs(exact - inst.distance_matrix(7)).max() <= 1e-12
