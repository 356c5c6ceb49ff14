from __future__ import annotations

from collections import Counter

import numpy as np
import pytest

from blockycover.factor import verify
from blockycover.families import (
    FAMILIES,
    FamilySpec,
    corpus_specs,
    generate,
    nested_blocky_difference,
    projection_gadget,
    random_blocky,
    regression_specs,
    staircase_pattern,
)
from blockycover.matcore import is_blocky, support_size
from blockycover.structure import threshold_dimension


def test_family_names():
    assert set(FAMILIES) == {
        "identity", "all_ones", "half_graph", "random_blocky",
        "nested_blocky_difference", "group_lift_random", "staircase_pattern",
    }


def test_label_is_stable():
    spec = FamilySpec("random_blocky", {"n": 4, "m": 3, "k": 2}, 7)
    assert spec.label() == "random_blocky_k2_m3_n4_s7"


@pytest.mark.parametrize("spec", [
    FamilySpec("identity", {"n": 5}),
    FamilySpec("all_ones", {"m": 2, "n": 3}),
    FamilySpec("random_blocky", {"m": 12, "n": 9, "k": 3}, 4),
    FamilySpec("nested_blocky_difference", {"m": 20, "n": 20}, 4),
    FamilySpec("group_lift_random", {"k": 3, "density": 0.5}, 4),
    FamilySpec("projection_gadget", {"copies": 3, "width": 7}, 4),
])
def test_generated_factorizations_verify(spec):
    a, b = generate(spec), generate(spec)
    assert a.matrix == b.matrix
    assert np.array_equal(a.factorization.U, b.factorization.U)
    assert verify(a.matrix, a.factorization) == []


def test_unknown_family():
    with pytest.raises(ValueError):
        generate(FamilySpec("nope", {}))


def test_random_blocky_truth():
    for seed in range(20):
        inst = random_blocky(15, 11, 1 + seed % 5, seed)
        cover = is_blocky(inst.matrix)
        assert cover is not None and len(cover) == inst.truth["blocks"]
    with pytest.raises(ValueError):
        random_blocky(3, 3, 4, 0)


def test_nested_difference_not_blocky_with_lambda_two():
    blocky = 0
    for seed in range(30):
        inst = nested_blocky_difference(16, 16, seed)
        assert inst.factorization.lam == 2.0
        assert support_size(inst.matrix) > 0
        blocky += is_blocky(inst.matrix) is not None
    assert blocky < 30


def test_staircase_truth():
    for d in range(1, 7):
        inst = staircase_pattern(9, 8, d, seed=d)
        assert threshold_dimension(inst.matrix).d == d
    with pytest.raises(ValueError):
        staircase_pattern(3, 3, 4, 0)


def test_projection_gadget_requires_mass():
    with pytest.raises(ValueError):
        projection_gadget(2, 8, 0)


def test_corpus_shape():
    specs = corpus_specs()
    assert len(specs) == len({s.label() for s in specs}) == 1092
    counts = Counter(s.name for s in specs)
    assert set(counts) == set(FAMILIES) | {"projection_gadget"}
    assert len(regression_specs()) == 20
    assert all(s in specs for s in regression_specs())
