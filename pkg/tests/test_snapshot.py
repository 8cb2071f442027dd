import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdicut.graph import EdgeStream, max_dicut_bruteforce
from qdicut.snapshot import (ConfigError, classify, config_from_dict, load_config, oblivious_value, snapshot,
                             validate_config, worst_case_ratio)

from conftest import streams


def test_validate_examples():
    cfg = validate_config(2, ["-1", "0"], ["0.2", "0.9"], 0.1)
    assert cfg.ell == 2 and cfg.r == (Fraction(1, 5), Fraction(9, 10))
    with pytest.raises(ConfigError):
        validate_config(2, [0, -1], [0.2, 0.9], 0.1)
    with pytest.raises(ConfigError):
        validate_config(2, [-1, 0], [1.2, 0.9], 0.1)
    with pytest.raises(ConfigError):
        validate_config(2, [-0.5, 0], [0.2, 0.9], 0.1)
    with pytest.raises(ConfigError):
        config_from_dict({"ell": 1, "t": ["-1"]})


def test_load_from_file(tmp_path, test2):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(test2.to_dict()))
    assert load_config(p) == test2


def test_classify_examples(test2):
    # 0-based: "class 2" of the two-class layout is index 1
    assert classify(1, test2) == 1
    assert classify(0, test2) == 1
    assert classify(Fraction(-104, 100), test2) == 0
    assert classify(Fraction(-1, 10**9), test2) == 0
    assert classify(5, test2) == 1


def test_snapshot_single_edge(test2):
    S = snapshot(EdgeStream(2, ((0, 1),)), test2)
    assert S.tolist() == [[0, 0], [1, 0]]


def test_snapshot_path(test2):
    S = snapshot(EdgeStream(3, ((0, 1), (1, 2))), test2)
    assert S[1, 1] == 1 and S[1, 0] == 1 and S.sum() == 2


def test_snapshot_empty(test2):
    assert not snapshot(EdgeStream(4, ()), test2).any()


def test_oblivious_examples():
    half = validate_config(2, [-1, 0], ["1/2", "1/2"], 0)
    S = np.array([[0, 0], [1, 0]])
    assert oblivious_value(S, half) == Fraction(1, 4)
    assert oblivious_value(np.zeros((2, 2), dtype=np.int64), half) == 0
    corner = validate_config(2, [-1, 0], [0, 1], 0)
    assert oblivious_value(S, corner) == 1
    assert oblivious_value(S.astype(float), corner) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        oblivious_value(np.zeros((3, 3)), half)


def test_worst_case_ratio_test2(test2):
    # frozen from the class-type LP
    assert worst_case_ratio(test2) == pytest.approx(0.18, abs=1e-9)


def test_production_alpha_is_certified(production):
    assert worst_case_ratio(production) >= production.alpha


@st.composite
def configs(draw):
    ell = draw(st.integers(1, 4))
    cuts = sorted(draw(st.sets(st.fractions(-1, 1, max_denominator=8), min_size=ell - 1, max_size=ell - 1)) - {-1})
    t = [Fraction(-1)] + cuts
    r = draw(st.lists(st.fractions(0, 1, max_denominator=10), min_size=len(t), max_size=len(t)))
    return validate_config(len(t), t, r, 0)


@settings(max_examples=80, deadline=None)
@given(streams(n_max=6, m_max=10), configs())
def test_oblivious_never_exceeds_opt(s, cfg):
    assert oblivious_value(snapshot(s, cfg), cfg) <= max_dicut_bruteforce(s)


@settings(max_examples=40, deadline=None)
@given(s=streams(n_max=6, m_max=10))
def test_production_meets_its_alpha(s, production):
    opt = max_dicut_bruteforce(s)
    val = oblivious_value(snapshot(s, production), production)
    assert val >= Fraction(production.alpha) * opt


@settings(max_examples=40, deadline=None)
@given(s=streams())
def test_snapshot_counts_every_edge(s, test2):
    assert snapshot(s, test2).sum() == s.m
