"""Accumulator tests: log-domain means, standard errors, merging."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from detmc.stats import StreamingAccumulator

from mpmath import mp


def mp_log_mean(log_weights):
    """Arbitrary-precision oracle: log(mean(exp(lw)))."""
    with mp.workdps(60):
        total = mp.fsum(mp.exp(mp.mpf(float(w))) for w in log_weights)
        return float(mp.log(total / len(log_weights)))


def filled(log_weights):
    acc = StreamingAccumulator()
    for w in log_weights:
        acc.update(w)
    return acc


def test_fresh_update_unit_weight():
    acc = filled([0.0])
    assert acc.count == 1
    s = acc.summarize()
    assert s.log_mean == 0.0
    assert s.std_error == 0.0
    assert s.low_count


def test_two_updates_mean_of_two_and_four():
    s = filled([math.log(2), math.log(4)]).summarize()
    assert s.log_mean == pytest.approx(math.log(3), abs=1e-15)
    # pinned convention: Bessel-corrected sample variance over count
    # ((2-3)^2 + (4-3)^2)/(2-1) = 2, se = sqrt(2/2) = 1
    assert s.std_error == pytest.approx(1.0, abs=1e-14)
    assert not s.low_count


def test_extreme_range_matches_high_precision_oracle():
    rng = np.random.default_rng(2024)
    lw = rng.uniform(-600.0, 600.0, size=100_000)
    got = filled(lw).summarize().log_mean
    want = mp_log_mean(lw)
    assert got == pytest.approx(want, rel=1e-10)


def test_update_many_matches_sequential():
    rng = np.random.default_rng(7)
    lw = rng.normal(scale=40.0, size=5000)
    a = filled(lw).summarize()
    b = StreamingAccumulator()
    b.update_many(lw)
    sb = b.summarize()
    assert sb.log_mean == pytest.approx(a.log_mean, rel=1e-12)
    assert sb.std_error == pytest.approx(a.std_error, rel=1e-10)


def test_merge_with_empty_is_identity():
    acc = filled([0.3, -0.2, 1.7])
    for merged in (acc.merge(StreamingAccumulator()), StreamingAccumulator().merge(acc)):
        assert merged.count == acc.count
        assert merged.summarize() == acc.summarize()


def test_merge_two_singletons():
    merged = filled([math.log(2)]).merge(filled([math.log(4)]))
    assert merged.summarize().log_mean == pytest.approx(math.log(3), abs=1e-15)


def test_eight_way_split_matches_single_stream():
    rng = np.random.default_rng(99)
    lw = rng.uniform(-300.0, 300.0, size=10_000)
    single = filled(lw).summarize()
    merged = StreamingAccumulator()
    for part in np.array_split(lw, 8):
        merged = merged.merge(filled(part))
    assert merged.count == 10_000
    assert merged.summarize().log_mean == pytest.approx(single.log_mean, rel=1e-12)


def test_merge_associative_and_order_insensitive():
    parts = [filled([0.1, 5.0]), filled([-200.0, 3.3]), filled([250.0, -1.0])]
    a, b, c = parts
    left = a.merge(b).merge(c).summarize().log_mean
    right = a.merge(b.merge(c)).summarize().log_mean
    assert left == pytest.approx(right, rel=1e-12)
    for order in ((a, c, b), (c, b, a), (b, a, c)):
        x, y, z = order
        assert x.merge(y).merge(z).summarize().log_mean == pytest.approx(left, rel=1e-12)


@given(st.floats(min_value=-500.0, max_value=500.0))
@settings(deadline=None, max_examples=50)
def test_shift_invariance(delta):
    lw = [0.0, math.log(2), -1.5, 4.0]
    base = filled(lw).summarize()
    shifted = filled([w + delta for w in lw]).summarize()
    assert shifted.log_mean - base.log_mean == pytest.approx(delta, rel=1e-12, abs=1e-12)
    assert shifted.std_error == pytest.approx(base.std_error * math.exp(delta), rel=1e-12)


def test_std_error_zero_iff_weights_equal():
    assert filled([1.7] * 100).summarize().std_error == 0.0
    assert filled([0.0, 1e-6]).summarize().std_error > 0.0


def test_uniform_weights_std_error_matches_analytic():
    rng = np.random.default_rng(5)
    u = rng.uniform(size=1_000_000)
    acc = StreamingAccumulator()
    acc.update_many(np.log(u))
    se = acc.summarize().std_error
    analytic = math.sqrt(1.0 / 12.0) / math.sqrt(u.size)
    assert se == pytest.approx(analytic, rel=0.05)


@pytest.mark.parametrize("bad", [math.nan, math.inf])
def test_nonfinite_rejected(bad):
    with pytest.raises(ValueError):
        StreamingAccumulator().update(bad)
    with pytest.raises(ValueError):
        StreamingAccumulator().update_many(np.array([0.0, bad]))


def test_neg_inf_means_zero_weight():
    acc = filled([0.0, -math.inf])
    assert acc.count == 2
    assert acc.summarize().log_mean == pytest.approx(math.log(0.5), abs=1e-15)
    all_zero = filled([-math.inf, -math.inf]).summarize()
    assert all_zero.log_mean == -math.inf
    assert all_zero.std_error == 0.0


def test_empty_summarize_raises():
    with pytest.raises(ValueError):
        StreamingAccumulator().summarize()


def test_std_error_overflow_reported_as_inf():
    s = filled([800.0, 802.0]).summarize()
    assert math.isfinite(s.log_mean)
    assert s.std_error == math.inf


@given(
    st.lists(st.floats(min_value=-600.0, max_value=600.0), min_size=1, max_size=60),
    st.integers(min_value=1, max_value=5),
)
@settings(deadline=None, max_examples=100)
def test_split_merge_agrees_with_sequential(lw, pieces):
    seq = filled(lw).summarize()
    merged = StreamingAccumulator()
    for part in np.array_split(np.asarray(lw), min(pieces, len(lw))):
        merged = merged.merge(filled(part))
    got = merged.summarize()
    assert got.log_mean == pytest.approx(seq.log_mean, rel=1e-11, abs=1e-11)
    assert min(lw) - 1e-9 <= seq.log_mean <= max(lw) + 1e-9
    assert got.std_error >= 0.0
