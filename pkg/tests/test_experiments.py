"""Experiment case and derived-curve tests (small grids only; the full
sweeps run in the acceptance suite)."""

import dataclasses

import pytest

from ctcsim.errors import EmptyInputError, InvalidParameterError, UnknownCaseError
from ctcsim.experiments import (
    CASE_IDS,
    DEFAULTS,
    ResultRow,
    ResultTable,
    case_spec,
    derive_case_v,
    isotonic_nondecreasing,
    run_case,
)
from ctcsim.sim import Policy, RateKind


def test_case_ids_cover_four_cases():
    assert CASE_IDS == ("I", "II", "III", "IV")


def test_case_kinds_match_their_profiles():
    expected = {
        "I": (RateKind.CONSTANT, RateKind.LINEAR_INCREASING),
        "II": (RateKind.LINEAR_INCREASING, RateKind.LINEAR_INCREASING),
        "III": (RateKind.LINEAR_DECREASING, RateKind.LINEAR_INCREASING),
        "IV": (RateKind.LINEAR_INCREASING, RateKind.CONSTANT),
    }
    for case_id, (self_kind, nbr_kind) in expected.items():
        spec = case_spec(case_id)
        assert spec.self_rate_fn(800).kind is self_kind
        assert spec.neighbor_rate_fn(800).kind is nbr_kind


def test_case_grid_defaults():
    spec = case_spec("I")
    assert spec.sweep_axis == tuple(range(100, 1601, 100))
    assert spec.algorithms == (Policy.CTC, Policy.DSR)
    assert spec.seeds == tuple(range(10))
    assert spec.params == DEFAULTS


def test_unknown_case_rejected():
    with pytest.raises(UnknownCaseError):
        case_spec("V")
    with pytest.raises(UnknownCaseError):
        case_spec("i")


def test_case1_self_level_tilts_down_the_sweep():
    spec = case_spec("I")
    assert spec.self_rate_fn(100).base == pytest.approx(350.0)
    assert spec.self_rate_fn(1600).base == pytest.approx(275.0)


def test_increasing_profile_averages_the_window_rate():
    # v = 1000 packets per 10-epoch window is 100/epoch on average; the ramp
    # runs 0 to 2x mean, so the midpoint epoch sits at the mean.
    fn = case_spec("I").neighbor_rate_fn(1000)
    assert fn.rate(50) == pytest.approx(100.0)
    assert fn.rate(0) == 0.0
    mean = sum(fn.rate(e) for e in range(100)) / 100
    assert mean == pytest.approx(100.0, rel=0.02)


def test_case3_self_profile_reaches_zero():
    fn = case_spec("III").self_rate_fn(800)
    assert fn.rate(0) == pytest.approx(300.0)
    assert fn.rate(100) == 0.0


def _tiny_spec(case_id):
    return dataclasses.replace(case_spec(case_id), sweep_axis=(100, 1600), seeds=(0,))


def test_run_case_row_grid_and_ordering():
    table = run_case(_tiny_spec("I"))
    assert len(table.rows) == 4
    keys = [(r.case_id, r.algorithm, r.sweep_value, r.seed) for r in table.rows]
    assert keys == sorted(keys)
    assert {r.algorithm for r in table.rows} == {"ctc", "dsr"}
    for row in table.rows:
        assert row.epoch_window == "0-99"
        assert row.offered_nbr > 0
        assert 0.0 <= row.drop_ratio <= 1.0
        assert 0.0 <= row.malicious_fraction <= 1.0
        assert row.throughput > 0.0
        assert row.utilization > 0.0
        assert row.offered_nbr == row.forwarded_nbr + row.dropped_nbr or row.drop_ratio < 1.0


def test_run_case_is_deterministic():
    spec = _tiny_spec("II")
    assert run_case(spec) == run_case(spec)


def test_dsr_drop_ratio_grows_with_load():
    table = run_case(dataclasses.replace(case_spec("I"), sweep_axis=(100, 1600), seeds=(0,), algorithms=(Policy.DSR,)))
    low, high = table.rows
    assert low.sweep_value == 100
    assert high.sweep_value == 1600
    assert high.drop_ratio > low.drop_ratio + 0.05


def _row(algorithm, drop_ratio, malicious):
    return ResultRow(
        case_id="I",
        algorithm=algorithm,
        sweep_value=100,
        seed=0,
        epoch_window="0-99",
        offered_self=0,
        offered_nbr=10,
        forwarded_self=0,
        forwarded_nbr=10,
        dropped_self=0,
        dropped_nbr=0,
        drop_ratio=drop_ratio,
        malicious_fraction=malicious,
        throughput=1.0,
        utilization=1.0,
    )


def test_derive_case_v_single_bucket_mean():
    table = ResultTable(rows=(_row("ctc", 0.12, 0.2), _row("ctc", 0.13, 0.4)))
    curves = derive_case_v([table])
    assert len(curves) == 1
    (curve,) = curves
    assert curve.algorithm == "ctc"
    assert len(curve.buckets) == 1
    bucket = curve.buckets[0]
    assert bucket.lower == pytest.approx(0.10)
    assert bucket.mean_malicious == pytest.approx(0.3)
    assert bucket.rows == 2


def test_derive_case_v_omits_empty_buckets_and_splits_algorithms():
    table = ResultTable(
        rows=(
            _row("ctc", 0.02, 0.0),
            _row("ctc", 0.33, 0.6),
            _row("dsr", 0.33, 0.8),
        )
    )
    curves = derive_case_v([table])
    assert [c.algorithm for c in curves] == ["ctc", "dsr"]
    ctc, dsr = curves
    assert [b.lower for b in ctc.buckets] == [pytest.approx(0.0), pytest.approx(0.30)]
    assert [b.lower for b in dsr.buckets] == [pytest.approx(0.30)]
    assert dsr.buckets[0].mean_malicious == pytest.approx(0.8)


def test_derive_case_v_pools_multiple_tables():
    a = ResultTable(rows=(_row("ctc", 0.11, 0.0),))
    b = ResultTable(rows=(_row("ctc", 0.14, 1.0),))
    curves = derive_case_v([a, b])
    assert curves[0].buckets[0].mean_malicious == pytest.approx(0.5)
    assert curves[0].buckets[0].rows == 2


def test_derive_case_v_empty_input_raises():
    with pytest.raises(EmptyInputError):
        derive_case_v([ResultTable(rows=())])
    with pytest.raises(EmptyInputError):
        derive_case_v([])


def test_derive_case_v_bad_width_raises():
    with pytest.raises(InvalidParameterError):
        derive_case_v([ResultTable(rows=(_row("ctc", 0.1, 0.0),))], bucket_width=0.0)


def test_pava_identity_when_already_monotone():
    assert isotonic_nondecreasing([1.0, 2.0, 3.0]) == [1.0, 2.0, 3.0]
    assert isotonic_nondecreasing([]) == []


def test_pava_merges_violating_prefix():
    assert isotonic_nondecreasing([3.0, 1.0, 2.0]) == [2.0, 2.0, 2.0]


def test_pava_partial_merge():
    assert isotonic_nondecreasing([1.0, 3.0, 2.0, 4.0]) == [1.0, 2.5, 2.5, 4.0]


def test_pava_respects_weights():
    assert isotonic_nondecreasing([1.0, 0.0], weights=[3.0, 1.0]) == [0.75, 0.75]
    assert isotonic_nondecreasing([0.0, 1.0], weights=[1.0, 3.0]) == [0.0, 1.0]


def test_pava_validates_arguments():
    with pytest.raises(InvalidParameterError):
        isotonic_nondecreasing([1.0, 2.0], weights=[1.0])
    with pytest.raises(InvalidParameterError):
        isotonic_nondecreasing([1.0], weights=[0.0])
