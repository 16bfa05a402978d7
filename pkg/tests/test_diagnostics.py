import json
import math
import random

import numpy as np
import pytest

from ergodlab.diagnostics import (
    Character,
    DiagnosticReport,
    ThetaObservable,
    birkhoff_average,
    box_discrepancy,
    character_phase,
    default_deviation_starts,
    eigen_correlation,
    eigen_scan,
    evaluate_observable,
    geometric_mean_bound,
    observable_bound,
    orbit_cardinality,
    report_to_csv,
    report_to_json,
    star_discrepancy_1d,
    twisted_prefix_sums,
    uniform_deviation,
    uniform_deviation_report,
)
from ergodlab.errors import ResourceLimitError
from ergodlab.flows import Anzai, Heisenberg, Product, Rotation, WeylSystem
from ergodlab.torus import (
    Frac,
    TorusPoint,
    frac_from_decimal,
    frac_from_rational,
    int_mul,
    to_real,
    zero_point,
)

rng = random.Random(0xD1A6)

ALPHA = frac_from_decimal("0.6180339887498949")
BETA = frac_from_decimal("0.41421356237309515")


def rand_frac():
    return Frac(rng.getrandbits(128))


# observables


def test_character_validation():
    with pytest.raises(ValueError):
        Character(())
    with pytest.raises(ValueError):
        Character((1 << 63,))
    c = Character((0, 2, -3))
    p = TorusPoint((rand_frac(), rand_frac(), rand_frac()))
    want = int_mul(p[1], 2) + int_mul(p[2], -3)
    assert character_phase(c, p) == want


def test_evaluate_character_unimodular():
    c = Character((1, 1))
    for _ in range(100):
        p = TorusPoint((rand_frac(), rand_frac()))
        v = evaluate_observable(c, p)
        assert abs(abs(v) - 1.0) < 1e-14


def test_observable_bounds():
    assert observable_bound(Character((5, -2))) == 1.0
    b = observable_bound(ThetaObservable())
    assert 1.0 < b < 1.1  # 1 + 2 sum e^{-pi m^2} is barely above 1


def test_observable_dimension_checked():
    from ergodlab.diagnostics import observable_for

    with pytest.raises(ValueError):
        observable_for(Anzai(ALPHA), Character((1, 0, 0)))
    with pytest.raises(ValueError):
        observable_for(Anzai(ALPHA), ThetaObservable())
    observable_for(Heisenberg(ALPHA, BETA, Frac(0)), ThetaObservable())


# birkhoff and twisted sums


def test_birkhoff_of_constant_is_exact_one():
    # zero character = constant 1; the compensated mean must be bit-for-bit (1, 0)
    mean = birkhoff_average(Rotation(TorusPoint((ALPHA,))), None, Character((0,)), 1234)
    assert mean == 1.0 + 0.0j


def test_rotation_birkhoff_matches_geometric_sum():
    # |sum e^{2 pi i n a}| = |sin(pi N a)/sin(pi a)| exactly, so the mean is
    # bounded by the closed-form envelope
    spec = Rotation(TorusPoint((ALPHA,)))
    obs = Character((1,))
    for N in (10, 100, 1000):
        mean = birkhoff_average(spec, None, obs, N)
        assert abs(mean) <= geometric_mean_bound(ALPHA, N) + N * 1e-15


def test_bulk_and_reference_paths_agree():
    from ergodlab.diagnostics import (
        _twisted_prefix_sums_bulk,
        _twisted_prefix_sums_reference,
    )

    spec = WeylSystem(BETA, 3)
    obs = Character((1, 0, 2))
    start = TorusPoint((rand_frac(), rand_frac(), rand_frac()))
    theta = frac_from_rational(1, 7)
    marks = [100, 1000, 4000]
    a = _twisted_prefix_sums_bulk(spec, start, obs, theta, 4000, marks)
    b = _twisted_prefix_sums_reference(spec, start, obs, theta, 4000, marks)
    for x, y in zip(a, b):
        assert abs(x - y) < 4000 * 1e-15


def test_prefix_marks_validated():
    spec = Rotation(TorusPoint((ALPHA,)))
    with pytest.raises(ValueError):
        twisted_prefix_sums(spec, None, Character((1,)), None, 100, [0])
    with pytest.raises(ValueError):
        twisted_prefix_sums(spec, None, Character((1,)), None, 100, [101])


def test_geometric_mean_bound_caps_at_one():
    assert geometric_mean_bound(Frac(0), 100) == 1.0
    assert geometric_mean_bound(frac_from_decimal("0.5"), 10) < 0.2


# eigenvalue scans


def test_eigen_correlation_at_zero_equals_birkhoff_mod():
    spec = Anzai(ALPHA)
    obs = Character((0, 1))
    a = eigen_correlation(spec, None, obs, Frac(0), 500)
    b = abs(birkhoff_average(spec, None, obs, 500))
    assert a == b


def test_eigen_peak_at_base_frequency():
    # obs e^{2 pi i x} on the parabolic tower has exact eigenvalue at the base
    spec = WeylSystem(BETA, 3)
    obs = Character((1, 0, 0))
    c = eigen_correlation(spec, None, obs, BETA, 100000)
    assert c >= 1.0 - 1e-6
    off = eigen_correlation(spec, None, obs, BETA + frac_from_rational(1, 100), 100000)
    assert off <= 0.05


def test_eigen_scan_report():
    spec = WeylSystem(BETA, 2)
    thetas = [BETA, frac_from_rational(1, 3), Frac(0)]
    rep = eigen_scan(spec, None, Character((1, 0)), thetas, 20000, peak_threshold=0.9)
    assert rep.extras["peaks"] == [BETA]
    flagged = [r for r in rep.rows if r["meta"]["peak"]]
    assert len(flagged) == 1 and flagged[0]["value_re"] >= 1.0 - 1e-9


def test_eigen_scan_threshold_validated():
    with pytest.raises(ValueError):
        eigen_scan(Anzai(ALPHA), None, Character((1, 0)), [Frac(0)], 10, peak_threshold=0.0)
    with pytest.raises(TypeError):
        eigen_correlation(Anzai(ALPHA), None, Character((1, 0)), 0.25, 10)


# uniform deviation


def test_deviation_zero_for_identical_starts():
    spec = Rotation(TorusPoint((ALPHA,)))
    starts = [zero_point(1), zero_point(1)]
    assert uniform_deviation(spec, starts, Character((1,)), 1000) == 0.0


def test_deviation_needs_two_starts():
    with pytest.raises(ValueError):
        uniform_deviation(Rotation(zero_point(1)), [zero_point(1)], Character((1,)), 10)


def test_deviation_report_has_three_checkpoints():
    spec = WeylSystem(BETA, 2)
    starts = default_deviation_starts(2, count=10)
    rep = uniform_deviation_report(spec, starts, Character((0, 1)), 8000)
    assert [r["N"] for r in rep.rows] == [2000, 4000, 8000]
    assert rep.extras["final"] == rep.rows[-1]["value_re"]


def test_deviation_thread_count_does_not_change_result():
    spec = WeylSystem(BETA, 3)
    starts = default_deviation_starts(3, count=8)
    obs = Character((0, 0, 1))
    r1 = uniform_deviation_report(spec, starts, obs, 5000, threads=1)
    r4 = uniform_deviation_report(spec, starts, obs, 5000, threads=4)
    assert [r["value_re"] for r in r1.rows] == [r["value_re"] for r in r4.rows]


def test_default_starts_grid():
    # diagonal points k/q for k = 1..count, so no two coincide
    starts = default_deviation_starts(2, count=5, q=7)
    assert len(starts) == 5
    assert to_real(starts[0][0]) == pytest.approx(1 / 7)
    assert len({s[0].bits for s in starts}) == 5
    with pytest.raises(ValueError):
        default_deviation_starts(1, count=7, q=7)


# discrepancies


def test_star_discrepancy_perfect_grid():
    # the centered regular grid {(i - 1/2)/N} attains the 1/(2N) optimum;
    # the left-anchored grid {i/N} gives exactly 1/N
    N = 100
    pts = np.arange(N) / N
    assert star_discrepancy_1d(pts) == pytest.approx(1 / N)


def test_star_discrepancy_point_mass():
    assert star_discrepancy_1d(np.zeros(50)) == 1.0


def test_star_discrepancy_orbit_decays():
    spec = Rotation(TorusPoint((ALPHA,)))
    from ergodlab.flows import orbit

    xs = np.array([to_real(p[0]) for p in orbit(spec, None, 4000)])
    assert star_discrepancy_1d(xs) < 0.005


def test_star_discrepancy_caps_input():
    with pytest.raises(ResourceLimitError):
        star_discrepancy_1d(np.zeros(10**7 + 1))


def test_box_discrepancy_examples():
    # one point at the origin vs the uniform measure on a 2x2 grid
    pts = np.zeros((1, 2))
    assert box_discrepancy(pts, 2) == pytest.approx(0.75)
    # four points, one per cell, is exact for the 2x2 grid
    pts = np.array([[0.1, 0.1], [0.1, 0.6], [0.6, 0.1], [0.6, 0.6]])
    assert box_discrepancy(pts, 2) == 0.0


def test_box_discrepancy_caps():
    with pytest.raises(ValueError):
        box_discrepancy(np.zeros((10, 5)), 4)
    with pytest.raises(ResourceLimitError):
        box_discrepancy(np.zeros((10, 4)), 200)


# cardinality and reports


def test_orbit_cardinality_rational_rotation():
    # only dyadic steps close exactly on the 2**-128 grid
    spec = Rotation(TorusPoint((frac_from_rational(3, 16),)))
    assert orbit_cardinality(spec, None, 1000) == 16
    nearly = Rotation(TorusPoint((frac_from_rational(2, 5),)))
    assert orbit_cardinality(nearly, None, 1000) == 1000


def test_orbit_cardinality_counts_distinct():
    spec = Anzai(frac_from_rational(1, 4))
    assert orbit_cardinality(spec, None, 100) <= 16


def test_report_serializations_stable():
    rep = DiagnosticReport(
        statistic="demo",
        N=4,
        rows=[
            {"statistic": "demo", "N": 4, "value_re": 0.25, "value_im": -1.0, "meta": {"k": 1}}
        ],
        notes=("a note",),
        runtime_s=123.456,
    )
    j1, j2 = report_to_json(rep), report_to_json(rep)
    assert j1 == j2
    assert "123.456" not in j1  # wall clock stays out of the artifact
    assert "runtime" not in j1
    parsed = json.loads(j1)
    assert parsed["rows"][0]["value_re"] == "0.25"
    csv_text = report_to_csv(rep)
    assert csv_text.splitlines()[0] == "statistic,N,value_re,value_im,meta"
    assert "123.456" not in csv_text


def test_report_float_formatting_17g():
    rep = DiagnosticReport(
        statistic="demo",
        N=1,
        rows=[{"statistic": "demo", "N": 1, "value_re": 1 / 3, "value_im": 0.0, "meta": {}}],
    )
    assert "0.33333333333333331" in report_to_json(rep)
