import math

import pytest

from torus_spectra.bounds import (
    STIRLING_CONST,
    bound_report,
    compare_walks,
    compare_walks_vs_m,
    lattice_wgf_lower,
    lattice_wgf_truncated,
    stirling_binomial_lower,
)
from torus_spectra.topology import TorusSpec, build_torus
from torus_spectra.walks import exact_walk_counts


def test_stirling_first_value():
    assert STIRLING_CONST == pytest.approx(0.4797, abs=1e-4)
    assert stirling_binomial_lower(1) == pytest.approx(4 * math.sqrt(4 * math.pi) / math.e**2, rel=1e-15)
    assert stirling_binomial_lower(1) == pytest.approx(1.9188, abs=5e-4)


def test_stirling_below_binomial_with_shrinking_ratio():
    ratios = []
    for k in range(1, 61):
        assert stirling_binomial_lower(k) <= math.comb(2 * k, k)
        ratios.append(stirling_binomial_lower(k) / math.comb(2 * k, k))
    # binom(2l, l) < 4^l / sqrt(pi l), so the ratio falls towards 2 pi / e^2 from above
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] > 2 * math.pi / math.e**2


def test_stirling_rejects_zero():
    with pytest.raises(ValueError):
        stirling_binomial_lower(0)


def test_lattice_lower_closed_form_at_eight():
    lb = lattice_wgf_lower(8.0, terms=200)
    assert lb.closed_form == pytest.approx(0.0082767, abs=1e-7)
    expected = (1 / 8) * (4 * math.pi / math.e**4) * -math.log(1 - 16 / 64)
    assert lb.closed_form == pytest.approx(expected, rel=1e-14)
    assert abs(lb.difference) <= 1e-10
    assert 0 <= lb.difference <= lb.tail_bound + 1e-18


def test_lattice_truncation_converges():
    short, tail = lattice_wgf_truncated(10.0, 10)
    long, _ = lattice_wgf_truncated(10.0, 200)
    assert short <= long <= short + tail


@pytest.mark.parametrize("x", [4.0, 3.0, -8.0])
def test_divergent_points_rejected(x):
    with pytest.raises(ValueError):
        lattice_wgf_lower(x)
    with pytest.raises(ValueError):
        lattice_wgf_truncated(x)


@pytest.mark.parametrize("m", [5, 9])
@pytest.mark.parametrize("x", [6.0, 8.0, 10.0])
def test_chain_holds(m, x):
    rep = bound_report(TorusSpec(2, m), x)
    assert rep.chain_holds()
    assert rep.stirling_value <= rep.lattice_value + rep.lattice_tail
    assert rep.lattice_value <= rep.exact_value + rep.lattice_tail
    assert all(g >= 0 for g in rep.gaps)


def test_bound_report_needs_two_dims():
    with pytest.raises(ValueError):
        bound_report(TorusSpec(3, 3), 8.0)


def test_compare_walks_against_exact_counts():
    rows = compare_walks(5, 12)
    exact = exact_walk_counts(build_torus(TorusSpec(2, 5)), 0, 12)
    assert [r["ell"] for r in rows] == list(range(0, 13, 2))
    for r in rows:
        assert r["torus"] == exact[r["ell"]][0]
        assert r["lattice"] == math.comb(r["ell"], r["ell"] // 2) ** 2
    assert [r["percent_diff"] for r in rows[:3]] == [0.0, 0.0, 0.0]
    pct = [r["percent_diff"] for r in rows]
    assert all(a <= b for a, b in zip(pct, pct[1:]))
    assert pct[-1] > 0


def test_compare_walks_vs_side_length():
    # odd sides need 2m steps to wrap, even sides only m, so compare within a parity
    for lens in ([3, 5, 7, 9], [4, 6, 8, 10]):
        pct = [r["percent_diff"] for r in compare_walks_vs_m(8, lens)]
        assert all(a >= b for a, b in zip(pct, pct[1:]))
        assert pct[0] > 0 and pct[-1] == 0.0
    with pytest.raises(ValueError):
        compare_walks_vs_m(7, [5])


def test_compare_walks_beyond_float_precision():
    rows = compare_walks(5, 40)
    exact = exact_walk_counts(build_torus(TorusSpec(2, 5)), 0, 40)
    assert rows[-1]["torus"] == exact[40][0]
    assert rows[-1]["torus"] > 2**60
