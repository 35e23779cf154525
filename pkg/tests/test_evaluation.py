import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tetrolet_iqa.evaluation import (
    ALL,
    EvaluationError,
    EvaluationRecord,
    LogisticFitError,
    evaluate,
    fit_logistic,
    logistic,
    pearson,
    psnr,
    spearman,
)


def brute_pearson(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / (sxx * syy) ** 0.5


def brute_ranks(v):
    # average rank by counting: rank = (#less) + (#equal + 1) / 2
    return [sum(w < a for w in v) + (sum(w == a for w in v) + 1) / 2 for a in v]


def test_logistic_midpoint_and_bounds():
    assert logistic((1, 0, 0, 1), 0.0) == 0.5
    q = np.linspace(-50, 50, 201)
    vals = logistic((4, 1, 0.3, 2.0), q)
    assert np.all(np.diff(vals) >= 0)
    assert vals.min() >= 1 and vals.max() <= 4


def test_fit_recovers_generating_curve():
    q = np.linspace(0, 1, 50)
    mos = logistic((1, 0, 0.5, 0.2), q)
    p = fit_logistic(q, mos)
    assert np.sqrt(np.mean((logistic(p, q) - mos) ** 2)) < 1e-6


def test_fit_rejects_degenerate():
    with pytest.raises(LogisticFitError):
        fit_logistic(np.zeros(10), np.arange(10.0))
    with pytest.raises(LogisticFitError):
        fit_logistic(np.arange(10.0), np.ones(10))
    with pytest.raises(EvaluationError):
        fit_logistic([1, 2, 3], [1, 2, 3])


def test_fit_is_reproducible():
    rng = np.random.default_rng(0)
    q = rng.uniform(0, 5, 40)
    mos = rng.uniform(1, 5, 40)
    assert fit_logistic(q, mos) == fit_logistic(q, mos)


def test_pearson_cases():
    x = np.arange(10.0)
    assert pearson(x, 2 * x + 1) == pytest.approx(1.0, abs=1e-15)
    assert pearson(x, -x) == pytest.approx(-1.0, abs=1e-15)
    x = [1.2, 3.4, 2.2, 5.0, 4.1, 0.3, 2.9, 3.3, 4.8, 1.1]
    y = [2.0, 3.1, 2.5, 4.9, 3.7, 1.0, 2.2, 3.9, 4.0, 1.8]
    assert pearson(x, y) == pytest.approx(brute_pearson(x, y), abs=1e-12)
    with pytest.raises(EvaluationError):
        pearson([1, 1, 1], [1, 2, 3])


def test_spearman_cases():
    x = np.linspace(0.1, 3, 15)
    assert spearman(x, np.exp(3 * x)) == pytest.approx(1.0, abs=1e-15)
    assert spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0, abs=1e-15)
    assert brute_ranks([1, 2, 2, 3]) == [1, 2.5, 2.5, 4]
    with pytest.raises(EvaluationError):
        spearman([2, 2, 2], [1, 2, 3])


def test_correlations_match_brute_force():
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = rng.normal(size=20)
        y = rng.integers(0, 6, size=20).astype(float)  # ties
        assert pearson(x, y) == pytest.approx(brute_pearson(x, y), abs=1e-12)
        assert spearman(x, y) == pytest.approx(brute_pearson(brute_ranks(x), brute_ranks(y)), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_spearman_invariant_under_increasing_maps(seed):
    rng = np.random.default_rng(seed)
    q = rng.uniform(0, 3, 30)
    mos = rng.normal(size=30)
    assert spearman(q, mos) == spearman(np.exp(q), mos)


def test_plcc_invariant_under_affine_mos():
    rng = np.random.default_rng(2)
    q = rng.uniform(0, 3, 40)
    mos = logistic((5, 1, 1.5, 0.4), q) + rng.normal(0, 0.2, 40)
    p1 = pearson(logistic(fit_logistic(q, mos), q), mos)
    mos2 = 20 * mos - 7
    p2 = pearson(logistic(fit_logistic(q, mos2), q), mos2)
    assert p1 == pytest.approx(p2, abs=1e-6)


def _records(q, mos, labels):
    return [EvaluationRecord(f"r{i % 3}", lab, float(a), float(b)) for i, (a, b, lab) in enumerate(zip(q, mos, labels))]


def test_perfect_model_report():
    rng = np.random.default_rng(3)
    labels = np.repeat(["JPG", "BLR", "NOZ"], 10)
    q = rng.uniform(0, 4, 30)
    mos = logistic((5, 1, 2, 0.5), q)
    rep = evaluate(_records(q, mos, labels))
    assert [r.group for r in rep.rows] == ["JPG", "BLR", "NOZ", ALL]
    for r in rep.rows:
        assert r.ok
        assert r.plcc == pytest.approx(1.0, abs=1e-9)
        assert r.srocc == pytest.approx(1.0, abs=1e-12)


def test_null_hypothesis_report():
    rng = np.random.default_rng(4)
    q = rng.uniform(0, 4, 1000)
    mos = rng.uniform(1, 5, 1000)
    rep = evaluate(_records(q, mos, ["JPG"] * 1000), fit_mode="global")
    assert abs(rep.row(ALL).plcc) < 0.1


def test_single_group_matches_all():
    rng = np.random.default_rng(5)
    q = rng.uniform(0, 4, 20)
    mos = 5 - q + rng.normal(0, 0.3, 20)
    rep = evaluate(_records(q, mos, ["FLT"] * 20))
    assert [r.group for r in rep.rows] == ["FLT", ALL]
    a, b = rep.rows
    assert (a.n, a.plcc, a.srocc, a.rmse) == (b.n, b.plcc, b.srocc, b.rmse)


def test_small_and_degenerate_groups_reported():
    rng = np.random.default_rng(6)
    q = np.r_[rng.uniform(0, 4, 10), [1.0, 2.0, 3.0], np.zeros(6)]
    mos = np.r_[rng.uniform(1, 5, 10), [1.0, 2.0, 3.0], rng.uniform(1, 5, 6)]
    labels = ["JPG"] * 10 + ["DCQ"] * 3 + ["FLT"] * 6
    rep = evaluate(_records(q, mos, labels))
    assert rep.row("DCQ").status == "insufficient data"
    assert "degenerate" in rep.row("FLT").status
    assert rep.row("JPG").ok and rep.row(ALL).ok
    text = rep.to_text()
    assert "Correlation Coefficient" in text and "Rank-Order Correlation" in text
    assert rep.to_csv().splitlines()[0] == "group,n,plcc,srocc,rmse,g1,g2,g3,g4"
    assert len(rep.scatter_csv().splitlines()) == 1 + 19


def test_all_zero_scores_degenerate():
    rep = evaluate(_records(np.zeros(12), np.arange(12.0), ["JPG"] * 12))
    assert not rep.row(ALL).ok
    assert "degenerate" in rep.row(ALL).status


def test_global_mode_shares_parameters():
    rng = np.random.default_rng(7)
    q = rng.uniform(0, 4, 30)
    mos = logistic((5, 1, 2, 0.5), q) + rng.normal(0, 0.05, 30)
    rep = evaluate(_records(q, mos, np.repeat(["JPG", "BLR", "NOZ"], 10)), fit_mode="global")
    params = {r.params for r in rep.rows}
    assert len(params) == 1


def test_psnr():
    a = np.zeros((4, 4))
    assert psnr(a, a) == float("inf")
    assert psnr(a, a + 255.0) == pytest.approx(0.0)
    assert psnr(a, a + 1.0) == pytest.approx(10 * np.log10(255.0 ** 2))
