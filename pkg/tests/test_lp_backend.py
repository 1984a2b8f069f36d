import numpy as np
import pytest

from opfcuts.errors import LpBackendError
from opfcuts.lp_backend import ScipyHighsBackend, get_backend


def _loaded(lower=0.0, upper=10.0):
    be = ScipyHighsBackend()
    be.load([1.0], [lower], [upper], [])
    return be


def test_minimize_with_single_row():
    be = _loaded()
    be.add_rows({"r1": ([0], [1.0], 1.0)})
    res = be.solve()
    assert res.status == "optimal"
    assert res.objective == pytest.approx(1.0)
    assert res.primal[0] == pytest.approx(1.0)
    assert res.primal_residual <= 1e-8


def test_tighten_then_relax():
    be = _loaded()
    be.add_rows({"r1": ([0], [1.0], 1.0)})
    be.add_rows({"r2": ([0], [1.0], 2.0)})
    assert be.solve().objective == pytest.approx(2.0)
    be.remove_rows(["r2"])
    assert be.solve().objective == pytest.approx(1.0)


def test_infeasible():
    be = _loaded(upper=0.5)
    be.add_rows({"r1": ([0], [1.0], 1.0)})
    res = be.solve()
    assert res.status == "infeasible"
    assert res.objective is None
    assert res.dual_bound == -np.inf


def test_equality_rows():
    be = ScipyHighsBackend()
    be.load([1.0, 1.0], [0.0, 0.0], [5.0, 5.0], [([0, 1], [1.0, 1.0], 3.0)])
    res = be.solve()
    assert res.objective == pytest.approx(3.0)


def test_many_row_edits_idempotent():
    be = _loaded()
    base = be.solve().objective
    ids = ["r%d" % i for i in range(1000)]
    be.add_rows({rid: ([0], [1.0], 0.001 * i) for i, rid in enumerate(ids)})
    assert be.solve().objective == pytest.approx(0.999)
    be.remove_rows(ids)
    assert be.row_ids == set()
    assert be.solve().objective == pytest.approx(base)


def test_unknown_row_id():
    be = _loaded()
    with pytest.raises(LpBackendError):
        be.remove_rows(["nope"])


def test_solve_before_load():
    with pytest.raises(LpBackendError):
        ScipyHighsBackend().solve()


def test_empty_model_rejected():
    with pytest.raises(LpBackendError):
        ScipyHighsBackend().load([], [], [], [])


def test_get_backend():
    assert isinstance(get_backend("highs"), ScipyHighsBackend)
    with pytest.raises(LpBackendError):
        get_backend("bogus")


def test_deterministic_repeat():
    rng = np.random.default_rng(30)
    n = 20
    c = rng.standard_normal(n)
    lo, up = -np.ones(n), np.ones(n)

    def run():
        be = ScipyHighsBackend()
        be.load(c, lo, up, [(list(range(n)), [1.0] * n, 0.5)])
        be.add_rows({"r%d" % i:
                     (list(range(n)), list(rng2.standard_normal(n)), -1.0)
                     for i, rng2 in ((j, np.random.default_rng(j))
                                     for j in range(5))})
        return be.solve()

    a, b = run(), run()
    assert a.objective == b.objective
    assert np.array_equal(a.primal, b.primal)


def test_dual_bound_matches_objective_on_clean_lp():
    """On a well-conditioned solve the certified bound equals the optimum."""
    rng = np.random.default_rng(31)
    for _ in range(20):
        n = 8
        be = ScipyHighsBackend()
        be.load(rng.standard_normal(n), -np.ones(n), np.ones(n),
                [(list(range(n)), list(rng.standard_normal(n)), 0.1)])
        be.add_rows({"r": (list(range(n)), list(rng.standard_normal(n)), -2.0)})
        res = be.solve()
        if res.status != "optimal":
            continue
        assert res.dual_infeasibility == pytest.approx(0.0, abs=1e-7)
        assert res.dual_bound == pytest.approx(res.objective, abs=1e-7)
        assert res.dual_bound <= res.objective + 1e-9


def test_dual_bound_with_free_variable():
    """Free columns with nonzero reduced cost lower the certificate safely."""
    be = ScipyHighsBackend()
    be.load([1.0, 0.0], [0.0, -np.inf], [10.0, np.inf],
            [([1], [1.0], 0.0)])
    be.add_rows({"r": ([0], [1.0], 2.0)})
    res = be.solve()
    assert res.status == "optimal"
    assert res.dual_bound <= res.objective + 1e-9
