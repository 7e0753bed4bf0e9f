import numpy as np
import pytest

from conftest import var1
from tvgc import rng
from tvgc.bootstrap import (BootstrapConfig, bootstrap_maxima, critical_value_sequences,
                            critical_values, fit_null_model, generate_replication,
                            order_statistic_rank, quantile_from_maxima)
from tvgc.errors import BootstrapError, DataError
from tvgc.procedures import statistic_sequences
from tvgc.var import VarFit, fit

SMALL = dict(replications=60, control_window=30, min_window=40)


def test_order_statistic():
    assert order_statistic_rank(499, 0.05) == 475
    assert order_statistic_rank(99, 0.05) == 95
    assert order_statistic_rank(10, 0.01) == 10
    assert quantile_from_maxima(np.arange(1.0, 500.0)[::-1], 0.05) == 475.0


def test_quantile_ignores_failed_replications():
    m = np.concatenate([np.arange(1.0, 100.0), [np.nan]])
    assert quantile_from_maxima(m, 0.05) == 95.0
    with pytest.raises(BootstrapError):
        quantile_from_maxima(np.full(5, np.nan), 0.05)


def test_config_validation():
    for bad in (dict(replications=0), dict(size=0.0), dict(size=1.0), dict(control_window=0),
                dict(scheme="pairs")):
        with pytest.raises(ValueError):
            BootstrapConfig(**bad)
    cfg = BootstrapConfig()
    assert (cfg.replications, cfg.size, cfg.control_window, cfg.min_window) == (499, 0.05, 90, 90)
    assert cfg.world_length(1) == 180
    assert cfg.resolved_scheme(False) == "iid-residual"
    assert cfg.resolved_scheme(True) == "wild-rademacher"


def test_null_model_restriction():
    y = var1(200, 1, b=0.4)
    nf = fit_null_model(y, 2, (0, 150))
    assert nf.restricted and np.all(nf.coefficients[0, [2, 4]] == 0)
    full = fit(y, 2, (0, 150))
    assert np.allclose(nf.coefficients[1], full.coefficients[1], rtol=1e-12, atol=1e-14)
    X = full.regressors[:, [0, 1, 3]]
    beta = np.linalg.solve(X.T @ X, X.T @ full.responses[:, 0])
    assert np.allclose(nf.coefficients[0, [0, 1, 3]], beta, rtol=1e-10)
    assert np.allclose(nf.residuals[:, 0], full.responses[:, 0] - X @ beta, atol=1e-12)


def _implied_innovations(nf, path):
    p = nf.lag_order
    out = []
    for t in range(p, path.shape[0]):
        x = [1.0] + [v for i in range(1, p + 1) for v in path[t - i]]
        out.append(path[t] - nf.coefficients @ np.array(x))
    return np.array(out)


def test_replication_starts_from_data_and_uses_residual_rows():
    y = var1(150, 2)
    nf = fit_null_model(y, 2, (10, 149))
    path, redraws = generate_replication(nf, 60, "iid-residual", rng.stream(1, "t"))
    assert redraws == 0 and path.shape == (60, 2)
    assert np.array_equal(path[:2], y[10:12])
    e = _implied_innovations(nf, path)
    d = np.abs(e[:, None, :] - nf.residuals[None]).max(axis=2).min(axis=1)
    assert d.max() < 1e-9


def test_wild_keeps_residual_positions():
    y = var1(150, 3)
    nf = fit_null_model(y, 1)
    path, _ = generate_replication(nf, 100, "wild-rademacher", rng.stream(2, "t"))
    e = _implied_innovations(nf, path)
    ratio = e / nf.residuals[:99]
    assert np.allclose(np.abs(ratio), 1.0, atol=1e-8)
    assert np.allclose(ratio[:, 0], ratio[:, 1], atol=1e-8)  # one sign per row
    assert len(set(np.sign(ratio[:, 0]))) == 2


def test_same_stream_same_replication():
    nf = fit_null_model(var1(150, 4), 1)
    a, _ = generate_replication(nf, 80, "iid-residual", rng.stream(9, "bootstrap", 3))
    b, _ = generate_replication(nf, 80, "iid-residual", rng.stream(9, "bootstrap", 3))
    c, _ = generate_replication(nf, 80, "iid-residual", rng.stream(9, "bootstrap", 4))
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def _explosive_fit():
    X = np.column_stack([np.ones(50), np.random.default_rng(0).standard_normal((50, 2))])
    B = np.array([[0.0, 1.5, 0.0], [0.0, 0.0, 1.5]])
    E = np.random.default_rng(1).standard_normal((50, 2))
    return VarFit(B, E, X, np.eye(2), (0, 50), 1, restricted=True)


def test_explosive_paths_give_up():
    with pytest.raises(BootstrapError, match="redraws"):
        generate_replication(_explosive_fit(), 200, "iid-residual", rng.stream(0, "x"),
                             max_redraws=5)


def test_explosive_budget_aborts(monkeypatch):
    import tvgc.bootstrap as bs
    monkeypatch.setattr(bs, "fit_null_model", lambda *a, **k: _explosive_fit())
    with pytest.raises(BootstrapError, match="explosive"):
        bootstrap_maxima(var1(200, 0), 1, False, BootstrapConfig(**SMALL, seed=1), ("rolling",))


def test_flat_sequence_matches_statistic_domain():
    y = var1(200, 5)
    cv = critical_values(y, 1, "rolling", False, BootstrapConfig(**SMALL))
    seq = statistic_sequences(y, 1, min_window=40)["rolling"]
    assert np.array_equal(cv.index, seq.index)
    assert np.all(cv.values == cv.value) and cv.value > 0
    assert cv.replications_used == 60 and cv.quantile == 0.95 and cv.scheme == "iid-residual"


def test_seed_determinism_and_sensitivity():
    y = var1(200, 6)
    a = critical_values(y, 1, "recursive-evolving", True, BootstrapConfig(**SMALL, seed=5))
    b = critical_values(y, 1, "recursive-evolving", True, BootstrapConfig(**SMALL, seed=5))
    c = critical_values(y, 1, "recursive-evolving", True, BootstrapConfig(**SMALL, seed=6))
    assert np.array_equal(a.maxima, b.maxima) and not np.array_equal(a.maxima, c.maxima)


def test_worker_count_does_not_change_results():
    y = var1(200, 7)
    one = critical_value_sequences(y, 1, False, BootstrapConfig(**{**SMALL, "replications": 120}),
                                   ("rolling", "recursive-evolving"))
    two = critical_value_sequences(y, 1, False, BootstrapConfig(**{**SMALL, "replications": 120}, workers=2),
                                   ("rolling", "recursive-evolving"))
    for a in one:
        assert np.array_equal(one[a].maxima, two[a].maxima)


def test_shared_replications_order_maxima():
    y = var1(200, 8)
    cvs = critical_value_sequences(y, 1, False, BootstrapConfig(**SMALL),
                                   ("forward", "rolling", "recursive-evolving"))
    assert np.all(cvs["recursive-evolving"].maxima >= cvs["rolling"].maxima)
    assert np.all(cvs["recursive-evolving"].maxima >= cvs["forward"].maxima)


def test_mismatched_scheme_warns():
    with pytest.warns(UserWarning, match="wild-rademacher bootstrap paired with the homoskedastic"):
        critical_values(var1(200, 9), 1, "rolling", False,
                        BootstrapConfig(**SMALL, scheme="wild-rademacher"))


def test_too_short_for_bootstrap_world():
    with pytest.raises(DataError, match="bootstrap needs at least 180"):
        critical_values(var1(150, 0), 1, "rolling", False)


def test_unknown_algorithm():
    with pytest.raises(ValueError):
        critical_values(var1(200, 0), 1, "bogus", False)
