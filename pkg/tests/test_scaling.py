import io
import math

import numpy as np
import pytest

from spinmetro.noise import NoiseModel
from spinmetro.protocols import OperatingPointError, Protocol, njz_precision
from spinmetro.scaling import (
    CSV_FIELDS,
    SweepResult,
    SweepRow,
    fit_exponent,
    geometric_grid,
    operating_gamma,
    read_csv,
    run_sweep,
)


def test_fit_exact_power_laws():
    ns = np.array([10, 30, 100, 300, 1000])
    slope, err = fit_exponent(list(zip(ns, 3.0 * ns**-1.5)))
    assert slope == pytest.approx(-1.5, abs=1e-12)
    assert err < 1e-12
    slope, _ = fit_exponent(list(zip(ns, 0.2 * ns ** (-7 / 6))))
    assert slope == pytest.approx(-7 / 6, abs=1e-12)


def test_fit_recovers_noisy_exponent():
    rng = np.random.default_rng(8)
    ns = np.geomspace(10, 1000, 8)
    hits = 0
    for _ in range(200):
        y = ns**-1.5 * np.exp(rng.normal(0, 0.05, size=8))
        slope, err = fit_exponent(list(zip(ns, y)))
        hits += abs(slope + 1.5) < 3 * err
    # 3-sigma coverage of a t distribution with 6 degrees of freedom is ~97.6%
    assert hits >= 185


def test_fit_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_exponent([(1, 1.0), (2, 0.5)])
    with pytest.raises(ValueError):
        fit_exponent([(1, 1.0), (2, 0.0), (3, 0.1)])


def test_geometric_grid():
    assert geometric_grid(10, 10_000, 4) == [10, 100, 1000, 10_000]
    even = geometric_grid(16, 1024, 7, even=True)
    assert all(n % 2 == 0 for n in even) and even[0] == 16 and even[-1] == 1024
    with pytest.raises(ValueError):
        geometric_grid(1, 3, 10)


def test_operating_points_are_mid_fringe():
    assert operating_gamma(Protocol.PRODUCT_NJZ, 100, 2.0) * 2.0 * 100 == pytest.approx(math.pi / 2)
    assert operating_gamma(Protocol.HALF_CAT_JZ2, 10, 1.0) * 100 / 4 == pytest.approx(math.pi / 2)
    assert operating_gamma(Protocol.PRODUCT_JZ2, 64, 1.0) * 64**2 == pytest.approx(0.1)


@pytest.mark.parametrize("kind,expected", [(Protocol.PRODUCT_NJZ, -1.5), (Protocol.HALF_CAT_JZ2, -2.0)])
def test_analytic_sweep_exact(kind, expected):
    res = run_sweep(kind, [10, 100, 1000, 10_000], analytic=True)
    assert res.exponent == pytest.approx(expected, abs=1e-12)
    fitted = np.log(res.delta_gamma[0]) + expected * np.log(res.n / res.n[0])
    assert np.max(np.abs(np.log(res.delta_gamma) - fitted)) < 1e-12
    assert all(r.repeats == 0 and r.stderr == 0 for r in res.rows)


def test_jz2_analytic_sweep():
    res = run_sweep(Protocol.PRODUCT_JZ2, [32, 64, 128, 256, 512], analytic=True)
    assert res.exponent == pytest.approx(-1.5, abs=0.05)


def test_grid_requirements():
    with pytest.raises(ValueError):
        run_sweep("njz", [10, 20, 40], analytic=True)
    with pytest.raises(ValueError):
        run_sweep("njz", [10, 20, 40, 80], analytic=True)
    with pytest.raises(ValueError):
        run_sweep("njz", [10, 100, 50, 1000], analytic=True)


def test_degenerate_operating_point_names_n():
    with pytest.raises(OperatingPointError, match="n=16"):
        run_sweep("jz2", [16, 32, 64, 160], analytic=True, beta=math.pi / 2)


def test_monte_carlo_agrees_with_analytic_and_is_monotone():
    ns = [16, 32, 64, 128, 256, 512, 1024]
    res = run_sweep("njz", ns, nu=10_000, repeats=200, seed=1)
    assert res.exponent == pytest.approx(-1.5, abs=0.1)
    for row in res.rows:
        assert abs(row.delta_gamma - njz_precision(row.n, row.t, row.nu)) < 3 * row.stderr
    assert np.all(np.diff(res.delta_gamma) < 0)


def test_reproducible_rows_and_csv():
    kw = dict(nu=1000, repeats=100, seed=7, noise=NoiseModel(dephasing_rate=0.1))
    a = run_sweep("njz", [10, 30, 100, 300], **kw)
    b = run_sweep("njz", [10, 30, 100, 300], **kw)
    assert a.rows == b.rows
    assert a.config_hash == b.config_hash
    assert a.to_csv() == b.to_csv()
    c = run_sweep("njz", [10, 30, 100, 300], **{**kw, "seed": 8})
    assert c.config_hash != a.config_hash and c.rows != a.rows


def test_parallel_sweep_matches_serial():
    kw = dict(nu=500, repeats=100, seed=2)
    serial = run_sweep("halfcat", [10, 30, 100, 300], **kw)
    parallel = run_sweep("halfcat", [10, 30, 100, 300], workers=2, **kw)
    assert serial.rows == parallel.rows


def test_csv_round_trip():
    res = run_sweep("halfcat", [10, 40, 160, 640], analytic=True)
    text = res.to_csv()
    assert text.splitlines()[0] == ",".join(CSV_FIELDS)
    assert text.splitlines()[0] == "protocol,n,t,gamma_true,nu,repeats,delta_gamma,stderr,seed"
    rows = read_csv(io.StringIO(text))
    assert rows == res.rows
    assert fit_exponent(rows)[0] == pytest.approx(-2.0, abs=1e-12)
    with pytest.raises(ValueError):
        read_csv(io.StringIO("n,delta_gamma\n1,2\n"))


def test_sweep_result_requires_sorted_rows():
    row = SweepRow("njz", 10, 1.0, 0.1, 1, 0, 0.03, 0.0, 0)
    with pytest.raises(ValueError):
        SweepResult([row, row._replace(n=5)], -1.5, 0.0)
