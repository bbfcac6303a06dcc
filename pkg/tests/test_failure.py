import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lsnsim.constellation import ONEWEB, ShellConfig, Topology, build_constellation
from lsnsim.failure import FailureConfig, always_available, is_available, schedule_failures


@pytest.fixture(scope="module")
def topo():
    return build_constellation(ShellConfig(6, 10, 1000.0, 70.0))


def test_zero_ratio_always_available(topo):
    sched = schedule_failures(topo, FailureConfig(0.0, seed=3))
    assert not sched.affected.any()
    for t in np.linspace(0, 1000, 37):
        assert sched.mask(t).all()


def test_full_ratio_zero_duty_never_available(topo):
    sched = schedule_failures(topo, FailureConfig(1.0, seed=3, down_range=(1.0, 1.0)))
    for t in np.linspace(0, 1000, 37):
        assert not sched.mask(t).any()


def test_seeded_schedules_identical(topo):
    a = schedule_failures(topo, FailureConfig(0.3, seed=9))
    b = schedule_failures(topo, FailureConfig(0.3, seed=9))
    assert a.to_records() == b.to_records()
    c = schedule_failures(topo, FailureConfig(0.3, seed=10))
    assert a.to_records() != c.to_records()


def test_square_wave_definition():
    topo = Topology.from_edges(2, [(0, 1)])
    sched = schedule_failures(topo, FailureConfig(1.0, period=100.0, seed=0, down_range=(0.5, 0.5)))
    object.__setattr__(sched, "phase", np.zeros(1))
    assert is_available(sched, 0, 25.0)
    assert not is_available(sched, 0, 75.0)
    assert is_available(sched, (1, 0), 125.0)


def test_unknown_edge_rejected(topo):
    sched = always_available(topo)
    with pytest.raises(KeyError):
        is_available(sched, topo.n_edges, 0.0)
    with pytest.raises(KeyError):
        is_available(sched, (0, 999), 0.0)


@given(st.floats(0, 1))
def test_affected_count_is_exact(ratio):
    topo = build_constellation(ONEWEB)
    sched = schedule_failures(topo, FailureConfig(ratio, seed=1))
    assert sched.affected.sum() == math.floor(ratio * topo.n_edges + 0.5)


def _available_measure(sched, i, t0, t1):
    """Exact measure of availability on [t0, t1] by integrating between switch points."""
    p, ph, d = sched.period[i], sched.phase[i], sched.duty[i]
    cuts = {t0, t1}
    k = math.floor((t0 - ph) / p) - 1
    while ph + k * p <= t1:
        for c in (ph + k * p, ph + (k + d) * p):
            if t0 < c < t1:
                cuts.add(c)
        k += 1
    cuts = sorted(cuts)
    return sum(b - a for a, b in zip(cuts, cuts[1:]) if is_available(sched, i, (a + b) / 2))


@given(st.integers(0, 2**31), st.floats(1, 500), st.integers(1, 4), st.floats(0, 1000))
def test_time_average_equals_duty(seed, period, k, t0):
    topo = Topology.from_edges(3, [(0, 1), (1, 2)])
    sched = schedule_failures(topo, FailureConfig(1.0, period=period, seed=seed))
    for i in range(2):
        frac = _available_measure(sched, i, t0, t0 + k * period) / (k * period)
        assert frac == pytest.approx(sched.duty[i], abs=1e-9)
        assert 0.3 <= 1 - sched.duty[i] <= 0.7


def test_phase_in_range(topo):
    sched = schedule_failures(topo, FailureConfig(0.5, period=200.0, seed=4))
    assert ((sched.phase >= 0) & (sched.phase < 200.0)).all()
    assert (sched.duty[~sched.affected] == 1.0).all()


def test_dump_roundtrip(tmp_path, topo):
    sched = schedule_failures(topo, FailureConfig(0.2, seed=5))
    path = tmp_path / "sched.json"
    sched.dump(path)

    rows = json.loads(path.read_text())
    assert len(rows) == topo.n_edges
    assert sum(r["affected"] for r in rows) == sched.affected.sum()


@pytest.mark.parametrize("kw", [{"failure_ratio": 1.5}, {"period": 0.0}, {"down_range": (0.8, 0.2)}])
def test_config_rejects(kw):
    with pytest.raises(ValueError):
        FailureConfig(**kw)
