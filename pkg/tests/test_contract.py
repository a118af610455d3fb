import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nasco.contract import (
    TimingTrace,
    TolcContract,
    ViolationKind,
    admissible_windows,
    check_trace,
    read_trace_csv,
    validate_parameters,
    write_trace_csv,
    write_violations_csv,
)
from nasco.errors import InvalidContract, MalformedTrace
from nasco.simulator import run

from _support import inject, make_scenario

MS = 1e-3
C = TolcContract(h=10 * MS, tau=2 * MS, j_h=1 * MS, j_tau=1 * MS)


def test_validate_examples():
    assert validate_parameters(C) == []
    v = validate_parameters(TolcContract(4 * MS, 2 * MS, 1 * MS, 1 * MS))
    assert [x.name for x in v] == ["j_h+tau+j_tau<h"]
    v = validate_parameters(TolcContract(10 * MS, 2 * MS, 1 * MS, 3 * MS))
    assert [x.name for x in v] == ["j_tau<=tau"]
    v = validate_parameters(TolcContract(10 * MS, 2 * MS, 0.0, 1 * MS))
    assert [x.name for x in v] == ["positivity"]


def test_windows():
    w = admissible_windows(C, 3)
    assert w.sampling == pytest.approx((30 * MS, 31 * MS))
    assert w.actuation(30.5 * MS) == pytest.approx((31.5 * MS, 33.5 * MS))
    assert w.state_update_deadline == pytest.approx(40 * MS)
    assert admissible_windows(C, 0).sampling == (0.0, 1 * MS)
    with pytest.raises(InvalidContract):
        admissible_windows(TolcContract(4, 2, 1, 1), 0)


def trace_ms(rows):
    return TimingTrace.from_records([(k, s * MS, a * MS, u * MS) for k, s, a, u in rows])


GOOD = [(0, 0.5, 2.7, 3.0), (1, 10.2, 12.1, 12.4)]


def test_check_trace_examples():
    assert check_trace(C, trace_ms(GOOD)).satisfied

    v = check_trace(C, trace_ms([GOOD[0], (1, 11.5, 13.4, 13.7)])).violations
    assert [(x.k, x.kind) for x in v] == [(1, ViolationKind.SAMPLING)]
    assert v[0].allowed == pytest.approx((10 * MS, 11 * MS))

    v = check_trace(C, trace_ms([(0, 0.5, 3.6, 3.0), GOOD[1]])).violations
    assert [(x.k, x.kind) for x in v] == [(0, ViolationKind.ACTUATION)]
    assert v[0].allowed == pytest.approx((1.5 * MS, 3.5 * MS))


def test_state_update_deadline_batch_and_streaming():
    tr = trace_ms([(0, 0.5, 2.7, 10.3), (1, 10.4, 12.1, 12.4)])
    # realised next sample at 10.4 ms: fine in batch mode, late for the (k+1)h bound
    assert check_trace(C, tr).satisfied
    v = check_trace(C, tr, streaming=True).violations
    assert [(x.k, x.kind) for x in v] == [(0, ViolationKind.STATE_UPDATE)]
    # last record uses (k+1)h
    tr = trace_ms([(0, 0.5, 2.7, 10.0)])
    assert [x.kind for x in check_trace(C, tr).violations] == [ViolationKind.STATE_UPDATE]


def test_all_violations_reported():
    tr = trace_ms([(k, 10 * k + 5.0, 10 * k + 7.0, 10 * k + 7.5) for k in range(6)])
    v = check_trace(C, tr).violations
    assert [x.k for x in v] == list(range(6))
    assert all(x.kind is ViolationKind.SAMPLING for x in v)


def test_malformed_traces():
    with pytest.raises(MalformedTrace):
        check_trace(C, trace_ms([(0, 0.5, 2.7, 3.0), (2, 10.2, 12.1, 12.4)]))
    with pytest.raises(MalformedTrace):
        check_trace(C, trace_ms([(0, 0.5, 0.4, 3.0)]))
    with pytest.raises(InvalidContract):
        check_trace(TolcContract(4, 2, 1, 1), trace_ms(GOOD))


def test_trace_csv_round_trip(tmp_path):
    tr = trace_ms(GOOD)
    p = tmp_path / "t.csv"
    write_trace_csv(tr, p)
    assert p.read_text().splitlines()[0] == "k,t_s,t_a,t_u"
    assert read_trace_csv(p) == tr
    buf = io.StringIO()
    write_trace_csv(tr, buf)
    assert buf.getvalue() == p.read_text()


def test_trace_csv_rejects_garbage(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("k,t_s,t_a\n0,0,0\n")
    with pytest.raises(MalformedTrace):
        read_trace_csv(p)
    p.write_text("k,t_s,t_a,t_u\n0,zero,0,0\n")
    with pytest.raises(MalformedTrace):
        read_trace_csv(p)


def test_violations_csv(tmp_path):
    v = check_trace(C, trace_ms([GOOD[0], (1, 11.5, 13.4, 13.7)]))
    p = tmp_path / "v.csv"
    write_violations_csv(v, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "k,kind,observed,allowed_lo,allowed_hi"
    assert lines[1].startswith("1,SamplingWindow,")


positive = st.floats(1e-4, 10.0)


@settings(max_examples=200, deadline=None)
@given(positive, positive, positive, positive, st.floats(1.0, 3.0), st.floats(1.0, 3.0), st.randoms())
def test_monotone_in_jitter_bounds(h, tau, jh, jt, gh, gt, rnd):
    c = TolcContract(h, tau, jh, jt)
    c2 = TolcContract(h, tau, jh * gh, jt * gt)
    if validate_parameters(c) or validate_parameters(c2):
        return
    n = 5
    ts = [k * h + rnd.uniform(0, jh) for k in range(n)]
    ta = [s + tau + rnd.uniform(-jt, jt) for s in ts]
    tu = [s + rnd.uniform(0, h - jh) * 0.999 for s in ts]
    tr = TimingTrace(range(n), ts, ta, tu)
    if check_trace(c, tr).satisfied:
        assert check_trace(c2, tr).satisfied


def test_order_independent_and_deterministic():
    tr = trace_ms([(k, 10 * k + (k % 3) * 0.7, 10 * k + 2.5 + (k % 5) * 0.4, 10 * k + 3.0) for k in range(30)])
    a = check_trace(C, tr)
    assert a == check_trace(C, tr)
    # per-record checks do not depend on evaluation order: chunked checks agree
    halves = []
    for lo, hi in ((0, 16), (15, 30)):
        sub = TimingTrace(np.arange(hi - lo), tr.t_s[lo:hi] - lo * C.h, tr.t_a[lo:hi] - lo * C.h, tr.t_u[lo:hi] - lo * C.h)
        part = check_trace(C, sub).violations
        halves += [(x.k + lo, x.kind) for x in part if x.k + lo < hi - 1 or hi == 30]
    assert sorted(set(halves)) == sorted((x.k, x.kind) for x in a.violations)


def test_simulated_traces_pass_and_injections_are_caught():
    rng = np.random.default_rng(9)
    for seed in range(50):
        sc = make_scenario(duration=15.0, seed=seed)
        res = run(sc)
        assert res.verdict.satisfied
        bad, k, kind = inject(res.trace, sc.contract, rng)
        v = check_trace(sc.contract, bad).violations
        assert [(x.k, x.kind) for x in v] == [(k, kind)]


@pytest.mark.slow
def test_soundness_over_random_contracts():
    from dataclasses import replace

    from nasco import DelayDistribution, HardwareJitter, MarkovDelayModel, SoftwareJitter

    rng = np.random.default_rng(10_000)
    base = make_scenario()
    for seed in range(10_000):
        h = rng.uniform(0.01, 2.0)
        tau, j_h, j_tau = h * rng.dirichlet([2, 1, 1, 1])[:3]
        j_tau = min(j_tau, tau)
        contract = TolcContract(h, tau, j_h, j_tau)
        assert validate_parameters(contract) == []
        # execution never exceeds tau, so t_u stays ahead of the next sample;
        # latency is clamped into the actuation window
        sc = replace(
            base,
            contract=contract,
            software=SoftwareJitter(tau / 2, rng.uniform(0, tau / 2)),
            hardware=HardwareJitter(rng.uniform(0, tau)),
            network=MarkovDelayModel.low_high(
                [[0.5, 0.5], [0.5, 0.5]], DelayDistribution.uniform(0.0, tau), DelayDistribution.point(tau)
            ),
            duration=10 * h,
            seed=seed,
        )
        res = run(sc)
        assert res.verdict.satisfied, (seed, res.verdict.violations[:1])
