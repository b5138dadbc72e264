import numpy as np
import pytest
from scipy import stats

from rcslab.circuits import Topology, generate_random_circuit
from rcslab.errors import UnachievableTargetError
from rcslab.simcore import set_max_qubits
from rcslab.spoof import coin_toss_sampler, spoof_weight, targeted_spoofer, verification_cost_probe
from rcslab.xeb import exact_xeb, ideal_table, linear_xeb, score_samples


def test_coin_toss_single_qubit_is_fair():
    s = coin_toss_sampler(1, 100_000, seed=3)
    heads = s.bitstrings.mean()
    assert abs(heads - 0.5) < 3 * np.sqrt(0.25 / 100_000)


def test_coin_toss_is_uniform_over_outcomes():
    s = coin_toss_sampler(4, 160_000, seed=0)
    assert stats.chisquare(np.bincount(s.bitstrings, minlength=16)).pvalue > 1e-4


def test_coin_toss_reproducible():
    a = coin_toss_sampler(10, 50, seed=12)
    assert a.bitstrings.tobytes() == coin_toss_sampler(10, 50, seed=12).bitstrings.tobytes()
    assert a.bitstrings.tobytes() != coin_toss_sampler(10, 50, seed=13).bitstrings.tobytes()


@pytest.mark.parametrize("n,count", [(0, 5), (63, 5), (4, 0)])
def test_coin_toss_rejects_bad_arguments(n, count):
    with pytest.raises(ValueError):
        coin_toss_sampler(n, count, seed=0)


@pytest.mark.parametrize("seed", range(5))
def test_coin_toss_scores_zero(seed):
    c = generate_random_circuit(10, Topology.chain(10), 14, seed)
    est = linear_xeb(score_samples(c, coin_toss_sampler(10, 50_000, seed=100 + seed)))
    assert abs(est.f) < 3 * est.stderr


def test_target_zero_is_uniform(chain10):
    assert spoof_weight(ideal_table(chain10), 0.0) == 0.0
    s = targeted_spoofer(chain10, 0.0, 102_400, seed=1)
    assert stats.chisquare(np.bincount(s.bitstrings, minlength=1024)).pvalue > 1e-4


def test_target_above_ceiling_is_unachievable(chain10):
    ceiling = exact_xeb(ideal_table(chain10))
    with pytest.raises(UnachievableTargetError) as exc:
        targeted_spoofer(chain10, 1.2, 10, seed=0)
    assert exc.value.maximum == pytest.approx(ceiling)
    assert spoof_weight(ideal_table(chain10), ceiling) == 1.0


def test_negative_target_rejected(chain10):
    with pytest.raises(ValueError):
        spoof_weight(ideal_table(chain10), -0.1)


@pytest.mark.parametrize("target", [0.05, 0.3, 0.8])
def test_targeted_spoofer_converges(chain10, target):
    est = linear_xeb(score_samples(chain10, targeted_spoofer(chain10, target, 10**6, seed=6)))
    assert abs(est.f - target) < 3 * est.stderr


def test_cost_probe_rows_and_extrapolation():
    report = verification_cost_probe(range(10, 15), cycles=2, repetitions=1, n_samples=100)
    rows = report.measured()
    assert [r.n for r in rows] == list(range(10, 15))
    for a, b in zip(rows, rows[1:]):
        assert b.ratio_vs_prev == pytest.approx(b.median_seconds / a.median_seconds)
    assert "EXTRAPOLATION" in report.extrapolation["label"]
    assert report.extrapolation["n"] == 53
    assert report.extrapolation["statevector_bytes"] == 16 * 2**53
    assert report.csv_text().splitlines()[0] == "n,median_seconds,bytes,ratio_vs_prev"


def test_cost_probe_memory_doubles():
    report = verification_cost_probe(range(16, 20), cycles=1, repetitions=1, n_samples=100)
    rows = report.measured()
    for a, b in zip(rows, rows[1:]):
        assert 1.8 <= b.bytes / a.bytes <= 2.2


def test_cost_probe_reports_capacity_rows():
    previous = set_max_qubits(12)
    try:
        report = verification_cost_probe([11, 12, 13], cycles=1, repetitions=1, n_samples=10)
    finally:
        set_max_qubits(previous)
    last = report.rows[-1]
    assert last.median_seconds is None
    assert last.bytes == 16 * 2**13
    assert last.note.startswith("capacity")
    assert report.csv_text().splitlines()[-1] == f"13,,{16 * 2**13},"
