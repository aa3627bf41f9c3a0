import math

import numpy as np
import pytest

from racbox.capacity import (AwgnBpsk, HardBits, PackedPrecision, Qubits,
                             awgn_hard_decision_score, bpsk_mutual_information,
                             capacity_certificate, gaussian_cdf, run_awgn_bpsk_probe,
                             run_hard_copy_probe, run_packed_precision_probe)
from racbox.info import binary_entropy
from racbox.rng import substream


def test_certificates():
    assert capacity_certificate(HardBits(1)) == 1.0
    assert capacity_certificate(HardBits(0)) == 0.0
    assert capacity_certificate(PackedPrecision(2, 4)) == 8.0
    assert capacity_certificate(AwgnBpsk(2, 1.0)) == pytest.approx(1.0)
    assert capacity_certificate(AwgnBpsk(4, 3.0)) == pytest.approx(4.0)
    assert capacity_certificate(Qubits(3)) == 3.0
    with pytest.raises(ValueError):
        HardBits(-1)
    with pytest.raises(ValueError):
        AwgnBpsk(1, -0.5)


def test_gaussian_cdf_reference():
    assert gaussian_cdf(0.0) == 0.5
    assert gaussian_cdf(1.0) == pytest.approx(0.8413447460685429, abs=1e-15)
    assert gaussian_cdf(-1.0) == pytest.approx(1.0 - gaussian_cdf(1.0), abs=1e-15)


def test_hard_copy_probe():
    for m in (0, 3, 8):
        res = run_hard_copy_probe(8, m, 100_000, seed=50 + m)
        assert res.counted_capacity == float(m)
        assert res.interval[0] <= res.observed_score <= res.interval[1] + 1e-9
        assert res.observed_score == pytest.approx(m, abs=0.05)
        assert res.interval[0] <= m <= res.interval[1] or res.observed_score == m
    with pytest.raises(ValueError):
        run_hard_copy_probe(8, 9, 10, seed=1)


def test_packed_precision_probe():
    res = run_packed_precision_probe(8, 1, 8, 50_000, seed=60)
    assert res.counted_capacity == 8.0
    assert res.observed_score == pytest.approx(8.0, abs=1e-9)  # deterministic round trip
    assert res.corrected_capacity == 8.0
    res = run_packed_precision_probe(8, 2, 2, 50_000, seed=61)
    assert res.observed_score == pytest.approx(4.0, abs=0.05)
    res = run_packed_precision_probe(8, 1, 0, 50_000, seed=62)
    assert res.observed_score == pytest.approx(0.0, abs=0.01)


def test_awgn_probe_matches_analytics():
    episodes = 160_000
    for snr in (0.5, 1.0, 4.0):
        res = run_awgn_bpsk_probe(8, 2, snr, episodes, seed=63)
        analytic = awgn_hard_decision_score(2, snr)
        # certificate is strictly above the hard-decision score
        assert res.observed_score < res.counted_capacity
        p = gaussian_cdf(math.sqrt(snr))
        slope = abs(math.log2(p / (1 - p)))
        sigma = math.sqrt(2 * slope * slope * p * (1 - p) / (episodes / 8))
        assert abs(res.observed_score - analytic) <= 3 * sigma + 1e-6


def test_awgn_probe_snr_extremes():
    res = run_awgn_bpsk_probe(8, 2, 0.0, 60_000, seed=64)
    assert res.observed_score == pytest.approx(0.0, abs=0.01)
    res = run_awgn_bpsk_probe(8, 2, 1e6, 60_000, seed=65)
    assert res.observed_score == pytest.approx(2.0, abs=0.01)


def test_awgn_example_point():
    # snr=1, d=2: flip probability 1 - Phi(1), observed near 0.737, counted 1.0
    analytic = awgn_hard_decision_score(2, 1.0)
    assert analytic == pytest.approx(2 * (1 - binary_entropy(0.8413447460685429)), abs=1e-12)
    assert analytic == pytest.approx(0.737, abs=2e-3)
    res = run_awgn_bpsk_probe(8, 2, 1.0, 200_000, seed=66)
    assert res.observed_score < 1.0


def test_bpsk_mutual_information_limits():
    assert bpsk_mutual_information(0.0) == 0.0
    assert bpsk_mutual_information(1e9) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        bpsk_mutual_information(-1.0)
    with pytest.raises(ValueError):
        bpsk_mutual_information(1.0, order=10)


def test_bpsk_mutual_information_monotone_and_bounded():
    grid = [0.0, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0]
    vals = [bpsk_mutual_information(s) for s in grid]
    assert all(a < b or (a == b == 0.0) for a, b in zip(vals, vals[1:]))
    for s, v in zip(grid, vals):
        assert v <= min(1.0, 0.5 * math.log2(1.0 + s)) + 1e-12


def test_bpsk_mutual_information_adaptive_quadrature_oracle():
    # independent oracle: adaptive quadrature of the defining integral
    integrate = pytest.importorskip("scipy.integrate")
    for snr in (0.25, 1.0, 4.0):
        a = math.sqrt(snr)

        def integrand(z):
            return (math.exp(-z * z / 2.0) / math.sqrt(2.0 * math.pi)
                    * np.logaddexp(0.0, -2.0 * a * a - 2.0 * a * z) / math.log(2.0))

        expectation, err = integrate.quad(integrand, -40.0, 40.0, limit=200)
        assert err < 1e-7
        assert bpsk_mutual_information(snr) == pytest.approx(1.0 - expectation, abs=1e-7)


def test_bpsk_mutual_information_monte_carlo_oracle():
    # independent check of the quadrature by direct sampling at snr = 1
    snr = 1.0
    a = math.sqrt(snr)
    rng = substream(67)
    z = rng.standard_normal(10_000_000)
    mc = 1.0 - np.logaddexp(0.0, -2 * a * a - 2 * a * z).mean() / math.log(2.0)
    assert bpsk_mutual_information(snr) == pytest.approx(mc, abs=1e-3)


def test_bpsk_beats_hard_decision():
    for snr in (0.25, 1.0, 4.0):
        assert bpsk_mutual_information(snr) >= awgn_hard_decision_score(1, snr) - 1e-12


def test_accounting_law_observed_below_corrected():
    # every probe's observed score is within falling distance of its
    # corrected capacity: observed <= corrected + 3 * CI half-width
    probes = [run_hard_copy_probe(8, 3, 50_000, seed=70),
              run_packed_precision_probe(8, 1, 8, 50_000, seed=71),
              run_awgn_bpsk_probe(8, 2, 1.0, 50_000, seed=72)]
    for res in probes:
        half = (res.interval[1] - res.interval[0]) / 2.0
        assert res.observed_score <= res.corrected_capacity + 3.0 * half + 1e-9
