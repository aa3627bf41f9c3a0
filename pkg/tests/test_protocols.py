import json
import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from racbox.boxes import AsymmetricCell, ExplicitCell, IsotropicCell, QuantumPhiCell
from racbox.protocols import (EpisodeOutcome, PyramidProtocol, Query, asym_path_success,
                              brute_force_one_bit_optimum,
                              classical_avg_success_closed_form, majority_average_success,
                              majority_decode, majority_encode, pyramid_monte_carlo,
                              pyramid_success_closed_form, query_path, run_copy_episode,
                              run_pyramid, run_seed, trace_json_line)
from racbox.rng import substream

CHI2_CRIT_DF3_ALPHA01 = 11.345  # chi-square critical value, df=3, alpha=0.01


def binom_3sigma(p, trials):
    return 3.0 * math.sqrt(p * (1.0 - p) / trials)


def test_query_path_is_msb_first():
    assert query_path(0, 3) == (0, 0, 0)
    assert query_path(5, 3) == (1, 0, 1)
    assert Query(index=6, depth=3).path == (1, 1, 0)
    with pytest.raises(ValueError):
        query_path(8, 3)


# ---------------------------------------------------------------------------
# Seed protocol
# ---------------------------------------------------------------------------


def test_seed_perfect_cell_never_errs():
    cell = IsotropicCell(1.0)
    rng = substream(1)
    for a0, a1, b in product((0, 1), repeat=3):
        out = run_seed(cell, a0, a1, b, rng)
        assert out.success
        assert out.path_errors == (0,)


def test_seed_success_rate_and_chsh_aggregate():
    # empirical P0, P1 near (1+E)/2 and 2(P0+P1) near the cell's CHSH value
    cell = IsotropicCell(0.75)
    rng = substream(2)
    trials = 200_000
    wins = {0: 0, 1: 0}
    counts = {0: 0, 1: 0}
    dbs = substream(3).integers(0, 2, size=(trials, 2))
    qs = substream(4).integers(0, 2, size=trials)
    for (a0, a1), b in zip(dbs, qs):
        out = run_seed(cell, int(a0), int(a1), int(b), rng)
        wins[out.query] += out.success
        counts[out.query] += 1
    p0 = wins[0] / counts[0]
    p1 = wins[1] / counts[1]
    assert abs(p0 - 0.875) <= binom_3sigma(0.875, counts[0])
    assert abs(p1 - 0.875) <= binom_3sigma(0.875, counts[1])
    assert 2.0 * (p0 + p1) == pytest.approx(3.5, abs=0.02)


def test_seed_chsh_identity_beyond_isotropy():
    # 2(P0 + P1) equals the cell's CHSH value for any no-signaling cell,
    # including the raw angle family whose win rate depends on the inputs
    cell = QuantumPhiCell(math.pi / 8, 1.0)
    from racbox.boxes import chsh_value
    target_s = chsh_value(cell.as_table())
    rng = substream(55)
    dbs = substream(56).integers(0, 2, size=(150_000, 2))
    qs = substream(57).integers(0, 2, size=150_000)
    wins = {0: 0, 1: 0}
    counts = {0: 0, 1: 0}
    for (a0, a1), b in zip(dbs, qs):
        out = run_seed(cell, int(a0), int(a1), int(b), rng)
        wins[out.query] += out.success
        counts[out.query] += 1
    s_hat = 2.0 * (wins[0] / counts[0] + wins[1] / counts[1])
    assert s_hat == pytest.approx(target_s, abs=0.02)


def test_batch_size_guard():
    proto = PyramidProtocol.uniform(20, IsotropicCell(0.5))
    with pytest.raises(ValueError):
        pyramid_monte_carlo(proto, 10_000_000, seed=1)


def test_seed_agrees_with_depth_one_pyramid():
    # the depth-1 pyramid is the seed protocol, message rule included
    cell = IsotropicCell(0.5)
    proto = PyramidProtocol.uniform(1, cell)
    for b in (0, 1):
        seed_out = run_seed(cell, 1, 0, b, substream(42))
        pyr_out = run_pyramid(proto, [1, 0], b, substream(42))
        assert seed_out == pyr_out


# ---------------------------------------------------------------------------
# Pyramid protocol
# ---------------------------------------------------------------------------


def test_pyramid_perfect_cells_all_queries_and_dbs():
    proto = PyramidProtocol.uniform(3, IsotropicCell(1.0))
    rng = substream(5)
    for word in range(256):
        db = [(word >> i) & 1 for i in range(8)]
        for q in range(8):
            out = run_pyramid(proto, db, q, rng)
            assert out.success
            assert out.path_errors == (0, 0, 0)


def test_pyramid_parity_identity_every_episode():
    proto = PyramidProtocol.uniform(3, IsotropicCell(0.4))
    rng = substream(6)
    db_rng = substream(7)
    for k in range(2000):
        db = db_rng.integers(0, 2, size=8)
        q = int(db_rng.integers(0, 8))
        out = run_pyramid(proto, db, q, rng)
        parity = sum(out.path_errors) % 2
        assert out.output == out.target ^ parity


def test_pyramid_shape_errors():
    proto = PyramidProtocol.uniform(2, IsotropicCell(0.5))
    with pytest.raises(ValueError):
        run_pyramid(proto, [0, 1, 0], 0, substream(0))
    with pytest.raises(ValueError):
        PyramidProtocol(depth=2, cells=(IsotropicCell(0.5),) * 2)


def test_message_independent_of_query():
    # identical generator state, different queries: byte-identical message
    proto = PyramidProtocol.uniform(4, IsotropicCell(0.6))
    db = substream(8).integers(0, 2, size=16)
    messages = {run_pyramid(proto, db, q, substream(99)).message for q in range(16)}
    assert len(messages) == 1


def test_monte_carlo_matches_closed_form():
    proto = PyramidProtocol.uniform(3, IsotropicCell(0.5))
    batch = pyramid_monte_carlo(proto, 200_000, seed=10)
    p = batch.success_count / 200_000
    target = pyramid_success_closed_form(3, 0.5)
    assert target == 0.5625
    assert abs(p - target) <= binom_3sigma(target, 200_000)
    assert batch.parity_identity_holds()


def test_monte_carlo_batch_is_reproducible_and_size_stable():
    proto = PyramidProtocol.uniform(2, IsotropicCell(0.7))
    a = pyramid_monte_carlo(proto, 5_000, seed=77)
    b = pyramid_monte_carlo(proto, 5_000, seed=77)
    assert np.array_equal(a.outputs, b.outputs)
    assert np.array_equal(a.path_errors, b.path_errors)
    # episode i does not depend on the batch size
    c = pyramid_monte_carlo(proto, 2_500, seed=77)
    assert np.array_equal(a.outputs[:2_500], c.outputs)


def test_monte_carlo_query_symmetry():
    proto = PyramidProtocol.uniform(3, IsotropicCell(0.5))
    batch = pyramid_monte_carlo(proto, 400_000, seed=11)
    wins, totals = batch.per_query_counts(8)
    target = pyramid_success_closed_form(3, 0.5)
    for k in range(8):
        assert abs(wins[k] / totals[k] - target) <= binom_3sigma(target, totals[k])


def test_monte_carlo_parity_law_distribution():
    # parity of recorded error bits is Bernoulli((1 - E^n)/2)
    proto = PyramidProtocol.uniform(4, IsotropicCell(0.6))
    batch = pyramid_monte_carlo(proto, 300_000, seed=12)
    odd = float((batch.path_errors.sum(axis=1) % 2).mean())
    target = (1.0 - 0.6 ** 4) / 2.0
    assert abs(odd - target) <= binom_3sigma(target, 300_000)


def test_monte_carlo_scalar_agreement():
    # batch and scalar runners implement the same protocol distribution
    proto = PyramidProtocol.uniform(2, AsymmetricCell(0.9, 0.3))
    batch = pyramid_monte_carlo(proto, 150_000, seed=13, query=3)
    p_batch = batch.success_count / 150_000
    rng = substream(14)
    db_rng = substream(15)
    wins = 0
    trials = 40_000
    for _ in range(trials):
        db = db_rng.integers(0, 2, size=4)
        wins += run_pyramid(proto, db, 3, rng).success
    p_scalar = wins / trials
    target = asym_path_success(0.9, 0.3, (1, 1))
    assert abs(p_batch - target) <= binom_3sigma(target, 150_000)
    assert abs(p_scalar - target) <= binom_3sigma(target, trials)


def test_error_bits_independent_of_inputs():
    # chi-square independence between the adaptively chosen cell inputs and
    # the error bit; the seed protocol exposes (s, t) = (a0 ^ a1, b) directly
    cell = IsotropicCell(0.5)
    rng = substream(17)
    dbs = substream(18).integers(0, 2, size=(80_000, 2))
    qs = substream(19).integers(0, 2, size=80_000)
    table = np.zeros((4, 2))
    for (a0, a1), b in zip(dbs, qs):
        out = run_seed(cell, int(a0), int(a1), int(b), rng)
        table[2 * (a0 ^ a1) + b, out.path_errors[0]] += 1
    total = table.sum()
    row = table.sum(axis=1, keepdims=True)
    col = table.sum(axis=0, keepdims=True)
    expected = row @ col / total
    chi2 = float(((table - expected) ** 2 / expected).sum())
    assert chi2 < CHI2_CRIT_DF3_ALPHA01


def test_quantum_cell_pyramid_monte_carlo():
    proto = PyramidProtocol.uniform(2, QuantumPhiCell(math.pi / 4, 1.0))
    batch = pyramid_monte_carlo(proto, 200_000, seed=20)
    # raw phi-family cells are asymmetric across inputs, but the pyramid's
    # success averages over the uniform message distribution; check range
    p = batch.success_count / 200_000
    assert 0.5 < p < 1.0
    assert batch.parity_identity_holds()


def test_explicit_cell_pyramid_runs():
    cell = ExplicitCell(IsotropicCell(0.8).as_table())
    proto = PyramidProtocol.uniform(2, cell)
    batch = pyramid_monte_carlo(proto, 100_000, seed=21)
    p = batch.success_count / 100_000
    target = pyramid_success_closed_form(2, 0.8)
    assert abs(p - target) <= binom_3sigma(target, 100_000)


def test_trace_json_line():
    out = EpisodeOutcome(query=3, target=1, output=0, message=1, path_errors=(1, 0))
    record = json.loads(trace_json_line(out, seed=42))
    assert record == {"seed": 42, "query": 3, "target": 1, "output": 0, "errors": [1, 0]}


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def test_pyramid_success_closed_form_values():
    assert pyramid_success_closed_form(4, 1.0) == 1.0
    assert pyramid_success_closed_form(1, 0.75) == 0.875
    assert pyramid_success_closed_form(10, 2 ** -0.5) == pytest.approx((1 + 2 ** -5) / 2)
    assert pyramid_success_closed_form(10, 2 ** -0.5) == pytest.approx(0.515625)


@given(st.integers(min_value=1, max_value=12), st.floats(min_value=0, max_value=1))
def test_asym_path_success_isotropic_reduction(n, bias):
    for path in ((0,) * n, (1,) * n, tuple(k % 2 for k in range(n))):
        assert asym_path_success(bias, bias, path) == pytest.approx(
            pyramid_success_closed_form(n, bias), abs=1e-12)


def test_asym_path_success_values():
    assert asym_path_success(1.0, 1.0, (0, 1, 1, 0)) == 1.0
    # each path bit selects the matching branch bias
    assert asym_path_success(0.9, 0.6, (0, 1, 0)) == pytest.approx((1 + 0.9 * 0.6 * 0.9) / 2)
    assert asym_path_success(0.9, 0.6, (0, 1, 0)) == pytest.approx(0.743)
    assert asym_path_success(0.9, 0.6, (1, 0, 1)) == pytest.approx((1 + 0.6 * 0.9 * 0.6) / 2)


# ---------------------------------------------------------------------------
# Majority benchmark
# ---------------------------------------------------------------------------


def test_majority_encode_reference():
    assert majority_encode([1, 1, 0]) == 1
    assert majority_encode([0, 0, 1]) == 0
    assert majority_encode([1, 0]) == 0  # tie breaks to 0
    assert majority_decode(1, 5) == 1


def test_majority_average_success_enumeration():
    assert majority_average_success(3) == pytest.approx(0.75, abs=0)
    assert majority_average_success(2) == pytest.approx(0.75, abs=0)
    for n in (2, 3, 4, 5):
        assert majority_average_success(n) == pytest.approx(
            classical_avg_success_closed_form(n), abs=1e-12)


def test_closed_form_matches_exhaustive_optimum():
    for n in (2, 3):
        assert brute_force_one_bit_optimum(n) == pytest.approx(
            classical_avg_success_closed_form(n), abs=1e-12)


def test_closed_form_large_n_asymptotics():
    p = classical_avg_success_closed_form(1024)
    assert p == pytest.approx(0.5 + 1.0 / math.sqrt(2 * math.pi * 1024), abs=1e-4)


def test_closed_form_overflow_guard():
    with pytest.raises(OverflowError):
        classical_avg_success_closed_form(2_000_000)


# ---------------------------------------------------------------------------
# Copy baseline
# ---------------------------------------------------------------------------


def test_copy_protocol_limits():
    rng = substream(22)
    db = [1, 0, 1, 1, 0, 0, 1, 0]
    for q in range(8):
        assert run_copy_episode(db, 8, q, rng).success
    outs = [run_copy_episode(db, 0, q, rng).output for q in range(8) for _ in range(200)]
    assert 0.4 < np.mean(outs) < 0.6


def test_copy_protocol_exact_below_m():
    rng = substream(23)
    db = [0, 1, 1, 0]
    for q in (0, 1, 2):
        out = run_copy_episode(db, 3, q, rng)
        assert out.output == db[q]
