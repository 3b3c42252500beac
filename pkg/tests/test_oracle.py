import math

import numpy as np
import pytest
from scipy import stats

from skc import csi, oracle, rss
from skc.channel import ChannelParams
from skc.errors import NonFiniteLogDensity, TooFewSamples


def test_sampler_deterministic_and_prefix_stable():
    pr = ChannelParams(1, 0.5, 0.5, 0.5, 0.6 + 0.3j)
    a = oracle.sample(pr, 70_000, 3)
    b = oracle.sample(pr, 70_000, 3)
    assert np.array_equal(a.triples, b.triples)
    short = oracle.sample(pr, 100, 3)
    assert np.array_equal(short.triples, a.triples[:100])
    assert not np.array_equal(oracle.sample(pr, 100, 4).triples, short.triples)


def test_full_correlation_without_noise_gives_equal_envelopes():
    b = oracle.sample(ChannelParams(1, 0, 0, 0, np.exp(0.7j)), 1000, 0)
    np.testing.assert_allclose(b.envelope("A"), b.envelope("E"), rtol=1e-12)
    np.testing.assert_allclose(b.column("E"), b.column("A") * np.exp(-0.7j), rtol=1e-12)


def test_zero_correlation_sample_is_uncorrelated():
    n = 100_000
    b = oracle.sample(ChannelParams(1, 1, 1, 1, 0), n, 1)
    ha, he = b.column("A"), b.column("E")
    corr = np.mean(ha * np.conj(he)) / math.sqrt(np.mean(abs(ha) ** 2) * np.mean(abs(he) ** 2))
    assert abs(corr) <= 3 / math.sqrt(n)


@pytest.mark.slow
def test_empirical_covariance():
    b = oracle.sample(ChannelParams(1, 1, 1, 1, 0.9), 1_000_000, 0)
    ha, hb, he = (b.column(q) for q in "ABE")
    assert np.mean(ha * np.conj(he)) == pytest.approx(0.9, abs=0.005)
    assert np.mean(ha * np.conj(hb)) == pytest.approx(1.0, abs=0.005)
    assert np.mean(abs(ha) ** 2) == pytest.approx(2.0, abs=0.01)
    assert abs(np.mean(ha * hb)) < 0.005  # circular symmetry


def test_phases_uniform():
    b = oracle.sample(ChannelParams(1, 0.3, 0.3, 0.3, 0.8), 50_000, 2)
    for q in "ABE":
        assert stats.kstest(b.phase(q) / (2 * math.pi), "uniform").pvalue > 0.01


def test_eve_phase_independent_of_envelopes():
    b = oracle.sample(ChannelParams(1, 0.1, 0.1, 0.1, 0.9), 40_000, 5)
    x = np.column_stack([b.envelope("A"), b.envelope("E")])
    est = oracle.mi_knn(x, b.phase("E"), periodic_y=True)
    assert abs(est.value) <= max(3 * est.standard_error, 0.01)


def test_knn_independent_gaussians():
    rng = np.random.default_rng(0)
    est = oracle.mi_knn(rng.standard_normal(100_000), rng.standard_normal(100_000))
    assert abs(est.value) <= 0.01


def test_knn_correlated_gaussians():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(100_000)
    y = 0.9 * x + math.sqrt(1 - 0.81) * rng.standard_normal(100_000)
    est = oracle.mi_knn(x, y)
    assert est.value == pytest.approx(-0.5 * math.log2(1 - 0.81), abs=0.02)
    assert 0 < est.standard_error < 0.02


def test_knn_complex_views_at_0db():
    b = oracle.sample(ChannelParams(1, 1, 1, 1, 0.9), 100_000, 0)
    est = oracle.mi_knn(b.complex_view("A"), b.complex_view("B"))
    assert est.value == pytest.approx(0.415, abs=0.02)


def test_knn_periodic_phases():
    rng = np.random.default_rng(2)
    t = rng.uniform(0, 2 * math.pi, 50_000)
    # phase difference concentrated: strong dependence, wrap-around must not matter
    u = np.mod(t + rng.vonmises(0, 4.0, t.size), 2 * math.pi)
    shifted = np.mod(u + math.pi, 2 * math.pi)
    a = oracle.mi_knn(t, u, periodic_x=True, periodic_y=True).value
    b = oracle.mi_knn(t, shifted, periodic_x=True, periodic_y=True).value
    ref = (math.log(2 * math.pi) - stats.vonmises(4.0).entropy()) / math.log(2)
    assert a == pytest.approx(b, abs=1e-5)
    assert a == pytest.approx(ref, abs=0.03)


def test_knn_input_checks():
    with pytest.raises(TooFewSamples):
        oracle.mi_knn(np.zeros(39), np.zeros(39))
    with pytest.raises(ValueError):
        oracle.mi_knn(np.zeros(100), np.zeros(99))
    with pytest.raises(ValueError):
        oracle.mi_knn(np.zeros((100, 2)), np.zeros(100), periodic_x=True)
    est = oracle.mi_knn(np.arange(50.0), np.arange(50.0) ** 2)
    assert math.isnan(est.standard_error)


def test_knn_error_shrinks_with_n():
    pr = ChannelParams.from_snr_db(5, rho=0.6)
    ref = csi.mi_ab(pr)
    errs = {n: [] for n in (4_000, 32_000)}
    for seed in range(10):
        b = oracle.sample(pr, 32_000, seed)
        for n in errs:
            est = oracle.mi_knn(b.complex_view("A")[:n], b.complex_view("B")[:n], batches=1)
            errs[n].append(abs(est.value - ref))
    assert np.median(errs[32_000]) < np.median(errs[4_000])


def test_resubstitution_rayleigh():
    b = oracle.sample(ChannelParams(1, 1, 1, 1, 0.9), 100_000, 7)
    est = oracle.entropy_resub(rss.log_rayleigh_pdf(2.0, b.envelope("A")))
    assert est.value == pytest.approx(rss.rayleigh_entropy(2.0), abs=3 * est.standard_error)


def test_resubstitution_pair_and_triple(fig2_0db):
    b = oracle.sample(fig2_0db, 100_000, 8)
    env = b.envelopes
    est = oracle.entropy_resub(rss.log_pdf2(fig2_0db, "AB", env[:, 0], env[:, 1]))
    quad = rss.joint_entropy(fig2_0db, "AB")
    assert abs(est.value - quad.value) <= 3 * math.hypot(est.standard_error, quad.error_estimate)
    est = oracle.entropy_resub(rss.log_pdf3(fig2_0db, env[:, 0], env[:, 1], env[:, 2]))
    quad = rss.joint_entropy(fig2_0db, "ABE")
    assert abs(est.value - quad.value) <= 3 * math.hypot(est.standard_error, quad.error_estimate)


def test_resubstitution_rejects_non_finite():
    with pytest.raises(NonFiniteLogDensity):
        oracle.entropy_resub([0.0, -math.inf])


def test_validate_point_zero_correlation():
    rep = oracle.validate_point(ChannelParams.from_snr_db(0, rho=0.0), 30_000, 11)
    assert rep.passed, [c for c in rep.checks if not c.passed]
    for name in ("csi_mi_ae", "csi_mi_be"):
        assert rep.by_name(name).reference == 0.0
        assert abs(rep.by_name(name).estimate) < 0.02
    d = rep.as_dict()
    assert d["passed"] and len(d["checks"]) == len(rep.checks) == 15


def test_validate_point_deterministic():
    pr = ChannelParams.from_snr_db(3, rho=0.5)
    a = oracle.validate_point(pr, 5_000, 1).as_dict()
    b = oracle.validate_point(pr, 5_000, 1).as_dict()
    assert a == b


def test_check_distance():
    c = oracle.Check("x", "equal", 1.5, 1.0, 0.25, False)
    assert c.distance == pytest.approx(2.0)
    assert oracle.Check("x", "equal", 1.0, 1.0, 0.0, True).distance == math.inf
