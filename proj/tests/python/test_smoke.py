import math

import pytest

import pgsgan


def test_by_chance_constants():
    u = pgsgan.Policy.uniform()
    assert abs(u.nll(pgsgan.Order(1, 0, 0, 17, 4)) - math.log(12800)) < 1e-12
    assert abs(u.entropy_bits() - math.log2(12800)) < 1e-12
    assert abs(pgsgan.BY_CHANCE_NLL - 9.4572) < 1e-3
    assert abs(pgsgan.BY_CHANCE_ENTROPY - 13.6438) < 1e-3


def test_class_index_round_trip():
    assert pgsgan.NUM_CLASSES == 12800
    for k in (0, 1, 39, 40, 1599, 1600, 6400, 12799):
        assert pgsgan.Order.from_index(k).class_index() == k
    assert pgsgan.Order(1, 1, 1, 39, 39).class_index() == 12799
    with pytest.raises(Exception):
        pgsgan.Order.from_index(12800)


def test_discretize_buy_limit():
    o = pgsgan.discretize(1, 0, 0, price=995, volume=200, best_bid=1000, best_ask=1001, min_volume_unit=100)
    assert (o.side, o.action, o.is_mo, o.price_class, o.volume_class) == (1, 0, 0, 6, 2)
    mo = pgsgan.discretize(1, 0, 1, price=1234, volume=100, best_bid=1000, best_ask=1001, min_volume_unit=100)
    assert mo.price_class == 0


def test_policy_samples_are_valid_and_reproducible():
    logits = [0.5 * ((i * 37) % 11 - 5) for i in range(pgsgan.POLICY_LOGITS)]
    p = pgsgan.Policy.from_logits(logits)
    a = p.sample(2000, seed=3)
    assert all(o.valid() for o in a)
    assert a == p.sample(2000, seed=3)
    assert all(o.price_class == 0 for o in a if o.is_mo)
    probs = [p.probability(pgsgan.Order.from_index(k)) for k in range(pgsgan.NUM_CLASSES)]
    assert abs(sum(probs) - 1.0) < 1e-9
    h = -sum(q * math.log2(q) for q in probs if q > 0)
    assert abs(p.entropy_bits() - h) < 1e-9


def test_metrics():
    assert abs(pgsgan.kld_bits([0.5, 0.5], [0.25, 0.75]) - 0.20752) < 1e-4
    assert math.isinf(pgsgan.kld_bits([1.0, 0.0], [0.0, 1.0]))
    p = [0.0] * 12800
    q = [0.0] * 12800
    p[0] = q[1] = 1.0
    assert abs(pgsgan.mse(p, q) - 1.5625e-4) < 1e-12
    assert pgsgan.entropy_bits([0.25] * 4) == pytest.approx(2.0)


def test_rounding_baseline_output():
    o = pgsgan.round_to_discrete([0.5, 0.5, 0.5, 39.6, -0.2])
    assert (o.side, o.action, o.is_mo, o.price_class, o.volume_class) == (1, 1, 1, 0, 0)


def test_synthetic_market():
    g = pgsgan.synth_ground_truth()
    assert len(g) == pgsgan.NUM_CLASSES
    assert abs(sum(g) - 1.0) < 1e-9
    orders = pgsgan.synth_orders(5000, seed=2)
    assert len(orders) == 5000
    emp = pgsgan.empirical_distribution(orders)
    assert abs(sum(emp) - 1.0) < 1e-9


def test_cli(tmp_path):
    code, _, err = pgsgan.run_cli(["frobnicate"])
    assert code == 1 and err
    code, _, err = pgsgan.run_cli(
        ["synth", "--num_orders=200", "--seed=4", f"--output_dir={tmp_path}", "--name=orders"])
    assert code == 0, err
    rows = (tmp_path / "orders.csv").read_text().splitlines()
    assert len(rows) == 201
