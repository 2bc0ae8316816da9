import numpy as np
import pytest

from levylibor.black import black_price, black_spot_jet
from levylibor.derivs import caplet_u0_jet, caplet_variance, v_jet, vbar_jet
from levylibor.expansion import caplet_implied_vol, price_caplet
from levylibor.levy import PAPER_CASES, LevyMeasure, paper_case
from levylibor.market import MarketModel, TenorStructure, paper_market

from oracles import richardson_partial

# order 0 / 1 / 2 ATM caplet prices for the four CGMY scenarios
ATM_TABLE = {
    1: (0.008684, 0.008677, 0.008677),
    2: (0.006392, 0.006361, 0.006351),
    3: (0.003281, 0.003241, 0.003172),
    4: (0.007112, 0.006799, 0.006556),
}


def random_model(case, n=5, seed=0, c=0.0):
    rng = np.random.default_rng(seed)
    tenor = TenorStructure(tuple(5.0 + np.arange(n + 1)))
    mu = LevyMeasure.cgmy(*PAPER_CASES[case], c=c)
    return MarketModel(tenor, rng.uniform(0.03, 0.08, n), 0.75, rng.uniform(0.5, 1.5, size=(n, n, 1)), mu)


@pytest.mark.parametrize("case", [1, 2, 3, 4])
def test_atm_table(case):
    br = price_caplet(paper_market(paper_case(case)), 1, 0.06)
    for order, ref in enumerate(ATM_TABLE[case]):
        assert br.total(order=order) == pytest.approx(ref, abs=2e-6)


def test_u0_value_and_structure():
    model = paper_market(paper_case(1))
    u0 = caplet_u0_jet(model, 1, 0.06, 0.0, model.libors)
    V = caplet_variance(model, 1, 0.0)
    assert u0.value == pytest.approx(black_price(V, 0.06, 0.06) * 1.06**4, rel=1e-14)
    u0k2 = caplet_u0_jet(model, 2, 0.06, 0.0, model.libors)
    assert u0k2.partial([0]) == 0.0
    assert u0k2.partial([3, 3]) == 0.0
    assert model.bonds()[-1] * u0.value == pytest.approx(0.008684, abs=1e-6)


def test_v_and_vbar_against_fd():
    model = random_model(2, n=3, seed=4)
    x = model.libors
    K, k = 0.05, 1
    V = caplet_variance(model, k, 0.0)
    u0 = caplet_u0_jet(model, k, K, 0.0, x)
    acc = model.accruals

    def v_direct(y):
        # x_1^2 x_2 d^3 u0 / dx_1^2 dx_2 with u0 = P_BS(V, x_1, K)(1 + d2 x_2)(1 + d3 x_3)
        return y[0] ** 2 * y[1] * black_spot_jet(V, y[0], K, 2)[2] * acc[1] * (1 + acc[2] * y[2])

    def vbar_direct(y):
        w = lambda j: acc[j] * y[j] / (1 + acc[j] * y[j])
        du = black_spot_jet(V, y[0], K, 1)[1] * (1 + acc[1] * y[1]) * (1 + acc[2] * y[2])
        return y[0] * w(1) * w(2) * du

    vj = v_jet(0, 0, 1, u0, x)
    vb = vbar_jet(0, 1, 2, u0, x, acc)
    assert vj.value == pytest.approx(v_direct(x), rel=1e-12)
    assert vb.value == pytest.approx(vbar_direct(x), rel=1e-12)
    for alpha in [(1, 0, 0), (0, 0, 1), (2, 0, 0), (1, 1, 1)]:
        idx = [i for i, m in enumerate(alpha) for _ in range(m)]
        h = 0.1 * np.asarray(x)
        assert vj.partial(idx) == pytest.approx(richardson_partial(v_direct, x, alpha, h, 3), rel=1e-5)
        assert vb.partial(idx) == pytest.approx(richardson_partial(vbar_direct, x, alpha, h, 3), rel=1e-5)
    assert v_jet(0, 1, 2, caplet_u0_jet(model, 2, K, 0.0, x), x).value == 0.0
    x0 = np.array(x, dtype=float)
    x0[2] = 0.0
    assert vbar_jet(0, 1, 2, caplet_u0_jet(model, 1, K, 0.0, x0), x0, acc).value == 0.0


@pytest.mark.parametrize("K", [0.03, 0.06, 0.09])
def test_gaussian_limit_has_no_corrections(K):
    jumpy = paper_market(paper_case(2))
    m2 = paper_case(2).raw_moment(2)
    gauss = jumpy.with_measure(LevyMeasure.gaussian(m2))
    br = price_caplet(gauss, 1, K)
    assert br.P1 == 0.0 and br.P2 == 0.0
    ref = gauss.bonds()[1] * black_price(5 * m2, 0.06, K)
    assert br.P0 == pytest.approx(ref, rel=1e-12)


def test_alpha_polynomial_structure():
    model = paper_market(paper_case(4))
    full = price_caplet(model, 1, 0.06)
    for a in (0.0, 0.3, 0.7):
        br = price_caplet(model, 1, 0.06, alpha=a)
        assert br.total() == pytest.approx(full.P0 + a * full.P1 + a * a * full.P2, rel=1e-14)
    assert price_caplet(model, 1, 0.06, alpha=0.0).total() == full.P0


def test_prices_decrease_with_strike():
    model = paper_market(paper_case(3))
    totals = [price_caplet(model, 1, K).total() for K in np.arange(0.03, 0.0901, 0.01)]
    assert all(a > b for a, b in zip(totals, totals[1:]))


def test_zero_strike_is_a_tradable_so_corrections_vanish():
    # x_k prod_{j>k}(1 + delta_j x_j) is a bond-price ratio, hence a Q^{T_n} martingale
    model = random_model(4, seed=9, c=0.01)
    for k in (1, 2, 3):
        br = price_caplet(model, k, 0.0)
        assert abs(br.P1) < 1e-15 and abs(br.P2) < 1e-15
        assert br.P0 == pytest.approx(model.bonds()[k] * model.accruals[k - 1] * model.libors[k - 1], rel=1e-13)


def test_verbatim_e4_breaks_the_zero_strike_identity():
    model = random_model(4, seed=9)
    assert abs(price_caplet(model, 2, 0.0, e4_repeat_j=True).P2) > 1e-9


def test_restricted_and_full_index_sums_agree():
    model = random_model(3, n=3, seed=2, c=0.005)
    for k in (1, 2):
        a = price_caplet(model, k, 0.05)
        b = price_caplet(model, k, 0.05, full_indices=True)
        assert b.P1 == pytest.approx(a.P1, rel=1e-12)
        assert b.P2 == pytest.approx(a.P2, rel=1e-12)


def test_single_rate_first_order_term():
    tenor = TenorStructure((2.0, 3.0))
    mu = paper_case(4)
    model = MarketModel(tenor, [0.05], 0.9, 1.0, mu)
    br = price_caplet(model, 1, 0.05)
    u0 = caplet_u0_jet(model, 1, 0.05, 0.0, model.libors)
    expected = u0.partial([0, 0, 0]) * 0.05**3 / 6 * 2.0 * mu.raw_moment(3)
    assert br.P1 == pytest.approx(model.bonds()[-1] * expected, rel=1e-12)
    assert br.diagnostics["E2"] == 0.0 and br.diagnostics["E4"] == 0.0


def test_implied_vol_of_case1_prices():
    model = paper_market(paper_case(1))
    br = price_caplet(model, 1, 0.06)
    iv2 = caplet_implied_vol(model, 1, 0.06, br.total())
    iv0 = caplet_implied_vol(model, 1, 0.06, br.P0)
    assert iv0 == pytest.approx(np.sqrt(paper_case(1).raw_moment(2)), abs=1e-9)
    assert iv2 == pytest.approx(0.2326, abs=5e-5)
    assert iv2 < iv0


def test_input_validation():
    model = paper_market(paper_case(1))
    with pytest.raises(ValueError):
        price_caplet(model, 6, 0.06)
    with pytest.raises(ValueError):
        price_caplet(model, 1, 0.06, order=3)
    with pytest.raises(ValueError):
        price_caplet(model, 1, 0.06, alpha=1.5)
    with pytest.raises(ValueError):
        price_caplet(model, 1, 0.06, t=1.0)
