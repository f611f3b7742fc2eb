import math
from decimal import Decimal, getcontext

import numpy as np
import pytest

from Diamond.channel import (
    ChannelGains,
    Sign,
    capacity_array,
    capacity_margins,
    capacity_of,
    classify_delta,
    classify_gamma,
    classify_gamma_prime,
    classify_sign,
    cut_matrix,
    derive,
    gain_for_capacity,
    guarded_ratio,
)
from Diamond.settings import DELTA_CEILING
from Diamond.utilities.errors import ChannelDomainError


def _decimal_capacity(gain: Decimal) -> Decimal:
    return (Decimal(1) + gain).ln() / Decimal(2).ln() / 2


@pytest.mark.parametrize("gain, expected", [(0.0, 0.0), (3.0, 1.0), (15.0, 2.0), (63.0, 3.0)])
def test_capacity_of_known_values(gain, expected):
    assert capacity_of(gain) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("bad", [-1.0, -1e-300, math.inf, math.nan, "abc"])
def test_capacity_of_rejects_invalid_gain(bad):
    with pytest.raises(ChannelDomainError):
        capacity_of(bad)


def test_capacity_array_matches_scalar():
    gains = [0.0, 0.5, 3.0, 1e4]
    assert np.allclose(capacity_array(gains), [capacity_of(g) for g in gains], rtol=0, atol=1e-15)


def test_gain_for_capacity_inverts_capacity_of():
    for c in (0.0, 0.3, 1.0, 4.5, 40.0):
        assert capacity_of(gain_for_capacity(c)) == pytest.approx(c, rel=1e-13, abs=1e-15)
    with pytest.raises(ChannelDomainError):
        gain_for_capacity(-0.1)
    with pytest.raises(ChannelDomainError):
        gain_for_capacity(1e6)


def test_gains_validate_on_construction():
    with pytest.raises(ChannelDomainError):
        ChannelGains(1.0, -2.0, 1.0, 1.0)
    with pytest.raises(ChannelDomainError):
        ChannelGains(1.0, 1.0, math.nan, 1.0)


def test_from_db_uses_power_convention():
    gains = ChannelGains.from_db(0.0, 10.0, 20.0, -10.0)
    assert gains.as_tuple() == pytest.approx((1.0, 10.0, 100.0, 0.1))
    with pytest.raises(ChannelDomainError):
        ChannelGains.from_db(0.0, 0.0, 0.0, 1e6)


def test_derive_symmetric_channel(caps_for):
    caps = caps_for(3, 3, 3, 3)
    assert caps.C01 == pytest.approx(1.0)
    assert caps.C012 == pytest.approx(0.5 * math.log2(7.0))
    assert caps.C123 == pytest.approx(0.5 * math.log2(13.0))
    assert caps.CMAC == pytest.approx(0.5 * math.log2(7.0))
    assert caps.Delta == pytest.approx(0.0, abs=1e-15)
    assert caps.delta == 0.0
    assert caps.zeta1 == pytest.approx(0.5 * math.log2(1.75))


def test_derive_matches_high_precision(random_channels):
    getcontext().prec = 50
    for gains in random_channels[:50]:
        caps = derive(gains)
        g01, g02, g13, g23 = (Decimal(repr(g)) for g in gains.as_tuple())
        coherent = (g13.sqrt() + g23.sqrt()) ** 2
        assert caps.C012 == pytest.approx(float(_decimal_capacity(g01 + g02)), rel=1e-14)
        assert caps.C123 == pytest.approx(float(_decimal_capacity(coherent)), rel=1e-14)
        assert caps.CMAC == pytest.approx(float(_decimal_capacity(g13 + g23)), rel=1e-14)


def test_delta_reaches_its_ceiling(caps_for):
    caps = caps_for(0.5, 0.5, 0.5, 0.5)
    assert caps.delta > 0.207
    assert caps.delta == pytest.approx(DELTA_CEILING, abs=1e-12)


def test_delta_never_exceeds_ceiling(random_channels):
    for gains in random_channels:
        assert derive(gains).delta <= DELTA_CEILING + 1e-12


def test_swap_relations(caps_for):
    caps = caps_for(15, 3, 7, 40)
    swapped = caps.swapped()
    assert swapped.swapped() == caps
    assert swapped.Gamma == -caps.Gamma
    assert swapped.GammaPrime == -caps.GammaPrime
    assert (swapped.zeta1, swapped.zeta2) == (caps.zeta2, caps.zeta1)
    assert swapped.Delta == caps.Delta
    direct = derive(ChannelGains(15, 3, 7, 40).swapped())
    assert direct.Gamma == pytest.approx(swapped.Gamma, abs=1e-12)
    assert direct.GammaPrime == pytest.approx(swapped.GammaPrime, abs=1e-12)


def test_sign_classification(caps_for):
    assert classify_delta(caps_for(3, 3, 3, 3)) is Sign.ZERO
    assert classify_gamma(caps_for(3, 3, 3, 3)) is Sign.ZERO
    assert classify_delta(caps_for(15, 15, 3, 3)) is Sign.POS
    assert classify_delta(caps_for(15, 63, 63, 63)) is Sign.NEG
    assert classify_gamma_prime(caps_for(15, 15, 3, 3)) is Sign.ZERO
    with pytest.raises(ChannelDomainError):
        classify_delta(caps_for(3, 3, 3, 3), tol=0.0)


def test_cut_matrix_is_symmetric(caps_for):
    K = cut_matrix(caps_for(2, 9, 0.4, 30))
    assert np.array_equal(K, K.T)
    assert K[3, 3] > 0 and K[0, 3] == 0.0


def test_capacity_orderings_hold(random_channels):
    for gains in random_channels:
        assert min(capacity_margins(derive(gains)).values()) >= -1e-15


def test_guarded_ratio():
    assert guarded_ratio(1.0, 4.0) == 0.25
    assert guarded_ratio(1.0, 1e-14) == 0.0


def test_capacity_is_increasing_and_concave(rng):
    gains = np.concatenate([[0.0], np.geomspace(1e-6, 1e6, 400)])
    values = np.array([capacity_of(g) for g in gains])
    assert np.all(np.diff(values) > 0.0)

    a, b = rng.uniform(0.0, 1e3, size=(2, 200))
    for x, y in zip(a, b):
        assert capacity_of((x + y) / 2.0) >= (capacity_of(x) + capacity_of(y)) / 2.0 - 1e-12


@pytest.mark.parametrize("g13, g23, coherent", [
    (0.5, 0.5, True),
    (1.0, 3.9, True),
    (0.01, 300.0, True),
    (4.0, 1.0, False),
    (5.0, 5.0, False),
    (255.0, 63.0, False),
])
def test_coherent_gain_needs_weak_relay_links(caps_for, g13, g23, coherent):
    delta = caps_for(3, 3, g13, g23).delta
    if coherent:
        assert delta > 0.0
    else:
        assert delta <= 1e-12


def test_coherent_gain_implies_small_product(random_channels):
    for gains in random_channels:
        if derive(gains).delta > 1e-12:
            assert gains.g13 * gains.g23 < 4.0


def test_classify_sign_band():
    assert classify_sign(1e-10, 1.0, 1e-9) is Sign.ZERO
    assert classify_sign(-1e-10, 1.0, 1e-9) is Sign.ZERO
    assert classify_sign(5e-9, 10.0, 1e-9) is Sign.ZERO
    assert classify_sign(2e-8, 10.0, 1e-9) is Sign.POS
    assert classify_sign(-2e-8, 10.0, 1e-9) is Sign.NEG


def test_cut_columns_follow_the_relay_that_stays_with_the_source(caps_for):
    caps = caps_for(2, 9, 0.4, 30)
    K = cut_matrix(caps)
    # forward I: relay 1 listens, relay 2 talks; cut {S, R2} sees both active links
    assert K[1, 1] == caps.C01 + caps.C23
    assert K[1, 2] == 0.0
    # forward II mirrors it on cut {S, R1}
    assert K[2, 2] == caps.C02 + caps.C13
    assert K[2, 1] == 0.0
