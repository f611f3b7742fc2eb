import numpy as np
import pytest

from Diamond.analysis import analyze
from Diamond.channel import ChannelGains
from Diamond.gdof import (
    GdofExponents,
    asymptotic_capacities,
    gains_at_power,
    gdof_closed_forms,
    gdof_numeric,
    multiplexing_gain,
)
from Diamond.lp import cutset_optimum
from Diamond.settings import GDOF_TOLERANCE
from Diamond.utilities.errors import ChannelDomainError, StructuralError

SWAP_PAIRS = [("up1", "up2"), ("up3", "up4"), ("mdf1", "mdf2"), ("mdf3", "mdf4"),
              ("mdf_bc1", "mdf_bc2"), ("mdf_mac1", "mdf_mac2")]


def test_unit_exponents():
    report = gdof_closed_forms(GdofExponents(1, 1, 1, 1))
    for key, value in report.values.items():
        assert value == pytest.approx(1.0), key
    assert report.upper == pytest.approx(1.0)
    assert report.achievable == pytest.approx(1.0)
    assert report.mdf == pytest.approx(1.0)


def test_broadcast_closes_the_gap():
    report = gdof_closed_forms(GdofExponents(2, 1, 1, 2))
    assert report.upper_key == "up2"
    assert report.achievable_key == "mdf_bc2"
    assert report.upper == pytest.approx(4.0 / 3.0)
    assert report.achievable == pytest.approx(report.upper)


def test_silent_source():
    report = gdof_closed_forms(GdofExponents(0, 0, 1, 1))
    assert report.upper == pytest.approx(0.0, abs=1e-12)
    assert report.achievable == pytest.approx(0.0, abs=1e-12)
    assert report.mdf == pytest.approx(0.0, abs=1e-12)


def test_mdf_strictly_suboptimal():
    report = gdof_closed_forms(GdofExponents(1.5, 1, 2, 2))
    assert report.upper_key == "up2"
    assert report.upper == pytest.approx(4.0 / 3.0)
    assert report.upper - report.mdf > 0.01
    assert not report.mdf_optimal


def test_closed_form_identities(rng):
    for alphas in rng.uniform(0.1, 3.0, size=(200, 4)):
        exponents = GdofExponents(*alphas)
        report = gdof_closed_forms(exponents)
        mirror = gdof_closed_forms(GdofExponents(alphas[1], alphas[0], alphas[3], alphas[2]))
        for left, right in SWAP_PAIRS:
            assert report.values[left] == pytest.approx(mirror.values[right], abs=1e-12)
        assert report.values["mdf_mac1"] == pytest.approx(report.values["up3"], abs=1e-12)
        assert report.upper >= report.achievable - 1e-9
        assert report.upper >= report.mdf - 1e-9
        assert cutset_optimum(asymptotic_capacities(exponents)).objective_value <= report.upper + 1e-7


def test_as_dict():
    payload = gdof_closed_forms(GdofExponents(2, 1, 1, 2)).as_dict()
    assert payload["alphas"] == {"a01": 2.0, "a02": 1.0, "a13": 1.0, "a23": 2.0}
    assert payload["upper"] == payload["values"]["up2"]
    assert set(payload) >= {"upper_key", "achievable_key", "mdf", "mdf_optimal"}


@pytest.mark.parametrize("alphas", [(1, 1, 1, 1), (2, 1, 1, 2), (0, 0, 0, 0)])
def test_numeric_convergence(alphas):
    exponents = GdofExponents(*alphas)
    expected = gdof_closed_forms(exponents)
    table = gdof_numeric(exponents)
    assert list(table.columns) == ["P", "region", "achievable_ratio", "mdf_ratio", "lp_ratio", "upper_ratio"]
    final = table.iloc[-1]
    assert final["upper_ratio"] == pytest.approx(expected.upper, abs=GDOF_TOLERANCE)
    assert final["achievable_ratio"] == pytest.approx(expected.achievable, abs=GDOF_TOLERANCE)
    assert np.all(table["achievable_ratio"] <= table["upper_ratio"] + 1e-9)


def test_gains_at_power_match_capacities():
    gains = gains_at_power(GdofExponents(2, 1, 0, 0.5), 1e4)
    assert gains.g01 == pytest.approx(1e8 - 1.0)
    assert gains.g02 == pytest.approx(1e4 - 1.0)
    assert gains.g13 == 0.0
    assert gains.g23 == pytest.approx(99.0)


def test_multiplexing_gain():
    grid = [10.0 ** k for k in range(2, 13)]
    assert multiplexing_gain(lambda snr: ChannelGains(snr, snr, snr, snr), grid) == pytest.approx(1.0, abs=0.01)
    constant = [10.0 ** k for k in range(2, 31)]
    assert multiplexing_gain(lambda snr: ChannelGains(3, 3, 3, 3), constant) < 0.05


def test_rejects_bad_inputs():
    with pytest.raises(ChannelDomainError):
        GdofExponents(-1, 1, 1, 1)
    with pytest.raises(ChannelDomainError):
        GdofExponents(float("nan"), 1, 1, 1)
    with pytest.raises(ChannelDomainError):
        gains_at_power(GdofExponents(400, 1, 1, 1), 1e12)
    with pytest.raises(ChannelDomainError):
        gdof_numeric(GdofExponents(1, 1, 1, 1), [10.0, 1e3])
    with pytest.raises(StructuralError):
        gdof_numeric(GdofExponents(1, 1, 1, 1), [1e4, 1e3])
    with pytest.raises(StructuralError):
        gdof_numeric(GdofExponents(1, 1, 1, 1), [])


@pytest.mark.parametrize("power", [1e6, 1e7, 1e8])
def test_high_power_channel_is_analyzed(power):
    report = analyze(gains_at_power(GdofExponents(2, 1, 1, 2), power))
    assert report.achievable.rate <= report.lp_optimum + 1e-7
    assert report.lp_optimum <= report.upper.value + 1e-7
    assert report.lp_optimum / (0.5 * np.log2(power)) == pytest.approx(4.0 / 3.0, abs=1e-6)
