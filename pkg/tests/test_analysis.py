import math

import pandas as pd
import pytest

from Diamond.analysis import (
    GAP_TABLE,
    analyze,
    classify_region,
    gap_formula,
    lemma_margins,
    linear_gap_family,
    mdf_gap_lower_bound,
    mdf_gap_study,
    report_row,
    report_violations,
    reports_to_frame,
    run_verification,
    sample_gains,
    sweep,
    symmetry_label,
    write_csv,
)
from Diamond.bounds import BoundId
from Diamond.channel import ChannelGains, derive
from Diamond.schemes import SchemeId
from Diamond.settings import CSV_COLUMNS, LARGE_GAP_FAMILY, THEOREM_GAP
from Diamond.utilities.errors import StructuralError

REGION_CHANNELS = {
    "A1": (3, 1, 255, 1),
    "A2": (1, 3, 15, 15),
    "A3": (15, 63, 63, 63),
    "C1": (255, 3, 3, 1),
    "C2": (15, 15, 2.5, 63),
    "C3": (3, 3, 1, 3),
    "C4": (255, 255, 15, 63),
}

MIRROR = {"A": "B", "B": "A", "C": "D", "D": "C"}


def _mirror(gains):
    g01, g02, g13, g23 = gains
    return (g02, g01, g23, g13)


@pytest.mark.parametrize("label, gains", sorted(REGION_CHANNELS.items()))
def test_classify_region(caps_for, label, gains):
    region = classify_region(caps_for(*gains))
    assert region.label == label
    assert region.condition == GAP_TABLE[label].condition


@pytest.mark.parametrize("label, gains", sorted(REGION_CHANNELS.items()))
def test_classify_mirrored_region(caps_for, label, gains):
    expected = MIRROR[label[0]] + label[1]
    assert classify_region(caps_for(*_mirror(gains))).label == expected


def test_zero_band_joins_first_rows(caps_for):
    assert classify_region(caps_for(3, 3, 3, 3)).label == "A1"
    assert classify_region(caps_for(15, 15, 3, 3)).label == "C1"


def test_gap_table_is_mirror_consistent():
    assert len(GAP_TABLE) == 14
    for label, spec in GAP_TABLE.items():
        if label[0] in MIRROR:
            twin = GAP_TABLE[MIRROR[label[0]] + label[1]]
            assert twin.scheme is spec.scheme
            assert twin.guarantee is spec.guarantee
            assert twin.mdf_guarantee is spec.mdf_guarantee


def test_symmetric_channel_report():
    report = analyze(ChannelGains(3, 3, 3, 3))
    assert report.region.label == "A1"
    assert report.achievable.scheme is SchemeId.MDF
    assert report.upper.bound is BoundId.UP1
    assert report.achievable.rate == pytest.approx(1.0)
    assert report.lp_optimum == pytest.approx(1.0)
    assert report.measured_gap == pytest.approx(0.0, abs=1e-12)
    assert report.gap_formula_value == pytest.approx(0.0, abs=1e-12)
    assert report.certificate.passed
    assert report_violations(report) == []


@pytest.mark.parametrize("label, gains", sorted(REGION_CHANNELS.items()))
def test_region_reports_hold(label, gains):
    for channel in (gains, _mirror(gains)):
        report = analyze(ChannelGains(*channel))
        assert report_violations(report) == []
        assert report.measured_gap <= THEOREM_GAP + 1e-7


def test_scheme_follows_table():
    a3 = analyze(ChannelGains(*REGION_CHANNELS["A3"]))
    assert a3.achievable.scheme is SchemeId.MDF_BC
    assert a3.mdf_mac is None
    c4 = analyze(ChannelGains(*REGION_CHANNELS["C4"]))
    assert c4.achievable.scheme is SchemeId.MDF_MAC
    assert c4.mdf_bc is None


def test_random_channels_have_no_violations(random_channels):
    regions = set()
    for gains in random_channels:
        report = analyze(gains)
        assert report_violations(report) == [], gains.as_tuple()
        regions.add(report.region.label)
    assert len(regions) >= 6


def test_gap_is_swap_symmetric(random_channels):
    for gains in random_channels[:60]:
        report = analyze(gains)
        mirror = analyze(gains.swapped())
        assert mirror.region.label == MIRROR[report.region.label[0]] + report.region.label[1]
        assert mirror.measured_gap == pytest.approx(report.measured_gap, abs=1e-7)
        assert mirror.lp_optimum == pytest.approx(report.lp_optimum, abs=1e-7)


def test_gap_formula_rejects_wrong_region(caps_for):
    a3 = classify_region(caps_for(*REGION_CHANNELS["A3"]))
    with pytest.raises(StructuralError):
        gap_formula(caps_for(*REGION_CHANNELS["C4"]), a3)


def test_lemma_margins_nonnegative(random_channels):
    for gains in random_channels[:100]:
        for name, margin in lemma_margins(derive(gains)).items():
            assert margin >= -1e-7, name


def test_large_mdf_gap_witness():
    x, alpha, beta = LARGE_GAP_FAMILY
    gains = linear_gap_family(x, alpha, beta)
    caps = derive(gains)
    study = mdf_gap_study(caps, gains)
    assert study.mdf_gap > 1.0
    assert study.mdf_gap >= mdf_gap_lower_bound(x, alpha, beta)
    assert study.mdf_gap == pytest.approx(study.mdf_gap_formula, abs=1e-6)
    assert study.enhanced_gap <= THEOREM_GAP + 1e-7
    assert study.enhanced_scheme is SchemeId.MDF_BC
    assert list(study.table()["scheme"]) == [SchemeId.MDF.value, SchemeId.MDF_BC.value]


def test_mdf_gap_grows_with_x():
    _, alpha, beta = LARGE_GAP_FAMILY
    gaps = [mdf_gap_study(derive(linear_gap_family(x, alpha, beta))).mdf_gap for x in (5.0, 10.0, 20.0, 40.0)]
    assert gaps == sorted(gaps)


def test_symmetry_labels(caps_for):
    assert symmetry_label(caps_for(3, 3, 3, 3)) == "symmetric"
    assert symmetry_label(caps_for(3, 3, 15, 63)) == "partially symmetric"
    assert symmetry_label(caps_for(1, 3, 15, 15)) == "general"


def test_sample_gains_are_reproducible():
    assert sample_gains(7, 3) == sample_gains(7, 3)
    assert sample_gains(7, 3) != sample_gains(7, 4)
    gains = sample_gains(7, 3, 0.5, 2.0)
    assert all(0.5 <= g <= 2.0 for g in gains.as_tuple())


def test_sweep_independent_of_workers():
    single = sweep(12, seed=5, workers=1)
    pooled = sweep(12, seed=5, workers=2)
    pd.testing.assert_frame_equal(single.frame, pooled.frame)
    assert single.summary.as_dict() == pooled.summary.as_dict()
    assert single.summary.violations == 0
    assert single.summary.evaluated == 12
    assert sum(single.summary.region_counts.values()) == 12


def test_sweep_rejects_bad_ranges():
    with pytest.raises(StructuralError):
        sweep(0, seed=1)
    with pytest.raises(StructuralError):
        sweep(5, seed=1, gain_min=10.0, gain_max=1.0)
    with pytest.raises(StructuralError):
        sweep(5, seed=1, gain_min=0.0, gain_max=1.0)


def test_csv_keeps_full_precision(tmp_path):
    reports = [analyze(sample_gains(2, i)) for i in range(5)]
    frame = reports_to_frame(reports)
    assert list(frame.columns) == CSV_COLUMNS
    path = tmp_path / "rates.csv"
    write_csv(frame, str(path))
    back = pd.read_csv(path, float_precision="round_trip")
    for column in ("g01", "achievable", "upper", "gap"):
        assert list(back[column]) == list(frame[column])
    assert report_row(reports[0])["region"] == reports[0].region.label


def test_verification_suite_passes():
    table = run_verification(count=30, seed=3, lp_every=5, delta0_count=20)
    assert list(table.columns) == ["check", "evaluated", "violations", "worst_margin"]
    assert int(table["violations"].sum()) == 0, table[table["violations"] > 0]
    checks = set(table["check"])
    assert {"theorem gap", "strong duality", "delta0 mdf = cut-set", "large mdf gap witness"} <= checks


def test_verification_with_average_power():
    table = run_verification(count=3, seed=4, avg_power=True, avg_count=2, schedule_resolution=8,
                             power_resolution=8, delta0_count=3)
    assert int(table["violations"].sum()) == 0
    slack = table.set_index("check").loc["average power slack"]
    assert slack["evaluated"] == 2
    assert math.isfinite(slack["worst_margin"])
