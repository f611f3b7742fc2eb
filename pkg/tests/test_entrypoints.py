import pytest

from Diamond.channel import ChannelGains
from Diamond.settings import CSV_COLUMNS
from entrypoints import analyze_channels, gdof_frame, sweep_frame


def test_analyze_channels_skips_invalid():
    df = analyze_channels([(3, 3, 3, 3), (-1, 1, 1, 1), ChannelGains(15, 3, 3, 15)])
    assert list(df.columns) == CSV_COLUMNS
    assert len(df) == 2
    assert list(df["region"]) == ["A1", "B2"]
    assert df["achievable"].iloc[1] == pytest.approx(4.0 / 3.0)


def test_analyze_channels_empty():
    df = analyze_channels([])
    assert df.empty
    assert list(df.columns) == CSV_COLUMNS


def test_sweep_frame():
    df = sweep_frame(4, seed=9)
    assert len(df) == 4
    assert (df["gap"] <= df["gap_guarantee"] + 1e-7).all()


def test_gdof_frame():
    df = gdof_frame((1, 1, 1, 1), [1e2, 1e4, 1e8])
    assert len(df) == 3
    assert df["gdof_upper"].tolist() == pytest.approx([1.0] * 3)
    assert df["upper_ratio"].iloc[-1] == pytest.approx(1.0, abs=0.05)
