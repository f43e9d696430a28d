import numpy as np
import pytest

from mcctm.preprocess import (EventSpan, FilterSpec, SensorSession, apply_filters, butterworth_highpass,
                              extract_event_windows, fingerprint, moving_average, read_session,
                              select_channels, slide_windows, window_length, write_session)

FS = 50.0


def session(x, fs=FS, names=None, ann=()):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    names = names or [f"c{i}" for i in range(x.shape[1])]
    return SensorSession(x, fs, names, list(ann))


def analytic_gain(f, fc=1.5, order=2):
    return 1.0 / np.sqrt(1.0 + (fc / f) ** (2 * order))


def steady_amplitude(f, seconds=40.0):
    t = np.arange(int(seconds * FS)) / FS
    y = butterworth_highpass(session(np.sin(2 * np.pi * f * t))).samples[:, 0]
    tail = y[len(y) // 2:]
    return (tail.max() - tail.min()) / 2


def test_session_validation():
    with pytest.raises(ValueError):
        SensorSession(np.zeros((0, 1)), FS, ["x"])
    with pytest.raises(ValueError):
        SensorSession(np.zeros((5, 2)), FS, ["x"])
    with pytest.raises(ValueError):
        SensorSession(np.zeros((5, 1)), 0, ["x"])
    with pytest.raises(ValueError):
        session(np.zeros(50), ann=[EventSpan(0.5, 2.0)])
    with pytest.raises(ValueError):
        EventSpan(1.0, 0.5)


def test_moving_average_cases():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(30, 2))
    assert np.array_equal(moving_average(session(x), 1).samples, x)
    assert np.allclose(moving_average(session(np.full(20, 3.0)), 7).samples, 3.0)
    ramp = moving_average(session(np.arange(10.0)), 10).samples[:, 0]
    assert ramp[-1] == 4.5
    assert ramp[0] == 0.0 and ramp[3] == 1.5
    with pytest.raises(ValueError):
        moving_average(session(np.zeros(5)), 6)


def test_moving_average_matches_loop():
    rng = np.random.default_rng(1)
    x = rng.normal(size=40)
    got = moving_average(session(x), 10).samples[:, 0]
    want = [np.mean(x[max(0, t - 9):t + 1]) for t in range(40)]
    assert np.allclose(got, want, atol=1e-12)


def test_highpass_dc_rejection():
    y = butterworth_highpass(session(np.ones(int(4 * FS)))).samples[:, 0]
    assert abs(y[-1]) < 0.01


@pytest.mark.parametrize("f", [0.75, 1.5, 3.0, 10.0, 20.0])
def test_highpass_matches_analytic_magnitude(f):
    db = 20 * np.log10(steady_amplitude(f) / analytic_gain(f))
    assert abs(db) <= 1.0


def test_highpass_stopband():
    assert 20 * np.log10(steady_amplitude(0.2, seconds=120)) <= -30


def test_highpass_infeasible_cutoff():
    with pytest.raises(ValueError):
        butterworth_highpass(session(np.zeros(100)), FilterSpec(highpass_cutoff_hz=25.0))
    with pytest.raises(ValueError):
        FilterSpec(highpass_order=0)


def test_filters_preserve_length():
    x = np.random.default_rng(2).normal(size=(123, 3))
    assert apply_filters(session(x)).samples.shape == (123, 3)


def test_select_channels():
    x = np.random.default_rng(3).normal(size=(10, 3))
    s = session(x, names=["x", "y", "z"])
    assert np.array_equal(select_channels(s, ["x", "y", "z"]).samples, x)
    xy = select_channels(s, ["x", "y"])
    assert xy.samples.shape == (10, 2) and xy.channel_names == ["x", "y"]
    yx = select_channels(s, ["y", "x"])
    assert np.array_equal(yx.samples[:, 0], x[:, 1]) and np.array_equal(yx.samples[:, 1], x[:, 0])
    with pytest.raises(KeyError):
        select_channels(s, ["w"])


def test_window_length():
    assert window_length(0.4, 50) == 20
    with pytest.raises(ValueError):
        window_length(0.41, 50)


def test_extract_event_windows():
    x = np.arange(500.0)
    s = session(x, ann=[EventSpan(5.0, 5.0), EventSpan(0.05, 0.05), EventSpan(9.99, 10.0), EventSpan(2, 3, "other")])
    assert extract_event_windows(session(x), "event", 0.4) == []
    mid, start, end = extract_event_windows(s, "event", 0.4)
    assert mid.shape == (20, 1)
    assert mid[0, 0] == 240 and mid[-1, 0] == 259
    assert start[0, 0] == 0
    assert end[-1, 0] == 499
    with pytest.raises(ValueError):
        extract_event_windows(session(np.zeros(10), ann=[EventSpan(0, 0.1)]), "event", 0.4)


def test_slide_windows_counts():
    s = session(np.zeros(500))
    assert len(slide_windows(s, 0.4, 0.1)) == 97
    assert len(slide_windows(s, 0.4, 0.02)) == 481
    assert len(slide_windows(session(np.zeros(20)), 0.4, 0.1)) == 1
    starts = [i for i, _ in slide_windows(s, 0.4, 0.1)]
    assert set(np.diff(starts)) == {5} and starts[-1] + 20 <= 500
    with pytest.raises(ValueError):
        slide_windows(session(np.zeros(10)), 0.4, 0.1)
    with pytest.raises(ValueError):
        slide_windows(s, 0.4, 0)


def test_session_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    s = session(rng.normal(size=(60, 2)), names=["x", "y"], ann=[EventSpan(0.2, 0.3)])
    write_session(tmp_path / "s.csv", s, tmp_path / "a.csv")
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "t,x,y"
    back = read_session(tmp_path / "s.csv", tmp_path / "a.csv")
    assert back.sample_rate_hz == FS
    assert np.array_equal(back.samples, s.samples)
    assert back.annotations == s.annotations


def test_read_session_rejects_jitter(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("t,x\n0,1\n0.02,1\n0.04,1\n0.07,1\n")
    with pytest.raises(ValueError):
        read_session(p)
    p.write_text("time,x\n0,1\n")
    with pytest.raises(ValueError):
        read_session(p)


def test_fingerprint_stable_and_sensitive():
    a = fingerprint({"b": 1, "a": [1, 2]})
    assert a == fingerprint({"a": [1, 2], "b": 1})
    assert a != fingerprint({"a": [1, 2], "b": 2})
    assert a.startswith("sha256:")
