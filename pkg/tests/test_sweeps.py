from datetime import date, datetime

import pytest

from helpers import doc
from tweetsignal.labeler import BUY, SELL
from tweetsignal.select import RANKERS
from tweetsignal.sweeps import feature_sweep, peak_window, window_csv, window_sweep, WindowCell

SIZES = (5, 20, 100, 1000)


@pytest.fixture(scope="module")
def sweep(small_split):
    return feature_sweep(small_split.train, small_split.validation, sizes=SIZES)


def test_feature_sweep_grid_shape(sweep):
    grid = sweep.grid()
    assert len(grid) + len(sweep.skipped) * len(SIZES) == 2 * len(RANKERS) * len(SIZES)
    assert {(m, r) for m, r, _ in grid} == {(m, r) for m in ("mnb", "lr") for r in RANKERS}
    assert all(0.5 < acc <= 1.0 for acc in grid.values())


def test_feature_sweep_clamps_oversized_cells(sweep):
    big = [c for c in sweep.cells if c.size == 1000]
    assert big and all(c.effective_size < 1000 and "clamped" in c.note for c in big)
    assert all(c.note == "" for c in sweep.cells if c.size == 5)


def test_feature_sweep_csv(sweep):
    lines = sweep.to_csv("config_hash=abc seed=0").splitlines()
    assert lines[0] == "# config_hash=abc seed=0"
    assert lines[1] == "model,ranker,size,accuracy"
    assert len(lines) == 2 + len(sweep.cells)
    assert sweep.best().accuracy == max(sweep.grid().values())


def test_feature_sweep_shares_statistical_rankings(small_split):
    a = feature_sweep(small_split.train, small_split.validation, models=("mnb",), rankers=("cs",), sizes=(20,))
    b = feature_sweep(small_split.train, small_split.validation, sizes=(20,))
    assert a.grid()[("mnb", "cs", 20)] == b.grid()[("mnb", "cs", 20)]
    with pytest.raises(ValueError):
        feature_sweep([], small_split.validation)


def test_feature_sweep_with_stock_features(small_split):
    s = feature_sweep(small_split.train, small_split.validation, models=("mnb",), rankers=("cs",),
                      sizes=(20,), stock_features=("prior_trend", "volume_binary"))
    assert len(s.cells) == 1 and s.cells[0].accuracy is not None


def _monthly_docs(months, per_month=6):
    out = []
    for i, (y, m) in enumerate(months):
        for j in range(per_month):
            lab = BUY if j % 2 else SELL
            out.append(doc(lab, (lab.lower(), f"n{j}"), datetime(y, m, 2 + j, 11), tweet_id=f"{i}-{j}", weekday=0))
    return out


def test_window_sweep_cells_and_missing_months():
    months = [(2016, m) for m in range(1, 13)] + [(2017, 1)]
    docs = [d for d in _monthly_docs(months) if d.timestamp.month != 3 or d.timestamp.year != 2016]
    cells = window_sweep(docs, (2017, 1), k=10)
    assert [c.months for c in cells] == list(range(1, 13))
    assert cells[0].accuracy == 1.0 and cells[0].n_train == 6
    missing = [c for c in cells if c.accuracy is None]
    assert [c.months for c in missing] == [10] and "2016-03" in missing[0].note
    csv_lines = window_csv(cells).splitlines()
    assert csv_lines[0] == "window_months,accuracy,n_train" and len(csv_lines) == 13
    assert csv_lines[10] == "10,,54"
    assert peak_window(cells) == 1


def test_window_sweep_errors():
    docs = _monthly_docs([(2016, m) for m in range(6, 13)])
    with pytest.raises(ValueError, match="exceeds"):
        window_sweep(docs, (2016, 12))
    with pytest.raises(ValueError, match="no documents"):
        window_sweep(docs, date(2017, 1, 1), windows=(1,))
    with pytest.raises(ValueError, match="history"):
        window_sweep(docs, (2016, 6), windows=(1,))


def test_window_sweep_single_class_window_is_missing():
    docs = [d for d in _monthly_docs([(2016, 1), (2016, 2)]) if d.timestamp.month == 2 or d.label == BUY]
    (cell,) = window_sweep(docs, (2016, 2), windows=(1,), k=5)
    assert cell.accuracy is None and "both classes" in cell.note


def test_peak_window_ties_and_empty():
    cells = [WindowCell(1, 0.6, 1), WindowCell(2, 0.7, 1), WindowCell(3, 0.7, 1)]
    assert peak_window(cells) == 2
    with pytest.raises(ValueError):
        peak_window([WindowCell(1, None, 0)])
