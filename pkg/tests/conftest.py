import sys
from datetime import date
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tweetsignal.labeler import label_all, split  # noqa: E402
from tweetsignal.synth import SynthSpec, generate  # noqa: E402

TEST_MONTH = (date(2017, 1, 1), date(2017, 1, 31))


@pytest.fixture(scope="session")
def small_corpus():
    """A quick planted corpus (strong signal, few words) for integration-style unit tests."""
    spec = SynthSpec(seed=11, n_tweets=3000, n_buy_words=5, n_sell_words=5, n_noise_words=200,
                     start=date(2016, 10, 3), end=date(2017, 1, 31), signal_strength=0.9)
    corpus = generate(spec)
    docs, skipped = label_all(corpus.tweets, corpus.bars, spec.ticker)
    return corpus, docs, skipped


@pytest.fixture(scope="session")
def small_split(small_corpus):
    _, docs, _ = small_corpus
    return split(docs, 0.8, 3, TEST_MONTH)


# --- acceptance verdicts ----------------------------------------------------

_VERDICTS = pytest.StashKey[dict]()


@pytest.fixture
def verdict(request):
    """Record a check against an acceptance criterion, then assert it.

    Checks are grouped by criterion number; the terminal summary prints one
    PASS/FAIL line per criterion.
    """
    store = request.config.stash.setdefault(_VERDICTS, {})

    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        entry = store.setdefault(number, {"title": title, "checks": []})
        entry["checks"].append((bool(ok), detail))
        assert ok, f"criterion {number} ({title}): {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_VERDICTS, None)
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        entry = store[number]
        failed = [d for ok, d in entry["checks"] if not ok]
        status = "FAIL" if failed else "PASS"
        n = len(entry["checks"])
        if failed:
            detail = f"{len(failed)} of {n} checks failed: " + "; ".join(failed)
        elif n <= 4:
            detail = "; ".join(d for _, d in entry["checks"])
        else:
            detail = f"all {n} checks within tolerance"
        terminalreporter.write_line(f"{status}  {number:>2}. {entry['title']}: {detail}")
