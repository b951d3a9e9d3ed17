import pytest

from pushelg.ingest import build_judgments
from pushelg.model import EvaluationWindow, GainGrade, LatencyMode, MetricConfig, SilentMode

START = 1_437_350_400_000
MIN = 60_000
HOUR = 60 * MIN


@pytest.fixture
def window():
    return EvaluationWindow(START, 2)


@pytest.fixture
def cfg(window):
    def make(silent=SilentMode.REWARD_ONE, latency=LatencyMode.OFFICIAL, **kw):
        return MetricConfig(silent, latency, window, **kw)
    return make


@pytest.fixture
def three_tweet_pool():
    """C1 = {t1 (relevant), t2 (highly relevant)}, C2 = {t3 (relevant)} on day 0; t9 non-relevant.

    t2 is posted at 01:00, t1 at 01:30, t3 at 05:00.
    """
    gains = {"MB1": {1: GainGrade.RELEVANT, 2: GainGrade.HIGHLY_RELEVANT,
                     3: GainGrade.RELEVANT, 9: GainGrade.NON_RELEVANT}}
    clusters = {"MB1": [("C1", [1, 2]), ("C2", [3])]}
    created = {1: START + HOUR + 30 * MIN, 2: START + HOUR, 3: START + 5 * HOUR,
               9: START + 2 * HOUR, 4: START + HOUR + 5 * MIN}
    return build_judgments(gains, clusters, created)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        for line in sorted(ACCEPTANCE[number], key=lambda l: " SKIP:" in l):
            terminalreporter.write_line(line)
