import pytest
from mpmath import mp

from escargot.entire_eval import build_catalog
from escargot.harness.config import RunConfig
from escargot.harness.pipeline import build_context
from escargot.hyperscale import GrowthParams, build_growth_table
from escargot.seqcore import SeqParams, build_sequence_table


@pytest.fixture(autouse=True)
def _restore_dps():
    saved = mp.dps
    yield
    mp.dps = saved


@pytest.fixture(scope="session")
def ctx():
    """Default construction: log10 a_3 = 100, N0 = 10, N1 = 12, n_max = 40."""
    return build_context(RunConfig())


@pytest.fixture(scope="session")
def toy():
    """a_3 = 10^10 with the catalog cut after level 3: f(z) = z (1 + z/a_3)^2 (1 + z/a_3^3)^2."""
    gp = GrowthParams(log10_a3=10, N1=12, n_max=14)
    seq = build_sequence_table(SeqParams(), 16, prec=60)
    table = build_growth_table(gp, seq)
    with mp.workdps(table.precision):
        cat = build_catalog(table, seq, k_max=3, finite=True)
    return table, cat

from hypothesis import settings

settings.register_profile("repo", deadline=None)
settings.load_profile("repo")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
