import functools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vlte.harness import load_scenario, run  # noqa: E402

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "src" / "vlte" / "scenarios"
BASE_NAMES = ("table1_imsi", "table2_fbs", "table3_fallback", "alg1_fingerprint",
              "messages", "capabilities", "handover")


def scenario_path(name: str) -> Path:
    return SCENARIO_DIR / f"{name}.scn"


@functools.lru_cache(maxsize=None)
def bundled_run(name: str, seed=None):
    """Run a bundled scenario once per session; callers must not mutate the result."""
    return run(load_scenario(scenario_path(name)), seed)


def all_scenarios() -> list[str]:
    return [n for base in BASE_NAMES for n in (base, base + ".mitigated")]


@pytest.fixture(autouse=True)
def _no_seed_env(monkeypatch):
    monkeypatch.delenv("VLTE_SEED", raising=False)


_CRITERIA: dict[str, str] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rpartition("::")[2]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call" or report.failed:
        _CRITERIA[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda n: int(n.split("_")[2])):
        number, _, title = name[len("test_criterion_"):].partition("_")
        terminalreporter.write_line(f"criterion {number} ({title.replace('_', ' ')}): {_CRITERIA[name]}")
