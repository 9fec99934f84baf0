"""Shared fixtures and the acceptance-criteria summary hook."""

import numpy as np
import pytest

import noisebench as nb

# Acceptance tests register one line per criterion here; the terminal
# summary hook prints them after the run so they are visible even with
# output capture enabled.
CRITERIA_LINES: list[str] = []


@pytest.fixture(scope="session")
def criteria_log():
    def record(number: int, description: str, passed: bool, detail: str = ""):
        status = "PASS" if passed else "FAIL"
        suffix = f" ({detail})" if detail else ""
        CRITERIA_LINES.append(f"{status} criterion {number}: {description}{suffix}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERIA_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in sorted(CRITERIA_LINES):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_ds() -> nb.EmbeddingDataset:
    """Tiny well-separated 3-class set used across unit tests."""
    spec = nb.SyntheticSpec(
        n_classes=3, dim=8, samples_per_class=60,
        cluster_spread=0.6, center_separation=6.0, seed=3,
    )
    return nb.gen_synthetic(spec)


@pytest.fixture(scope="session")
def small_split(small_ds) -> nb.SplitSpec:
    return nb.make_split(small_ds, (0.7, 0.15, 0.15), seed=5)
