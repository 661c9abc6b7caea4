import sys

import numpy as np
import pytest

from surrobench import load_dataset
from surrobench.blackbox import from_spec


def make_csv(columns: dict) -> bytes:
    """Column name -> list of cells (floats rendered via repr, strings as-is)."""
    names = list(columns)
    n = len(next(iter(columns.values())))
    lines = [",".join(names)]
    for i in range(n):
        cells = []
        for name in names:
            cell = columns[name][i]
            cells.append(repr(float(cell)) if isinstance(cell, (int, float))
                         else str(cell))
        lines.append(",".join(cells))
    return ("\n".join(lines) + "\n").encode("utf-8")


def median_mass_columns(n=200, seed=0):
    """Synthetic columns where feature x0 has a point mass at its median.

    30% of x0 is negative, 50% sits exactly at 0 and 20% is positive, so
    q25 < 0 = q50 = q75: the top quartile bin coincides exactly with the
    region x0 > median, which a rule black box on the median can exploit.
    """
    rng = np.random.default_rng(seed)
    n_neg, n_zero = int(0.3 * n), int(0.5 * n)
    n_pos = n - n_neg - n_zero
    x0 = np.concatenate([
        rng.uniform(-1.0, -0.2, n_neg),
        np.zeros(n_zero),
        rng.uniform(0.2, 1.0, n_pos),
    ])
    rng.shuffle(x0)
    x1 = rng.uniform(0.0, 10.0, n)
    color = rng.choice(["red", "green", "blue"], n)
    return {"x0": x0, "x1": x1, "color": color}


@pytest.fixture(scope="session")
def median_mass_dataset():
    return load_dataset(make_csv(median_mass_columns()))


@pytest.fixture(scope="session")
def median_rule_spec(median_mass_dataset):
    median = median_mass_dataset.stats["x0"]["q50"]
    return {
        "kind": "rule",
        "classes": ["above", "below"],
        "rules": [{"feature": "x0", "op": ">", "value": median,
                   "class": "above"}],
        "default": "below",
    }


@pytest.fixture(scope="session")
def median_rule_model(median_mass_dataset, median_rule_spec):
    return from_spec(median_rule_spec, median_mass_dataset.schema)


@pytest.fixture(scope="session")
def positive_anchor(median_mass_dataset):
    """An instance well inside the x0 > median region."""
    ix = int(np.argmax(median_mass_dataset.values[:, 0]))
    return median_mass_dataset.instance(ix)


@pytest.fixture(scope="session")
def mixed_dataset():
    """Small mixed-type dataset for schema/stat checks."""
    rng = np.random.default_rng(42)
    n = 60
    return load_dataset(make_csv({
        "a": rng.normal(5.0, 2.0, n),
        "b": rng.uniform(-1.0, 1.0, n),
        "kind": rng.choice(["x", "y"], n),
    }))


PYTHON = sys.executable


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, outside stdout capture."""
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for name, status in RESULTS:
            terminalreporter.write_line(f"ACCEPTANCE {name}: {status}")
