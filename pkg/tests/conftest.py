import numpy as np
import pytest

from almostosc.criteria import CriterionParams, riccati_inequality_check
from almostosc.equation import EquationSpec, InitialData, simulate
from almostosc.specfile import load_bundled

EXPONENT_PAIRS = [("1", "3"), ("1", "5"), ("3", "5"), ("5/3", "7/3"), ("3", "7")]


@pytest.fixture(scope="session")
def ex1():
    return load_bundled("example1")


@pytest.fixture(scope="session")
def ex2():
    return load_bundled("example2")


@pytest.fixture(scope="session")
def ex3():
    return load_bundled("example3")


@pytest.fixture(scope="session")
def examples(ex1, ex2, ex3):
    return {"example1": ex1, "example2": ex2, "example3": ex3}


def random_growing_instance(rng):
    """An instance whose solutions rise for a while: weak q, strong forcing."""
    gamma, alpha = EXPONENT_PAIRS[rng.integers(len(EXPONENT_PAIRS))]
    k = int(rng.integers(0, 3))
    c = f"{rng.integers(0, 90)}/100"
    r = f"{rng.uniform(2, 5):.3f} + {rng.uniform(0, 0.5):.3f}*(-1)^n/n"
    q = f"{rng.uniform(1e-7, 1e-5):.8f}"
    e = f"{rng.uniform(0.2, 1):.3f} + 1/n"
    spec = EquationSpec(r, q, e, c, k, gamma, alpha)
    # linear start keeps the neutral term from zig-zagging
    x0 = rng.uniform(0.1, 1.0) + rng.uniform(0.1, 0.5) * np.arange(k + 2)
    p = "n" if rng.random() < 0.5 else "1"
    return spec, InitialData(1, [float(v) for v in x0]), p


def longest_run(indices) -> int:
    """Length of the longest run of consecutive integers."""
    best = run = 0
    prev = None
    for n in indices:
        run = run + 1 if prev is not None and n == prev + 1 else 1
        best = max(best, run)
        prev = n
    return best


def riccati_suite(seed=20261016, wanted=50, horizon=80, min_len=20, max_tries=1000):
    """Simulate random instances until ``wanted`` have a run of >= ``min_len`` usable indices."""
    rng = np.random.default_rng(seed)
    cases = []
    tries = 0
    while len(cases) < wanted and tries < max_tries:
        tries += 1
        spec, init, p = random_growing_instance(rng)
        try:
            traj = simulate(spec, init, horizon, mode="float")
        except (OverflowError, ValueError):
            continue
        params = CriterionParams(p=p, defaulted={"d", "M", "R"})
        check = riccati_inequality_check(spec, traj, params, range(1, horizon))
        if longest_run(check.applicable) >= min_len:
            cases.append((spec, traj, params, check))
    return cases, tries


@pytest.fixture(scope="session")
def riccati_cases():
    cases, _ = riccati_suite()
    return cases
