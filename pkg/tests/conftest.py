import numpy as np
import pytest

from weakstab.core import catalog_build

CATALOG_PARAMS = [
    ("free_particle", None),
    ("l4_linear", None),
    ("cherry", {"sigma": 1.0}),
    ("cherry", {"sigma": -0.7}),
    ("variation_like", {"sigma": 1.0}),
    ("variation_like", {"g_coeffs": ["2", "-1/3", "1/4"]}),
]


@pytest.fixture(params=CATALOG_PARAMS, ids=lambda p: f"{p[0]}-{p[1]}")
def any_system(request):
    name, params = request.param
    return catalog_build(name, params)


@pytest.fixture
def l4():
    return catalog_build("l4_linear")


@pytest.fixture
def cherry():
    return catalog_build("cherry", {"sigma": 1.0})


@pytest.fixture
def variation():
    return catalog_build("variation_like", {"sigma": 1.0})


@pytest.fixture
def free():
    return catalog_build("free_particle")


def unit_ball(rng, count, dim, radius=1.0):
    v = rng.normal(size=(count, dim))
    v /= np.linalg.norm(v, axis=1)[:, None]
    return v * (radius * rng.random(count) ** (1.0 / dim))[:, None]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
