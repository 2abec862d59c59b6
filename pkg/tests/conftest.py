import numpy as np
import pytest

import roelab as rl


@pytest.fixture(scope="session")
def square16():
    return rl.generate({"kind": "square", "window": [[0, 4], [0, 4]]})


@pytest.fixture(scope="session")
def chain200():
    return rl.generate({"kind": "chain", "window": [[0, 200]]})


@pytest.fixture(scope="session")
def square20():
    return rl.generate({"kind": "square", "window": [[0, 20], [0, 20]]})


@pytest.fixture(scope="session")
def qwz20(square20):
    """Clean two-band Chern sample used by several suites."""
    module, H, spec = rl.build_model("qwz", {"m": 1.0}, square20)
    return module, H, spec


def random_controlled(module, rng, hop_range=1.5, scale=1.0, hermitian=True):
    """Random finite-propagation operator for property tests."""
    from scipy.spatial.distance import cdist
    m = module.orbitals_per_site
    ps = module.pointset
    dist = cdist(ps.coords, ps.coords)
    blocks = {}
    for x in range(ps.n):
        for y in range(ps.n):
            if y < x or dist[x, y] > hop_range:
                continue
            B = scale * (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
            if x == y and hermitian:
                B = (B + B.conj().T) / 2
            blocks[(x, y)] = B
    return rl.ControlledOperator.from_blocks(module, blocks, hermitian=hermitian)


def assert_report(name, ok, detail=""):
    """One pass/fail line per acceptance criterion."""
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f"  ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"
