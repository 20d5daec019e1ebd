import numpy as np
import pytest

from cpt_refine import Cpt, Variable, load_cpt
from cpt_refine.fixtures import METHOD_FIXTURES, fixture_path


@pytest.fixture(scope="session")
def anxiety() -> Cpt:
    return load_cpt(fixture_path("anxiety"))


@pytest.fixture(scope="session")
def method_columns() -> dict[str, Cpt]:
    return {name: load_cpt(fixture_path(fix)) for name, fix in METHOD_FIXTURES.items()}


def random_cpt(rng: np.random.Generator, parent_cards, child_card: int = 2) -> Cpt:
    """A random CPT with unit-sum rows, for oracle comparisons."""
    child = Variable("Y", tuple(f"y{i}" for i in range(child_card)))
    parents = tuple(
        Variable(f"X{i}", tuple(f"s{j}" for j in range(c))) for i, c in enumerate(parent_cards)
    )
    rows = rng.random((int(np.prod(parent_cards)), child_card))
    rows /= rows.sum(axis=1, keepdims=True)
    return Cpt(child, parents, rows)
