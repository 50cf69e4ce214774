import pytest

from jumpdensity import build_graph


@pytest.fixture
def g2():
    """Two vertices, one unit edge."""
    return build_graph(["a", "b"], [("a", "b", 1.0)])


@pytest.fixture
def g2w():
    """Two vertices, weight 1.3."""
    return build_graph(["a", "b"], [("a", "b", 1.3)])


@pytest.fixture
def triangle():
    """Weighted triangle."""
    return build_graph(["a", "b", "c"],
                       [("a", "b", 1.0), ("b", "c", 1.3), ("a", "c", 0.7)])


@pytest.fixture
def triangle123():
    """Triangle with weights 1, 2, 3."""
    return build_graph(["a", "b", "c"],
                       [("a", "b", 1.0), ("b", "c", 2.0), ("a", "c", 3.0)])


@pytest.fixture
def path3():
    """Path graph a - b - c."""
    return build_graph(["a", "b", "c"], [("a", "b", 1.0), ("b", "c", 0.8)])
