import pytest

from socmorse.acceptance import AcceptanceContext


@pytest.fixture(scope="session")
def ctx():
    """Shared lazily-computed artifacts (designs, grid runs) for the suite."""
    return AcceptanceContext()
