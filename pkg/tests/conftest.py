import pytest

from coisolab import fields


@pytest.fixture(autouse=True, scope="session")
def strict_fields():
    """Run the whole suite with per-operation Hermitian/box validation on."""
    fields.STRICT = True
    yield
    fields.STRICT = False
