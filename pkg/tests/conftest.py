import pytest

# mu values shared by the floating-point suites; -0.49 probes the edge of the domain
MU_GRID = (-0.49, -0.4, -0.25, -0.1, 0.0, 0.25, 0.5, 1.0, 2.5)
MU_NONZERO = tuple(m for m in MU_GRID if m != 0.0)


@pytest.fixture(params=MU_GRID, ids=lambda m: f"mu={m:g}")
def mu(request):
    return request.param
