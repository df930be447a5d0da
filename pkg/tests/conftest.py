import pytest

from rowplan import Plant, ToolConfig
from rowplan.field import make_field


def weed(i, x, y, **kw):
    return Plant(id=i, x=x, y=y, kind="weed", species=kw.pop("species", "w"), **kw)


def crop(i, x, y, area=1000.0):
    return Plant(id=i, x=x, y=y, kind="crop", species="crop", area_mm2=area, beta=0.0, priority="low")


def row(plants, width=1.39, length=None):
    spec = {"width": width}
    if length is not None:
        spec["length"] = length
    return make_field(spec, plants, warn=False)


@pytest.fixture
def tool():
    return ToolConfig()


@pytest.fixture
def two_segment_row():
    """One weed at the far edge of axis 0 just before the 1 m window boundary,
    then a tight cluster at the near edge just after it. Reaching the cluster
    from the first weed is infeasible."""
    pts = [(0.99, 0.34), (1.01, 0.0), (1.02, 0.0), (1.03, 0.0)]
    return row([weed(i, x, y) for i, (x, y) in enumerate(pts)], length=2.0)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
