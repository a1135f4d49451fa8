import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from mpmath import mp

from entropy_rigidity.config import bundled
from entropy_rigidity.geometry import load_table

settings.register_profile("repo", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

TABLES = ("three-disks", "mixed", "four-disks")


@pytest.fixture(autouse=True)
def _precision():
    # every test starts from the library default of 256 bits
    mp.prec = 256
    yield
    mp.prec = 256


@pytest.fixture(scope="session")
def tables():
    mp.prec = 256
    return {name: load_table(bundled("tables/%s.cfg" % name)) for name in TABLES}


@pytest.fixture(scope="session")
def three_disks(tables):
    return tables["three-disks"]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def flagship(three_disks):
    """Reference orbit 12, its normal form, the 12/13 homoclinic frame and family."""
    from entropy_rigidity.asymptotics import horseshoe_family
    from entropy_rigidity.normal_form import extract_birkhoff, mirror_normalize, return_map_jet
    from entropy_rigidity.orbits import find_homoclinic_segment, find_periodic_orbit

    mp.prec = 256
    core = find_periodic_orbit(three_disks, "12")
    nf = extract_birkhoff(return_map_jet(three_disks, core, 9), K=3)
    seg = find_homoclinic_segment(three_disks, "12", "13", 6, core=core)
    frame = mirror_normalize(three_disks, nf, seg, k=2, J=4)
    fam = horseshoe_family(three_disks, "12", "13", 30, core=core)
    return {"core": core, "nf": nf, "seg": seg, "frame": frame, "family": fam}


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line("AC%-2d %s  %s" % (k, "PASS" if ok else "FAIL", detail))
