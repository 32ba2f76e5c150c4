import time
from pathlib import Path

import pytest

from trispin import MoleculeSpec
from trispin.library import PulseLibrary, build_library

CACHE_DIR = Path(__file__).resolve().parent.parent / ".cache" / "pulse_library"


@pytest.fixture(scope="session")
def molecule() -> MoleculeSpec:
    return MoleculeSpec()


@pytest.fixture(scope="session")
def ideal_library(molecule) -> PulseLibrary:
    return PulseLibrary.ideal(molecule)


@pytest.fixture(scope="session")
def pulse_library(molecule):
    """Full synthesized library, built once per machine into a local cache.

    Returns (library, build_info) where build_info records whether this
    session synthesized fresh pulses and how long the build took.
    """
    t0 = time.time()
    had_cache = CACHE_DIR.is_dir() and any(CACHE_DIR.glob("*.meta.json"))
    lib = build_library(molecule, cache_dir=CACHE_DIR, seed=0, workers=2)
    wall = time.time() - t0
    return lib, {"fresh": not had_cache, "wall_seconds": wall,
                 "cache_dir": CACHE_DIR}
