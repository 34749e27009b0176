from __future__ import annotations

import logging
from datetime import datetime, timezone

import numpy as np
import pytest

from eosched.astro import SatelliteSpec, load_tles
from eosched.demand import generate_customer_db
from eosched.scenario import CloudSource, Horizon, enumerate_attempts

REF_START = datetime(2024, 10, 17, 9, 40, tzinfo=timezone.utc)
REF_NORAD = (38755, 40053)


def ref_satellites():
    return [(t, SatelliteSpec(t.norad_id, rotation_speed=1.5, swath=60.0)) for t in load_tles(REF_NORAD)]


@pytest.fixture(autouse=True)
def _quiet_orphans(caplog):
    caplog.set_level(logging.ERROR, logger="eosched.problem")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def ref_db():
    return generate_customer_db(300, seed=1)


@pytest.fixture(scope="session")
def ref_table(ref_db):
    """Two satellites, 8 h at 10 s, every gate-passing step kept."""
    horizon = Horizon(REF_START, 8.0, 10.0)
    return enumerate_attempts(ref_db, ref_satellites(), horizon, CloudSource(seed=1), keep_all_steps=True)


@pytest.fixture(scope="session")
def ref_table_collapsed(ref_db):
    horizon = Horizon(REF_START, 8.0, 10.0)
    return enumerate_attempts(ref_db, ref_satellites(), horizon, CloudSource(seed=1))
