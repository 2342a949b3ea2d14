from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

TABLE2 = {
    "Search": "business, innovation and skills committee and work and pensions committee",
    "Referral": "house of commons",
    "Direct": "westminster hall",
    "Other": "house of lords",
    "Social": "exiting the european union committee",
}


@pytest.fixture
def table2_log():
    return (DATA / "table2_log.csv").read_bytes()


@pytest.fixture
def dashboard_log():
    return (DATA / "dashboard_log.csv").read_bytes()
