import pytest

from ponzitrace.ingest import load_fixture

FIXTURE_NAMES = ["scenario1", "scenario2", "micro_ponzi"]


@pytest.fixture(params=FIXTURE_NAMES)
def fixture_code(request):
    ref, code = load_fixture(request.param)
    return request.param, ref, code


@pytest.fixture()
def scenario1_code():
    return load_fixture("scenario1")[1]


@pytest.fixture()
def scenario2_code():
    return load_fixture("scenario2")[1]


@pytest.fixture()
def micro_ponzi_code():
    return load_fixture("micro_ponzi")[1]
