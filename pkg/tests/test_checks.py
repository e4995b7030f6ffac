import pytest

from vecprox.checks import SUITES, run_suite


@pytest.mark.parametrize("name", sorted(SUITES))
@pytest.mark.parametrize("seed", [1, 7])
def test_suites_pass(name, seed):
    results = run_suite(name, seed)
    failed = [(r.name, r.worst, r.tolerance) for r in results if not r.passed]
    assert results and not failed


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("curvature")


def test_results_serialize():
    d = run_suite("sharpness", 0)[0].to_dict()
    assert set(d) == {"suite", "name", "passed", "worst", "tolerance", "samples", "seconds"}
    assert isinstance(d["passed"], bool)
