import pytest

from singlab.experiments import CLAIMS, SCENARIOS, ConfigError, check, resolve_parameters, run_scenario, slope


def test_every_claim_is_exercised():
    covered = {c for sc in SCENARIOS.values() for c in sc.claims}
    assert covered == set(CLAIMS)


def test_check_relations():
    assert check("a", 1.0, "<=", 1.0).passed
    assert not check("a", 1.0, "<", 1.0).passed
    assert not check("a", float("nan"), "<=", 1.0).passed
    assert check("a", 2, ">", 1).as_row() == {
        "check": "a", "passed": True, "measured": 2.0, "relation": ">", "threshold": 1.0, "note": ""
    }


def test_slope():
    assert slope([1, 2, 4], [3, 12, 48]) == pytest.approx(2.0)


def test_parameter_resolution():
    with pytest.raises(ConfigError, match="unknown scenario"):
        resolve_parameters("nope", {})
    with pytest.raises(ConfigError, match="does not take"):
        resolve_parameters("monotone_ladder", {"bogus": 1})
    with pytest.raises(ConfigError, match="does not take"):
        resolve_parameters("aronson_serrin", {"outside": {"zz": 1}})
    p = resolve_parameters("aronson_serrin", {"outside": {"N": 4}})
    assert p["outside"]["N"] == 4 and p["outside"]["a"] == 0.6
    assert resolve_parameters("monotone_ladder", {"f_params": {"anything": 1}})["f_params"] == {"anything": 1}


def test_zero_source_steady_state_is_trivial():
    rep = run_scenario("asymptotic_steady", {"N": 16, "f": "zero", "f_params": {}, "horizon": 5.0})
    assert rep.passed
    assert all(row["l2_gap"] == 0 for row in rep.tables["approach"])


def test_asymptotic_rejects_nonzero_start():
    with pytest.raises(ConfigError):
        run_scenario("asymptotic_steady", {"u0": "bump"})


@pytest.mark.parametrize(
    "name,overrides",
    [
        ("monotone_ladder", {"N": 16, "T": 0.1, "tau": 1e-3, "ladder": [1, 4, 16]}),
        ("comparison_principle", {"N": 16, "T": 0.1}),
        ("positivity_floor", {"N": 16, "T": 0.1, "tau": 1e-3}),
        ("bounded_data", {"N": 16, "T": 0.1, "ladder": [1, 16, 256, 1024]}),
        ("variable_gamma", {"N": 16, "T": 0.2}),
        ("manufactured_convergence", {"levels": 2, "taus": [4e-3, 2e-3]}),
        ("structure_checks", {"operators": 5, "rhs": 10, "probes": 500}),
    ],
)
def test_quick_scenarios_pass(name, overrides):
    rep = run_scenario(name, overrides)
    assert rep.verdicts and rep.passed, rep.summary()
