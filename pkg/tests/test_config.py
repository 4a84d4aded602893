import pytest

from renormalist import config as cfgmod
from renormalist.config import (
    ConfigError,
    ConfigParseError,
    dumps,
    fixture_path,
    load,
    loads,
    parse_eps_grid,
    resolve,
    same_config,
)
from renormalist.homogeneity import Homogeneity as H

PHI43 = fixture_path("phi43").read_text()


@pytest.mark.parametrize("name", cfgmod.FIXTURES + ("phi43_rules",))
def test_round_trip(name):
    cfg = resolve(name)
    again = loads(dumps(cfg), name=name)
    assert same_config(cfg, again)
    assert dumps(again) == dumps(cfg)


def test_rule_table_matches_equation():
    eq = resolve("phi43")
    table = resolve("phi43_rules")
    assert table.spec is None
    assert table.rule == eq.rule
    assert table.alphabet == eq.alphabet


def test_fixture_settings():
    cfg = resolve("gpam")
    assert cfg.cutoffs.rhs == H.parse("kappa")
    assert cfg.cutoffs.delta0 == H.parse("3/2")
    assert cfg.target == "I"
    assert cfg.renorm.contraction_map() == {("A", "gsharp"): "trA"}
    assert cfg.counterterms.eps_grid == tuple(2.0**-k for k in range(3, 9))
    assert cfg.counterterms.n == 4


def test_load_from_path(tmp_path):
    p = tmp_path / "mine.toml"
    p.write_text(PHI43.replace('name = "phi43"\n', ""))
    cfg = load(p)
    assert cfg.name == "mine"
    assert resolve(str(p)).name == "mine"


def test_unknown_fixture():
    with pytest.raises(FileNotFoundError):
        resolve("no_such_equation")


def test_eps_grids():
    assert parse_eps_grid("2^-3..2^-5") == (0.125, 0.0625, 0.03125)
    assert parse_eps_grid("2^-3..-4") == (0.125, 0.0625)
    assert parse_eps_grid("0.1,0.05") == (0.1, 0.05)
    assert parse_eps_grid(["2^-2", 0.1]) == (0.25, 0.1)
    for bad in ("0", "2", "-0.1", "abc"):
        with pytest.raises(ConfigError):
            parse_eps_grid(bad)


def test_parse_error_has_line():
    with pytest.raises(ConfigParseError) as info:
        loads("schema_version = 1\nname = \n")
    assert info.value.line == 2


def test_bad_degree_reports_key_and_line():
    text = PHI43.replace('degree = "-5/2-kappa"', 'degree = "-5/2-lambda"')
    with pytest.raises(ConfigError) as info:
        loads(text)
    err = info.value
    assert err.path == "equation.noises[0].degree"
    assert err.line == text.splitlines().index('degree = "-5/2-lambda"') + 1


def test_schema_version_checked():
    with pytest.raises(ConfigError, match="schema version"):
        loads(PHI43.replace("schema_version = 1", "schema_version = 2"))
    with pytest.raises(ConfigError, match="missing"):
        loads(PHI43.replace("schema_version = 1\n", ""))


def test_structural_errors():
    with pytest.raises(ConfigError, match="unknown top-level key"):
        loads(PHI43 + "\n[extra]\nx = 1\n")
    with pytest.raises(ConfigError, match="exactly one"):
        loads("schema_version = 1\n")
    with pytest.raises(ConfigError, match="not a kernel"):
        loads(PHI43.replace('delta0 = "3/2"', 'delta0 = "3/2"\ntarget = "Xi"'))
    with pytest.raises(ConfigError, match="strings"):
        loads(PHI43.replace('"[I[Xi],I[Xi]]" = "-C"', '"[I[Xi],I[Xi]]" = 3'))
    with pytest.raises(ConfigError, match="expected an integer"):
        loads(PHI43.replace("taylor_order = 2", 'taylor_order = "two"'))


def test_rule_table_errors():
    text = fixture_path("phi43_rules").read_text()
    with pytest.raises(ConfigError, match="unknown edge type"):
        loads(text.replace('["Xi"]', '["Eta"]', 1))
    with pytest.raises(ConfigError, match="class"):
        loads(text.replace('class = "minus"', 'class = "negative"'))
