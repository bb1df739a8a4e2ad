"""Run configuration parsing and precedence."""

import pytest

from wwlump.config import DEFAULTS, RunConfig, parse_config, read_config_file
from wwlump.errors import ConfigurationError


def write(tmp_path, text):
    p = tmp_path / "run.cfg"
    p.write_text(text)
    return p


class TestParse:
    def test_defaults(self):
        cfg = parse_config()
        assert cfg == DEFAULTS
        assert (cfg.nx, cfg.lx, cfg.eps, cfg.dno) == (256, 30.0, 0.1, "exact")

    def test_file_values(self, tmp_path):
        p = write(tmp_path, "# comment\n\neps = 0.05\nnx=128  # trailing\ntol-outer = 1e-8\n")
        cfg = parse_config(p)
        assert cfg.eps == 0.05 and cfg.nx == 128 and cfg.tol_outer == 1e-8

    def test_overrides_win(self, tmp_path):
        p = write(tmp_path, "eps = 0.05\nsigma = 2\n")
        cfg = parse_config(p, {"eps": "0.2", "sigma": None})
        assert cfg.eps == 0.2 and cfg.sigma == 2.0

    def test_dash_and_underscore_keys(self):
        assert parse_config(overrides={"lump-source": "periodic"}).lump_source == "periodic"

    def test_bool_coercion(self):
        assert parse_config(overrides={"force": "yes", "eps": 0.5}).force

    def test_grid_and_solver(self):
        cfg = parse_config(overrides={"nx": "64", "ny": 32})
        assert cfg.grid().shape == (64, 32)
        assert cfg.solver().grid == cfg.grid()
        assert cfg.with_eps(0.05).grid().eps == 0.05

    def test_as_dict_roundtrip(self):
        assert RunConfig(**DEFAULTS.as_dict()) == DEFAULTS


class TestReject:
    def test_unknown_file_key(self, tmp_path):
        with pytest.raises(ConfigurationError, match="unknown key"):
            read_config_file(write(tmp_path, "epsilon = 0.1\n"))

    def test_unknown_override(self):
        with pytest.raises(ConfigurationError):
            parse_config(overrides={"bogus": 1})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            parse_config(tmp_path / "nope.cfg")

    def test_malformed_line(self, tmp_path):
        with pytest.raises(ConfigurationError):
            parse_config(write(tmp_path, "eps 0.1\n"))

    @pytest.mark.parametrize("key,val", [("nx", "12.5"), ("eps", "small"), ("force", "maybe")])
    def test_bad_value(self, key, val):
        with pytest.raises(ConfigurationError) as err:
            parse_config(overrides={key: val})
        assert err.value.field == key

    @pytest.mark.parametrize("over", [{"sigma": 0.2}, {"eps": 0.9}, {"dno": "magic"},
                                      {"lump_source": "x"}, {"nx": 7}, {"tol_outer": -1}])
    def test_out_of_range(self, over):
        with pytest.raises(ConfigurationError):
            parse_config(overrides=over)

    def test_force_allows_large_eps(self):
        cfg = parse_config(overrides={"eps": 0.9, "force": True})
        assert cfg.solver().outside_proven_regime
