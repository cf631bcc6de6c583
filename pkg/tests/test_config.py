import pytest

from spatialscore.config import (
    EngineConfig,
    config_from_env,
    config_from_file,
    load_config,
)
from spatialscore.errors import SchemaViolation
from spatialscore.serialize import canonical_json


class TestValidation:
    def test_defaults(self):
        config = EngineConfig()
        assert (config.tau_det, config.tau_pass, config.theta_pos) == (0.30, 0.80, 0.05)
        assert config.relations == "geo"
        assert config.jobs == 1
        assert config.skip_errors is False
        assert config.per_constraint is False

    @pytest.mark.parametrize("kwargs", [
        {"tau_det": -0.1}, {"tau_det": 1.1},
        {"tau_pass": 2.0},
        {"theta_pos": -0.01},
        {"relations": "psychic"},
        {"jobs": 0},
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            EngineConfig(**kwargs)


class TestEcho:
    def test_echo_excludes_execution_fields(self):
        config = EngineConfig(jobs=8, skip_errors=True)
        assert config.echo() == {
            "tau_det": 0.30, "tau_pass": 0.80, "theta_pos": 0.05, "relations": "geo",
        }

    def test_echo_identical_across_jobs(self):
        a = EngineConfig(jobs=1).echo()
        b = EngineConfig(jobs=8).echo()
        assert canonical_json(a) == canonical_json(b)

    def test_bench_echo_adds_bench_fields(self):
        config = EngineConfig(skip_errors=True, per_constraint=True)
        echo = config.bench_echo()
        assert echo["skip_errors"] is True
        assert echo["per_constraint"] is True
        assert "jobs" not in echo


class TestSources:
    def test_env_overrides(self):
        environ = {"SPATRWD_TAU_PASS": "0.9", "SPATRWD_JOBS": "4",
                   "SPATRWD_SKIP_ERRORS": "yes", "HOME": "/root"}
        assert config_from_env(environ) == {"tau_pass": 0.9, "jobs": 4,
                                            "skip_errors": True}

    def test_env_bad_value(self):
        with pytest.raises(ValueError, match="jobs"):
            config_from_env({"SPATRWD_JOBS": "many"})

    def test_env_bool_spellings(self):
        for raw, expect in [("1", True), ("true", True), ("ON", True),
                            ("0", False), ("no", False), ("Off", False)]:
            got = config_from_env({"SPATRWD_PER_CONSTRAINT": raw})
            assert got == {"per_constraint": expect}
        with pytest.raises(ValueError):
            config_from_env({"SPATRWD_PER_CONSTRAINT": "maybe"})

    def test_file_loads_partial(self, tmp_path):
        p = tmp_path / "config.json"
        p.write_text('{"tau_pass": 0.7, "relations": "cot"}', encoding="utf-8")
        assert config_from_file(p) == {"tau_pass": 0.7, "relations": "cot"}

    def test_file_unknown_key(self, tmp_path):
        p = tmp_path / "config.json"
        p.write_text('{"tau_pas": 0.7}', encoding="utf-8")
        with pytest.raises(SchemaViolation, match="unknown config fields"):
            config_from_file(p)

    def test_file_not_an_object(self, tmp_path):
        p = tmp_path / "config.json"
        p.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(SchemaViolation, match="object"):
            config_from_file(p)

    def test_file_missing(self, tmp_path):
        with pytest.raises(SchemaViolation, match="cannot read"):
            config_from_file(tmp_path / "nope.json")


class TestPrecedence:
    def test_flags_beat_env_beat_file(self, tmp_path):
        p = tmp_path / "config.json"
        p.write_text('{"tau_pass": 0.5, "tau_det": 0.1, "theta_pos": 0.02}',
                      encoding="utf-8")
        environ = {"SPATRWD_TAU_PASS": "0.6", "SPATRWD_TAU_DET": "0.2"}
        config = load_config(p, environ, tau_pass=0.7)
        assert config.tau_pass == 0.7    # flag wins
        assert config.tau_det == 0.2     # env beats file
        assert config.theta_pos == 0.02  # file beats default
        assert config.jobs == 1          # default

    def test_none_overrides_are_ignored(self):
        config = load_config(None, {}, tau_pass=None, jobs=None)
        assert config == EngineConfig()

    def test_defaults_without_sources(self):
        assert load_config(None, {}) == EngineConfig()

    def test_override_validation_still_applies(self):
        with pytest.raises(ValueError):
            load_config(None, {}, tau_pass=3.0)
