import pytest

from dale_forge.config import PipelineConfig, config_hash, load_config, save_config
from dale_forge.errors import InvalidConfig, IoError, ParseError


class TestDefaults:
    def test_reference_hyperparameters(self):
        config = PipelineConfig()
        assert config.q == 7
        assert config.j_percent == 50.0
        assert config.pc_percentile == 95.0
        assert config.ranking_direction == "highest"
        assert config.lambda_context == 0.7
        assert config.lambda_finetune == 0.5
        assert (config.ctx_mu, config.ctx_sigma2, config.ctx_beta) == (0.5, 0.7, 0.3)
        assert (config.mask_mu, config.mask_sigma2, config.mask_alpha) == (0.4, 0.6, 0.4)
        assert config.preserve_budget == 0.20
        assert config.output_budget_tokens == 1024
        assert config.window == 1024
        assert config.context_len == 64
        assert config.rounds == 5
        assert config.embed_dim == 512
        assert config.mask_token == "<mask>"

    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.toml"
        path.write_text("")
        assert load_config(path) == PipelineConfig()


class TestValidation:
    @pytest.mark.parametrize(
        "field,value",
        [
            ("q", 1),
            ("j_percent", 0.0),
            ("j_percent", 150.0),
            ("pc_percentile", -1.0),
            ("lambda_context", 1.5),
            ("lambda_finetune", -0.1),
            ("preserve_budget", 0.0),
            ("preserve_budget", 1.5),
            ("ranking_direction", "upwards"),
            ("rounds", 0),
            ("window", 2048),
            ("context_len", 1022),
            ("mask_token", ""),
            ("damping", 1.0),
        ],
    )
    def test_bad_values_name_the_key(self, field, value):
        with pytest.raises(InvalidConfig) as err:
            PipelineConfig(**{field: value})
        assert err.value.key == field

    def test_file_value_violation(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("j_percent = 150\n")
        with pytest.raises(InvalidConfig) as err:
            load_config(path)
        assert err.value.key == "j_percent"

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("jpercent = 50\n")
        with pytest.raises(InvalidConfig):
            load_config(path)

    def test_type_drift_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text('q = "seven"\n')
        with pytest.raises(InvalidConfig):
            load_config(path)

    def test_unparseable_line(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("q 7\n")
        with pytest.raises(ParseError):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoError):
            load_config(tmp_path / "nope.toml")


class TestRoundTrip:
    def test_save_load_identity(self, tmp_path):
        config = PipelineConfig(q=5, j_percent=25.0, seed=99, lowercase=True, mask_token="[M]")
        path = tmp_path / "c.toml"
        save_config(config, path)
        assert load_config(path) == config

    def test_comments_and_blanks_ignored(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text("# a comment\n\nq = 5\nrounds = 3\n")
        config = load_config(path)
        assert (config.q, config.rounds) == (5, 3)

    def test_overrides_beat_file(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text("q = 5\n")
        config = load_config(path, overrides={"q": 3})
        assert config.q == 3

    def test_hash_tracks_value_changes(self):
        assert config_hash(PipelineConfig()) != config_hash(PipelineConfig(q=6))
        assert config_hash(PipelineConfig()) == config_hash(PipelineConfig())

    def test_replace_revalidates(self):
        with pytest.raises(InvalidConfig):
            PipelineConfig().replace(q=0)
