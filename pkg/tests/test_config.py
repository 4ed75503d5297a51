import pytest

from taxenrich.config import ConfigError, PipelineConfig, load_config, parse_config


def test_defaults_match_published_parameters():
    cfg = PipelineConfig()
    assert (cfg.alpha, cfg.beta, cfg.tau, cfg.k) == (0.7, 0.004, 0.8, 5)
    cfg.validate()


def test_parse_relative_paths(tmp_path):
    cfg = parse_config("# c\ntaxonomy = cats.txt\nk = 3\ncount_somewhat = yes\n", str(tmp_path))
    assert cfg.taxonomy == str(tmp_path / "cats.txt")
    assert cfg.k == 3 and cfg.count_somewhat is True


def test_overrides(tmp_path):
    p = tmp_path / "x.conf"
    p.write_text("tau = 0.5\n")
    cfg = load_config(str(p), {"tau": "0.25", "k": 2})
    assert cfg.tau == 0.25 and cfg.k == 2


@pytest.mark.parametrize("text", ["nonsense", "bogus = 1", "k = many", "count_somewhat = maybe"])
def test_bad_config(text):
    with pytest.raises(ConfigError):
        parse_config(text)


@pytest.mark.parametrize("key,value", [("alpha", 1.5), ("tau", -0.1), ("beta", -1.0), ("k", 0),
                                       ("similarity_mode", "fuzzy"), ("temperature", 0.0)])
def test_validation(key, value):
    with pytest.raises(ConfigError):
        PipelineConfig(**{key: value}).validate()


def test_required_inputs():
    with pytest.raises(ConfigError, match="taxonomy"):
        PipelineConfig().validate(require_inputs=True)
