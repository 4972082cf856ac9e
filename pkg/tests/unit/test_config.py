import os

import pytest
import yaml

from toricount.config import BUILTIN_DEFAULTS, Config, ConfigError, ConfigLoader


@pytest.fixture
def sample_config_yaml(tmp_path):
    config_content = {
        "defaults": {"q": 3, "budget": 5000, "primes": [2, 3, 5]},
        "profiles": {
            "quick": {"max_height": 4, "budget": 100},
            "heavy": {"q": 5, "jobs": 4, "output": "json"},
        },
    }
    config_file = tmp_path / "config.yaml"
    with open(config_file, "w") as f:
        yaml.dump(config_content, f, sort_keys=False)
    return config_file


def _write(tmp_path, content):
    config_file = tmp_path / "config.yaml"
    with open(config_file, "w") as f:
        yaml.dump(content, f)
    return str(config_file)


def test_load_default_profile_implicit_first(sample_config_yaml):
    """Test that the first profile is selected when no default is specified."""
    config = ConfigLoader(config_path=str(sample_config_yaml)).load()

    assert config.profile == "quick"
    assert config.get_max_height() == 4
    # profile overrides the file-wide default
    assert config.get_budget() == 100
    # file-wide default wins over the built-in one
    assert config.get_q() == 3


def test_load_default_profile_explicit(tmp_path):
    """Test that the profile named by 'default' is selected."""
    path = _write(tmp_path, {"default": "b", "profiles": {"a": {"q": 2}, "b": {"q": 7}}})

    config = ConfigLoader(config_path=path).load()

    assert config.profile == "b"
    assert config.get_q() == 7


def test_profile_override(sample_config_yaml):
    """Test that the CLI argument overrides the default profile."""
    config = ConfigLoader(config_path=str(sample_config_yaml)).load(profile_name="heavy")

    assert config.profile == "heavy"
    assert config.get_q() == 5
    assert config.get_jobs() == 4
    assert config.get_output() == "json"
    assert config.get_primes() == [2, 3, 5]


def test_defaults_only_file(tmp_path):
    """Test that a file with only defaults loads without a profile."""
    path = _write(tmp_path, {"defaults": {"precision": -4}})

    config = ConfigLoader(config_path=path).load()

    assert config.profile is None
    assert config.get_precision() == -4
    assert config.get_max_total_degree() == BUILTIN_DEFAULTS["max_total_degree"]


def test_builtin_config():
    """Test the built-in settings used when no config file exists."""
    config = Config.builtin()

    assert config.get_q() == 2
    assert config.get_budget() == 100_000_000
    assert config.get_jobs() == 1
    assert config.get_max_total_degree() == 8
    assert config.get_precision() == -8
    assert config.get_primes() == [2, 3, 5, 7, 11, 13]
    assert config.get_max_height() == 12
    assert config.get_output() == "tsv"


def test_config_not_found():
    """Test that ConfigError is raised when config file is missing."""
    loader = ConfigLoader(config_path="/non/existent/path.yaml")
    assert not loader.exists()
    with pytest.raises(ConfigError):
        loader.load()


def test_profile_not_found(sample_config_yaml):
    """Test that ConfigError is raised for an unknown profile."""
    loader = ConfigLoader(config_path=str(sample_config_yaml))
    with pytest.raises(ConfigError):
        loader.load(profile_name="non-existent-profile")


def test_malformed_yaml(tmp_path):
    """Test that ConfigError is raised for a file that is not valid YAML."""
    config_file = tmp_path / "config.yaml"
    config_file.write_text("defaults: [unclosed\n")

    with pytest.raises(ConfigError, match="Failed to parse"):
        ConfigLoader(config_path=str(config_file)).load()


def test_non_mapping_root(tmp_path):
    """Test that ConfigError is raised when the YAML root is not a mapping."""
    config_file = tmp_path / "config.yaml"
    config_file.write_text("- just\n- a list\n")

    with pytest.raises(ConfigError, match="mapping"):
        ConfigLoader(config_path=str(config_file)).load()


@pytest.mark.parametrize(
    "settings, getter",
    [
        ({"q": 1}, "get_q"),
        ({"q": "two"}, "get_q"),
        ({"budget": 0}, "get_budget"),
        ({"jobs": True}, "get_jobs"),
        ({"max_height": -1}, "get_max_height"),
        ({"primes": [2, 1]}, "get_primes"),
        ({"output": "csv"}, "get_output"),
    ],
)
def test_invalid_values_raise(settings, getter):
    """Test that each getter rejects values of the wrong type or range."""
    config = Config(profile="p", settings=settings)
    with pytest.raises(ConfigError):
        getattr(config, getter)()


def test_local_config_preferred(tmp_path, monkeypatch):
    """Test that ./.toricount/config.yaml is found before the user config."""
    local_dir = tmp_path / ".toricount"
    local_dir.mkdir()
    (local_dir / "config.yaml").write_text("defaults:\n  q: 11\n")
    monkeypatch.chdir(tmp_path)

    loader = ConfigLoader()

    assert loader.config_path.endswith(os.path.join(".toricount", "config.yaml"))
    assert loader.load().get_q() == 11
