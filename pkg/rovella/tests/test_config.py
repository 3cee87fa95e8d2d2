import os
import tempfile

import numpy as np
import pytest
import yaml

from rovella.config import ROVELLA_DEFAULT, ROVELLA_PARAMS, load_config, parse_map_key
from rovella.errors import ConfigError


def _dump(d, dirname):
    fp = os.path.join(dirname, "run.yml")
    with open(fp, "w") as f:
        yaml.safe_dump(d, f)
    return fp


def test_defaults():
    cfg = load_config()
    assert cfg.map == "rovella"
    assert cfg.method == "ulam"
    assert cfg.N == 1024 and cfg.n_push == 60
    assert cfg.roof == "flow"
    tg = cfg.t_grid()
    assert len(tg) == 81
    np.testing.assert_allclose(tg[[0, -1]], [-2., 2.], atol=1e-12)
    # every numeric default lies in its documented range
    for k, rng in ROVELLA_PARAMS.items():
        if isinstance(rng[0], str):
            assert ROVELLA_DEFAULT[k] in rng
        else:
            assert rng[0] <= ROVELLA_DEFAULT[k] <= rng[1]


def test_digest():
    a = load_config()
    assert a.digest() == load_config().digest()
    assert a.digest() == load_config(out="elsewhere").digest()
    assert a.digest() != load_config(seed=3).digest()


def test_file_merge():
    with tempfile.TemporaryDirectory() as d:
        cfg = load_config(_dump({"map": "pl:0.4,0.6", "method": "periodic-orbit", "alpha_grid": [0.6, 0.7]}, d))
    assert cfg.map == "pl:0.4,0.6"
    assert cfg.alpha_grid == (0.6, 0.7)
    assert cfg.N == ROVELLA_DEFAULT["N"]


def test_rejections():
    with tempfile.TemporaryDirectory() as d:
        for bad in ({"foo": 1}, {"N": 8}, {"method": "periodic-orbit"}, {"n": 2.5}, {"roof": -1},
                    {"t_min": 1.0, "t_max": 0.0}, {"map": "tent"}, {"jobs": 0}, {"holder_alpha": 1.0}):
            with pytest.raises(ConfigError):
                load_config(_dump(bad, d))
        fp = os.path.join(d, "broken.yml")
        with open(fp, "w") as f:
            f.write("a: [1, 2\n")
        with pytest.raises(ConfigError):
            load_config(fp)
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.yml")


def test_parse_map_key():
    assert parse_map_key("rovella") == ("rovella", None)
    assert parse_map_key("doubling") == ("pl", (0.5, 0.5))
    assert parse_map_key("pl:0.4,0.6") == ("pl", (0.4, 0.6))
    for bad in ("pl:0.4,0.5", "pl:1.0", "pl:a,b"):
        with pytest.raises(ConfigError):
            parse_map_key(bad)


def test_roof_value():
    with tempfile.TemporaryDirectory() as d:
        cfg = load_config(_dump({"roof": 2}, d))
    assert cfg.roof == 2.0


if __name__ == "__main__":
    test_defaults()
    test_digest()
    test_file_merge()
    test_rejections()
    test_parse_map_key()
    test_roof_value()
