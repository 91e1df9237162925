import json

import pytest

from ozlab.config import DEFAULTS, model_from_config, validate_config
from ozlab.errors import UsageError

BASE = {"dim": 2, "couplings": [{"v": [1, 0], "J": 1.0}, {"v": [0, 1], "J": 0.5}],
        "beta": 0.3, "extents": [8, 8]}


def test_defaults_and_symmetric_fill():
    cfg = validate_config(json.dumps(BASE))
    for k, v in DEFAULTS.items():
        assert cfg[k] == v
    vs = {tuple(c["v"]): c["J"] for c in cfg["couplings"]}
    assert vs == {(1, 0): 1.0, (-1, 0): 1.0, (0, 1): 0.5, (0, -1): 0.5}
    model, lattice = model_from_config(cfg)
    assert model.couplings[(0, -1)] == 0.5 and lattice.extents == (8, 8)


@pytest.mark.parametrize("patch,key", [
    ({"beta": "hot"}, "beta"),
    ({"extents": [8]}, "extents"),
    ({"couplings": [{"v": [1, 0], "J": -1}]}, "couplings.0.J"),
    ({"couplings": [{"v": [0, 0], "J": 1}]}, "couplings.0.v"),
    ({"delta": 1.5}, "delta"),
    ({"colour": "red"}, "<root>"),
])
def test_bad_keys_named(patch, key):
    with pytest.raises(UsageError, match=f"config key {key}"):
        validate_config({**BASE, **patch})


def test_asymmetric_couplings():
    bad = {**BASE, "couplings": [{"v": [1, 0], "J": 1.0}, {"v": [-1, 0], "J": 0.5}]}
    with pytest.raises(UsageError, match="J_v = J_-v"):
        validate_config(bad)


def test_missing_key_and_bad_json():
    cfg = dict(BASE)
    del cfg["beta"]
    with pytest.raises(UsageError, match="beta"):
        validate_config(cfg)
    with pytest.raises(UsageError, match="JSON"):
        validate_config("{")
