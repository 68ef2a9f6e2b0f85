import io
import json
import math

import numpy as np
import pytest

from hafvf import config as cfgmod
from hafvf import streams
from hafvf.errors import ConfigError, InputError
from hafvf.expfam import BernoulliBeta, GaussianNIG, GaussianNIW, LinRegNIG
from hafvf.forgetting import BetaParams


def test_parse_text_comments_and_errors():
    raw = cfgmod.parse_text("# header\nfamily = nig  # trailing\n\nprior.kappa=2\n")
    assert raw == {"family": "nig", "prior.kappa": "2"}
    with pytest.raises(ConfigError, match="cfg:2"):
        cfgmod.parse_text("family = nig\nnot a pair\n", "cfg")
    with pytest.raises(ConfigError):
        cfgmod.parse_text("= 3")


@pytest.mark.parametrize("name", sorted(cfgmod.PRESETS))
def test_presets_build(name):
    raw = cfgmod.PRESETS[name]
    fam = LinRegNIG(3) if raw["family"] == "linreg" else None
    hc = cfgmod.build(raw, fam)
    assert hc.family.name == raw["family"]


def test_build_fields():
    hc = cfgmod.build(cfgmod.PRESETS["fixed-decay"])
    assert hc.levels == 2 and hc.fixed_b == 0.75
    assert hc.phi_0 == BetaParams(0.9, 0.1)
    assert BernoulliBeta().pseudo_counts(hc.theta_0) == (1.0, 1.0)
    hc = cfgmod.build({"family": "nig", "dim": "2", "prior.mu": "1,2", "prior.b": "0.5", "ncvmp.damping": "0.3"})
    assert hc.family.dim == 2 and hc.controls.damping == 0.3
    np.testing.assert_allclose(hc.family.standard(hc.theta_0)["mu"], [1.0, 2.0])


def test_raw_prior_form():
    hc = cfgmod.build({"family": "bernoulli", "prior.xi": "2", "prior.eta": "5"})
    assert BernoulliBeta().pseudo_counts(hc.theta_0) == (2.0, 3.0)
    with pytest.raises(ConfigError, match="prior.xi"):
        cfgmod.build({"family": "bernoulli", "prior.xi": "6", "prior.eta": "5"})
    with pytest.raises(ConfigError, match="prior.xi"):
        cfgmod.build({"family": "bernoulli", "prior.xi": "1,2", "prior.eta": "5"})


@pytest.mark.parametrize(
    "raw,match",
    [
        ({"family": "bernoulli", "bogus": "1"}, "bogus"),
        ({"family": "bernoulli", "prior.mu": "1"}, "prior.mu"),
        ({"family": "bernoulli", "gamma": "abc"}, "gamma"),
        ({"family": "bernoulli", "gamma": "nan"}, "gamma"),
        ({"family": "bernoulli", "levels": "2.5"}, "levels"),
        ({"family": "bernoulli", "w.prior.alpha": "-1"}, "w.prior"),
        ({"family": "nig", "prior.kappa": "0"}, "prior"),
        ({"family": "niw", "dim": "2", "prior.scale": "1,2,3"}, "prior.scale"),
        ({"family": "poisson"}, "poisson"),
    ],
)
def test_config_errors_name_the_field(raw, match):
    with pytest.raises(ConfigError, match=match):
        cfgmod.build(raw)


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        cfgmod.load(str(tmp_path / "none.cfg"))


def test_rows_csv_with_header_and_jsonl():
    rows = streams.parse_rows("x,y\n1,2\n\n3,4\n", "csv")
    assert [r.values for r in rows] == [[1.0, 2.0], [3.0, 4.0]]
    assert [r.line for r in rows] == [2, 4]
    rows = streams.parse_rows('[1, 2]\n{"x": [3, 4]}\n', "jsonl")
    fam = GaussianNIG(2)
    np.testing.assert_array_equal(streams.observation(fam, rows[1]), [3.0, 4.0])
    with pytest.raises(InputError, match="line 2"):
        streams.parse_rows("1,2\n3,a\n", "csv")
    with pytest.raises(InputError, match="line 1"):
        streams.parse_rows("{bad\n", "jsonl")


def test_detect_format():
    assert streams.detect_format("a.jsonl", "") == "jsonl"
    assert streams.detect_format("a.csv", "[1]") == "csv"
    assert streams.detect_format("-", "\n  [1, 2]\n") == "jsonl"
    assert streams.detect_format("-", "1,2\n") == "csv"


def test_observation_checks():
    b = BernoulliBeta()
    with pytest.raises(InputError, match="line 3"):
        streams.observation(b, streams.Row(3, [0.5]))
    with pytest.raises(InputError, match="line 4"):
        streams.observation(GaussianNIW(2), streams.Row(4, [1.0, 2.0, 3.0]))
    with pytest.raises(InputError, match="non-finite"):
        streams.observation(GaussianNIG(1), streams.Row(1, [math.inf]))
    u, y = streams.observation(LinRegNIG(2), streams.Row(1, {"u": [1, 2], "y": 3}))
    assert u.tolist() == [1.0, 2.0] and y == 3.0
    with pytest.raises(InputError):
        streams.observation(LinRegNIG(2), streams.Row(1, [1.0, 2.0]))


def test_infer_dim():
    assert streams.infer_dim("niw", [streams.Row(1, [1.0, 2.0, 3.0])]) == 3
    assert streams.infer_dim("linreg", [streams.Row(1, [1.0, 2.0, 3.0])]) == 2
    assert streams.infer_dim("niw", []) is None
    assert streams.infer_dim("bernoulli", [streams.Row(1, [1.0])]) is None


def test_dumps_round_trip():
    rec = {"a": 0.1, "b": [1.0 / 3.0, math.inf], "c": None, "d": True, "e": np.float64(2.5), "f": np.arange(2)}
    text = streams.dumps(rec)
    back = json.loads(text)
    assert back["a"] == 0.1 and back["b"] == [1.0 / 3.0, None]
    assert back["c"] is None and back["d"] is True and back["e"] == 2.5 and back["f"] == [0, 1]
    buf = io.StringIO()
    assert streams.write_records([rec, rec], buf) == 2
    assert buf.getvalue().count("\n") == 2


def test_read_changes(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"changes": [40, 80]}')
    assert streams.read_changes(str(p)) == {40, 80}
    p.write_text("3\n7\n")
    assert streams.read_changes(str(p)) == {3, 7}
    p.write_text("x y")
    with pytest.raises(InputError):
        streams.read_changes(str(p))
    with pytest.raises(InputError):
        streams.read_text(str(tmp_path / "missing"))
