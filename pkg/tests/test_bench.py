import json

import pytest

from hesynth import bench
from hesynth.bench import ConfigError


def test_run_config_validation():
    rc = bench.run_config_from_dict({"kernel": "gx", "synth": {"seed": 3}, "cost_model": {"lat_rotate": 2}})
    assert rc.synth_config().seed == 3 and rc.cost_model.lat_rotate == 2
    for bad in ({"kernel": "nope"}, {"kernel": "gx", "colour": 1}, {"kernel": "gx", "synth": {"speed": 1}},
                {"kernel": "gx", "sizes": []}, {"kernel": "gx", "cost_model": {"lat_rotate": -1}}, 42):
        with pytest.raises(ConfigError):
            bench.run_config_from_dict(bad)


def test_ring_override():
    rc = bench.run_config_from_dict({"kernel": "dot_product", "sizes": {"n": 4}, "ring": {"N": 16}})
    spec, _ = rc.build()
    assert spec.N == 16


def test_bad_sizes_surface_as_config_error():
    rc = bench.run_config_from_dict({"kernel": "dot_product", "sizes": {"n": 4, "depth": 2}})
    with pytest.raises(ConfigError):
        rc.build()


def test_suite_overrides():
    configs, pipes, pcfg = bench.suite_from_dict({"kernels": ["gx", {"kernel": "gy"}], "pipelines": ["sobel"]},
                                                 seed=9, optimize=False)
    assert [c.kernel for c in configs] == ["gx", "gy"]
    assert all(c.synth_config().seed == 9 and not c.synth_config().optimize for c in configs)
    assert pipes == ["sobel"] and pcfg.seed == 9
    with pytest.raises(ConfigError):
        bench.suite_from_dict({"pipelines": ["nope"]})


def test_rows_and_table():
    configs, pipes, pcfg = bench.suite_from_dict({"kernels": ["box_blur", "linear_regression"]})
    rows = bench.run_suite(configs)
    assert [r["kernel"] for r in rows] == ["box_blur", "linear_regression"]
    assert all(r["passed"] and r["verified"] for r in rows)
    table = bench.format_table(rows)
    assert "box_blur" in table and "PASS" in table
    text = bench.report_json(rows)
    assert json.loads(text)["rows"][0]["synthesized"]["instructions"] == 4
    assert "elapsed" not in text and "total_time" not in text


def test_failed_row_does_not_abort():
    bad = bench.RunConfig("box_blur", synth={"L_max": 1})
    good = bench.RunConfig("linear_regression")
    rows = bench.run_suite([bad, good])
    assert not rows[0]["passed"] and rows[0]["error"]
    assert rows[1]["passed"]


def test_load_json_errors(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        bench.load_json(p)
    with pytest.raises(ConfigError):
        bench.load_json(tmp_path / "missing.json")
