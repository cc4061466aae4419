import json
import math
import os
import sys

# ctest points EMBZ_PYTHON_DIR at the freshly built module; an editable
# install would otherwise shadow it.
_build = os.environ.get("EMBZ_PYTHON_DIR")
if _build:
    sys.meta_path[:] = [f for f in sys.meta_path if "ScikitBuild" not in type(f).__name__]
    sys.path.insert(0, _build)

import numpy as np  # noqa: E402
import pytest  # noqa: E402

import embz  # noqa: E402


def test_spectrum_basics():
    s = embz.make_spectrum([0.4, 0.6])
    assert s.weights() == [0.6, 0.4]
    assert s.tail_mass == 0.0
    t = embz.tensor(s, embz.make_spectrum([0.7, 0.3]), 2)
    assert t.weights() == pytest.approx([0.42, 0.28], abs=1e-15)
    assert t.tail_mass == pytest.approx(0.30, abs=1e-12)
    assert t.tail_atom_bound == pytest.approx(0.18, abs=1e-12)
    assert json.loads(t.to_json())["tail_mass"] == pytest.approx(0.30)
    with pytest.raises(ValueError):
        embz.make_spectrum([0.5, 0.6])


def test_errors_and_bounds():
    pair = embz.TargetPair([1.0], [0.5, 0.5], 2)
    omega = embz.make_spectrum([1.0])
    assert embz.monopartite_error(omega, pair).lo == pytest.approx(1.0)
    assert embz.bipartite_error(omega, pair).lo == pytest.approx(math.sqrt(2 - math.sqrt(2)))
    assert embz.vdh_bound(2**10, 2) == pytest.approx(0.4)
    big = embz.truncate(embz.van_dam_hayden_spectrum(4096), 16)
    with pytest.raises(embz.BudgetError):
        embz.monopartite_error(big, pair)


def test_kappa_and_models():
    k = embz.kappa_estimate(embz.Spectrum.uniform(1024), 4)
    assert k["value"].lo == pytest.approx(1.5, abs=1e-9)
    c = np.asarray(embz.xy_correlation_matrix(8, 0.0, 0.0))
    assert c.shape == (8, 8)
    assert np.allclose(np.diag(c), 0.5)
    ed = embz.oracle.exact_diag_xy(8, 0.0, 0.0)
    ff = embz.xy_half_chain_spectrum(8, 0.0, 0.0, 4096)
    assert np.max(np.abs(np.array(ed.weights()) - np.array(ff.weights()))) < 1e-8


def test_oracle_small_suite():
    rep = embz.oracle.certify_mixed_pairs(5, 7)
    assert rep["pass"] and rep["instances"] == 5


def test_run_experiment(tmp_path):
    cfg = {"experiment": "vdh-table", "d_list": [2], "size_list": [4, 16, 256]}
    rec = embz.run_experiment(cfg, out_dir=tmp_path)
    assert [r["size"] for r in rec["rows"]] == [4, 16, 256]
    assert all(r["hi"] <= r["bound"] for r in rec["rows"])
    assert (tmp_path / "results.csv").read_text().startswith("size,d,lo,hi,bound,")
    assert embz.config_hash(cfg) == rec["config_hash"]
    again = embz.run_experiment(cfg, out_dir=tmp_path)
    assert again["rows"] == rec["rows"]
    with pytest.raises(ValueError):
        embz.run_experiment({"experiment": "vdh-table", "bogus": 1}, out_dir=tmp_path)
