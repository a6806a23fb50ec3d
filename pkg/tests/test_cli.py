import json

import numpy as np
import pytest

from mqgm import io
from mqgm.cli import main
from mqgm.features import Dataset
from mqgm.model import EdgeSet, load_model


@pytest.fixture
def ring_dir(tmp_path):
    assert main(["synth", "ring", "--n", "120", "--seed", "7", "--out", str(tmp_path)]) == 0
    return tmp_path


class TestIO:
    def test_csv_roundtrip(self, tmp_path):
        ds = Dataset(np.array([[0.1, 1e-17], [1 / 3, -2.5]]), X=np.array([[4.0], [5.0]]),
                     names=("a", "b"), exo_names=("z",))
        p = tmp_path / "d.csv"
        io.write_dataset_csv(p, ds)
        again = io.read_csv(p, exo=["z"])
        np.testing.assert_array_equal(again.Y, ds.Y)
        np.testing.assert_array_equal(again.X, ds.X)
        assert again.names == ("a", "b") and again.exo_names == ("z",)

    @pytest.mark.parametrize("text, msg", [("", "header"), ("a,b\n1,\n2,3\n", "missing"),
                                           ("a,b\n1,x\n2,3\n", "non-numeric"), ("a,a\n1,2\n3,4\n", "duplicate"),
                                           ("a,b\n1,2,3\n", "fields")])
    def test_bad_csv(self, tmp_path, text, msg):
        p = tmp_path / "bad.csv"
        p.write_text(text)
        with pytest.raises(ValueError, match=msg):
            io.read_csv(p)

    def test_missing_exo_column(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("a,b,c\n1,2,3\n4,5,7\n")
        with pytest.raises(ValueError, match="not found"):
            io.read_csv(p, exo=["q"])

    def test_edges_json(self):
        e = EdgeSet.from_pairs(3, [(0, 2)])
        obj = io.edges_to_json(e, ["a", "b", "c"])
        assert obj["edge_names"] == [["a", "c"]]
        assert io.edges_from_json(obj).pairs() == [(0, 2)]
        with pytest.raises(ValueError):
            io.edges_from_json({"d": 2, "edges": [[0, 2]]})


class TestSynth:
    def test_ring(self, ring_dir):
        ds = io.read_csv(ring_dir / "data.csv")
        assert (ds.n, ds.d) == (120, 4)
        assert io.read_json(ring_dir / "truth.json")["edges"] == [[0, 1]]
        assert io.read_json(ring_dir / "descriptor.json")["seed"] == 7

    def test_gaussian(self, tmp_path):
        assert main(["synth", "gaussian", "--d", "12", "--n", "30", "--edge-prob", "0.2", "--seed", "1",
                     "--out", str(tmp_path)]) == 0
        assert io.read_json(tmp_path / "truth.json")["d"] == 12

    def test_odd_autoregressive(self, tmp_path, capsys):
        assert main(["synth", "autoregressive", "--d", "5", "--out", str(tmp_path)]) == 2
        assert "even" in capsys.readouterr().err

    def test_unknown_generator(self, capsys):
        assert main(["synth", "spiral"]) == 2
        assert "usage" in capsys.readouterr().err


class TestFit:
    def test_fit_and_diagnostics(self, ring_dir):
        model_path = ring_dir / "model.json"
        diag_path = ring_dir / "diag.json"
        rc = main(["fit", "--data", str(ring_dir / "data.csv"), "--out", str(model_path), "--m", "5",
                   "--r", "9", "--diagnostics", str(diag_path), "--strengths-csv", str(ring_dir / "s.csv")])
        assert rc == 0
        model = load_model(model_path)
        assert model.d == 4 and model.grid.r == 9
        diag = io.read_json(diag_path)
        assert len(diag["fits"]) == 4 and {"iterations", "converged", "objective"} <= set(diag["fits"][0])
        assert io.read_csv(ring_dir / "s.csv").Y.shape == (4, 4)

    def test_huge_lambda(self, ring_dir):
        out = ring_dir / "m.json"
        assert main(["fit", "--data", str(ring_dir / "data.csv"), "--out", str(out), "--m", "3", "--r", "3",
                     "--lambda1", "1e6"]) == 0
        assert all(f["blocks"] == {} for f in json.loads(out.read_text())["fits"])

    def test_nonconvergence_warns(self, ring_dir, capsys):
        out = ring_dir / "m.json"
        rc = main(["fit", "--data", str(ring_dir / "data.csv"), "--out", str(out), "--m", "3", "--r", "3",
                   "--max-iters", "2", "--lambda-frac", "0.1", "--diagnostics", str(ring_dir / "d.json")])
        assert rc == 0
        assert "not converged" in capsys.readouterr().err
        assert io.read_json(ring_dir / "d.json")["warning"]

    def test_missing_file(self, tmp_path):
        assert main(["fit", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "m.json")]) == 2

    def test_exogenous(self, tmp_path):
        rng = np.random.default_rng(0)
        x = rng.normal(size=60)
        ds = Dataset(np.column_stack([x + rng.normal(size=60) * 0.1, rng.normal(size=60)]), X=x[:, None],
                     names=("a", "b"), exo_names=("temp",))
        io.write_dataset_csv(tmp_path / "d.csv", ds)
        assert main(["fit", "--data", str(tmp_path / "d.csv"), "--exo", "temp", "--out",
                     str(tmp_path / "m.json"), "--m", "2", "--r", "3"]) == 0
        model = load_model(tmp_path / "m.json")
        assert model.exo_names == ("temp",)
        assert main(["sample", "--model", str(tmp_path / "m.json"), "--out", str(tmp_path / "s.csv"),
                     "--n", "5", "--x", "0.5"]) == 0
        assert main(["sample", "--model", str(tmp_path / "m.json"), "--out", str(tmp_path / "s.csv"),
                     "--n", "5"]) == 2


class TestSampleEval:
    @pytest.fixture
    def fitted(self, ring_dir):
        main(["fit", "--data", str(ring_dir / "data.csv"), "--out", str(ring_dir / "model.json"), "--m", "4",
              "--r", "7"])
        return ring_dir

    def test_sample_shape(self, fitted):
        out = fitted / "s.csv"
        assert main(["sample", "--model", str(fitted / "model.json"), "--out", str(out), "--n", "40",
                     "--burn-in", "10", "--thin", "2", "--seed", "3"]) == 0
        assert io.read_csv(out).Y.shape == (40, 4)

    def test_bad_init_length(self, fitted):
        assert main(["sample", "--model", str(fitted / "model.json"), "--out", str(fitted / "s.csv"),
                     "--init", "1,2"]) == 2

    def test_eval_auc_model(self, fitted):
        out = fitted / "auc.json"
        assert main(["eval", "auc", "--model", str(fitted / "model.json"), "--truth",
                     str(fitted / "truth.json"), "--out", str(out)]) == 0
        assert 0.0 <= io.read_json(out)["methods"]["mqgm"]["auc"] <= 1.0

    def test_eval_auc_path(self, fitted):
        out = fitted / "auc.json"
        assert main(["eval", "auc", "--data", str(fitted / "data.csv"), "--truth", str(fitted / "truth.json"),
                     "--path", "4", "--m", "3", "--r", "3", "--out", str(out), "--table",
                     str(fitted / "t.csv")]) == 0
        rep = io.read_json(out)
        assert set(rep["methods"]) == {"mqgm", "mb", "laplace"}
        assert all(0 <= v["auc"] <= 1 for v in rep["methods"].values())

    def test_eval_calibration(self, fitted):
        out = fitted / "cal.json"
        assert main(["eval", "calibration", "--data", str(fitted / "data.csv"), "--methods", "mb,laplace",
                     "--path", "3", "--out", str(out), "--tidy-csv", str(fitted / "tidy.csv")]) == 0
        rep = io.read_json(out)
        assert rep["methods"]["mb"]["tv"] >= 0
        assert (fitted / "tidy.csv").read_text().startswith("method,target,given,bin,quantile_level,value")

    def test_eval_recovery(self, tmp_path):
        out = tmp_path / "rec.json"
        assert main(["eval", "recovery", "--trials", "1", "--n", "60", "--methods", "mb", "--path", "3",
                     "--out", str(out)]) == 0
        assert io.read_json(out)["methods"]["mb"]["rate"] in (0.0, 1.0)

    def test_dimension_mismatch(self, fitted, tmp_path):
        main(["synth", "gaussian", "--d", "6", "--n", "30", "--out", str(tmp_path)])
        rc = main(["eval", "calibration", "--data", str(tmp_path / "data.csv"), "--model",
                   str(fitted / "model.json"), "--out", str(tmp_path / "c.json")])
        assert rc == 2

    def test_unknown_method(self, fitted):
        assert main(["eval", "auc", "--data", str(fitted / "data.csv"), "--truth", str(fitted / "truth.json"),
                     "--methods", "glasso", "--out", str(fitted / "a.json")]) == 2


class TestConfig:
    def test_config_defaults(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"n": 33, "seed": 2}))
        assert main(["synth", "ring", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        assert io.read_csv(tmp_path / "data.csv").n == 33

    def test_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        assert main(["synth", "ring", "--config", str(cfg), "--out", str(tmp_path)]) == 2
        assert "bogus" in capsys.readouterr().err


def test_pipeline_deterministic(tmp_path):
    digests = []
    for run in ("a", "b"):
        d = tmp_path / run
        assert main(["synth", "ring", "--n", "80", "--seed", "5", "--out", str(d)]) == 0
        assert main(["fit", "--data", str(d / "data.csv"), "--out", str(d / "model.json"), "--m", "3",
                     "--r", "5", "--diagnostics", str(d / "diag.json")]) == 0
        assert main(["sample", "--model", str(d / "model.json"), "--out", str(d / "s.csv"), "--n", "30",
                     "--seed", "3"]) == 0
        assert main(["eval", "auc", "--model", str(d / "model.json"), "--truth", str(d / "truth.json"),
                     "--out", str(d / "auc.json")]) == 0
        digests.append([(d / f).read_bytes() for f in ("data.csv", "truth.json", "model.json", "diag.json",
                                                       "s.csv", "auc.json")])
    assert digests[0] == digests[1]
