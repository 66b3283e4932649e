import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from algequiv import corpus
from algequiv.cli import main, parse_param
from algequiv.errors import AlgequivError


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


class TestVerdicts:
    def test_popov_omd(self):
        code, text = run("check-oracle", "popov.alg", "omd.alg")
        assert code == 0
        assert text.strip() == "equal: -eta*(2*z - 1)/(z*(z - 1))"

    def test_dr_admm_shift(self):
        code, text = run("check-shift", "dr.alg", "admm.alg")
        assert code == 0 and "m = (1,0)" in text

    def test_dr_admm_not_oracle_equivalent(self):
        code, text = run("check-oracle", "dr.alg", "admm.alg")
        assert code == 1 and text.startswith("not equal")

    def test_not_shift_equivalent(self):
        assert run("check-shift", "pd3o", "chambolle_pock")[0] == 2  # shapes differ
        assert run("check-shift", "pd3o", "pd3o_c", "--param", "a=1")[0] == 0
        assert run("check-shift", "two_step_a", "two_step_c")[0] == 1

    def test_json_certificate(self):
        code, text = run("check-shift", "pd3o_b", "pd3o", "--format", "json")
        assert code == 0
        assert json.loads(text) == {"equivalent": True, "m": [0, 1, 0],
                                    "b": {"0,1": 1, "0,2": 0, "1,0": -1, "1,2": -1, "2,0": 0}}

    def test_lft(self):
        args = ["check-lft", "davis_yin", "pd3o", "--param", "a=1", "--param", "tau=1/2", "--param", "sigma=2",
                "--param", "t=1/2", "--relation", "prox:prox_conj", "--channel", "2"]
        assert run(*args)[0] == 0
        args[-1] = "1"
        assert run(*args)[0] == 1


class TestFiles:
    def test_alg_files(self, tmp_path):
        for name in ("douglas_rachford", "admm"):
            (tmp_path / f"{name}.alg").write_text(corpus.source(name))
        code, _ = run("check-shift", str(tmp_path / "douglas_rachford.alg"), str(tmp_path / "admm.alg"))
        assert code == 0

    def test_emitted_source(self, tmp_path):
        path = tmp_path / "hb.alg"
        code, text = run("emit", "heavy_ball", "--name", "hb")
        path.write_text(text)
        assert run("check-oracle", str(path), "heavy_ball")[0] == 0

    def test_json_inputs(self, tmp_path):
        ss = corpus.realization("admm")
        (tmp_path / "ss.json").write_text(json.dumps(ss.to_json()))
        code, text = run("tf", str(tmp_path / "ss.json"), "--format", "json")
        assert code == 0
        (tmp_path / "tf.json").write_text(text)
        assert run("check-shift", "douglas_rachford", str(tmp_path / "tf.json"))[0] == 0

    def test_missing(self):
        assert run("tf", "no_such_algorithm")[0] == 2

    def test_bad_source(self, tmp_path, capsys):
        bad = tmp_path / "bad.alg"
        bad.write_text("x[k+1] = x[k]*x[k];")
        assert run("tf", str(bad))[0] == 2
        assert "NonlinearExpression" in capsys.readouterr().err


class TestOtherVerbs:
    def test_tf_with_params(self):
        code, text = run("tf", "heavy_ball", "--param", "alpha=1/5", "--param", "beta=1/2")
        assert code == 0 and text.strip() == "-2*z/(5*(z - 1)*(2*z - 1))"

    def test_enumerate(self):
        code, text = run("enumerate-shifts", "pd3o", "--cap", "3", "--format", "json")
        assert code == 0
        assert [e["m"] for e in json.loads(text)] == [[0, 0, 0], [0, 1, 0], [0, 1, 1]]

    def test_transform(self):
        code, text = run("transform-lft", "proximal_gradient", "--relation", "prox:prox_conj", "--channel", "2")
        assert code == 0 and "-t/(z - 1)" in text

    def test_minreal_needs_params(self, capsys):
        assert run("minreal", "heavy_ball")[0] == 2
        assert "--param alpha=..." in capsys.readouterr().err

    def test_minreal(self):
        code, text = run("minreal", "two_step_c", "--format", "json")
        assert code == 0 and len(json.loads(text)["A"]) == 1

    def test_emit_minimal(self):
        code, text = run("emit", "two_step_c", "--minimal", "--no-header")
        assert code == 0 and text.count("[k+1]") == 1

    def test_simulate_csv(self):
        code, text = run("simulate", "gradient_descent", "--oracle", "linear:2", "--x0", "1",
                         "--steps", "4", "--format", "csv")
        assert code == 0
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["k", "y1", "u1", "x1"]
        assert [Fraction(r[1]) for r in rows[1:]] == [Fraction(3, 5) ** k for k in range(4)]

    def test_simulate_random_oracles(self):
        code, text = run("simulate", "douglas_rachford", "--steps", "3", "--seed", "2", "--x0", "1,2,3",
                         "--format", "json")
        data = json.loads(text)
        assert code == 0 and len(data["y"]) == 3 and data["oracles"] == ["prox_f", "prox_g"]

    def test_simulate_needs_params(self):
        assert run("simulate", "heavy_ball")[0] == 2

    def test_corpus_list(self):
        code, text = run("corpus", "--format", "json")
        assert code == 0 and [e["name"] for e in json.loads(text)] == corpus.names()

    def test_bad_param(self):
        assert run("tf", "heavy_ball", "--param", "alpha=x")[0] == 2
        with pytest.raises(AlgequivError):
            parse_param("alpha")

    def test_bad_verb(self):
        assert run("frobnicate")[0] == 2


def test_console_script_is_byte_stable():
    outputs = set()
    for _ in range(2):
        res = subprocess.run(["algequiv", "tf", "pd3o"], capture_output=True, text=True, check=True)
        outputs.add(res.stdout)
    assert len(outputs) == 1
    res = subprocess.run([sys.executable, "-m", "algequiv.cli", "check-oracle", "dr", "admm"], capture_output=True)
    assert res.returncode == 1
