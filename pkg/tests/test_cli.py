import io
import json
import subprocess
import sys
from importlib import resources

import pytest

from polycap.cli import run

DATA = resources.files("polycap") / "data"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def report(*argv):
    code, out, err = call(*argv)
    assert code == 0, err
    return json.loads(out)


def write(tmp_path, doc, name="in.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_exact_permanent_identity():
    r = report("exact", "--input", str(DATA / "I3.json"), "--what", "permanent")
    assert r["result"]["value"] == "1"
    assert r["config"]["seed"] == 42


def test_exact_mixed_discriminant():
    r = report("exact", "--input", str(DATA / "det_pair.json"))
    assert r["result"]["what"] == "mixed-disc"


def test_perm_bounds_J3():
    r = report("perm-bounds", "--input", str(DATA / "J3.json"))["result"]
    assert r["coefficient_lower"] == pytest.approx(2 / 9, rel=1e-7)
    assert r["coefficient_lower"] <= 2 / 9
    assert r["coefficient_upper"] == pytest.approx(1.0)
    r2 = report("perm-bounds", "--input", str(DATA / "J3.json"), "--ordering", "identity")
    assert r2["config"]["ordering"] == "identity"


def test_capacity_and_scale():
    r = report("capacity", "--input", str(DATA / "regular34.json"), "--tol", "1e-7")
    assert r["result"]["cap_estimate"] == pytest.approx(81.0)
    assert r["config"]["tol"] == 1e-7
    r = report("scale", "--input", str(DATA / "J3.json"))
    assert r["result"]["converged"]


def test_approx_coef():
    r = report("approx-coef", "--input", str(DATA / "J3.json"))["result"]
    assert 1 - 1e-9 <= r["F"] <= 2
    r = report("approx-coef", "--input", str(DATA / "regular34.json"), "--improve", "1")["result"]
    assert r["k"] == 2


def test_support_and_newton():
    r = report("support", "--input", str(DATA / "non_submodular.json"), "--r", "1,1,1,1")["result"]
    assert r["in_support"]["holds"]
    r = report("newton", "--input", str(DATA / "I3.json"), "--point", "1.5,0.5,1")["result"]
    assert not r["holds"]


def test_indecomposable():
    r = report("indecomposable", "--input", str(DATA / "product_blocks.json"))["result"]
    assert not r["indecomposable"]["holds"]
    assert r["decomposition"]["verified"]
    r = report("indecomposable", "--input", str(DATA / "J3.json"))["result"]
    assert r["indecomposable"]["holds"] and r["decomposition"] is None


@pytest.mark.parametrize("kind", ["pos-hyperbolic", "af", "newton"])
def test_check_kinds(kind):
    r = report("check", "--input", str(DATA / "herm3.json"), "--kind", kind, "--trials", "10")
    assert r["result"]["passed"]
    assert r["config"]["trials"] == 10


def test_check_rejects_sum_of_squares():
    r = report("check", "--input", str(DATA / "sum_squares.json"), "--trials", "10")["result"]
    assert not r["passed"] and r["counterexample"]


def test_text_format():
    code, out, _ = call("exact", "--input", str(DATA / "I3.json"), "--format", "text")
    assert code == 0 and "result.value: 1" in out


def test_determinism():
    argv = ("capacity", "--input", str(DATA / "herm3.json"))
    assert call(*argv)[1] == call(*argv)[1]


def test_exit_codes(tmp_path):
    assert call("capacity", "--input", str(tmp_path / "missing.json"))[0] == 2
    bad = write(tmp_path, {"kind": "matrix", "n": 2, "entries": [[1, -1], [1, 1]]})
    code, _, err = call("capacity", "--input", bad)
    assert code == 2 and "negative" in err
    with pytest.raises(SystemExit) as exc:
        run(["frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        run(["capacity", "--input", bad, "--tol", "-1"])
    assert exc.value.code == 2
    assert call()[0] == 2
    big = write(tmp_path, {"kind": "matrix", "n": 25, "entries": [[1] * 25] * 25}, "big.json")
    assert call("exact", "--input", big)[0] == 3
    wrong = call("scale", "--input", str(DATA / "herm3.json"))
    assert wrong[0] == 2


def test_unattained_capacity_is_invalid_input(tmp_path):
    # decomposable input: capacity not attained, approximation refuses
    doc = write(tmp_path, {"kind": "matrix", "n": 2, "entries": [[1, 0], [1, 1]]})
    code, _, err = call("approx-coef", "--input", doc)
    assert code == 2 and "unattained" in err


def test_verify_quick():
    code, out, _ = call("verify", "--level", "quick", "--format", "text")
    assert code == 0
    assert out.count("[PASS]") == 11


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "polycap", "exact", "--input", str(DATA / "I3.json")],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert json.loads(res.stdout)["result"]["value"] == "1"
