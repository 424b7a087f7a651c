import io
import json
import random
import sys

import pytest

from helpers import FIXTURES
from invopt.cli import main


def run(argv, stdin=None, monkeypatch=None, capsys=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(argv)
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def fx(name):
    return str(FIXTURES / f"{name}.json")


@pytest.fixture
def cli(capsys, monkeypatch):
    return lambda argv, stdin=None: run(argv, stdin, monkeypatch, capsys)


def test_solve_examples(cli):
    code, doc, _ = cli(["solve", fx("fig5")])
    assert code == 0 and doc["optimum"] == "3/2" and doc["iterations"] == 2
    code, doc, _ = cli(["solve", fx("fig2")])
    assert code == 0 and doc["optimum"] == "1" and doc["p"]["ab"] == "-1"
    code, doc, err = cli(["solve", fx("fig1"), "--single"])
    assert code == 1 and doc["cycle"] == ["ab", "bc", "ca"] and err
    code, doc, _ = cli(["solve", fx("fig1")])
    assert code == 0 and doc["optimum"] == "1"


def test_solve_emits_witness_and_lp(cli):
    code, doc, _ = cli(["solve", fx("fig3"), "--emit-witness", "--emit-lp"])
    assert code == 0 and doc["witness"]["type"] == "multi-commodity-flow"
    assert len(doc["lp"]) >= 2 and all(isinstance(t, str) for t in doc["lp"])


def test_single_needs_one_weight(cli):
    code, _, err = cli(["solve", fx("fig2"), "--single"])
    assert code == 2 and "exactly one" in err


def _write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_verify_examples(cli, tmp_path):
    half = {"a1b1": "1/2", "a2b2": "1/2", "a3b3": "1/2"}
    code, doc, _ = cli(["verify", fx("fig4"), _write(tmp_path, "p.json", {"p": half})])
    assert code == 0 and doc["feasible"] and doc["norm"] == "3/2"
    code, doc, _ = cli(["verify", fx("fig4"), _write(tmp_path, "z.json", {"p": {}})])
    assert code == 1 and not doc["feasible"]
    reference = {"sa": "-1/2", "ab": "-1/2", "ct": "1/2"}
    code, doc, _ = cli(["verify", fx("fig3"), _write(tmp_path, "c.json", {"p": reference})])
    assert code == 0 and doc["norm"] == "3/2"


def test_verify_format_errors(cli, tmp_path):
    code, _, _ = cli(["verify", fx("fig4"), _write(tmp_path, "bad.json", {"p": {"zz": "1"}})])
    assert code == 2
    bad = tmp_path / "broken.json"
    bad.write_text("{")
    assert cli(["verify", fx("fig4"), str(bad)])[0] == 2
    assert cli(["solve", str(bad)])[0] == 2
    assert cli(["solve", str(tmp_path / "missing.json")])[0] == 2


def test_oracle_examples(cli):
    code, doc, _ = cli(["oracle", fx("fig3"), "--restrict=integral", "--bound=2"])
    assert code == 0 and doc["optimum"] == "2"
    code, doc, _ = cli(["oracle", fx("fig5"), "--restrict=none"])
    assert code == 0 and doc["optimum"] == "3/2" and doc["family_size"] == 16
    code, doc, _ = cli(["oracle", fx("fig2"), "--restrict=mild"])
    assert code == 0 and doc["optimum"] == "2"
    code, doc, _ = cli(["oracle", fx("fig5"), "--cap", "3"])
    assert code == 1 and doc["error"] == "family truncated"
    code, doc, _ = cli(["oracle", fx("regress_simple_vs_lp"), "--semantics", "flow"])
    assert code == 0 and doc["optimum"] == "8"


def test_adequacy_examples(cli):
    code, doc, _ = cli(["adequacy", fx("fig5")])
    assert code == 0 and doc["holds"]
    code, doc, _ = cli(["adequacy", fx("fig4")])
    assert code == 0 and doc["holds"]
    code, doc, _ = cli(["adequacy", fx("fig2")])
    assert code == 0 and not doc["holds"] and doc["violating"] == "ab"
    assert doc["counterexample_weight"]["ab"] == "-1"


def test_gen_examples(cli):
    code, doc, _ = cli(["gen", "path", "--vertices", "6", "--wmin", "0", "--wmax", "5", "--count", "1", "--seed", "7"])
    assert code == 0 and doc["kind"] == "path" and len(doc["vertices"]) == 6
    first = cli(["gen", "arborescence", "--vertices", "5", "--seed", "1"])
    second = cli(["gen", "arborescence", "--vertices", "5", "--seed", "1"])
    assert first == second
    assert cli(["gen", "matching", "--vertices", "5"])[0] == 2
    assert cli(["gen", "path", "--wmin", "-1"])[0] == 2


def test_stdin(cli):
    text = (FIXTURES / "fig2.json").read_text()
    code, doc, _ = cli(["solve", "-"], stdin=text)
    assert code == 0 and doc["optimum"] == "1"


SIZES = {"path": (2, 7), "matching": (1, 4), "arborescence": (2, 6)}


@pytest.mark.parametrize("kind", sorted(SIZES))
def test_pipeline_fuzz(kind, cli, tmp_path):
    """gen | solve | verify on 500 seeded instances per kind."""
    rng = random.Random(sum(map(ord, kind)))
    lo, hi = SIZES[kind]
    for seed in range(500):
        n = rng.randint(lo, hi)
        n = 2 * n if kind == "matching" else n
        wmin = 0 if kind == "path" else -3
        argv = ["gen", kind, "--vertices", str(n), "--k", str(rng.randint(1, 3)), "--wmin", str(wmin),
                "--wmax", "4", "--extra", str(rng.randint(0, 6)), "--seed", str(seed)]
        code, inst, _ = cli(argv)
        assert code == 0
        ipath = _write(tmp_path, "i.json", inst)
        code, sol, err = cli(["solve", ipath])
        assert code == 0, err
        ppath = _write(tmp_path, "p.json", {"p": sol["p"]})
        code, ver, err = cli(["verify", ipath, ppath])
        assert code == 0, (argv, ver, err)
        assert ver["norm"] == sol["optimum"]
