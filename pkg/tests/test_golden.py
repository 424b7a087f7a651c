"""Byte-for-byte comparison of CLI output against the shipped golden corpus.

Regenerate with:  invopt solve fixtures/figN.json --emit-witness > golden/figN.solve.json
                  invopt adequacy fixtures/figN.json > golden/figN.adequacy.json
"""
import json
from fractions import Fraction

import pytest

from helpers import FIXTURES, GOLDEN, fixture
from invopt.codec import witness_from_dict
from invopt.cli import main
from invopt.multi import verify_witness

NAMES = ["fig1", "fig2", "fig3", "fig4", "fig5"]


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("command,extra", [("solve", ["--emit-witness"]), ("adequacy", [])])
def test_golden_output(name, command, extra, capsys):
    code = main([command, str(FIXTURES / f"{name}.json"), *extra])
    out = capsys.readouterr().out
    assert code == 0
    assert out == (GOLDEN / f"{name}.{command}.json").read_text()


@pytest.mark.parametrize("name", NAMES)
def test_golden_witness_verifies(name):
    doc = json.loads((GOLDEN / f"{name}.solve.json").read_text())
    verdict = verify_witness(fixture(name), witness_from_dict(doc["witness"]))
    assert verdict.ok and verdict.objective == Fraction(doc["optimum"])
