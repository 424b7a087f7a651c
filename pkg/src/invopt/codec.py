"""JSON documents for deviations, witnesses and solver results; rationals travel as strings."""
from __future__ import annotations

import json

from .errors import InstanceError
from .graphs import DeviationVector, Instance
from .multi import FractionalCoverWitness, FractionalMatchingWitness, MultiCommodityWitness, MultiInverseResult
from .numeric import format_rational, parse_rational
from .single import SingleInverseResult


def _q(x):
    return format_rational(x)


def deviation_to_dict(p: DeviationVector) -> dict:
    return {"p": {e: _q(v) for e, v in p.values.items()}}


def deviation_from_dict(doc, instance: Instance) -> DeviationVector:
    if not isinstance(doc, dict) or not isinstance(doc.get("p"), dict):
        raise InstanceError('deviation document must look like {"p": {"id": "num/den", ...}}')
    values = {}
    for e, v in doc["p"].items():
        try:
            values[str(e)] = parse_rational(v)
        except (TypeError, ValueError) as exc:
            raise InstanceError(f"p[{e}]: {exc}") from exc
    try:
        return DeviationVector.of(instance, values)
    except (KeyError, ValueError) as exc:
        raise InstanceError(str(exc)) from exc


def parse_deviation(text, instance: Instance) -> DeviationVector:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON: {exc}") from exc
    return deviation_from_dict(doc, instance)


def _vectors(xs):
    return [{e: _q(v) for e, v in sorted(x.items())} for x in xs]


def witness_to_dict(witness) -> dict:
    if isinstance(witness, MultiCommodityWitness):
        return {"type": "multi-commodity-flow", "flows": _vectors(witness.flows), "objective": _q(witness.objective)}
    if isinstance(witness, FractionalMatchingWitness):
        return {"type": "fractional-matching", "x": _vectors(witness.x), "objective": _q(witness.objective)}
    if isinstance(witness, FractionalCoverWitness):
        return {
            "type": "fractional-cover",
            "x": _vectors(witness.x),
            "family": [{"commodity": i + 1, "set": sorted(Z)} for i, Z in witness.family],
            "objective": _q(witness.objective),
        }
    # single-weight path or matching witness: the competing solution
    return {"type": "solution", "elements": list(witness)}


def _parse_vectors(raw):
    return tuple({str(e): parse_rational(v) for e, v in x.items()} for x in raw)


def witness_from_dict(doc: dict):
    kind = doc.get("type")
    try:
        if kind == "multi-commodity-flow":
            return MultiCommodityWitness(_parse_vectors(doc["flows"]), parse_rational(doc["objective"]))
        if kind == "fractional-matching":
            return FractionalMatchingWitness(_parse_vectors(doc["x"]), parse_rational(doc["objective"]))
        if kind == "fractional-cover":
            family = tuple((int(m["commodity"]) - 1, frozenset(m["set"])) for m in doc["family"])
            return FractionalCoverWitness(_parse_vectors(doc["x"]), family, parse_rational(doc["objective"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceError(f"malformed witness: {exc}") from exc
    raise InstanceError(f"unknown witness type {kind!r}")


def result_to_dict(result, emit_witness: bool = False) -> dict:
    doc = {"optimum": _q(result.optimum)}
    doc.update(deviation_to_dict(result.p))
    if isinstance(result, MultiInverseResult):
        doc["iterations"] = result.iterations
    elif isinstance(result, SingleInverseResult):
        doc["p_source"] = result.p_source
    if emit_witness:
        doc["witness"] = witness_to_dict(result.witness)
    return doc


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"
