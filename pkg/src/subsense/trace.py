"""Elimination records, per-rule witnesses, and reduction reports."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

AC = "ac"
NS = "ns"
SS = "ss"
CNS = "cns"
SCSS = "scss"

RULES = (AC, NS, SS, CNS, SCSS)


@dataclass(frozen=True)
class AcWitness:
    """Value had no remaining support at this variable."""

    unsupported_at: int


@dataclass(frozen=True)
class NsWitness:
    """Substituting value compatible with everything the removed value was."""

    substitute: int


@dataclass(frozen=True)
class SsWitness:
    """Substitute plus, per constrained neighbour, the replacement value for
    each neighbour value the substitute is not directly compatible with."""

    substitute: int
    swaps: Mapping[int, Mapping[int, int]]


@dataclass(frozen=True)
class ScssCover:
    substitute: int
    conditioning_swap: int
    swaps: Mapping[int, Mapping[int, int]]


@dataclass(frozen=True)
class CnsWitness:
    """Conditioning variable plus a substitute for each of its compatible values."""

    conditioning: int
    covers: Mapping[int, int]


@dataclass(frozen=True)
class ScssWitness:
    conditioning: int
    covers: Mapping[int, ScssCover]


Witness = Union[AcWitness, NsWitness, SsWitness, CnsWitness, ScssWitness]


@dataclass(frozen=True)
class EliminationRecord:
    step: int  # 1-based ordinal within the trace
    rule: str
    variable: int
    value: int
    witness: Optional[Witness]


@dataclass
class Trace:
    instance: str
    steps: list[EliminationRecord] = field(default_factory=list)
    final_domains: Optional[list[list[int]]] = None

    def __len__(self) -> int:
        return len(self.steps)

    def count(self, rule: str) -> int:
        return sum(1 for rec in self.steps if rec.rule == rule)


@dataclass
class ReductionReport:
    """Outcome summary of one engine run.

    ``updates`` counts elementary work: during initialisation, one unit per
    membership probe of the defining set builders; afterwards, one unit per
    counter increment or decrement, set membership change, flag change, or
    worklist push.
    """

    instance: str
    rules: tuple[str, ...]
    eliminations: dict[str, int]
    updates: int
    micros: int
    initial_domain_sizes: tuple[int, ...]
    final_domain_sizes: tuple[int, ...]
    unsatisfiable: bool = False

    @property
    def total_eliminations(self) -> int:
        return sum(self.eliminations.values())


# -- trace JSON --------------------------------------------------------------

def _witness_to_json(w: Optional[Witness]):
    if w is None:
        return None
    if isinstance(w, AcWitness):
        return {"unsupported_at": w.unsupported_at}
    if isinstance(w, NsWitness):
        return {"substitute": w.substitute}
    if isinstance(w, SsWitness):
        return {
            "substitute": w.substitute,
            "swaps": {
                str(k): {str(d): e for d, e in emap.items()}
                for k, emap in w.swaps.items()
            },
        }
    if isinstance(w, CnsWitness):
        return {
            "conditioning": w.conditioning,
            "covers": {str(c): a for c, a in w.covers.items()},
        }
    if isinstance(w, ScssWitness):
        return {
            "conditioning": w.conditioning,
            "covers": {
                str(c): {
                    "substitute": cov.substitute,
                    "conditioning_swap": cov.conditioning_swap,
                    "swaps": {
                        str(k): {str(d): e for d, e in emap.items()}
                        for k, emap in cov.swaps.items()
                    },
                }
                for c, cov in w.covers.items()
            },
        }
    raise TypeError(f"unknown witness type {type(w)!r}")


def _witness_from_json(rule: str, obj) -> Optional[Witness]:
    if obj is None:
        return None
    if rule == AC:
        return AcWitness(unsupported_at=obj["unsupported_at"])
    if rule == NS:
        return NsWitness(substitute=obj["substitute"])
    if rule == SS:
        return SsWitness(
            substitute=obj["substitute"],
            swaps={
                int(k): {int(d): e for d, e in emap.items()}
                for k, emap in obj.get("swaps", {}).items()
            },
        )
    if rule == CNS:
        return CnsWitness(
            conditioning=obj["conditioning"],
            covers={int(c): a for c, a in obj.get("covers", {}).items()},
        )
    if rule == SCSS:
        return ScssWitness(
            conditioning=obj["conditioning"],
            covers={
                int(c): ScssCover(
                    substitute=cov["substitute"],
                    conditioning_swap=cov["conditioning_swap"],
                    swaps={
                        int(k): {int(d): e for d, e in emap.items()}
                        for k, emap in cov.get("swaps", {}).items()
                    },
                )
                for c, cov in obj.get("covers", {}).items()
            },
        )
    raise ValueError(f"unknown rule {rule!r}")


def trace_to_json_dict(trace: Trace) -> dict:
    obj = {
        "instance": trace.instance,
        "steps": [
            {
                "step": rec.step,
                "rule": rec.rule,
                "variable": rec.variable,
                "value": rec.value,
                "witness": _witness_to_json(rec.witness),
            }
            for rec in trace.steps
        ],
    }
    if trace.final_domains is not None:
        obj["final_domains"] = trace.final_domains
    return obj


def trace_from_json_dict(obj: dict) -> Trace:
    if not isinstance(obj, dict):
        raise ValueError("trace must be an object")
    extra = set(obj) - {"instance", "steps", "final_domains"}
    if extra:
        raise ValueError(f"trace has unknown keys: {sorted(extra)}")
    missing = {"instance", "steps"} - set(obj)
    if missing:
        raise ValueError(f"trace is missing keys: {sorted(missing)}")
    steps = []
    for rec in obj["steps"]:
        if not isinstance(rec, dict) or not {"rule", "variable", "value"} <= set(rec):
            raise ValueError("each trace step needs rule, variable and value")
        rule = rec["rule"]
        if rule not in RULES:
            raise ValueError(f"unknown rule {rule!r} in trace")
        steps.append(
            EliminationRecord(
                step=rec.get("step", len(steps) + 1),
                rule=rule,
                variable=rec["variable"],
                value=rec["value"],
                witness=_witness_from_json(rule, rec.get("witness")),
            )
        )
    return Trace(
        instance=obj["instance"],
        steps=steps,
        final_domains=obj.get("final_domains"),
    )


def dump_trace(trace: Trace, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(trace_to_json_dict(trace), fh, indent=2)
        fh.write("\n")


def load_trace(path) -> Trace:
    with open(path, "r", encoding="utf-8") as fh:
        return trace_from_json_dict(json.load(fh))
