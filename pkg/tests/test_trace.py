"""Trace records and their JSON round trip."""

import pytest

from subsense import (
    AcWitness,
    CnsWitness,
    EliminationRecord,
    NsWitness,
    ScssCover,
    ScssWitness,
    SsWitness,
    Trace,
    cns_to_convergence,
    generators,
    scss_to_convergence,
    ss_to_convergence,
    trace_from_json_dict,
    trace_to_json_dict,
)
from subsense import dump_trace, load_trace


def test_round_trip_of_every_witness_shape():
    steps = [
        EliminationRecord(1, "ac", 0, 1, AcWitness(unsupported_at=2)),
        EliminationRecord(2, "ns", 1, 0, NsWitness(substitute=2)),
        EliminationRecord(3, "ss", 2, 3, SsWitness(substitute=1, swaps={0: {1: 2}})),
        EliminationRecord(4, "cns", 0, 0, CnsWitness(conditioning=1, covers={2: 1})),
        EliminationRecord(
            5,
            "scss",
            1,
            2,
            ScssWitness(
                conditioning=0,
                covers={1: ScssCover(substitute=0, conditioning_swap=2, swaps={2: {0: 1}})},
            ),
        ),
        EliminationRecord(6, "scss", 2, 0, None),
    ]
    trace = Trace("mixed", steps, final_domains=[[0], [1], [2]])
    back = trace_from_json_dict(trace_to_json_dict(trace))
    assert back == trace


def test_engine_traces_round_trip(tmp_path):
    for run in (
        ss_to_convergence(generators.figure1a()),
        cns_to_convergence(generators.figure1b()),
        scss_to_convergence(generators.figure1c()),
    ):
        trace = run[1]
        assert trace_from_json_dict(trace_to_json_dict(trace)) == trace
        path = tmp_path / "trace.json"
        dump_trace(trace, path)
        assert load_trace(path) == trace


def test_trace_without_final_domains():
    trace = Trace("t", [])
    obj = trace_to_json_dict(trace)
    back = trace_from_json_dict(obj)
    assert back.final_domains is None
    assert back == trace


def test_trace_rejects_malformed_objects():
    good = trace_to_json_dict(Trace("t", []))
    bad = dict(good)
    bad["surprise"] = 1
    with pytest.raises(ValueError):
        trace_from_json_dict(bad)
