import json

import numpy as np
import pytest

from privalg import gallery, io
from privalg.algebra import diagonal_algebra, subspace_distance
from privalg.channel import choi, identity_channel
from privalg.symplectic import a2_channel


def test_matrix_round_trip():
    m = np.array([[1 + 2j, -0.5], [0, 1e-3j]])
    assert np.abs(io.decode_matrix(io.encode_matrix(m)) - m).max() < 1e-12
    assert np.abs(io.decode_matrix([[1, 0], [0, 1]]) - np.eye(2)).max() == 0


@pytest.mark.parametrize("bad", [[], [[1, 2], [3]], [["a"]], [[[1, 2, 3]]], 5])
def test_matrix_schema_errors(bad):
    with pytest.raises(io.SchemaError):
        io.decode_matrix(bad)


def test_algebra_round_trip():
    a = gallery.bit_flip(2).algebra
    b = io.decode_algebra(json.loads(json.dumps(io.encode_algebra(a))))
    assert subspace_distance(a, b) < 1e-10


def test_channel_round_trip_via_action():
    for ent in (gallery.phase_flip(2), gallery.schur(gallery.random_unit_vectors(3, 2, np.random.default_rng(0)))):
        e = io.decode_channel(json.loads(json.dumps(io.encode_channel(ent.channel))))
        assert e.distance(ent.channel) < 1e-10


def test_kraus_and_choi_kinds():
    ks = gallery.phase_flip(1).channel.kraus
    e = io.decode_channel({"kind": "kraus", "data": [io.encode_matrix(k) for k in ks]})
    assert e.distance(gallery.phase_flip(1).channel) < 1e-10
    j = choi(identity_channel(2))
    e = io.decode_channel({"kind": "choi", "codomain_dim": 2, "data": io.encode_matrix(j)})
    assert e.distance(identity_channel(2)) < 1e-12


def test_action_on_a_subalgebra_domain():
    n = diagonal_algebra(2)
    data = [[io.encode_matrix(b), io.encode_matrix(np.trace(b) * np.eye(2) / 2)] for b in n.basis]
    e = io.decode_channel({"kind": "action", "domain": io.encode_algebra(n), "data": data})
    assert e.domain.dim == 2


def test_channel_schema_errors():
    with pytest.raises(io.SchemaError, match="missing field 'kind'"):
        io.decode_channel({"data": []})
    with pytest.raises(io.SchemaError, match="kind"):
        io.decode_channel({"kind": "magic", "data": []})
    with pytest.raises(io.SchemaError, match="span"):
        io.decode_channel({"kind": "action", "data": [[io.encode_matrix(np.eye(2)), io.encode_matrix(np.eye(2))]]})


def test_descriptor_round_trip():
    d = a2_channel(1)
    e = io.decode_descriptor(json.loads(json.dumps(io.encode_descriptor(d))))
    assert np.abs(e.K - d.K).max() == 0 and np.abs(e.env.alpha - d.env.alpha).max() == 0


def test_malformed_json_reports_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"kind": "kraus",\n "data": [}')
    with pytest.raises(io.SchemaError, match="line 2, column"):
        io.load_json(p, "--channel")
    with pytest.raises(io.SchemaError, match="cannot read"):
        io.load_json(tmp_path / "missing.json", "--channel")


def test_dump_is_canonical():
    assert io.encode_matrix([[0.1 + 0.2]]) == [[[0.3, 0.0]]]
    assert io.dump_json({"b": 1, "a": 2}).index('"a"') < io.dump_json({"b": 1, "a": 2}).index('"b"')
