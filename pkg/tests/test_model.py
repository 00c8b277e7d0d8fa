import json

import numpy as np
import pytest

from hop.errors import SchemaError
from hop.model import (
    JOINT_NAMES,
    SCHEMA_VERSION,
    load_default_model,
    load_model,
    parse_model,
)


@pytest.fixture(scope="module")
def model():
    return load_default_model()


def minimal_doc():
    """Smallest valid document: trunk plus the 20 canonical joints."""
    links = [
        {
            "name": "trunk",
            "parent": None,
            "axis": None,
            "origin": [0, 0, 0],
            "mass": 1.0,
            "com": [0, 0, 0],
            "inertia": [0.01, 0.01, 0.01, 0, 0, 0],
        }
    ]
    axis_of = {"yaw": [0, 0, 1], "pitch": [0, 1, 0], "roll": [1, 0, 0]}
    for name in JOINT_NAMES:
        links.append(
            {
                "name": name,
                "parent": "trunk",
                "axis": axis_of[name.rsplit("_", 1)[-1]],
                "origin": [0, 0, -0.1],
                "mass": 0.1,
                "com": [0, 0, 0],
                "inertia": [1e-4, 1e-4, 1e-4, 0, 0, 0],
                "limits": [-3.0, 3.0],
            }
        )
    return {"schema_version": SCHEMA_VERSION, "name": "m", "links": links}


def test_default_model_shape(model):
    assert model.dof == 20
    assert model.joint_names == JOINT_NAMES
    assert len(model.links) > model.dof
    assert model.root == "trunk"


def test_default_model_mass_and_segments(model):
    assert model.total_mass() == pytest.approx(6.6, abs=1e-9)
    for side in ("l", "r"):
        thigh, shank, sole = model.leg_segments(side)
        assert thigh == pytest.approx(0.2)
        assert shank == pytest.approx(0.2)
        assert sole == pytest.approx(0.045)
        upper, fore = model.arm_segments(side)
        assert upper > 0 and fore > 0
    assert model.hip_offset("l")[1] == -model.hip_offset("r")[1]


def test_limits_array(model):
    lim = model.joint_limits()
    assert lim.shape == (20, 2)
    assert np.all(lim[:, 0] < lim[:, 1])


def test_inertia_matrix_symmetry(model):
    for link in model.links:
        m = link.inertia_matrix()
        assert np.allclose(m, m.T)


def test_parse_minimal_document():
    m = parse_model(minimal_doc())
    assert m.dof == 20


@pytest.mark.parametrize(
    "mutate, path_frag",
    [
        (lambda d: d.update(schema_version=99), "schema_version"),
        (lambda d: d.pop("name"), "name"),
        (lambda d: d["links"][0].update(mass=-1), "mass"),
        (lambda d: d["links"][1].update(axis=[0, 2, 0]), "axis"),
        (lambda d: d["links"][1].update(limits=[1.0, -1.0]), "limits"),
        (lambda d: d["links"][1].update(bogus=1), "links[1]"),
        (lambda d: d["links"][1].update(inertia=[1, 1]), "inertia"),
        (lambda d: d["links"][0].update(limits=[-1, 1]), "limits"),
    ],
)
def test_parse_rejections(mutate, path_frag):
    doc = minimal_doc()
    mutate(doc)
    with pytest.raises(SchemaError) as e:
        parse_model(doc)
    assert path_frag in str(e.value)


def test_parse_rejects_wrong_joint_set():
    doc = minimal_doc()
    doc["links"][1]["name"] = "weird_joint"
    with pytest.raises(SchemaError):
        parse_model(doc)


def test_parse_rejects_duplicate_and_orphan():
    doc = minimal_doc()
    doc["links"].append(dict(doc["links"][0], name="trunk"))
    with pytest.raises(SchemaError):
        parse_model(doc)
    doc = minimal_doc()
    doc["links"][3]["parent"] = "nowhere"
    with pytest.raises(SchemaError):
        parse_model(doc)


def test_load_rejects_bad_json(tmp_path):
    p = tmp_path / "m.json"
    p.write_text("{not json")
    with pytest.raises(SchemaError):
        load_model(p)


def test_load_round_trip(tmp_path, model):
    doc = json.load(open("src/hop/data/model.json"))
    p = tmp_path / "copy.json"
    p.write_text(json.dumps(doc))
    again = load_model(p)
    assert again.total_mass() == model.total_mass()
    assert again.joint_names == model.joint_names
