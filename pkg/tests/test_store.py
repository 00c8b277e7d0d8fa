import json
import threading

import numpy as np
import pytest

from hop.canonical import canonical_bytes
from hop.errors import SchemaError, StaleWriteError
from hop.motions import load_motion
from hop.store import MotionStore, check_motion_name

N = 20


def make_doc(name="sway", value=0.0):
    def kf(t, v):
        return {
            "t": t,
            "pos": [v] + [0.0] * (N - 1),
            "vel": [0.0] * N,
            "eff": [1.0] * N,
            "sup": {"l": 1.0, "r": 1.0},
        }

    return {"name": name, "keyframes": [kf(0.0, value), kf(1.0, -value)]}


def canonical_of(doc):
    return canonical_bytes(load_motion(doc).to_dict())


def test_save_load_round_trip(tmp_path):
    store = MotionStore(tmp_path)
    stamp = store.save("sway", make_doc())
    assert store.list() == {"sway": stamp}
    data, stamp2 = store.load_bytes("sway")
    assert stamp2 == stamp
    assert data == canonical_of(make_doc())
    motion, _ = store.load("sway")
    assert motion.name == "sway"
    assert motion.duration == 1.0


def test_noncanonical_input_stored_canonically(tmp_path):
    store = MotionStore(tmp_path)
    doc = make_doc(value=0.25)
    doc["keyframes"][0]["pos"][0] = 0.25  # ints elsewhere, floats here: same canon
    doc["keyframes"][0]["t"] = 0  # int zero
    store.save("sway", doc)
    data, _ = store.load_bytes("sway")
    assert data == canonical_of(make_doc(value=0.25))
    assert data.endswith(b"\n")


def test_unknown_name(tmp_path):
    store = MotionStore(tmp_path)
    with pytest.raises(KeyError):
        store.load_bytes("ghost")


@pytest.mark.parametrize("name", ["", "UPPER", "a/b", "../evil", "x" * 65, "1start", "sp ace"])
def test_bad_names_rejected(tmp_path, name):
    store = MotionStore(tmp_path)
    with pytest.raises(SchemaError):
        check_motion_name(name)
    with pytest.raises(SchemaError):
        store.save(name, make_doc(name=name))


def test_doc_name_must_match(tmp_path):
    store = MotionStore(tmp_path)
    with pytest.raises(SchemaError, match="does not match"):
        store.save("sway", make_doc(name="other"))


def test_invalid_doc_leaves_store_unchanged(tmp_path):
    store = MotionStore(tmp_path)
    store.save("sway", make_doc(value=0.5))
    before, stamp = store.load_bytes("sway")
    bad = make_doc(value=0.7)
    bad["keyframes"][1]["pos"] = [1.0] * (N - 1)  # wrong arity
    with pytest.raises(SchemaError):
        store.save("sway", bad)
    after, stamp2 = store.load_bytes("sway")
    assert after == before and stamp2 == stamp


def test_optimistic_concurrency(tmp_path):
    store = MotionStore(tmp_path)
    stamp = store.save("sway", make_doc(value=0.1))
    stamp2 = store.save("sway", make_doc(value=0.2), expected_mtime_ns=stamp)
    assert stamp2 != stamp or store.load_bytes("sway")[0] == canonical_of(make_doc(value=0.2))
    with pytest.raises(StaleWriteError):
        store.save("sway", make_doc(value=0.3), expected_mtime_ns=stamp)
    # unconditional write still goes through
    store.save("sway", make_doc(value=0.4))
    assert store.load_bytes("sway")[0] == canonical_of(make_doc(value=0.4))


def test_expected_stamp_on_missing_file(tmp_path):
    store = MotionStore(tmp_path)
    with pytest.raises(StaleWriteError):
        store.save("sway", make_doc(), expected_mtime_ns=12345)


def test_atomicity_under_injected_faults(tmp_path, monkeypatch):
    """Crash the write path at random points; the file must never tear."""
    import hop.store as store_mod

    store = MotionStore(tmp_path)
    committed = canonical_of(make_doc(value=0.0))
    store.save("sway", make_doc(value=0.0))

    real_replace = store_mod.os.replace
    real_fsync = store_mod.os.fsync
    plan = {"mode": "none"}

    def flaky_replace(src, dst):
        if plan["mode"] == "replace":
            raise OSError("injected crash before rename")
        return real_replace(src, dst)

    def flaky_fsync(fd):
        if plan["mode"] == "fsync":
            raise OSError("injected crash during write")
        return real_fsync(fd)

    monkeypatch.setattr(store_mod.os, "replace", flaky_replace)
    monkeypatch.setattr(store_mod.os, "fsync", flaky_fsync)

    rng = np.random.default_rng(7)
    modes = ["none", "replace", "fsync"]
    for i in range(1000):
        value = float(i) / 1000.0
        plan["mode"] = modes[rng.integers(0, 3)]
        candidate = canonical_of(make_doc(value=value))
        try:
            store.save("sway", make_doc(value=value))
        except OSError:
            pass
        else:
            committed = candidate
        data = (tmp_path / "sway.json").read_bytes()
        assert data == committed, f"torn write at iteration {i} (mode {plan['mode']})"
        load_motion(json.loads(data))  # still a valid document
        leftovers = [p for p in tmp_path.iterdir() if p.suffix == ".tmp"]
        assert not leftovers, f"temp files left behind: {leftovers}"


def test_concurrent_writers_and_reader(tmp_path):
    store = MotionStore(tmp_path)
    store.save("sway", make_doc(value=0.0))
    errors = []
    done = threading.Event()

    def writer(base):
        try:
            for k in range(40):
                store.save("sway", make_doc(value=base + k * 1e-4))
        except Exception as e:  # noqa: BLE001 - report into the main thread
            errors.append(e)

    def reader():
        try:
            while not done.is_set():
                data, _ = store.load_bytes("sway")
                load_motion(json.loads(data))
        except Exception as e:  # noqa: BLE001
            errors.append(e)

    threads = [threading.Thread(target=writer, args=(b / 10.0,)) for b in range(6)]
    rt = threading.Thread(target=reader)
    rt.start()
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    done.set()
    rt.join()
    assert not errors
    final, _ = store.load_bytes("sway")
    load_motion(json.loads(final))


def test_list_ignores_foreign_files(tmp_path):
    store = MotionStore(tmp_path)
    store.save("sway", make_doc())
    (tmp_path / "README.txt").write_text("not a motion")
    (tmp_path / "BAD NAME.json").write_text("{}")
    assert set(store.list()) == {"sway"}
