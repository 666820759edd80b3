import json

import numpy as np
import pytest

from emgcombo.dataset import (
    CorruptSessionError,
    ExampleSet,
    MissingFieldError,
    Provenance,
    SessionVersionError,
    StructureError,
    load_session,
    load_sessions,
    save_session,
    session_paths,
    split_session,
)
from emgcombo.labels import LabelKind, is_double
from emgcombo.simgen import SimulatorConfig, generate_session


def test_train_holds_only_calibration_singles(split):
    assert not is_double(split.train.y).any()
    assert set(split.train.block_tag) == {"Calibration"}


def test_test_split_comes_from_two_final_blocks(split):
    assert set(split.test.block_tag) == {"HP3", "SP3"}
    assert split.test_blocks == ("HP3", "SP3")


def test_special_holds_singles_and_doubles(split):
    assert set(split.special.block_tag) == {"HP1", "HP2", "SP1", "SP2"}
    assert LabelKind.Double in split.special.kinds()
    assert LabelKind.SingleDirection in split.special.kinds()


def test_split_parts_are_disjoint(session, split):
    n_total = sum(t.n_windows for b in session.blocks for t in b.trials)
    assert len(split.train) + len(split.special) + len(split.test) == n_total
    tags = [set(p.block_tag) for p in (split.train, split.special, split.test)]
    assert not (tags[0] & tags[1] or tags[1] & tags[2] or tags[0] & tags[2])


def test_accidental_calibration_double_is_filtered(session):
    from copy import deepcopy

    s = deepcopy(session)
    s.blocks[0].trials[0].window_labels = np.zeros_like(s.blocks[0].trials[0].window_labels)  # Up,Pinch
    sp = split_session(s)
    assert not is_double(sp.train.y).any()


def test_noncanonical_layout_rejected(session):
    from copy import copy

    s = copy(session)
    s.blocks = session.blocks[:-1]
    with pytest.raises(StructureError):
        split_session(s)


def test_save_load_round_trip(tmp_path, session):
    save_session(session, tmp_path / "a")
    assert load_session(tmp_path / "a") == session


def test_save_load_save_is_byte_identical(tmp_path, session):
    h1 = save_session(session, tmp_path / "one" / "s")
    h2 = save_session(load_session(h1), tmp_path / "two" / "s")
    for a, b in zip(session_paths(h1), session_paths(h2)):
        if a.exists():
            assert a.read_bytes() == b.read_bytes()
    assert not list((tmp_path / "one").glob("*.tmp"))


def test_raw_windows_round_trip(tmp_path):
    s = generate_session(SimulatorConfig(seed=2, keep_raw=True, calibration_s=0.25, held_s=0.25, pulsed_s=0.25, rest_s=0.25))
    save_session(s, tmp_path / "r")
    assert session_paths(tmp_path / "r")[2].exists()
    assert load_session(tmp_path / "r") == s


def test_truncated_features_file(tmp_path, session):
    save_session(session, tmp_path / "t")
    csv_path = session_paths(tmp_path / "t")[1]
    data = csv_path.read_bytes()
    csv_path.write_bytes(data[: len(data) // 2])
    with pytest.raises(CorruptSessionError):
        load_session(tmp_path / "t")


def test_future_schema_version(tmp_path, session):
    h = save_session(session, tmp_path / "v")
    header = json.loads(h.read_text())
    header["schema_version"] = 99
    h.write_text(json.dumps(header))
    with pytest.raises(SessionVersionError):
        load_session(h)


def test_missing_header_field(tmp_path, session):
    h = save_session(session, tmp_path / "m")
    header = json.loads(h.read_text())
    del header["blocks"]
    h.write_text(json.dumps(header))
    with pytest.raises(MissingFieldError):
        load_session(h)


def test_garbled_header(tmp_path, session):
    h = save_session(session, tmp_path / "g")
    h.write_text("{not json")
    with pytest.raises(CorruptSessionError):
        load_session(h)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_session(tmp_path / "nothing")


def test_load_sessions_sorted(tmp_path):
    for sid in ("S01", "S00"):
        save_session(generate_session(SimulatorConfig(seed=int(sid[1:]), calibration_s=0.25, held_s=0.25, pulsed_s=0.25, rest_s=0.25), sid), tmp_path / sid)
    assert [s.subject_id for s in load_sessions(tmp_path)] == ["S00", "S01"]


def test_provenance_invariants():
    X = np.zeros((1, 16))
    with pytest.raises(ValueError):
        ExampleSet(X, [0], [int(Provenance.AugmentedSingle)], ["x"])
    with pytest.raises(ValueError):
        ExampleSet(X, [2], [int(Provenance.SyntheticDouble)], ["x"])


def test_example_iteration_round_trip(split):
    part = split.train.subset(np.arange(5))
    again = ExampleSet.from_examples(list(part))
    np.testing.assert_array_equal(again.X, part.X)
    np.testing.assert_array_equal(again.y, part.y)
