import threading

import pytest
from fastapi.testclient import TestClient

from iqbench.service import (ActionOutOfRange, SessionBusy, SessionFinished,
                             SessionManager, SessionNotFound, UnknownWorldSpec,
                             rescore_journal)
from iqbench.webapi import create_app


def make_manager(**kwargs) -> SessionManager:
    return SessionManager(**kwargs)


def test_create_session_tictactoe_summary():
    manager = make_manager()
    summary = manager.create_session({"world": {"world": "tictactoe"}, "seed": 1})
    assert summary["schema"] == "session/1"
    assert summary["action_count"] == 9
    assert summary["games_total"] == 9
    assert summary["max_steps_per_game"] == 20
    assert summary["status"] == "active"
    assert summary["observation"] == {"symbol": 0, "signal": "N"}


def test_unknown_world_rejected():
    with pytest.raises(UnknownWorldSpec):
        make_manager().create_session({"world": {"world": "chess"}, "seed": 0})


def test_bad_config_rejected():
    with pytest.raises(Exception):
        make_manager().create_session({"world": {"world": "oscillating"}, "games": 0})


def test_replay_determinism():
    results = []
    for _ in range(2):
        manager = make_manager()
        sid = manager.create_session({"world": {"world": "tictactoe",
                                                "opponent": "uniform_random"},
                                      "seed": 77})["session_id"]
        outcome_trace = []
        for action in (4, 0, 8, 2, 6, 1, 3, 5, 7) * 3:
            result = manager.post_action(sid, action)
            if result["game_event"]:
                outcome_trace.append(result["game_event"]["outcome"])
            if result["status"] == "finished":
                break
        results.append(outcome_trace)
    assert results[0] == results[1]


def test_post_action_lifecycle_and_bookkeeping():
    manager = make_manager()
    sid = manager.create_session({"world": {"world": "oscillating"},
                                  "games": 3, "max_steps_per_game": 5, "seed": 0})["session_id"]
    first = manager.post_action(sid, 0)
    assert first["game_event"] == {"outcome": "Win", "length_steps": 1}
    assert first["running_success"] == 1.0
    second = manager.post_action(sid, 1)
    assert second["game_event"]["outcome"] == "Loss"
    assert second["running_success"] == 0.5
    third = manager.post_action(sid, 0)
    assert third["status"] == "finished"
    with pytest.raises(SessionFinished):
        manager.post_action(sid, 0)


def test_action_out_of_range_leaves_state():
    manager = make_manager()
    sid = manager.create_session({"world": {"world": "tictactoe"}, "seed": 5})["session_id"]
    with pytest.raises(ActionOutOfRange):
        manager.post_action(sid, 9)
    with pytest.raises(ActionOutOfRange):
        manager.post_action(sid, "4")
    state = manager.get_session(sid)
    assert state["games_done"] == 0 and state["history"] == []


def test_unknown_session():
    with pytest.raises(SessionNotFound):
        make_manager().get_session("nope")


def test_history_and_reveal_modes():
    revealing = make_manager(reveal=True)
    sid = revealing.create_session({"world": {"world": "tictactoe"}, "seed": 2})["session_id"]
    revealing.post_action(sid, 4)
    revealing.post_action(sid, 0)
    revealing.post_action(sid, 8)
    state = revealing.get_session(sid)
    assert len(state["history"]) == 3
    board = state["decoded_view"]
    assert len(board) == 3 and all(len(row) == 3 for row in board)
    assert all(cell in (0, 1, 2) for row in board for cell in row)

    hidden = make_manager(reveal=False)
    sid2 = hidden.create_session({"world": {"world": "tictactoe"}, "seed": 2})["session_id"]
    hidden.post_action(sid2, 4)
    assert hidden.get_session(sid2)["decoded_view"] is None


def test_running_success_matches_pure_success():
    manager = make_manager()
    sid = manager.create_session({"world": {"world": "bitstream", "stream": "alternating"},
                                  "games": 8, "max_steps_per_game": 3, "seed": 0})["session_id"]
    guesses = [0, 1, 0, 1, 0, 1, 0, 1]
    last = None
    for g in guesses:
        last = manager.post_action(sid, g)
    # alternating bits start at 0: guessing the sequence exactly wins all
    assert last["running_success"] == 1.0
    summary = manager.finish_session(sid)
    assert summary["success"] == 1.0
    assert summary["success_exact"] == "1"
    assert len(summary["games"]) == 8
    assert set(summary["baselines"]) == {"random", "dead"}
    # dead agent guesses 0 forever on alternating bits: exactly half right
    assert summary["baselines"]["dead"] == 0.5


def test_scripted_winning_line_carries_win_event():
    """The double-threat line against the seeded random opponent ends the
    first game with a Win event and a success increment."""
    manager = make_manager()
    sid = manager.create_session({"world": {"world": "tictactoe",
                                            "opponent": "uniform_random"},
                                  "games": 1, "seed": 2})["session_id"]
    results = [manager.post_action(sid, a) for a in (4, 0, 8)]
    assert all(r["game_event"] is None for r in results[:-1])
    assert results[-1]["game_event"]["outcome"] == "Win"
    assert results[-1]["running_success"] == 1.0
    assert results[-1]["status"] == "finished"


def test_all_draw_session_scores_half():
    """Four minimax games played move by move along the draw line."""
    manager = make_manager()
    sid = manager.create_session({"world": {"world": "tictactoe", "opponent": "minimax"},
                                  "games": 4, "seed": 1})["session_id"]
    last = None
    for _ in range(4):
        for move in (0, 1, 6, 5, 8):  # optimal-for-X line; minimax always draws it
            last = manager.post_action(sid, move)
        assert last["game_event"]["outcome"] == "Draw"
    summary = manager.finish_session(sid)
    assert summary["success"] == 0.5
    assert [g["outcome"] for g in summary["games"]] == ["Draw"] * 4


def test_finish_marks_session():
    manager = make_manager()
    sid = manager.create_session({"world": {"world": "oscillating"}, "games": 4,
                                  "seed": 0})["session_id"]
    manager.post_action(sid, 0)
    summary = manager.finish_session(sid)
    assert summary["success"] == 1.0  # one win banked of one game played
    with pytest.raises(SessionFinished):
        manager.post_action(sid, 0)


def test_concurrent_actions_one_applies_one_rejected():
    manager = make_manager()
    sid = manager.create_session({"world": {"world": "oscillating"}, "games": 500,
                                  "seed": 0})["session_id"]

    # a held lock deterministically rejects the overlapping action
    session = manager._sessions[sid]
    with session.lock:
        with pytest.raises(SessionBusy):
            manager.post_action(sid, 0)
    assert manager.get_session(sid)["history"] == []

    # hammering from two threads never double-steps: every applied call
    # accounts for exactly one recorded step
    barrier = threading.Barrier(2)
    applied = []

    def fire():
        barrier.wait()
        for _ in range(50):
            try:
                manager.post_action(sid, 0)
                applied.append(1)
            except SessionBusy:
                pass

    threads = [threading.Thread(target=fire) for _ in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(manager.get_session(sid)["history"]) == len(applied)


def test_journal_rescores_identically(tmp_path):
    manager = make_manager(journal_dir=tmp_path)
    sid = manager.create_session({"world": {"world": "bitstream", "stream": "zeros"},
                                  "games": 5, "max_steps_per_game": 2,
                                  "seed": 9})["session_id"]
    for action in (0, 0, 1, 0, 0):
        manager.post_action(sid, action)
    live = manager.finish_session(sid)
    rescored = rescore_journal(tmp_path / f"{sid}.jsonl")
    assert rescored["success"] == live["success"]
    assert rescored["games"] == live["games"]


# --- wire API -----------------------------------------------------------------


@pytest.fixture()
def client():
    return TestClient(create_app(make_manager()))


def test_http_session_flow(client):
    created = client.post("/sessions", json={"world": {"world": "tictactoe"},
                                             "seed": 3, "games": 2})
    assert created.status_code == 200
    body = created.json()
    assert body["schema"] == "session/1"
    sid = body["session_id"]

    step = client.post(f"/sessions/{sid}/actions", json={"action": 4})
    assert step.status_code == 200
    assert step.json()["games_done"] in (0, 1)

    state = client.get(f"/sessions/{sid}")
    assert state.status_code == 200
    assert len(state.json()["history"]) == 1

    finish = client.post(f"/sessions/{sid}/finish")
    assert finish.status_code == 200
    assert "baselines" in finish.json()

    after = client.post(f"/sessions/{sid}/actions", json={"action": 1})
    assert after.status_code == 409
    assert after.json()["code"] == "session_finished"


def test_ui_static_mount(tmp_path):
    (tmp_path / "index.html").write_text("<html><body>ui</body></html>")
    mounted = TestClient(create_app(make_manager(), ui_dir=tmp_path))
    assert mounted.get("/").status_code == 200
    assert "ui" in mounted.get("/").text
    # API routes take precedence over the static mount
    assert mounted.get("/sessions/zzz").status_code == 404
    assert mounted.get("/sessions/zzz").json()["code"] == "session_not_found"


def test_http_error_shapes(client):
    missing = client.get("/sessions/zzz")
    assert missing.status_code == 404
    assert missing.json() == {"code": "session_not_found",
                              "message": missing.json()["message"]}

    bad_world = client.post("/sessions", json={"world": {"world": "go"}, "seed": 0})
    assert bad_world.status_code == 400
    assert bad_world.json()["code"] == "unknown_world_spec"

    created = client.post("/sessions", json={"world": {"world": "oscillating"}, "seed": 0})
    sid = created.json()["session_id"]
    off = client.post(f"/sessions/{sid}/actions", json={"action": 7})
    assert off.status_code == 400
    assert off.json()["code"] == "action_out_of_range"
