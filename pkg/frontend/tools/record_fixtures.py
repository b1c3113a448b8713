#!/usr/bin/env python3
"""Record session/1 API fixtures for the frontend contract tests.

Plays a scripted 9-game Tic-Tac-Toe session (vs the minimax opponent,
reveal mode on) against the real service via the in-process test client
and saves every request/response exchange verbatim.

Run from the repository root:  python3 frontend/tools/record_fixtures.py
"""
import json
from pathlib import Path

from fastapi.testclient import TestClient

from iqbench.service import SessionManager
from iqbench.webapi import create_app

FIXTURE_PATH = Path(__file__).resolve().parent.parent / "test" / "fixtures" / \
    "session_tictactoe.json"


def main() -> None:
    client = TestClient(create_app(SessionManager(reveal=True)))
    exchanges = []

    def call(method: str, path: str, body=None):
        if method == "GET":
            response = client.get(path)
        else:
            response = client.post(path, json=body)
        exchanges.append({
            "method": method,
            "path": path,
            "request": body,
            "status": response.status_code,
            "response": response.json(),
        })
        return response.json()

    create_request = {"world": {"world": "tictactoe", "opponent": "minimax"},
                      "games": 9, "max_steps_per_game": 20, "seed": 1}
    created = call("POST", "/sessions", create_request)
    sid = created["session_id"]

    # cycle the board cells; illegal moves lose the game, which is a fine
    # way for a scripted session to finish all nine games
    action = 0
    steps = 0
    while True:
        result = call("POST", f"/sessions/{sid}/actions", {"action": action})
        steps += 1
        action = (action + 4) % 9
        if result["status"] == "finished" or steps > 200:
            break

    call("GET", f"/sessions/{sid}")
    call("POST", f"/sessions/{sid}/finish", {})

    FIXTURE_PATH.parent.mkdir(parents=True, exist_ok=True)
    FIXTURE_PATH.write_text(json.dumps({
        "note": "recorded from the live service; do not edit by hand",
        "exchanges": exchanges,
    }, indent=1, sort_keys=True) + "\n")
    games = exchanges[-1]["response"]["games"]
    print(f"recorded {len(exchanges)} exchanges, {len(games)} games, "
          f"final success {exchanges[-1]['response']['success']}")


if __name__ == "__main__":
    main()
