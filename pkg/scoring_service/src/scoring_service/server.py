"""Line-delimited JSON request loop over stdio or a local TCP socket.

One JSON object per line each way.  Every response echoes the request id
and carries the serving model identifiers; unknown or malformed requests
produce structured error responses, never a dropped connection.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys

from .scoring import ScoringError, ScoringModel


def handle_line(line: str, model: ScoringModel) -> dict:
    try:
        message = json.loads(line)
    except json.JSONDecodeError as exc:
        return {"id": None, "error": f"bad frame: {exc}", "models": model.model_info}
    if not isinstance(message, dict):
        return {"id": None, "error": "frame is not an object", "models": model.model_info}
    request_id = message.get("id")
    response = {"id": request_id, "models": model.model_info}
    op = message.get("op")
    try:
        if op == "ping":
            response["ok"] = True
        elif op == "mask_scores":
            response["scores"] = model.mask_scores(
                message.get("slots") or [], int(message.get("mask", -1))
            )
        elif op == "seq_score":
            response["score"] = model.seq_score(str(message.get("sentence", "")))
        elif op == "moverscore":
            response["score"] = model.moverscore(
                str(message.get("hyp", "")), str(message.get("ref", ""))
            )
        else:
            response["error"] = f"unknown op: {op}"
    except (ScoringError, ValueError, TypeError) as exc:
        response["error"] = str(exc)
    return response


def serve_stdio(model: ScoringModel, infile=None, outfile=None):
    infile = infile or sys.stdin
    outfile = outfile or sys.stdout
    for line in infile:
        if not line.strip():
            continue
        outfile.write(json.dumps(handle_line(line, model)) + "\n")
        outfile.flush()


def serve_tcp(model: ScoringModel, host: str, port: int, ready_callback=None):
    """Accept one client at a time; requests within a connection are
    answered in order (the protocol is id-correlated either way)."""
    with socket.create_server((host, port)) as listener:
        actual_port = listener.getsockname()[1]
        print(f"listening on {host}:{actual_port}", file=sys.stderr, flush=True)
        if ready_callback is not None:
            ready_callback(actual_port)
        while True:
            conn, _ = listener.accept()
            with conn:
                reader = conn.makefile("r", encoding="utf-8")
                writer = conn.makefile("w", encoding="utf-8")
                for line in reader:
                    if not line.strip():
                        continue
                    writer.write(json.dumps(handle_line(line, model)) + "\n")
                    writer.flush()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scoring-service",
        description="Masked-LM / sequence / similarity scoring over a line protocol.",
    )
    parser.add_argument("--mlm", required=True, help="masked LM name or path")
    parser.add_argument("--lm", help="causal LM name or path (else pseudo-likelihood)")
    parser.add_argument("--transport", choices=("stdio", "tcp"), default="stdio")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=0, help="0 picks a free port")
    parser.add_argument("--device", default="cpu")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        model = ScoringModel(args.mlm, args.lm, device=args.device)
    except Exception as exc:  # model loading failures are fatal and explicit
        print(f"error: cannot load models: {exc}", file=sys.stderr)
        return 1
    if args.transport == "stdio":
        serve_stdio(model)
    else:
        serve_tcp(model, args.host, args.port)
    return 0


def entrypoint():
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
