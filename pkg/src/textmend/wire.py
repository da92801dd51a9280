"""Line-delimited JSON client for the external scoring service.

One JSON object per line in each direction.  Requests carry an "id"; the
service echoes it, and responses may arrive out of order, so replies are
parked until their request shows up.  Word-piece surfaces (never ids) cross
the wire; continuation pieces keep their "##" marker.

Endpoints:
  tcp:HOST:PORT       connect to a listening service
  stdio:CMD ARGS...   spawn CMD and talk over its stdin/stdout
"""

from __future__ import annotations

import itertools
import json
import shlex
import socket
import subprocess
import threading

from .context import MaskedContextScorer, MaskedScoreRequest, ScorerError, UNSCORED
from .lexicon import Lexicon
from .selector import SequenceScorer


class ServiceUnavailableError(ScorerError):
    """The scoring service cannot be reached or stopped responding."""


class ServiceClient:
    """Blocking request/response client over TCP or a child process."""

    def __init__(self, endpoint: str, timeout: float = 60.0):
        self.endpoint = endpoint
        self.timeout = timeout
        self._ids = itertools.count(1)
        self._send_lock = threading.Lock()
        self._cond = threading.Condition()
        self._reading = False
        self._broken = None
        self._pending = {}
        self._proc = None
        self._reader = None
        self._writer = None
        self._connect()

    def _connect(self):
        kind, _, rest = self.endpoint.partition(":")
        try:
            if kind == "tcp":
                host, _, port = rest.rpartition(":")
                sock = socket.create_connection((host, int(port)), timeout=self.timeout)
                sock.settimeout(self.timeout)
                self._reader = sock.makefile("r", encoding="utf-8")
                self._writer = sock.makefile("w", encoding="utf-8")
            elif kind == "stdio":
                self._proc = subprocess.Popen(
                    shlex.split(rest),
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
                self._reader = self._proc.stdout
                self._writer = self._proc.stdin
            else:
                raise ServiceUnavailableError(f"unknown endpoint kind {kind!r}")
        except (OSError, ValueError) as exc:
            raise ServiceUnavailableError(f"cannot reach service at {self.endpoint}: {exc}") from exc

    def close(self):
        try:
            if self._writer:
                self._writer.close()
            if self._reader:
                self._reader.close()
        except OSError:
            pass
        if self._proc:
            self._proc.terminate()
            self._proc.wait(timeout=5)

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def request(self, payload: dict) -> dict:
        """Send one op and wait for its reply.

        Replies are id-correlated and may arrive in any order; several
        requests can be in flight from different threads.  Whichever waiter
        currently owns the socket reads frames and parks replies for the
        others (a designated-reader pattern, so no background thread is
        needed).
        """
        with self._send_lock:
            request_id = next(self._ids)
            frame = json.dumps(dict(payload, id=request_id))
            try:
                self._writer.write(frame + "\n")
                self._writer.flush()
            except (OSError, BrokenPipeError) as exc:
                raise ServiceUnavailableError(f"write failed: {exc}") from exc

        while True:
            with self._cond:
                if self._broken:
                    raise ServiceUnavailableError(self._broken)
                if request_id in self._pending:
                    response = self._pending.pop(request_id)
                    break
                if self._reading:
                    if not self._cond.wait(self.timeout):
                        raise ServiceUnavailableError("timed out waiting for reply")
                    continue
                self._reading = True
            try:
                message = self._read_frame()
            except ServiceUnavailableError as exc:
                with self._cond:
                    self._reading = False
                    self._broken = str(exc)
                    self._cond.notify_all()
                raise
            with self._cond:
                self._reading = False
                self._pending[message.get("id")] = message
                self._cond.notify_all()

        if "error" in response:
            raise ScorerError(f"service error: {response['error']}")
        return response

    def _read_frame(self) -> dict:
        try:
            line = self._reader.readline()
        except (OSError, socket.timeout) as exc:
            raise ServiceUnavailableError(f"read failed: {exc}") from exc
        if not line:
            raise ServiceUnavailableError("service closed the connection")
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            raise ServiceUnavailableError(f"bad frame from service: {exc}") from exc

    def ping(self) -> dict:
        return self.request({"op": "ping"})

    def mask_scores(self, surface_slots, mask: int) -> dict:
        response = self.request(
            {"op": "mask_scores", "slots": surface_slots, "mask": mask}
        )
        scores = response.get("scores")
        if not isinstance(scores, dict):
            raise ScorerError("mask_scores response lacks scores")
        return scores

    def seq_score(self, sentence: str) -> float:
        response = self.request({"op": "seq_score", "sentence": sentence})
        if "score" not in response:
            raise ScorerError("seq_score response lacks score")
        return float(response["score"])

    def moverscore(self, hyp: str, ref: str) -> float:
        response = self.request({"op": "moverscore", "hyp": hyp, "ref": ref})
        if "score" not in response:
            raise ScorerError("moverscore response lacks score")
        return float(response["score"])


class ServiceMaskedScorer(MaskedContextScorer):
    """Masked-context scorer backed by the external service.

    Sends the top candidates of every slot as (surface, prob) pairs; maps
    the returned surface-keyed scores back to piece ids.  Candidates the
    service cannot map come back very negative and stay that way here.
    """

    kind = "external_service"

    def __init__(self, client: ServiceClient, lexicon: Lexicon):
        self.client = client
        self.lexicon = lexicon

    def mask_scores(self, request: MaskedScoreRequest) -> dict:
        surface_slots = [
            [[self.lexicon.surface(pid), prob] for pid, prob in slot]
            for slot in request.slots
        ]
        scores = self.client.mask_scores(surface_slots, request.mask_index)
        return {
            pid: float(scores.get(self.lexicon.surface(pid), UNSCORED))
            for pid in request.candidate_ids
        }


class ServiceSequenceScorer(SequenceScorer):
    kind = "external_service"

    def __init__(self, client: ServiceClient):
        self.client = client

    def score(self, sentence: str) -> float:
        return self.client.seq_score(sentence)
