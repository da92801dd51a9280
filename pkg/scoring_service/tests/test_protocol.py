import io
import json
import threading

import pytest

from scoring_service.server import handle_line, serve_stdio, serve_tcp


class TestHandleLine:
    def test_ping_echoes_id_and_models(self, tiny_scoring_model):
        reply = handle_line('{"op": "ping", "id": 42}', tiny_scoring_model)
        assert reply["id"] == 42
        assert reply["ok"] is True
        assert "mlm" in reply["models"]

    def test_mask_scores_op(self, tiny_scoring_model):
        request = {
            "op": "mask_scores",
            "slots": [[["two", 1.0]], [["dogs", 0.5], ["dog", 0.5]]],
            "mask": 1,
            "id": 7,
        }
        reply = handle_line(json.dumps(request), tiny_scoring_model)
        assert reply["id"] == 7
        assert set(reply["scores"]) == {"dogs", "dog"}

    def test_seq_score_op(self, tiny_scoring_model):
        reply = handle_line(
            '{"op": "seq_score", "sentence": "two large dogs", "id": 1}',
            tiny_scoring_model,
        )
        assert isinstance(reply["score"], float)

    def test_moverscore_op(self, tiny_scoring_model):
        reply = handle_line(
            '{"op": "moverscore", "hyp": "two dogs", "ref": "two dogs", "id": 2}',
            tiny_scoring_model,
        )
        assert reply["score"] == pytest.approx(1.0, abs=1e-6)

    def test_unknown_op_is_structured_error(self, tiny_scoring_model):
        reply = handle_line('{"op": "dance", "id": 3}', tiny_scoring_model)
        assert reply["id"] == 3
        assert "unknown op" in reply["error"]

    def test_malformed_frame_is_structured_error(self, tiny_scoring_model):
        reply = handle_line("{nope", tiny_scoring_model)
        assert reply["id"] is None
        assert "bad frame" in reply["error"]

    def test_bad_arguments_are_structured_errors(self, tiny_scoring_model):
        reply = handle_line('{"op": "mask_scores", "slots": [], "mask": 0, "id": 4}', tiny_scoring_model)
        assert reply["id"] == 4
        assert "error" in reply


class TestStdioTransport:
    def test_request_per_line(self, tiny_scoring_model):
        infile = io.StringIO(
            '{"op": "ping", "id": 1}\n\n{"op": "seq_score", "sentence": "two dogs", "id": 2}\n'
        )
        outfile = io.StringIO()
        serve_stdio(tiny_scoring_model, infile, outfile)
        replies = [json.loads(l) for l in outfile.getvalue().splitlines()]
        assert [r["id"] for r in replies] == [1, 2]


class TestTcpInterop:
    """Drive the real server thread with the restoration pipeline's client."""

    @pytest.fixture
    def endpoint(self, tiny_scoring_model):
        ready = threading.Event()
        box = {}

        def remember(port):
            box["port"] = port
            ready.set()

        thread = threading.Thread(
            target=serve_tcp,
            args=(tiny_scoring_model, "127.0.0.1", 0),
            kwargs={"ready_callback": remember},
            daemon=True,
        )
        thread.start()
        assert ready.wait(timeout=10)
        return f"tcp:127.0.0.1:{box['port']}"

    def test_client_round_trip(self, endpoint):
        from textmend.wire import ServiceClient

        with ServiceClient(endpoint, timeout=30.0) as client:
            assert client.ping()["ok"] is True
            scores = client.mask_scores([[["two", 1.0]], [["dogs", 1.0]]], 1)
            assert "dogs" in scores
            assert isinstance(client.seq_score("two dogs"), float)
            assert client.moverscore("two dogs", "two dogs") == pytest.approx(1.0, abs=1e-6)

    def test_pipeline_runs_through_service_scorers(self, endpoint, tmp_path):
        from textmend.pipeline import PipelineConfig, RestorationPipeline

        surfaces = ["a", "man", "is", "driving", "car", "dog", "the", "."]
        lexicon_path = tmp_path / "lex.txt"
        lexicon_path.write_text(
            "\n".join(f"{s}\t10" for s in surfaces) + "\n", encoding="utf-8"
        )
        config = PipelineConfig(
            lexicon_path=str(lexicon_path),
            masked_scorer="service",
            sequence_scorer="service",
            service_endpoint=endpoint,
        )
        pipeline = RestorationPipeline.from_config(config)
        report = pipeline.restore_sentence("a mn is drivng a car")
        assert report.restored  # random weights: any sentence, but it completes
        assert abs(sum(report.diagnostics["final_probs"]) - 1.0) <= 1e-9
