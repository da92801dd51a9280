"""End-to-end restoration pipeline and its configuration.

Wires the three stages together: hypothesis building from edit distances,
masked-context refinement, and fluency-based selection.  Scorers are either
the built-in n-gram model or an external scoring service reached through
the wire protocol.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field

from .baseline import correct_sentence
from .context import NGramMaskedScorer, refine
from .editdist import AGNOSTIC, DOMAIN_SPECIFIC, CostModel
from .lattice import build_hypotheses
from .lexicon import Lexicon, load_lexicon, tokenize_whitespace
from .ngram import NGramModel
from .selector import NGramSequenceScorer, select
from .visualsim import load_table
from . import resources as bundled


class ConfigError(ValueError):
    """Bad pipeline configuration (CLI exit code 2)."""


class ScorerUnavailableError(RuntimeError):
    """A required scoring service cannot be reached (CLI exit code 3)."""


VARIANTS = ("domain_specific", "agnostic", "baseline")


@dataclass
class PipelineConfig:
    tau_hyp: float = 10.0
    tau_word: float = 1.0
    tau_ctx: float = 0.25
    tau_lm: float = 0.005
    max_hypotheses: int = 10
    cost_mode: str = DOMAIN_SPECIFIC
    span_keep_delta: float = 2.0
    span_candidates: int = 64
    context_top_k: int = 8
    masked_scorer: str = "ngram"  # "ngram" or "service"
    sequence_scorer: str = "ngram"
    service_endpoint: str = ""
    lexicon_path: str = field(default_factory=lambda: bundled.data_path("lexicon.txt"))
    min_frequency: int = 0
    continuation_marker: str = "##"
    ngram_model_path: str = ""
    visual_table_path: str = field(
        default_factory=lambda: bundled.data_path("visual_similarity.txt")
    )
    seed: int = 0

    def validate(self):
        for name in ("tau_hyp", "tau_word", "tau_ctx", "tau_lm"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.max_hypotheses < 1:
            raise ConfigError("max_hypotheses must be >= 1")
        if self.cost_mode not in (AGNOSTIC, DOMAIN_SPECIFIC):
            raise ConfigError(f"unknown cost_mode {self.cost_mode!r}")
        for name in ("masked_scorer", "sequence_scorer"):
            if getattr(self, name) not in ("ngram", "service"):
                raise ConfigError(f"{name} must be 'ngram' or 'service'")
        if "service" in (self.masked_scorer, self.sequence_scorer) and not self.service_endpoint:
            raise ConfigError("service scorers need a service_endpoint")
        if "ngram" in (self.masked_scorer, self.sequence_scorer) and not self.ngram_model_path:
            raise ConfigError("ngram scorers need an ngram_model_path (see train-ngram)")
        return self

    def apply_overrides(self, pairs):
        """Apply "key=value" overrides with type coercion from the field."""
        types = {f.name: f.type for f in dataclasses.fields(self)}
        for pair in pairs:
            if "=" not in pair:
                raise ConfigError(f"override {pair!r} is not key=value")
            key, _, value = pair.partition("=")
            key = key.strip()
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            current = getattr(self, key)
            try:
                if isinstance(current, bool):
                    coerced = value.strip().lower() in ("1", "true", "yes")
                elif isinstance(current, int):
                    coerced = int(value)
                elif isinstance(current, float):
                    coerced = float(value)
                else:
                    coerced = value.strip()
            except ValueError:
                raise ConfigError(f"bad value for {key}: {value!r}") from None
            setattr(self, key, coerced)
        return self

    @classmethod
    def from_file(cls, path):
        """Flat key=value config file; '#' comments and blank lines ignored."""
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        pairs = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                pairs.append(line)
        return cls().apply_overrides(pairs)

    def to_dict(self):
        return dataclasses.asdict(self)


@dataclass
class RestorationReport:
    attacked: str
    restored: str
    hypothesis_count: int
    diagnostics: dict


class RestorationPipeline:
    """Three-stage restoration bound to a lexicon, cost model, and scorers."""

    def __init__(self, lexicon: Lexicon, cost_model: CostModel, masked_scorer, sequence_scorer, config: PipelineConfig):
        self.lexicon = lexicon
        self.cost_model = cost_model
        self.masked_scorer = masked_scorer
        self.sequence_scorer = sequence_scorer
        self.config = config

    @classmethod
    def from_config(cls, config: PipelineConfig) -> "RestorationPipeline":
        config.validate()
        try:
            lexicon = load_lexicon(
                config.lexicon_path, config.min_frequency, config.continuation_marker
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

        visual = None
        if config.cost_mode == DOMAIN_SPECIFIC:
            try:
                visual = load_table(config.visual_table_path)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        cost_model = CostModel(mode=config.cost_mode, visual=visual)

        client = None
        if "service" in (config.masked_scorer, config.sequence_scorer):
            from .wire import ServiceClient, ServiceUnavailableError

            try:
                client = ServiceClient(config.service_endpoint)
                client.ping()
            except (ServiceUnavailableError, OSError) as exc:
                raise ScorerUnavailableError(str(exc)) from exc

        model = None
        if "ngram" in (config.masked_scorer, config.sequence_scorer):
            try:
                model = NGramModel.load(config.ngram_model_path)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc

        if config.masked_scorer == "service":
            from .wire import ServiceMaskedScorer

            masked = ServiceMaskedScorer(client, lexicon)
        else:
            masked = NGramMaskedScorer(model, config.context_top_k)
        if config.sequence_scorer == "service":
            from .wire import ServiceSequenceScorer

            sequence = ServiceSequenceScorer(client)
        else:
            sequence = NGramSequenceScorer(model, lexicon)
        return cls(lexicon, cost_model, masked, sequence, config)

    def restore_sentence(self, sentence: str) -> RestorationReport:
        tokens = tokenize_whitespace(sentence)
        if not tokens:
            return RestorationReport(sentence, "", 0, {"empty_input": True})
        cfg = self.config
        hypotheses = build_hypotheses(
            tokens,
            self.lexicon,
            self.cost_model,
            tau_hyp=cfg.tau_hyp,
            tau_word=cfg.tau_word,
            max_hypotheses=cfg.max_hypotheses,
            keep_delta=cfg.span_keep_delta,
            max_candidates_per_span=cfg.span_candidates,
        )
        refined = [
            refine(
                hypothesis,
                self.masked_scorer,
                tau_ctx=cfg.tau_ctx,
                context_top_k=cfg.context_top_k,
            )
            for hypothesis in hypotheses
        ]
        selection = select(refined, self.sequence_scorer, self.lexicon, tau_lm=cfg.tau_lm)
        diagnostics = dict(selection.diagnostics)
        diagnostics["hypothesis_losses"] = [h.loss for h in hypotheses]
        return RestorationReport(
            attacked=sentence,
            restored=selection.sentence,
            hypothesis_count=len(hypotheses),
            diagnostics=diagnostics,
        )


def restore_with_baseline(sentence: str, lexicon: Lexicon) -> RestorationReport:
    restored = correct_sentence(sentence, lexicon)
    return RestorationReport(sentence, restored, 0, {"engine": "baseline"})
