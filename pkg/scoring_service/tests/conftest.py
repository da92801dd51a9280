import sys
from pathlib import Path

import pytest
import torch

sys.path.insert(0, str(Path(__file__).parent))

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "a", "man", "is", "driving", "car", "dog", "dot", "the", "runs",
    "grass", "large", "two", "dogs", "running", "in", "some", "income",
    "##ing", "##s", ".",
]


def build_tiny_models(root: Path):
    """Write a tiny randomly initialised masked LM (+ causal twin sharing
    the vocabulary) that loads entirely offline."""
    from transformers import BertConfig, BertForMaskedLM, BertLMHeadModel, BertTokenizer

    vocab_file = root / "vocab.txt"
    vocab_file.write_text("\n".join(VOCAB) + "\n", encoding="utf-8")
    tokenizer = BertTokenizer(str(vocab_file))

    torch.manual_seed(7)
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    mlm_dir = root / "mlm"
    BertForMaskedLM(config).save_pretrained(mlm_dir)
    tokenizer.save_pretrained(mlm_dir)

    causal_config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
        is_decoder=True,
    )
    lm_dir = root / "lm"
    BertLMHeadModel(causal_config).save_pretrained(lm_dir)
    tokenizer.save_pretrained(lm_dir)
    return {"mlm": str(mlm_dir), "lm": str(lm_dir)}


@pytest.fixture(scope="session")
def tiny_models(tmp_path_factory):
    return build_tiny_models(tmp_path_factory.mktemp("models"))


@pytest.fixture(scope="session")
def tiny_scoring_model(tiny_models):
    from scoring_service.scoring import ScoringModel

    return ScoringModel(tiny_models["mlm"])
