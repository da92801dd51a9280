"""Model-backed scoring operations.

mask_scores feeds probability-weighted averages of word-piece embeddings
(one per slot, with the mask embedding at the masked position) past the
masked LM's embedding lookup, so uncertain slots enter the model as soft
mixtures rather than hard tokens.  With one-hot slots this reduces exactly
to standard masked-LM scoring.
"""

from __future__ import annotations

import numpy as np
import torch

UNSCORED = -1e4  # surfaces the vocabulary cannot map


class ScoringError(RuntimeError):
    """The request cannot be scored (reported as a protocol-level error)."""


class ScoringModel:
    def __init__(self, mlm_path: str, lm_path: str | None = None, device: str = "cpu"):
        from transformers import AutoModelForMaskedLM, AutoTokenizer

        self.device = torch.device(device)
        self.tokenizer = AutoTokenizer.from_pretrained(mlm_path)
        self.mlm = AutoModelForMaskedLM.from_pretrained(mlm_path).to(self.device).eval()
        self.lm = None
        self.lm_tokenizer = None
        if lm_path:
            from transformers import AutoModelForCausalLM

            self.lm_tokenizer = AutoTokenizer.from_pretrained(lm_path)
            self.lm = AutoModelForCausalLM.from_pretrained(lm_path).to(self.device).eval()

    @property
    def model_info(self) -> dict:
        info = {"mlm": self.mlm.config.name_or_path or "mlm"}
        if self.lm is not None:
            info["lm"] = self.lm.config.name_or_path or "lm"
        else:
            info["lm"] = info["mlm"] + " (pseudo-likelihood)"
        return info

    # -- vocabulary mapping --------------------------------------------------

    def _piece_id(self, surface: str):
        """Vocabulary id for a word-piece surface, or None if unmappable."""
        piece_id = self.tokenizer.convert_tokens_to_ids(surface)
        if piece_id is None or piece_id == self.tokenizer.unk_token_id:
            return None
        return piece_id

    # -- ops -------------------------------------------------------------

    @torch.no_grad()
    def mask_scores(self, slots, mask_index: int) -> dict:
        """Scores for the masked slot's candidate surfaces.

        `slots` is a list of [surface, probability] lists.  Context slots
        become weighted averages of their candidates' input embeddings;
        unmappable context surfaces fall back to the UNK embedding.
        Candidates of the masked slot that the vocabulary cannot map score
        a large negative constant.
        """
        if not slots:
            raise ScoringError("empty slot list")
        if not 0 <= mask_index < len(slots):
            raise ScoringError("mask index out of range")
        embeddings = self.mlm.get_input_embeddings().weight
        tok = self.tokenizer
        unk = tok.unk_token_id

        rows = [embeddings[tok.cls_token_id]]
        for position, slot in enumerate(slots):
            if position == mask_index:
                rows.append(embeddings[tok.mask_token_id])
                continue
            total = sum(float(p) for _, p in slot)
            if not slot or total <= 0:
                raise ScoringError(f"slot {position} has no probability mass")
            mixed = torch.zeros_like(embeddings[0])
            for surface, prob in slot:
                piece_id = self._piece_id(surface)
                mixed += (float(prob) / total) * embeddings[piece_id if piece_id is not None else unk]
            rows.append(mixed)
        rows.append(embeddings[tok.sep_token_id])

        inputs_embeds = torch.stack(rows).unsqueeze(0).to(self.device)
        logits = self.mlm(inputs_embeds=inputs_embeds).logits[0, mask_index + 1]

        scores = {}
        for surface, _ in slots[mask_index]:
            piece_id = self._piece_id(surface)
            scores[surface] = (
                float(logits[piece_id]) if piece_id is not None else UNSCORED
            )
        return scores

    @torch.no_grad()
    def seq_score(self, sentence: str) -> float:
        """Mean token log-likelihood; causal when a language model is
        loaded, otherwise the masked model's pseudo-log-likelihood."""
        if not sentence.strip():
            raise ScoringError("empty sentence")
        if self.lm is not None:
            encoded = self.lm_tokenizer(sentence, return_tensors="pt").to(self.device)
            if encoded["input_ids"].shape[1] < 2:
                encoded = self.lm_tokenizer(sentence + " " + sentence, return_tensors="pt").to(self.device)
            out = self.lm(**encoded, labels=encoded["input_ids"])
            return -float(out.loss)
        encoded = self.tokenizer(sentence, return_tensors="pt").to(self.device)
        ids = encoded["input_ids"][0]
        total = 0.0
        scored = 0
        for position in range(1, len(ids) - 1):  # skip [CLS]/[SEP]
            masked = ids.clone()
            masked[position] = self.tokenizer.mask_token_id
            logits = self.mlm(input_ids=masked.unsqueeze(0)).logits[0, position]
            logprobs = torch.log_softmax(logits, dim=-1)
            total += float(logprobs[ids[position]])
            scored += 1
        if scored == 0:
            raise ScoringError("sentence has no scorable tokens")
        return total / scored

    @torch.no_grad()
    def _token_embeddings(self, sentence: str):
        encoded = self.tokenizer(sentence, return_tensors="pt").to(self.device)
        hidden = self.mlm(
            **encoded, output_hidden_states=True
        ).hidden_states[-1][0]
        return hidden[1:-1].cpu().numpy()  # drop [CLS]/[SEP]

    def moverscore(self, hyp: str, ref: str) -> float:
        """Similarity in [0, 1] as one minus the optimal-transport cost
        between the two sentences' contextual embeddings under cosine
        distance (uniform token weights)."""
        if not hyp.strip() or not ref.strip():
            raise ScoringError("moverscore needs two non-empty sentences")
        a = self._token_embeddings(hyp)
        b = self._token_embeddings(ref)
        if len(a) == 0 or len(b) == 0:
            raise ScoringError("no scorable tokens")
        a = a / np.maximum(np.linalg.norm(a, axis=1, keepdims=True), 1e-9)
        b = b / np.maximum(np.linalg.norm(b, axis=1, keepdims=True), 1e-9)
        cost = 1.0 - a @ b.T  # in [0, 2]
        emd = _earth_mover_cost(cost)
        return float(max(0.0, min(1.0, 1.0 - emd)))


def _earth_mover_cost(cost: np.ndarray) -> float:
    """Optimal transport between uniform distributions over the rows and
    columns of a cost matrix, solved as a linear program."""
    from scipy.optimize import linprog

    n, m = cost.shape
    supply = np.full(n, 1.0 / n)
    demand = np.full(m, 1.0 / m)
    # equality constraints: row sums = supply, column sums = demand
    row_eq = np.zeros((n, n * m))
    for i in range(n):
        row_eq[i, i * m:(i + 1) * m] = 1.0
    col_eq = np.zeros((m, n * m))
    for j in range(m):
        col_eq[j, j::m] = 1.0
    result = linprog(
        cost.reshape(-1),
        A_eq=np.vstack([row_eq, col_eq]),
        b_eq=np.concatenate([supply, demand]),
        bounds=(0, None),
        method="highs",
    )
    if not result.success:
        raise ScoringError(f"transport solve failed: {result.message}")
    return float(result.fun)
