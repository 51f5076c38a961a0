"""Model backends behind the wire protocol.

``TinyBackend`` builds a small GPT-2-architecture causal LM with seeded
random weights entirely offline; it exists so the protocol can be served and
conformance-tested without downloading weights. ``HFBackend`` fronts a real
pretrained causal LM when weights are resolvable (hub access or local cache).

Logprobs are always the raw log-softmax over the full vocabulary; an
allowed-ids restriction filters the response without renormalizing.
"""

from __future__ import annotations

import threading

import torch

from .tokenizer import WordTokenizer

BOS_ID = 0  # stands in for an empty context so the model always sees a token


class TinyBackend:
    """Seeded, untrained GPT-2-architecture model with a word tokenizer."""

    def __init__(self, seed: int = 0, vocab_size: int = 4096, max_context: int = 2048):
        from transformers import GPT2Config, GPT2LMHeadModel

        torch.manual_seed(seed)
        config = GPT2Config(
            vocab_size=vocab_size,
            n_positions=max_context,
            n_embd=64,
            n_layer=2,
            n_head=2,
            bos_token_id=BOS_ID,
            eos_token_id=BOS_ID,
        )
        self.model = GPT2LMHeadModel(config)
        self.model.eval()
        self.tokenizer = WordTokenizer(vocab_size)
        self.name = f"tiny-gpt2-seeded-{seed}"
        self.vocab_size = vocab_size
        self.max_context = max_context
        self._lock = threading.Lock()

    def tokenize(self, text: str) -> tuple[list[int], list[str]]:
        return self.tokenizer.encode(text)

    def _forward_logprobs(self, ids: list[int]) -> torch.Tensor:
        if not ids:
            ids = [BOS_ID]
        if len(ids) > self.max_context:
            raise ValueError(f"context of {len(ids)} tokens exceeds max_context {self.max_context}")
        with self._lock, torch.no_grad():
            out = self.model(torch.tensor([ids], dtype=torch.long))
        return torch.log_softmax(out.logits[0, -1].double(), dim=-1)

    def next_token_logprobs(self, prompt_ids: list[int], allowed_ids: list[int] | None) -> dict[int, float]:
        logprobs = self._forward_logprobs(list(prompt_ids))
        if allowed_ids is not None:
            return {int(i): float(logprobs[int(i)]) for i in allowed_ids}
        return {i: float(logprobs[i]) for i in range(self.vocab_size)}

    def generate(self, prompt: str, max_tokens: int, stop: list[str]) -> str:
        ids, _ = self.tokenize(prompt)
        out = ""
        for _ in range(max_tokens):
            logprobs = self._forward_logprobs(ids)
            # restrict the argmax to decodable ids so the reply is well-formed text
            known = self.tokenizer.known_ids()
            best = max(known, key=lambda i: (float(logprobs[i]), -i))
            piece = self.tokenizer.decode_id(best) or ""
            out += piece
            ids.append(best)
            for marker in stop:
                if marker in out:
                    return out[: out.index(marker)]
            if len(ids) >= self.max_context:
                break
        return out

    def embed(self, texts: list[str]) -> list[list[float]]:
        vectors = []
        for text in texts:
            ids, _ = self.tokenize(text)
            if not ids:
                ids = [BOS_ID]
            with self._lock, torch.no_grad():
                hidden = self.model.transformer(torch.tensor([ids], dtype=torch.long)).last_hidden_state
            pooled = hidden[0].mean(dim=0)
            norm = torch.linalg.vector_norm(pooled)
            if float(norm) == 0.0:
                pooled = torch.zeros_like(pooled)
                pooled[0] = 1.0
                norm = torch.tensor(1.0)
            vectors.append((pooled / norm).tolist())
        return vectors

    def info(self) -> dict:
        return {"model": self.name, "vocab_size": self.vocab_size, "max_context": self.max_context}


class HFBackend:
    """Pretrained causal LM via transformers; needs resolvable weights."""

    def __init__(self, model_name: str, device: str = "cpu", max_context: int | None = None):
        from transformers import AutoModelForCausalLM, AutoTokenizer

        self.tokenizer = AutoTokenizer.from_pretrained(model_name, use_fast=True)
        self.model = AutoModelForCausalLM.from_pretrained(model_name).to(device)
        self.model.eval()
        self.device = device
        self.name = model_name
        self.vocab_size = int(self.model.config.vocab_size)
        inferred = getattr(self.model.config, "n_positions", None) or getattr(
            self.model.config, "max_position_embeddings", 2048
        )
        self.max_context = int(max_context or inferred)
        self._lock = threading.Lock()

    def tokenize(self, text: str) -> tuple[list[int], list[str]]:
        encoding = self.tokenizer(text, return_offsets_mapping=True, add_special_tokens=False)
        ids = list(encoding["input_ids"])
        offsets = list(encoding["offset_mapping"])
        # pieces sliced from the source text by offsets, stretched over any
        # gaps so concatenation reproduces the text exactly
        pieces = []
        cursor = 0
        for i, (start, end) in enumerate(offsets):
            next_start = offsets[i + 1][0] if i + 1 < len(offsets) else len(text)
            pieces.append(text[cursor:next_start])
            cursor = next_start
        return ids, pieces

    def _forward_logprobs(self, ids: list[int]) -> torch.Tensor:
        if not ids:
            bos = self.tokenizer.bos_token_id or 0
            ids = [bos]
        if len(ids) > self.max_context:
            raise ValueError(f"context of {len(ids)} tokens exceeds max_context {self.max_context}")
        with self._lock, torch.no_grad():
            out = self.model(torch.tensor([ids], dtype=torch.long, device=self.device))
        return torch.log_softmax(out.logits[0, -1].double(), dim=-1)

    def next_token_logprobs(self, prompt_ids: list[int], allowed_ids: list[int] | None) -> dict[int, float]:
        logprobs = self._forward_logprobs(list(prompt_ids))
        if allowed_ids is not None:
            return {int(i): float(logprobs[int(i)]) for i in allowed_ids}
        return {i: float(logprobs[i]) for i in range(self.vocab_size)}

    def generate(self, prompt: str, max_tokens: int, stop: list[str]) -> str:
        ids = self.tokenizer(prompt, add_special_tokens=False)["input_ids"]
        generated: list[int] = []
        for _ in range(max_tokens):
            logprobs = self._forward_logprobs(ids + generated)
            best = int(torch.argmax(logprobs))
            generated.append(best)
            text = self.tokenizer.decode(generated)
            for marker in stop:
                if marker in text:
                    return text[: text.index(marker)]
            if best == self.tokenizer.eos_token_id:
                text = self.tokenizer.decode(generated[:-1])
                return text
        return self.tokenizer.decode(generated)

    def embed(self, texts: list[str]) -> list[list[float]]:
        vectors = []
        base = getattr(self.model, self.model.base_model_prefix)
        for text in texts:
            ids = self.tokenizer(text, add_special_tokens=False)["input_ids"] or [
                self.tokenizer.bos_token_id or 0
            ]
            with self._lock, torch.no_grad():
                hidden = base(torch.tensor([ids], dtype=torch.long, device=self.device)).last_hidden_state
            pooled = hidden[0].mean(dim=0)
            norm = torch.linalg.vector_norm(pooled)
            if float(norm) == 0.0:
                pooled = torch.zeros_like(pooled)
                pooled[0] = 1.0
                norm = torch.tensor(1.0)
            vectors.append((pooled / norm).tolist())
        return vectors

    def info(self) -> dict:
        return {"model": self.name, "vocab_size": self.vocab_size, "max_context": self.max_context}


def build_backend(descriptor: str, max_context: int | None = None):
    """Backend factory: ``tiny[:seed]`` or ``hf:<model-name>``."""
    if descriptor.startswith("tiny"):
        _, _, seed = descriptor.partition(":")
        return TinyBackend(seed=int(seed) if seed else 0, max_context=max_context or 2048)
    if descriptor.startswith("hf:"):
        return HFBackend(descriptor[len("hf:"):], max_context=max_context)
    raise ValueError(f"unknown model descriptor {descriptor!r}; use tiny[:seed] or hf:<name>")
