#!/usr/bin/env python3
"""Generate a small synthetic intent corpus with embeddings so the full
pipeline can be tried without any model: three topical intents, a shared
vocabulary, scripted confusions, and a tiny concept lexicon.

Usage: python scripts/make_demo_data.py out_dir/
"""

import json
import struct
import sys
from pathlib import Path

import numpy as np

INTENTS = {
    "book_taxi": (["book", "a", "cab", "ride", "to", "airport", "taxi", "now"], [0.0, 0.0]),
    "play_music": (["play", "some", "jazz", "music", "song", "loud", "again"], [6.0, 0.0]),
    "transfer_money": (["send", "cash", "transfer", "money", "card", "account"], [0.0, 6.0]),
}
LEXICON = [
    {"word": "cab", "concepts": ["a vehicle"]},
    {"word": "taxi", "concepts": ["a vehicle"]},
    {"word": "jazz", "concepts": ["a music genre"]},
    {"word": "music", "concepts": ["a music genre"]},
    {"word": "cash", "concepts": ["a payment"]},
    {"word": "card", "concepts": ["a payment"]},
]
DIM = 16
N_PER_INTENT = 60
CONFUSION_RATE = 0.15


def write_token_embeddings(path, matrices):
    with open(path, "wb") as fh:
        fh.write(b"SEMT")
        fh.write(struct.pack("<III", 1, len(matrices), DIM))
        for m in matrices:
            fh.write(struct.pack("<I", m.shape[0]))
            fh.write(np.ascontiguousarray(m, dtype="<f4").tobytes())


def write_sample_embeddings(path, matrix):
    with open(path, "wb") as fh:
        fh.write(b"SEMB")
        fh.write(struct.pack("<III", 1, matrix.shape[0], DIM))
        fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo-data")
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(7)
    labels = list(INTENTS)

    word_vectors = {}
    for intent, (vocab, center) in INTENTS.items():
        base = np.zeros(DIM)
        base[: len(center)] = center
        for word in vocab:
            word_vectors.setdefault(word, base + rng.normal(scale=0.8, size=DIM))

    rows, token_matrices, pooled = [], [], []
    i = 0
    for intent, (vocab, _) in INTENTS.items():
        for _ in range(N_PER_INTENT):
            n_tokens = int(rng.integers(3, 7))
            tokens = list(rng.choice(vocab, size=n_tokens))
            matrix = np.stack([word_vectors[w] + rng.normal(scale=0.25, size=DIM) for w in tokens])
            confused = rng.uniform() < CONFUSION_RATE
            pred = str(rng.choice([l for l in labels if l != intent])) if confused else intent
            rows.append(
                {
                    "id": f"demo-{i:04d}",
                    "text": " ".join(tokens),
                    "tokens": tokens,
                    "gold_label": intent,
                    "pred_label": pred,
                    "confidence": round(float(rng.uniform(0.3, 0.99)), 3),
                }
            )
            token_matrices.append(matrix)
            pooled.append(matrix.mean(axis=0))
            i += 1

    with open(out / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    write_token_embeddings(out / "tokens.semt", token_matrices)
    write_sample_embeddings(out / "samples.semb", np.stack(pooled))
    with open(out / "lexicon.jsonl", "w", encoding="utf-8") as fh:
        for entry in LEXICON:
            fh.write(json.dumps(entry) + "\n")
    print(f"wrote {len(rows)} samples to {out}/")


if __name__ == "__main__":
    main()
