#!/usr/bin/env python3
"""Embed texts exported by `memroute export-texts` with a sentence-transformers model.

Reads {"key", "text"} JSONL and writes {"key", "embedding"} JSONL for
`memroute import-embeddings`.
"""
import argparse
import json

from sentence_transformers import SentenceTransformer


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("input")
    ap.add_argument("output")
    ap.add_argument("--model", default="BAAI/bge-small-en-v1.5")
    ap.add_argument("--batch-size", type=int, default=64)
    args = ap.parse_args()

    with open(args.input, encoding="utf-8") as f:
        rows = [json.loads(line) for line in f if line.strip()]
    model = SentenceTransformer(args.model, device="cpu")
    vectors = model.encode(
        [r["text"] for r in rows],
        batch_size=args.batch_size,
        normalize_embeddings=True,
        show_progress_bar=True,
    )
    with open(args.output, "w", encoding="utf-8") as out:
        for row, vec in zip(rows, vectors):
            out.write(json.dumps({"key": row["key"], "embedding": [float(x) for x in vec]}) + "\n")


if __name__ == "__main__":
    main()
