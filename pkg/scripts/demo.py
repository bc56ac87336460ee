"""End-to-end offline demo: synthetic market wraps, keyword scoring into a replay
cache, then the full pipeline replayed from that cache.

    python scripts/demo.py --out-dir demo_run
"""

import argparse
import json
from pathlib import Path

from sentiment_lab.corpus import load_corpus
from sentiment_lab.llm import KeywordBackend, LlmClient, ReplayCache, score_corpus
from sentiment_lab.pipeline import config_from_dict, run_pipeline
from sentiment_lab.synthetic import generate_synthetic_fixture, generate_text_corpus, write_fixture, write_text_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="demo_run")
    ap.add_argument("--days", type=int, default=800)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_text_corpus(generate_text_corpus(args.seed, n_days=args.days), out / "corpus.jsonl")
    write_fixture(generate_synthetic_fixture(args.seed, n_days=args.days + 300), out)

    cache = out / "cache.jsonl"
    if not cache.exists():
        docs = load_corpus(out / "corpus.jsonl").documents
        client = LlmClient(ReplayCache(cache), KeywordBackend())
        score_corpus(docs, client)
        print(f"scored {len(docs)} documents with {client.backend_calls} backend calls")

    config = json.loads((out / "config.json").read_text())
    config.pop("sentiments")
    config.update(corpus="corpus.jsonl", cache="cache.jsonl",
                  backend={"kind": "replay", "model_id": KeywordBackend.model_id})
    (out / "config.json").write_text(json.dumps(config, indent=2, sort_keys=True) + "\n")
    manifest = run_pipeline(config_from_dict(config, out))
    print(f"run written to {out / config['output_dir']} ({len(manifest['outputs'])} files)")
    print(f"replay again with: sentiment-lab run --config {out / 'config.json'}")


if __name__ == "__main__":
    main()
