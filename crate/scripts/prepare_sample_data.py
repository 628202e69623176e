#!/usr/bin/env python3
"""Build the bundled public-domain sample data under data/.

Inputs (public domain):
  * Shakespeare's works as packaged by the `shakespeare` PyPI sdist (Gutenberg texts)
  * the King James Bible as packaged by `pythonbible` + `pythonbible-kjv`

Usage:
  pip download --no-deps shakespeare==0.6 pythonbible==0.15.5 pythonbible-kjv==0.0.2 -d /tmp/pd
  pip install --target /tmp/pdlib /tmp/pd/pythonbible*.whl
  tar xzf /tmp/pd/shakespeare-0.6.tar.gz -C /tmp/pd
  PYTHONPATH=/tmp/pdlib python3 scripts/prepare_sample_data.py /tmp/pd/shakespeare-0.6/shksprdata/texts data
"""
import json
import os
import re
import sys

import pythonbible as bible

TRAIN_PLAYS = [
    "alls_well_that_ends_well", "antony_and_cleopatra", "as_you_like_it", "coriolanus",
    "henry_iv_part_1", "henry_v", "julius_caesar", "lear", "merchant_of_venice",
    "much_ado_about_nothing", "othello", "romeo_and_juliet", "tempest", "winters_tale",
]
TRAIN_BOOKS = ["GENESIS", "EXODUS", "LEVITICUS", "NUMBERS", "DEUTERONOMY", "JOSHUA", "JUDGES"]

HELD_OUT_PLAYS = ["hamlet", "twelfth_night", "macbeth"]
HELD_OUT_POEMS = ["sonnets", "rape_of_lucrece", "lovers_complaint"]
HELD_OUT_BOOKS = ["MATTHEW", "MARK", "LUKE", "JOHN"]

DOCS_PER_SOURCE = 50
DOC_TOKENS = 200
TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def book_text(name):
    book = bible.Book[name]
    lines = []
    for chapter in range(1, bible.get_number_of_chapters(book) + 1):
        verses = []
        for verse in range(1, bible.get_number_of_verses(book, chapter) + 1):
            vid = bible.convert_reference_to_verse_ids(
                bible.NormalizedReference(book, chapter, verse, chapter, verse)
            )[0]
            verses.append(bible.get_verse_text(vid, version=bible.Version.KING_JAMES))
        lines.append(" ".join(verses))
    return "\n\n".join(lines) + "\n"


def play_text(texts_dir, name):
    with open(os.path.join(texts_dir, f"{name}_gut.txt"), encoding="utf-8") as f:
        return f.read()


def chunks(text, n_docs, doc_tokens):
    spans = [m.span() for m in TOKEN_RE.finditer(text)]
    n_windows = len(spans) // doc_tokens
    if n_windows < n_docs:
        raise SystemExit(f"source too short: {n_windows} windows < {n_docs}")
    step = n_windows / n_docs
    out = []
    for i in range(n_docs):
        w = int(i * step)
        start = spans[w * doc_tokens][0]
        end = spans[(w + 1) * doc_tokens - 1][1]
        out.append(text[start:end])
    return out


def main():
    texts_dir, out_dir = sys.argv[1], sys.argv[2]
    train_dir = os.path.join(out_dir, "train")
    os.makedirs(train_dir, exist_ok=True)
    for play in TRAIN_PLAYS:
        with open(os.path.join(train_dir, f"{play}.txt"), "w", encoding="utf-8") as f:
            f.write(play_text(texts_dir, play))
    for book in TRAIN_BOOKS:
        with open(os.path.join(train_dir, f"kjv_{book.lower()}.txt"), "w", encoding="utf-8") as f:
            f.write(book_text(book))

    sources = {
        "plays": "\n\n".join(play_text(texts_dir, p) for p in HELD_OUT_PLAYS),
        "poems": "\n\n".join(play_text(texts_dir, p) for p in HELD_OUT_POEMS),
        "gospels": "\n\n".join(book_text(b) for b in HELD_OUT_BOOKS),
    }
    with open(os.path.join(out_dir, "real.jsonl"), "w", encoding="utf-8") as f:
        for source, text in sources.items():
            for i, doc in enumerate(chunks(text, DOCS_PER_SOURCE, DOC_TOKENS)):
                record = {"id": f"{source}-{i:03}", "text": doc, "label": "real", "source": source}
                f.write(json.dumps(record, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
