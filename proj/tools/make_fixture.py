#!/usr/bin/env python3
"""Writes the synthetic bilingual fixture used by the end-to-end run.

English sentences are drawn from a handful of templates over a small
lexicon; the second language ("xx") is a deterministic word-for-word
relabelling with made-up surface forms. Static vectors share a concept
vector across the two languages plus per-word noise, so translations
align by mutual argmax.

Usage: make_fixture.py OUT_DIR [--seed N]
"""

import argparse
import json
import math
import random
from pathlib import Path

NOUNS = ["bank", "river", "money", "house", "tree", "dog", "cat", "bird", "car", "road",
         "book", "table", "water", "fire", "stone", "field", "city", "boat", "horse", "child",
         "plant", "light", "song", "lamp", "door", "window", "garden", "market", "bridge", "hill"]
VERBS = ["sees", "finds", "likes", "wants", "keeps", "moves", "opens", "holds", "needs", "takes"]
ADJS = ["big", "small", "old", "new", "red", "green", "quiet", "fast", "dark", "warm"]
FUNC = ["the", "a", "near", "with", "and", "on", "in"]
PUNCT = [".", ","]

SYLLABLES = ["ka", "lo", "mi", "su", "ta", "ne", "ri", "po", "va", "du", "ze", "fo", "gu", "xi", "be"]


def xx_lexicon(rng, words):
    taken = set(words)
    out = {}
    for w in words:
        while True:
            cand = "".join(rng.choice(SYLLABLES) for _ in range(2 if len(w) < 5 else 3))
            if cand not in taken:
                taken.add(cand)
                out[w] = cand
                break
    return out


def sentence(rng):
    n1, n2 = rng.sample(NOUNS, 2)
    a1, a2 = rng.choice(ADJS), rng.choice(ADJS)
    v = rng.choice(VERBS)
    shape = rng.randrange(4)
    if shape == 0:
        words = ["the", a1, n1, v, "a", n2]
    elif shape == 1:
        words = ["a", n1, "near", "the", n2, v, "the", a2, rng.choice(NOUNS)]
    elif shape == 2:
        words = ["the", n1, "with", "the", a1, n2, v, "a", a2, rng.choice(NOUNS)]
    else:
        words = ["the", a1, n1, "and", "the", n2, v, str(rng.randrange(2, 9)), rng.choice(NOUNS)]
    return words + ["."]


def translate(words, lex):
    return [lex.get(w, w) for w in words]


def unit(v):
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def embeddings(rng, lex, dim=8):
    rows = []
    for w in NOUNS + VERBS + ADJS + FUNC:
        base = [rng.gauss(0, 1) for _ in range(dim)]
        for surface in (w, lex[w]):
            rows.append((surface, unit([b + 0.25 * rng.gauss(0, 1) for b in base])))
    return rows


def fmt_vec(v):
    return " ".join(f"{x:.6f}" for x in v)


def tsv(path, rows):
    path.write_text("".join("\t".join(str(c) for c in r) + "\n" for r in rows))


def word_pair_rows(rng, n, lang_b=None, graded=False):
    rows = []
    for _ in range(n):
        s1, s2 = sentence(rng), sentence(rng)
        w = rng.choice(NOUNS)
        i1 = next((i for i, x in enumerate(s1) if x in NOUNS), 1)
        s1[i1] = w
        i2 = next((i for i, x in enumerate(s2) if x in NOUNS), 1)
        same = rng.random() < 0.5
        s2[i2] = w if same else rng.choice(NOUNS)
        if lang_b:
            s2 = translate(s2, lang_b)
        gold = round(rng.uniform(0, 1) * (2 if same else 1), 2) if graded else int(same)
        rows.append((" ".join(s1), i1, i1 + 1, " ".join(s2), i2, i2 + 1, gold))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", type=Path)
    ap.add_argument("--seed", type=int, default=20240607)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    lex = xx_lexicon(rng, NOUNS + VERBS + ADJS + FUNC)

    with (out / "pairs.jsonl").open("w") as f:
        for i in range(200):
            src = sentence(rng)
            rec = {"src_tokens": src, "tgt_tokens": translate(src, lex), "lang_src": "en", "lang_tgt": "xx"}
            if i % 10:
                nouns = [k for k, w in enumerate(src) if w in NOUNS]
                rec["target_index"] = rng.choice(nouns)
            f.write(json.dumps(rec) + "\n")

    rows = embeddings(rng, lex)
    with (out / "embeddings.txt").open("w") as f:
        f.write(f"{len(rows)} {len(rows[0][1])}\n")
        for w, v in rows:
            f.write(f"{w} {fmt_vec(v)}\n")

    vocab = sorted(set(NOUNS + VERBS + ADJS + FUNC + list(lex.values()) + PUNCT + [str(d) for d in range(10)]))
    (out / "vocab.txt").write_text("\n".join(vocab) + "\n")

    tsv(out / "wic_dev.tsv", word_pair_rows(rng, 40))
    tsv(out / "wic_test.tsv", word_pair_rows(rng, 40))
    tsv(out / "mclwic_dev.tsv", word_pair_rows(rng, 30, lex))
    tsv(out / "mclwic_test.tsv", word_pair_rows(rng, 30, lex))
    tsv(out / "usim.tsv", word_pair_rows(rng, 30, graded=True))

    cos = []
    for _ in range(20):
        c1, c2 = sentence(rng) + sentence(rng), sentence(rng) + sentence(rng)
        a, b = rng.sample(NOUNS, 2)
        c1[1], c1[-2], c2[1], c2[-2] = a, b, a, b
        n1, n2 = len(c1), len(c2)
        cos.append((" ".join(c1), 1, 2, n1 - 2, n1 - 1, " ".join(c2), 1, 2, n2 - 2, n2 - 1,
                    round(rng.uniform(-2, 2), 2)))
    tsv(out / "cosimlex.tsv", cos)

    sts = []
    for k in range(60):
        s1 = sentence(rng)
        s2 = list(s1) if rng.random() < 0.5 else sentence(rng)
        if s2 == s1:
            s2[rng.randrange(len(s2) - 1)] = rng.choice(ADJS)
        sts.append((" ".join(s1), " ".join(s2), round(rng.uniform(0, 5), 1), "news" if k % 2 else "forum"))
    tsv(out / "sts.tsv", sts)

    def paws_rows(n):
        rows = []
        for _ in range(n):
            s1 = sentence(rng)
            s2 = list(s1)
            label = int(rng.random() < 0.5)
            i, j = rng.sample([k for k, w in enumerate(s2) if w in NOUNS or w in ADJS] or [0, 1], 2)
            if label:
                s2[i] = rng.choice(ADJS) if s2[i] in ADJS else s2[i]
            else:
                s2[i], s2[j] = s2[j], s2[i]
            rows.append((" ".join(s1), " ".join(s2), label))
        return rows

    tsv(out / "paws_dev.tsv", paws_rows(40))
    tsv(out / "paws_test.tsv", paws_rows(40))
    tsv(out / "buckets.tsv", paws_rows(30))

    targets = []
    for _ in range(40):
        s = sentence(rng)
        i = next((k for k, w in enumerate(s) if w in NOUNS), 0)
        targets.append((" ".join(s), i, i + 1))
    tsv(out / "targets.tsv", targets)

    (out / "fixture.toml").write_text("""# End-to-end fixture: paths are relative to this directory.
mode = "crosslingual"
seed = 7
threads = 1
provider = "toy"
vocab = "vocab.txt"
toy-layers = 4
toy-dim = 16
toy-heads = 2
toy-seed = 3

[build-corpus]
pairs = "pairs.jsonl"
embeddings = "embeddings.txt"
validation-fraction = 0.1

[train]
batch-size = 64
lr = 0.005
warmup = 20
max-epochs = 60
patience = 3

[evaluate]
task = ["wic:wic_test.tsv:wic_dev.tsv", "mcl-wic:mclwic_test.tsv:mclwic_dev.tsv", "usim:usim.tsv",
        "cosimlex-i:cosimlex.tsv", "sts:sts.tsv", "paws:paws_test.tsv:paws_dev.tsv"]

[analyze]
pairs = "buckets.tsv"
targets = "targets.tsv"
""")


if __name__ == "__main__":
    main()
