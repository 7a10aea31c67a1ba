#!/usr/bin/env python3
"""Generates the bundled synthetic fixture corpus (data/corpus/manifest.jsonl).

Deterministic for a given --seed. Every accepted page carries one
corpus-unique term repeated several times, so its 5-term signature finds it.
"""

import argparse
import json
import random
from pathlib import Path

FILLER = """
garden river market bakery bicycle harbor lantern meadow orchard pottery
quilt saddle timber valley willow canyon glacier island jungle lagoon
museum library theater stadium factory kitchen cellar attic balcony chimney
violin trumpet guitar drum piano cello flute banjo harp organ
engine rocket tractor wagon sailboat ferry subway tram scooter glider
apple cherry lemon mango olive peach pepper radish tomato walnut
copper silver marble granite velvet linen cotton wool leather bamboo
falcon otter badger beaver heron salmon turtle walrus zebra lynx
recipe lesson puzzle ledger journal almanac atlas diary sketch poster
winter summer autumn harvest sunrise thunder breeze drizzle frost rainbow
""".split()

SYLLABLES = "ka lo mi ru ten vos pra zel quo dar fin gus hex jor wix yul bre cot nim sap".split()

STOP_SENTENCES = [
    "this is the place where we keep all of our",
    "you can find more about it on the other pages",
    "we have been doing this for a long time and",
    "if you would like to know more please",
    "there are many things that we can do for you",
]

GENERIC_TITLES = ["Home", "Home Page", "Welcome", "About us"]


def pseudo_word(rng, used, n=4):
    while True:
        w = "".join(rng.choice(SYLLABLES) for _ in range(n))
        if w not in used:
            used.add(w)
            return w


def body(rng, unique, anchor, n_filler=60):
    words = []
    for _ in range(n_filler // 6):
        words.append(rng.choice(STOP_SENTENCES))
        words.extend(rng.sample(FILLER, 6))
    # the unique term six times, the anchor twice
    for _ in range(6):
        words.insert(rng.randrange(len(words) + 1), unique)
    for _ in range(2):
        words.insert(rng.randrange(len(words) + 1), anchor)
    return " ".join(words)


def page_html(title, text, rng):
    head = f"<title>{title}</title>" if title is not None else ""
    noise = rng.choice(["", "<script>var x = 1;</script>", "<!-- nav -->", "<style>p{}</style>"])
    return f"<html><head>{head}{noise}</head><body><p>{text}</p></body></html>"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=20090615)
    ap.add_argument("--pages", type=int, default=120)
    ap.add_argument("--out", type=Path, default=Path("data/corpus/manifest.jsonl"))
    args = ap.parse_args()

    rng = random.Random(args.seed)
    used = set(FILLER)
    lines = [json.dumps({"manifest_version": "1"})]

    for i in range(args.pages):
        uri = f"http://site{i:03d}.example.org/"
        unique = pseudo_word(rng, used)
        anchor = pseudo_word(rng, used, 3)
        r = i % 10
        if i < 25:
            title = "Home"
        elif r == 1:
            title = rng.choice(GENERIC_TITLES[1:])
        elif r == 2:
            title = None
        elif r == 3:
            # shared descriptive words, spread over ranks
            title = f"{rng.choice(FILLER).title()} and {rng.choice(FILLER).title()} Shop"
        else:
            title = f"{anchor.title()} {rng.choice(FILLER).title()} &amp; {rng.choice(FILLER)}"
        entry = {"uri": uri, "html": page_html(title, body(rng, unique, anchor), rng)}

        if i % 3 == 0:
            n_tags = rng.choice([3, 7, 10, 14])
            entry["tags"] = [anchor, unique] + rng.sample(FILLER, n_tags - 2)
        if i % 4 == 0:
            entry["inlinks"] = [
                {
                    "uri": f"http://links{i:03d}-{k}.example.net/",
                    "html": page_html(
                        f"Links {k}",
                        f"we like the {anchor} pages " + " ".join(rng.sample(FILLER, 12))
                        + " " + rng.choice(STOP_SENTENCES),
                        rng,
                    ),
                }
                for k in range(rng.randint(1, 3))
            ]
        lines.append(json.dumps(entry))

    # rejects: too short, and text with no stop words
    lines.append(json.dumps({"uri": "http://short.example.org/",
                             "html": "<html><title>Tiny</title><p>just a few words here</p></html>"}))
    lines.append(json.dumps({"uri": "http://short2.example.org/", "html": "<p></p>"}))
    lines.append(json.dumps({"uri": "http://wordlist.example.org/",
                             "html": "<p>" + " ".join(FILLER[:80]) + "</p>"}))

    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
