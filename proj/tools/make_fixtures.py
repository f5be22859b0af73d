#!/usr/bin/env python3
"""Regenerate the bundled JSONL fixtures deterministically."""

import json
import math
import random
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "fixtures"

# (id, question, greedy, label, [(cluster answer variants, count), ...])
QUERIES = [
    ("tqa-01", "Which planet is known as the Red Planet?", "Mars", True,
     [(["Mars", "The planet Mars.", "It is Mars."], 9), (["Jupiter"], 1)]),
    ("tqa-02", "Who wrote the novel Pride and Prejudice?", "Jane Austen", True,
     [(["Jane Austen", "Jane Austen.", "It was written by Jane Austen."], 10)]),
    ("tqa-03", "What is the capital city of Australia?", "Sydney", False,
     [(["Canberra", "The capital is Canberra."], 5), (["Sydney", "Sydney."], 4), (["Melbourne"], 1)]),
    ("tqa-04", "In which year did the Berlin Wall fall?", "1989", True,
     [(["1989", "In 1989.", "The wall fell in 1989."], 8), (["1991"], 2)]),
    ("tqa-05", "What is the chemical symbol for tungsten?", "Tu", False,
     [(["W", "Its symbol is W."], 4), (["Tu"], 3), (["Tg"], 2), (["Wo"], 1)]),
    ("tqa-06", "Who painted the ceiling of the Sistine Chapel?", "Michelangelo", True,
     [(["Michelangelo", "Michelangelo Buonarroti", "It was painted by Michelangelo."], 10)]),
    ("tqa-07", "Which element has atomic number 79?", "Gold", True,
     [(["Gold", "Gold (Au)."], 7), (["Silver"], 3)]),
    ("tqa-08", "What is the longest river in Africa?", "The Nile", True,
     [(["The Nile", "Nile", "The Nile River."], 6), (["The Congo", "Congo River"], 4)]),
    ("tqa-09", "Who was the first person to reach the South Pole?", "Robert Falcon Scott", False,
     [(["Roald Amundsen", "Amundsen"], 3), (["Robert Falcon Scott", "Scott"], 4),
      (["Ernest Shackleton"], 2), (["Robert Peary"], 1)]),
    ("tqa-10", "What is the smallest prime number greater than 90?", "91", False,
     [(["97"], 2), (["91"], 3), (["93"], 1), (["101"], 2), (["89"], 2)]),
]


def triple(rng, same):
    if same:
        pe = rng.uniform(0.80, 0.97)
        pn = (1.0 - pe) * rng.uniform(0.3, 0.9)
    else:
        pc = rng.uniform(0.60, 0.92)
        pn = (1.0 - pc) * rng.uniform(0.4, 0.9)
        pe = 1.0 - pc - pn
    pe, pn = round(pe, 4), round(pn, 4)
    return [pe, pn, round(1.0 - pe - pn, 4)]


def probs_for(cluster_of, rng):
    n = len(cluster_of)
    return [[[1.0, 0.0, 0.0] if i == j else triple(rng, cluster_of[i] == cluster_of[j])
             for j in range(n)] for i in range(n)]


def sentence_fixture():
    rng = random.Random(20240611)
    lines = []
    for qid, question, greedy, label, clusters in QUERIES:
        texts, cluster_of = [], []
        for c, (variants, count) in enumerate(clusters):
            for r in range(count):
                texts.append(variants[r % len(variants)])
                cluster_of.append(c)
        order = list(range(len(texts)))
        rng.shuffle(order)
        texts = [texts[i] for i in order]
        cluster_of = [cluster_of[i] for i in order]
        lines.append({"id": qid, "context": question, "greedy_response": greedy, "texts": texts,
                      "probs": probs_for(cluster_of, rng), "label": label})
    return lines


def two_block_fixture():
    texts = ["Paris", "It is Paris.", "Paris, France", "The Louvre is in Paris.", "Paris is the answer.",
             "Lyon", "It is Lyon.", "Lyon, France", "The Louvre is in Lyon.", "Lyon is the answer."]
    block = [0] * 5 + [1] * 5
    probs = [[[1.0, 0.0, 0.0] if i == j else
              ([0.95, 0.05, 0.0] if block[i] == block[j] else [0.05, 0.05, 0.9])
              for j in range(10)] for i in range(10)]
    return [{"id": "two-block", "context": "Which French city hosts the Louvre?",
             "greedy_response": "Paris", "texts": texts, "probs": probs, "label": True}]


CLAIMS = [
    {"id": "bio-01", "question": "Tell me a bio of Marie Curie.",
     "claims": ["Marie Curie was born in Warsaw.", "She won two Nobel Prizes.",
                "She discovered polonium.", "She was born in 1901."],
     "responses": ["Curie, born in Warsaw, won Nobel Prizes in physics and chemistry.",
                   "A Warsaw-born chemist, Curie discovered polonium and radium.",
                   "Marie Curie won two Nobel Prizes and discovered polonium."],
     "rc_entails": [[1, 1, 0, 0], [1, 0, 1, 0], [0, 1, 1, 0]],
     "labels": [True, True, True, False]},
    {"id": "bio-02", "question": "Tell me a bio of Alan Turing.",
     "claims": ["Turing was a British mathematician.", "He worked at Bletchley Park.",
                "He proposed the Turing test.", "He won a Turing Award."],
     "responses": ["Alan Turing, a British mathematician, broke codes at Bletchley Park.",
                   "The British mathematician Turing proposed what is now the Turing test.",
                   "Turing worked at Bletchley Park and later proposed the imitation game.",
                   "Alan Turing was a British logician and codebreaker."],
     "rc_entails": [[1, 1, 0, 0], [1, 0, 1, 0], [0, 1, 1, 0], [1, 1, 0, 0]],
     "labels": [True, True, True, False]},
    {"id": "bio-03", "question": "Tell me a bio of Ada Lovelace.",
     "claims": ["Ada Lovelace was Lord Byron's daughter.", "She wrote notes on the Analytical Engine."],
     "responses": ["Byron's daughter Ada annotated Babbage's Analytical Engine.",
                   "Ada Lovelace, daughter of Lord Byron, wrote the famous Notes.",
                   "Lovelace wrote notes on the Analytical Engine."],
     "rc_entails": [[1, 1], [1, 1], [0, 1]],
     "labels": [True, True]},
    {"id": "bio-04", "question": "Tell me a bio of Nikola Tesla.",
     "claims": ["Tesla was born in Smiljan.", "He developed alternating current systems.",
                "He invented the telephone.", "He worked briefly for Edison.", "He died in Paris."],
     "responses": ["Tesla, born in Smiljan, pioneered AC power and worked for Edison.",
                   "Nikola Tesla developed alternating current systems after leaving Edison.",
                   "Born in Smiljan, Tesla is known for AC induction motors.",
                   "Tesla worked for Edison before developing AC systems.",
                   "The inventor Tesla championed alternating current."],
     "rc_entails": [[1, 1, 0, 1, 0], [0, 1, 0, 1, 0], [1, 1, 0, 0, 0], [0, 1, 0, 1, 0],
                    [0, 1, 0, 0, 0]],
     "labels": [True, True, False, True, False]},
    {"id": "bio-05", "question": "Tell me a bio of Grace Hopper.",
     "claims": ["Grace Hopper was a US Navy rear admiral.", "She helped develop COBOL.",
                "She found a moth in the Harvard Mark II.", "She was born in Canada."],
     "responses": ["Rear Admiral Grace Hopper of the US Navy helped create COBOL.",
                   "Hopper shaped COBOL and popularised the term debugging after a moth was found.",
                   "Grace Hopper, a Navy rear admiral, worked on the Harvard Mark II."],
     "rc_entails": [[1, 1, 0, 0], [0, 1, 1, 0], [1, 0, 0, 0]],
     "labels": [True, True, True, False]},
]


def rejection_accuracy(items, percent):
    keep = math.ceil(Fraction(100 - percent, 100) * len(items))
    order = sorted(range(len(items)), key=lambda i: items[i][0])
    return Fraction(sum(items[i][1] for i in order[:keep]), keep)


def aurac_exact(items):
    xs = [Fraction(p, 100) for p in range(0, 100, 5)]
    ys = [rejection_accuracy(items, p) for p in range(0, 100, 5)]
    area = sum((ys[i] + ys[i - 1]) / 2 * (xs[i] - xs[i - 1]) for i in range(1, len(xs)))
    return area / (xs[-1] - xs[0])


AURAC_CASES = {
    "separated": [(0.9, 0), (0.4, 1), (0.6, 0), (0.1, 1)],
    "ties": [(0.3, 1), (0.7, 0), (0.3, 0), (0.5, 1), (0.9, 0),
             (0.1, 1), (0.5, 1), (0.8, 1), (0.2, 0), (0.6, 1)],
    "odd": [(2.0, 1), (1.0, 0), (3.0, 1), (0.5, 1), (4.0, 0), (1.5, 1), (2.5, 0)],
}


def aurac_fixture():
    out = []
    for name, items in AURAC_CASES.items():
        exact = aurac_exact(items)
        out.append({
            "name": name,
            "scores": [s for s, _ in items],
            "correct": [bool(c) for _, c in items],
            "aurac": f"{exact.numerator}/{exact.denominator}",
        })
    return out


def dump(name, lines):
    with open(ROOT / name, "w") as f:
        for obj in lines:
            f.write(json.dumps(obj, ensure_ascii=False) + "\n")


def main():
    ROOT.mkdir(exist_ok=True)
    dump("triviaqa_small.jsonl", sentence_fixture())
    dump("two_block.jsonl", two_block_fixture())
    dump("claims_small.jsonl", CLAIMS)
    dump("aurac_cases.jsonl", aurac_fixture())
    # Two directed 3-cliques joined by weak edges in both directions.
    n, w = 6, [[0.0] * 6 for _ in range(6)]
    for block in ((0, 1, 2), (3, 4, 5)):
        for i in block:
            for j in block:
                if i != j:
                    w[i][j] = 1.0
    w[2][3] = w[3][2] = 1e-3
    with open(ROOT / "two_cliques.json", "w") as f:
        json.dump({"n": n, "weights": w}, f)
        f.write("\n")


if __name__ == "__main__":
    main()
