#!/usr/bin/env python3
"""Regenerates the shipped ontologies and synthetic fixture corpora.

Everything here is deterministic (fixed seeds).  The scorer below is an
independent re-implementation of the lexicon scoring rule; its accuracy on
mini15 is frozen into the manifest and checked against the C++ code.
"""
import json
import os
import random
import re
import string

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA = os.path.join(ROOT, "data")
FIX = os.path.join(ROOT, "fixtures")

BROAD13 = [
    "Criminal Procedure", "Civil Rights", "First Amendment", "Due Process",
    "Privacy", "Attorneys", "Unions", "Economic Activity", "Judicial Power",
    "Federalism", "Interstate Relations", "Federal Taxation", "Miscellaneous",
]
GLOSSES = {
    "None": "Cases that do not fit into any specific category.",
    "Criminal Procedure": "Cases involving the process of investigating and prosecuting crimes.",
    "Civil Rights": "Cases about the rights of individuals to receive equal treatment.",
    "First Amendment": "Cases addressing issues related to freedom of speech, religion, or press.",
    "Due Process": "Cases focusing on legal safeguards ensuring fair treatment.",
    "Privacy": "Cases dealing with the right to privacy.",
    "Attorneys": "Cases about the legal profession and lawyer regulations.",
    "Unions": "Cases concerning labor unions and collective bargaining.",
    "Economic Activity": "Cases involving business, trade, or commerce.",
    "Judicial Power": "Cases addressing the powers of courts and the judiciary.",
    "Federalism": "Cases about the division of power between state and federal governments.",
    "Interstate Relations": "Cases about interactions between states.",
    "Federal Taxation": "Cases involving federal tax laws.",
    "Miscellaneous": "Cases that do not clearly fit into any of the above categories.",
    "Private Action": "Cases involving disputes between private individuals or entities.",
}
BROAD15 = BROAD13 + ["Private Action", "None"]

FINE_HEADS = [
    "Search", "Seizure", "Confession", "Jury", "Sentencing", "Habeas", "Counsel",
    "Voting", "Busing", "Speech", "Press", "Religion", "Obscenity", "Hearing",
    "Abortion", "Contraception", "Bar", "Fee", "Strike", "Picketing", "Antitrust",
    "Securities", "Bankruptcy", "Standing", "Mootness", "Preemption", "Compact",
    "Boundary", "Estate", "Excise",
]
FINE_TAILS = [
    "Standards", "Remedies", "Procedure", "Liability", "Review", "Claims",
    "Limits", "Duties", "Rights", "Immunity",
]


def fine_names(count):
    names = [f"{h} {t}" for t in FINE_TAILS for h in FINE_HEADS]
    return names[:count]


def write_ontology(path, level, names, fine_to_broad=None, glosses=None):
    labels = []
    for i, n in enumerate(names):
        entry = {"id": i, "name": n}
        if glosses and n in glosses:
            entry["gloss"] = glosses[n]
        labels.append(entry)
    obj = {"level_name": level, "labels": labels,
           "fine_to_broad": fine_to_broad}
    with open(path, "w") as f:
        json.dump(obj, f, indent=1)
        f.write("\n")


# ---- reference tokenizer + scorer (oracle) ---------------------------------

PUNCT = set(string.punctuation)


def tokenize(text):
    out = []
    for piece in text.split():
        cur = ""
        for ch in piece:
            if ch in PUNCT:
                if cur:
                    out.append(cur)
                    cur = ""
                out.append(ch)
            else:
                cur += ch
        if cur:
            out.append(cur)
    return out


def load_lexicon(path):
    lex = {}
    for line in open(path):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, terms = line.split(":", 1)
        name = name.strip().strip("'\"")
        seen = []
        for t in terms.split(","):
            t = " ".join(t.lower().split())
            if t and t not in seen:
                seen.append(t)
        lex[BROAD15.index(name)] = [tokenize(t) for t in seen]
    return lex


def score_paragraph(tokens, terms):
    tokens = [t.lower() for t in tokens]
    score = 0
    i = 0
    while i < len(tokens):
        best = None
        for term in terms:
            n = len(term)
            if tokens[i:i + n] == term and (best is None or n > len(best)):
                best = term
        if best is None:
            i += 1
        else:
            score += sum(1 for w in best if w not in PUNCT)
            i += len(best)
    return score


def classify_direct(text, lex):
    paragraphs = re.split(r"\n[ \t]*\n", text)
    totals = {c: 0 for c in lex}
    for p in paragraphs:
        toks = tokenize(p)
        for c, terms in lex.items():
            totals[c] += score_paragraph(toks, terms)
    best = min(lex)
    for c in sorted(lex):
        if totals[c] > totals[best]:
            best = c
    return best, totals


FILLER = [
    "The judgment of the lower court is reviewed on the record below.",
    "We granted review to resolve the question presented.",
    "The parties dispute the meaning of the governing statute.",
    "Petitioner contends that the decision below rests on an erroneous reading.",
    "Respondent argues that the record supports the findings of the trial court.",
    "The facts are not in dispute and may be stated briefly.",
    "We hold that the judgment must be reversed and the case remanded.",
    "The opinion of the court below is therefore affirmed in part.",
    "Our prior decisions point the way toward the appropriate rule.",
    "The dissent reads the precedent differently than we do.",
    "Nothing in the history of the provision suggests a contrary view.",
    "It is so ordered.",
    "This reading accords with the plain text and with common sense.",
    "The government concedes that the question is a close one.",
    "We therefore decline to adopt the broader rule urged by the parties.",
]

COUNTS = [4, 3, 3, 2, 2, 2, 2, 2, 2, 2, 2, 1, 1, 1, 1]


def make_doc(rng, label, lex, serial):
    paras = []
    n_par = rng.choice([2, 3, 4, 6, 9, 12])
    for p in range(n_par):
        sents = [rng.choice(FILLER) for _ in range(rng.randint(3, 6))]
        paras.append(sents)
    def inject(cat, times):
        for _ in range(times):
            term = " ".join(rng.choice(lex[cat]))
            p = rng.randrange(len(paras))
            paras[p].insert(rng.randrange(len(paras[p]) + 1),
                            f"The case turns on the {term} question.")
    if label in lex:
        inject(label, rng.randint(3, 6))
    if rng.random() < 0.35:
        other = rng.choice([c for c in lex if c != label])
        inject(other, rng.randint(1, 5))
    caption = f"No. 15-{serial:03d}."
    body = "\n\n".join(" ".join(s) for s in paras)
    return caption + "\n\n" + body


def main():
    os.makedirs(os.path.join(DATA, "ontologies"), exist_ok=True)
    write_ontology(os.path.join(DATA, "ontologies", "broad13.json"), "broad",
                   BROAD13, glosses=GLOSSES)
    write_ontology(os.path.join(DATA, "ontologies", "broad15.json"), "broad",
                   BROAD15, glosses=GLOSSES)
    write_ontology(os.path.join(DATA, "ontologies", "fine263.json"), "fine",
                   fine_names(263))
    write_ontology(os.path.join(DATA, "ontologies", "fine279.json"), "fine",
                   fine_names(279),
                   fine_to_broad={str(i): i % 15 for i in range(279)})

    lex = load_lexicon(os.path.join(DATA, "lexicons", "broad14.txt"))
    for s in FILLER:
        assert all(score_paragraph(tokenize(s), t) == 0 for t in lex.values()), s

    rng = random.Random(20240615)
    labels = [c for c, n in enumerate(COUNTS) for _ in range(n)]
    rng.shuffle(labels)
    docs = []
    for i, c in enumerate(labels):
        text = make_doc(rng, c, lex, i)
        fine = c + 15 * rng.randrange(279 // 15)
        docs.append({"doc_id": f"mini15-{i:03d}", "text": text,
                     "broad_label": c, "fine_label": fine})

    with open(os.path.join(FIX, "mini15.jsonl"), "w") as f:
        for d in docs:
            f.write(json.dumps(d) + "\n")

    correct = 0
    direct = []
    for d in docs:
        pred, _ = classify_direct(d["text"], lex)
        direct.append(pred)
        correct += pred == d["broad_label"]
    lengths = [len(tokenize(d["text"])) for d in docs]
    manifest = {
        "documents": len(docs),
        "broad_histogram": [labels.count(c) for c in range(15)],
        "fine_histogram": {str(k): v for k, v in sorted(
            {d["fine_label"]: sum(1 for e in docs if e["fine_label"] == d["fine_label"])
             for d in docs}.items())},
        "token_lengths": lengths,
        "lexicon_direct_predictions": direct,
        "lexicon_direct_correct": correct,
    }
    with open(os.path.join(FIX, "mini15_manifest.json"), "w") as f:
        json.dump(manifest, f, indent=1)
        f.write("\n")

    with open(os.path.join(FIX, "mini15_gold_numeric.jsonl"), "w") as f:
        for i, d in enumerate(docs):
            f.write(json.dumps({"match": {"substring": f"No. 15-{i:03d}."},
                                "response": f"Category: ({d['broad_label']})",
                                "latency_ms": None, "fail_times": None}) + "\n")
    with open(os.path.join(FIX, "mini15_gold_names.jsonl"), "w") as f:
        for i, d in enumerate(docs):
            f.write(json.dumps({"match": {"substring": f"No. 15-{i:03d}."},
                                "response": BROAD15[d["broad_label"]],
                                "latency_ms": None, "fail_times": None}) + "\n")

    words = ["the", "court", "held", "that", "statute", "applies", "to",
             "every", "claim"]
    sentences = []
    for s in range(100):
        w = [words[(s + k) % len(words)] for k in range(9)]
        w[0] = w[0].capitalize()
        sentences.append(" ".join(w) + ".")
    long_text = " ".join(sentences)
    assert len(tokenize(long_text)) == 1000
    with open(os.path.join(FIX, "long1000.jsonl"), "w") as f:
        f.write(json.dumps({"doc_id": "long-1000", "text": long_text,
                            "broad_label": 3, "fine_label": None}) + "\n")


if __name__ == "__main__":
    main()
