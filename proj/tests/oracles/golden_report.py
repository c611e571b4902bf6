#!/usr/bin/env python3
"""Independent reference computation for the mini-corpus pipeline.

Re-derives, from the documented formulas only, what the C++ pipeline must
produce for tests/data/mini: parsed predictions, the ensemble (majority vote
plus continuum explanation choice with the tie/abstain rules), lexical-pair
explanation scores and the Acc@s report. Writes the frozen golden files.
"""
import json
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1] / "data" / "mini"

SYSTEMS = [
    "S1_Original", "S2_FigType", "S3_Consequence", "S3_Emotion",
    "S3_Motivation", "S3_SocialNorm", "S3_AllDims", "S4_TwoStep",
]
TABLE_ORDER = [
    "S1_Original", "S2_FigType", "S3_Emotion", "S3_Motivation",
    "S3_Consequence", "S3_SocialNorm", "S3_AllDims", "S4_TwoStep",
]
VOTERS = ["S1_Original", "S2_FigType", "S3_Motivation", "S3_AllDims", "S4_TwoStep"]
ORDER = ["S3_Consequence", "S3_Emotion", "S2_FigType", "S3_AllDims",
         "S3_Motivation", "S4_TwoStep", "S1_Original"]
LABELS = ["entailment", "contradiction"]
FIGS = ["simile", "metaphor", "sarcasm", "idiom", "creative paraphrase"]
WS = " \t\n\r\f\v"


def is_word(ch):
    return ch.isascii() and ch.isalnum() or not ch.isascii()


def find_word(hay, word):
    start = 0
    while True:
        pos = hay.find(word, start)
        if pos < 0:
            return -1
        left = pos == 0 or not is_word(hay[pos - 1])
        end = pos + len(word)
        right = end >= len(hay) or not is_word(hay[end])
        if left and right:
            return pos
        start = pos + 1


def parse(system, raw):
    low = "".join(c.lower() if "A" <= c <= "Z" else c for c in raw)
    marker = low.find("explanation:")
    seg, lead = 0, len(low)
    for i, c in enumerate(low):
        if c in ".!?\n":
            seg += 1
            if seg == 3:
                lead = i + 1
                break
    end = lead if marker < 0 else min(lead, marker)
    region = low[:end]
    hits = [(find_word(region, w), w) for w in LABELS]
    hits = [h for h in hits if h[0] >= 0]
    if not hits:
        return None, ""
    pos, word = min(hits)
    if system == "S2_FigType":
        if not any(find_word(region[:pos], f) >= 0 for f in FIGS):
            return None, ""
    if marker >= 0:
        return word, raw[marker + len("explanation:"):].strip(WS)
    rest = raw[pos + len(word):]
    i = 0
    while i < len(rest) and not is_word(rest[i]):
        i += 1
    return word, rest[i:].strip(WS)


def load_predictions(examples):
    preds = {}
    for system in SYSTEMS:
        rows = [json.loads(l) for l in (ROOT / "mocks" / f"{system}.jsonl").open(encoding="utf-8")]
        joint = {r["id"]: r["output"] for r in rows if r.get("stage", "joint") != "explain"}
        explain = {r["id"]: r["output"] for r in rows if r.get("stage") == "explain"}
        out = {}
        for ex in examples:
            label, expl = parse(system, joint[ex["id"]])
            if system == "S4_TwoStep" and label is not None:
                expl = explain[ex["id"]].strip(WS)
            out[ex["id"]] = (label, expl)
        preds[system] = out
    return preds


def ensemble(preds, ex_id):
    votes = [preds[s][ex_id][0] for s in VOTERS]
    e = sum(1 for v in votes if v == "entailment")
    c = sum(1 for v in votes if v == "contradiction")
    flags = []
    label = None
    if e + c == 0:
        flags.append("insufficient_votes")
        for s in ORDER + SYSTEMS:
            if preds[s][ex_id][0] is not None:
                label = preds[s][ex_id][0]
                break
    elif e > c:
        label = "entailment"
    elif c > e:
        label = "contradiction"
    else:
        flags.append("tie")
        for s in ORDER:
            if s in VOTERS and preds[s][ex_id][0] is not None:
                label = preds[s][ex_id][0]
                break
    explanation, source = "", None
    if label is not None:
        for s in ORDER:
            if preds[s][ex_id][0] == label:
                explanation, source = preds[s][ex_id][1], s
                break
    if source is None:
        flags.append("no_agreeing_explainer")
    order = ["tie", "no_agreeing_explainer", "insufficient_votes"]
    flags.sort(key=order.index)
    return {"id": ex_id, "label": label or "abstain", "explanation": explanation,
            "source": source, "tally": {"entailment": e, "contradiction": c},
            "flags": flags}


def tokens(text):
    out, cur = [], bytearray()
    for b in text.encode("utf-8"):
        if b >= 0x80 or chr(b).isalnum():
            cur.append(b + 32 if 65 <= b <= 90 else b)
        elif cur:
            out.append(bytes(cur))
            cur = bytearray()
    if cur:
        out.append(bytes(cur))
    return out


def overlap(a, b):
    from collections import Counter
    ca, cb = Counter(a), Counter(b)
    return sum(min(n, cb[k]) for k, n in ca.items())


def token_f1(c, r):
    tc, tr = tokens(c), tokens(r)
    if not tc and not tr:
        return 100.0
    if not tc or not tr:
        return 0.0
    o = overlap(tc, tr)
    if o == 0:
        return 0.0
    p, rec = o / len(tc), o / len(tr)
    return 100.0 * 2.0 * p * rec / (p + rec)


def dice(c, r):
    sc, sr = b" ".join(tokens(c)), b" ".join(tokens(r))
    bc = [sc[i:i + 2] for i in range(len(sc) - 1)]
    br = [sr[i:i + 2] for i in range(len(sr) - 1)]
    if not bc and not br:
        return 100.0 if sc == sr else 0.0
    if not bc or not br:
        return 0.0
    return 100.0 * 2.0 * overlap(bc, br) / (len(bc) + len(br))


def score(c, refs):
    best = max((token_f1(c, r) + dice(c, r)) / 2.0 for r in refs)
    return min(max(best, 0.0), 100.0)


def acc(rows, s):
    hits = sum(1 for ok, sc in rows if ok and sc >= s)
    return 100.0 * hits / len(rows)


def render_plain(table, thresholds):
    headers = ["Acc@%g" % s for s in thresholds]
    width = max([6] + [len(n) for n, _ in table])
    lines = ["System".ljust(width) + "".join("  " + h.rjust(max(len(h), 5)) for h in headers)]
    for name, vals in table:
        lines.append(name.ljust(width) + "".join(
            "  " + ("%.1f" % v).rjust(max(len(h), 5)) for h, v in zip(headers, vals)))
    return "\n".join(lines) + "\n"


def render_markdown(table, thresholds):
    headers = ["Acc@%g" % s for s in thresholds]
    out = "| System |" + "".join(f" {h} |" for h in headers) + "\n"
    out += "|---|" + "---:|" * len(headers) + "\n"
    for name, vals in table:
        out += f"| {name} |" + "".join(" %.1f |" % v for v in vals) + "\n"
    return out


def main():
    examples = [json.loads(l) for l in (ROOT / "corpus.jsonl").open(encoding="utf-8")]
    for ex in examples:
        if isinstance(ex["explanation"], str):
            ex["explanation"] = [ex["explanation"]]
    preds = load_predictions(examples)
    ens = [ensemble(preds, ex["id"]) for ex in sorted(examples, key=lambda e: e["id"])]
    ens_by_id = {r["id"]: r for r in ens}

    thresholds = [0.0, 50.0, 60.0]
    table = []
    for system in TABLE_ORDER:
        rows = []
        for ex in examples:
            label, expl = preds[system][ex["id"]]
            if label is None:
                rows.append((False, 0.0))
                continue
            rows.append((label == ex["label"].lower(), score(expl, ex["explanation"])))
        table.append((system, [acc(rows, s) for s in thresholds]))
    rows = []
    for ex in examples:
        r = ens_by_id[ex["id"]]
        if r["label"] == "abstain":
            rows.append((False, 0.0))
            continue
        rows.append((r["label"] == ex["label"].lower(), score(r["explanation"], ex["explanation"])))
    table.append(("ensemble", [acc(rows, s) for s in thresholds]))

    (ROOT / "golden_report.txt").write_text(render_plain(table, thresholds), encoding="utf-8")
    (ROOT / "golden_report.md").write_text(render_markdown(table, thresholds), encoding="utf-8")
    with (ROOT / "golden_ensemble.jsonl").open("w", encoding="utf-8") as f:
        for r in ens:
            f.write(json.dumps(r, ensure_ascii=False, separators=(",", ":")) + "\n")
    sys.stdout.write(render_plain(table, thresholds))


if __name__ == "__main__":
    main()
