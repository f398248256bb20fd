"""Regenerate the bundled lexical resources under src/topiclens/data/.

Usage::

    pip download --no-deps -d /tmp/dl jieba==0.42.1 hanziconv==0.3.2
    (cd /tmp/dl && for f in *.tar.gz; do tar xzf $f; done)
    python tools/make_resources.py /tmp/dl

t2s.tsv is derived from hanziconv's character map (Apache-2.0); dict.tsv
from jieba's dict.txt (MIT). Only multi-character CJK words are kept for the
dictionary and POS tags are collapsed onto the closed tag set.
"""
import sys
from pathlib import Path

KEEP = {"n", "nr", "ns", "nt", "t", "s", "f", "v"}
MAX_WORDS = 60000
MAX_LEN = 6


def collapse_pos(tag):
    if tag in KEEP:
        return tag
    if tag.startswith("n"):
        return "n"
    if tag.startswith("v"):
        return "v"
    return "x"


def is_cjk(word):
    return all("一" <= ch <= "鿿" for ch in word)


def charmaps(path):
    sys.path.insert(0, str(path))
    from hanziconv.charmap import simplified_charmap, traditional_charmap

    return traditional_charmap, simplified_charmap


def main(root):
    root = Path(root)
    out = Path(__file__).resolve().parents[1] / "src" / "topiclens" / "data"

    trad, simp = charmaps(root / "hanziconv-0.3.2")
    table = {}
    for t, s in zip(trad, simp):
        if t != s:
            table[t] = s
    # keep the table idempotent: no value may itself be rewritten
    table = {t: s for t, s in table.items() if s not in table}
    with open(out / "t2s.tsv", "w", encoding="utf-8", newline="\n") as fh:
        for t in sorted(table):
            fh.write(f"{t}\t{table[t]}\n")

    rows = []
    with open(root / "jieba-0.42.1" / "jieba" / "dict.txt", encoding="utf-8") as fh:
        for line in fh:
            word, freq, tag = line.split()
            if 2 <= len(word) <= MAX_LEN and is_cjk(word):
                rows.append((-int(freq), word, collapse_pos(tag)))
    rows.sort()
    rows = sorted(rows[:MAX_WORDS], key=lambda r: r[1])
    with open(out / "dict.tsv", "w", encoding="utf-8", newline="\n") as fh:
        for _, word, tag in rows:
            fh.write(f"{word}\t{tag}\n")
    print(f"t2s.tsv: {len(table)} entries; dict.tsv: {len(rows)} entries")


if __name__ == "__main__":
    main(sys.argv[1])
