"""Text normalization, traditional to simplified conversion, segmentation and
POS filtering.

Every post goes through the same four steps::

    normalize -> to_simplified -> segment -> filter_tokens

The bundled segmenter is a greedy forward maximum matcher over a POS-tagged
word list; anything implementing :class:`Segmenter` can replace it.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Optional, Protocol, Sequence

from .corpus import Microblog

POS_TAGS = frozenset({"n", "nr", "ns", "nt", "t", "s", "f", "v", "x"})
KEEP_POS = frozenset({"n", "nr", "ns", "nt", "t", "s", "f", "v"})
MIN_TERM_LEN = 2
MAX_MENTION_LEN = 30

_URL_RE = re.compile(r"https?://\S+")
# a run of '@' is consumed together so removal cannot expose a new mention
_MENTION_RE = re.compile(r"@+[A-Za-z0-9_㐀-䶿一-鿿豈-﫿]{1,%d}" % MAX_MENTION_LEN)
_SPACE_RE = re.compile(r"\s+")


class Token(NamedTuple):
    surface: str
    pos: str


@dataclass(frozen=True)
class TokenizedPost:
    post_id: str
    tokens: tuple[Token, ...]
    hashtags: tuple[str, ...] = ()

    @property
    def terms(self) -> list[str]:
        return [t.surface for t in self.tokens]


class Segmenter(Protocol):
    def segment(self, text: str) -> list[Token]:
        ...


class ResourceError(Exception):
    """A mapping table or dictionary could not be loaded."""


def normalize(text: str) -> str:
    """Strip URLs and @-mentions, collapse whitespace."""
    text = _MENTION_RE.sub("", text)
    text = _URL_RE.sub("", text)
    return _SPACE_RE.sub(" ", text).strip()


def to_simplified(text: str, table: Mapping[str, str]) -> str:
    """Character-wise traditional to simplified conversion."""
    if isinstance(table, CharTable):
        return text.translate(table.translation)
    return "".join(table.get(ch, ch) for ch in text)


class CharTable(dict):
    """Single-character mapping with a cached ``str.translate`` table."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        for k, v in self.items():
            if len(k) != 1 or len(v) != 1:
                raise ValueError(f"table entries must be single characters: {k!r}->{v!r}")
        self.translation = {ord(k): v for k, v in self.items()}


def _read_tsv(path) -> list[list[str]]:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().split("\n")
    except (OSError, UnicodeDecodeError) as exc:
        raise ResourceError(f"cannot read {path}: {exc}") from exc
    rows = []
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r")
        if not line or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 2 or not cols[0] or not cols[1]:
            raise ResourceError(f"{path}:{lineno}: expected two tab-separated columns")
        rows.append(cols)
    return rows


def _bundled(name: str) -> Path:
    return Path(str(resources.files("topiclens") / "data" / name))


def bundled_table_path() -> Path:
    return _bundled("t2s.tsv")


def bundled_dictionary_path() -> Path:
    return _bundled("dict.tsv")


def load_table(path=None) -> CharTable:
    """Load a traditional->simplified TSV table (bundled one by default)."""
    rows = _read_tsv(path or bundled_table_path())
    try:
        return CharTable(rows)
    except ValueError as exc:
        raise ResourceError(f"{path}: {exc}") from exc


def collapse_pos(tag: str) -> str:
    """Map an arbitrary ICTCLAS-style tag onto the closed tag set."""
    if tag in POS_TAGS:
        return tag
    if tag.startswith("n"):
        return "n"
    if tag.startswith("v"):
        return "v"
    return "x"


def load_dictionary(*paths) -> dict[str, str]:
    """Load term->POS TSV files; later entries (and later files) win.

    With no arguments the bundled dictionary is loaded.
    """
    if not paths:
        paths = (bundled_dictionary_path(),)
    dictionary: dict[str, str] = {}
    for path in paths:
        for term, pos in _read_tsv(path):
            dictionary[term] = collapse_pos(pos)
    return dictionary


def segment_maxmatch(text: str, dictionary: Mapping[str, str],
                     max_len: Optional[int] = None) -> list[Token]:
    """Greedy forward maximum matching.

    At each position the longest dictionary entry starting there is emitted
    with its tag; an unmatched character is emitted alone with tag ``x``.
    Surfaces always concatenate back to `text`.
    """
    if max_len is None:
        max_len = max(map(len, dictionary), default=1)
    tokens = []
    i, n = 0, len(text)
    while i < n:
        for size in range(min(max_len, n - i), 0, -1):
            word = text[i:i + size]
            pos = dictionary.get(word)
            if pos is not None:
                tokens.append(Token(word, pos))
                i += size
                break
        else:
            tokens.append(Token(text[i], "x"))
            i += 1
    return tokens


class MaxMatchSegmenter:
    """Forward maximum-match segmenter over a term->POS dictionary."""

    def __init__(self, dictionary: Optional[Mapping[str, str]] = None):
        self.dictionary = dict(load_dictionary() if dictionary is None else dictionary)
        self.max_len = max(map(len, self.dictionary), default=1)

    @classmethod
    def from_files(cls, *paths):
        return cls(load_dictionary(*paths))

    def segment(self, text: str) -> list[Token]:
        return segment_maxmatch(text, self.dictionary, self.max_len)


class JiebaSegmenter:
    """Adapter for ``jieba.posseg`` (optional dependency)."""

    def __init__(self):
        import jieba.posseg  # noqa: F401  (optional)

        self._posseg = jieba.posseg

    def segment(self, text: str) -> list[Token]:
        return [Token(w.word, collapse_pos(w.flag)) for w in self._posseg.cut(text)]


def filter_tokens(tokens: Iterable[Token]) -> list[Token]:
    """Keep content-word tokens (nouns, names, places, times, verbs...) of
    two or more characters."""
    return [t for t in tokens if t.pos in KEEP_POS and len(t.surface) >= MIN_TERM_LEN]


class Preprocessor:
    """Bundles the conversion table and segmenter used for one pipeline run."""

    def __init__(self, table: Optional[Mapping[str, str]] = None,
                 segmenter: Optional[Segmenter] = None):
        self.table = load_table() if table is None else table
        self.segmenter = MaxMatchSegmenter() if segmenter is None else segmenter

    def tokens(self, text: str) -> list[Token]:
        text = to_simplified(normalize(text), self.table)
        return filter_tokens(self.segmenter.segment(text))

    def __call__(self, post: Microblog) -> TokenizedPost:
        return TokenizedPost(post.id, tuple(self.tokens(post.text)), tuple(post.hashtags))

    def process(self, posts: Sequence[Microblog], workers: int = 1) -> list[TokenizedPost]:
        """Tokenize posts, optionally across worker processes; order is kept."""
        if workers <= 1 or len(posts) < 2 * _CHUNK:
            return [self(p) for p in posts]
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(self, posts, chunksize=_CHUNK))


_CHUNK = 2000
