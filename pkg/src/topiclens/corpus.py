"""Post data model and JSONL corpus reading."""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

log = logging.getLogger(__name__)

TAG_MODES = ("paired", "prefix")
MAX_TAG_LEN = 64

# CJK unified ideographs (incl. extension A) and compatibility ideographs
_CJK = "㐀-䶿一-鿿豈-﫿"
_PAIRED_RE = re.compile(r"#([^#\n]{1,64})#")
_PREFIX_RE = re.compile(r"#([A-Za-z0-9_" + _CJK + r"]+)")


class CorpusError(Exception):
    """Raised when a corpus file cannot be read at all."""


@dataclass(frozen=True)
class Microblog:
    id: str
    platform: str
    text: str
    timestamp: Optional[int] = None
    deleted: bool = False
    hashtags: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise ValueError("post id must be non-empty")
        if not self.text.strip():
            raise ValueError(f"post {self.id!r} has empty text")
        if len(set(self.hashtags)) != len(self.hashtags) or "" in self.hashtags:
            raise ValueError(f"post {self.id!r} has duplicate or empty hashtags")


@dataclass(frozen=True)
class Corpus:
    platform: str
    posts: tuple[Microblog, ...] = ()
    tag_mode: str = "paired"
    skipped: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.tag_mode not in TAG_MODES:
            raise ValueError(f"unknown tag mode {self.tag_mode!r}")
        ids = set()
        for post in self.posts:
            if post.platform != self.platform:
                raise ValueError(
                    f"post {post.id!r} has platform {post.platform!r}, "
                    f"corpus is {self.platform!r}")
            if post.id in ids:
                raise ValueError(f"duplicate post id {post.id!r}")
            ids.add(post.id)

    def __len__(self):
        return len(self.posts)

    def __iter__(self):
        return iter(self.posts)


def _ascii_lower(s: str) -> str:
    return "".join(c.lower() if c.isascii() else c for c in s)


def extract_hashtags(text: str, tag_mode: str) -> list[str]:
    """Return the normalized hashtags in `text`, in order of first occurrence.

    ``paired`` mode reads Weibo-style ``#tag#`` spans; ``prefix`` mode reads
    Twitter-style ``#tag`` runs of letters, digits, underscores and CJK
    characters. Tags are ASCII-lowercased and de-duplicated.
    """
    if tag_mode == "paired":
        found = []
        for line in text.split("\n"):
            pos = 0
            while True:
                m = _PAIRED_RE.search(line, pos)
                if m is None:
                    break
                found.append(m.group(1).strip())
                pos = m.end()
    elif tag_mode == "prefix":
        found = [m.group(1) for m in _PREFIX_RE.finditer(text)]
        found = [t for t in found if len(t) <= MAX_TAG_LEN]
    else:
        raise ValueError(f"unknown tag mode {tag_mode!r}")

    tags = []
    seen = set()
    for tag in found:
        tag = _ascii_lower(tag)
        if tag and tag not in seen:
            seen.add(tag)
            tags.append(tag)
    return tags


def parse_record(line: str, tag_mode: str, platform: str) -> Microblog:
    """Parse one JSONL line into a Microblog, raising ValueError if invalid."""
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("record is not a JSON object")
    post_id = obj.get("id")
    text = obj.get("text")
    if not isinstance(post_id, str):
        raise ValueError("missing or non-string 'id'")
    if not isinstance(text, str):
        raise ValueError("missing or non-string 'text'")
    timestamp = obj.get("timestamp")
    if timestamp is not None and (not isinstance(timestamp, int) or isinstance(timestamp, bool)):
        raise ValueError("'timestamp' must be an integer")
    deleted = obj.get("deleted", False)
    if not isinstance(deleted, bool):
        raise ValueError("'deleted' must be a boolean")
    return Microblog(
        id=post_id,
        platform=platform,
        text=text,
        timestamp=timestamp,
        deleted=deleted,
        hashtags=tuple(extract_hashtags(text, tag_mode)),
    )


def parse_lines(lines: Iterable[str], tag_mode: str, platform: str,
                source: str = "<lines>") -> Corpus:
    posts = []
    seen = set()
    skipped = 0
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            post = parse_record(line, tag_mode, platform)
            if post.id in seen:
                raise ValueError(f"duplicate id {post.id!r}")
        except ValueError as exc:  # json.JSONDecodeError is a ValueError
            skipped += 1
            log.warning("%s:%d: skipping record: %s", source, lineno, exc)
            continue
        seen.add(post.id)
        posts.append(post)
    return Corpus(platform=platform, posts=tuple(posts), tag_mode=tag_mode,
                  skipped=skipped)


def read_corpus(path, tag_mode: str = "paired", platform: str = "") -> Corpus:
    """Read a JSONL corpus.

    Invalid records are skipped with a logged diagnostic; the number skipped
    is available as ``Corpus.skipped``. Blank lines are ignored.
    """
    if tag_mode not in TAG_MODES:
        raise ValueError(f"unknown tag mode {tag_mode!r}")
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusError(f"cannot read corpus {path}: {exc}") from exc
    corpus = parse_lines(text.split("\n"), tag_mode, platform or path.stem,
                         source=str(path))
    if corpus.skipped:
        log.warning("%s: skipped %d invalid record(s)", path, corpus.skipped)
    return corpus


def write_corpus(posts: Sequence[Microblog], path) -> None:
    """Write posts in the JSONL input format (hashtags are re-derived on read)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for post in posts:
            fh.write(dumps_post(post) + "\n")


def dumps_post(post: Microblog) -> str:
    obj = {"id": post.id, "text": post.text}
    if post.timestamp is not None:
        obj["timestamp"] = post.timestamp
    if post.deleted:
        obj["deleted"] = True
    return json.dumps(obj, ensure_ascii=False)


def filter_deleted(corpus: Corpus) -> Corpus:
    """Sub-corpus of the posts flagged as deleted, order preserved."""
    return replace(corpus, posts=tuple(p for p in corpus.posts if p.deleted),
                   skipped=0)
