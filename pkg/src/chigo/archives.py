"""Fetching, caching, and sampling zip archives of SGF game records.

An index page (plain HTML) links to zip bundles of .sgf files.  Archives
are cached on disk; when the cache already holds enough games, no network
request is made at all.  Game sampling is a pure function of the cache
contents and the seed, so a later offline run can reproduce exactly the
same training set.
"""

from __future__ import annotations

import hashlib
import logging
import os
import re
import urllib.error
import urllib.parse
import urllib.request
import zipfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

ARCHIVE_SUFFIX = ".zip"
MANIFEST_NAME = "manifest.tsv"
_HREF_RE = re.compile(r"""href\s*=\s*["']([^"']+)["']""", re.IGNORECASE)


class FetchError(Exception):
    """A download failed for a transient reason; retrying may succeed."""


class IndexFormatError(ValueError):
    """The index page could not be parsed as a list of archive links."""


@dataclass(frozen=True)
class ArchiveIndex:
    """Sampled archives: (local path, number of sampled games) per entry."""

    entries: tuple[tuple[str, int], ...]

    @property
    def total_games(self) -> int:
        return sum(count for _, count in self.entries)


def count_games(archive: str | Path) -> int:
    with zipfile.ZipFile(archive) as zf:
        return sum(1 for name in zf.namelist() if name.lower().endswith(".sgf"))


def scan_cache(cache_dir: str | Path) -> list[tuple[Path, int]]:
    """Cached archives with their game counts, in stable name order."""
    found = []
    for path in sorted(Path(cache_dir).glob(f"*{ARCHIVE_SUFFIX}")):
        try:
            found.append((path, count_games(path)))
        except zipfile.BadZipFile:
            logger.warning("ignoring unreadable cache file %s", path)
    return found


def parse_index_page(html: str, base_url: str) -> list[str]:
    """Absolute URLs of every zip archive linked from an index page."""
    hrefs = _HREF_RE.findall(html)
    if not hrefs:
        raise IndexFormatError("index page contains no links")
    return [
        urllib.parse.urljoin(base_url, href)
        for href in hrefs
        if href.lower().endswith(ARCHIVE_SUFFIX)
    ]


def _download(url: str, dest: Path, timeout: float = 60.0) -> None:
    tmp = dest.with_name(dest.name + ".tmp")
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            data = resp.read()
    except (urllib.error.URLError, TimeoutError, ConnectionError) as exc:
        raise FetchError(f"download of {url} failed: {exc}") from exc
    try:
        tmp.write_bytes(data)
        os.replace(tmp, dest)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise
    logger.info("fetched %s (%d bytes)", url, len(data))


def sample_games(
    cache_dir: str | Path, n_games: int, seed: int
) -> dict[str, list[str]]:
    """Pick n_games games uniformly from the cache, grouped by archive.

    Raises ValueError naming the available count when the cache is too
    small.  Same cache contents + same seed → same sample.
    """
    pairs: list[tuple[str, str]] = []
    for path, _ in scan_cache(cache_dir):
        with zipfile.ZipFile(path) as zf:
            for name in sorted(zf.namelist()):
                if name.lower().endswith(".sgf"):
                    pairs.append((str(path), name))
    if n_games > len(pairs):
        raise ValueError(
            f"requested {n_games} games but cache holds only {len(pairs)}"
        )
    rng = np.random.default_rng(seed)
    chosen = sorted(rng.choice(len(pairs), size=n_games, replace=False).tolist())
    sampled: dict[str, list[str]] = {}
    for i in chosen:
        archive, member = pairs[i]
        sampled.setdefault(archive, []).append(member)
    return sampled


def write_manifest(cache_dir: str | Path, sampled: dict[str, list[str]]) -> Path:
    """Record the sampled archives as manifest.tsv (name, games, sha256)."""
    lines = []
    for archive in sorted(sampled):
        digest = hashlib.sha256(Path(archive).read_bytes()).hexdigest()
        lines.append(f"{Path(archive).name}\t{len(sampled[archive])}\t{digest}")
    path = Path(cache_dir) / MANIFEST_NAME
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    os.replace(tmp, path)
    return path


def fetch_archives(
    index_url: str, n_games: int, cache_dir: str | Path, seed: int
) -> ArchiveIndex:
    """Make sure the cache can supply n_games games, then sample them.

    The network is touched only when the cache is short: the index page is
    fetched, and any listed archive not yet cached is downloaded (atomic
    write, concurrent across files).  Sampling and the manifest are then
    derived purely from the cache.
    """
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    available = sum(count for _, count in scan_cache(cache_dir))
    if available < n_games:
        try:
            with urllib.request.urlopen(index_url, timeout=60.0) as resp:
                html = resp.read().decode("utf-8", errors="replace")
        except (urllib.error.URLError, TimeoutError, ConnectionError) as exc:
            raise FetchError(f"index fetch from {index_url} failed: {exc}") from exc
        urls = parse_index_page(html, index_url)
        missing = [
            (url, cache_dir / Path(urllib.parse.urlparse(url).path).name)
            for url in urls
            if not (cache_dir / Path(urllib.parse.urlparse(url).path).name).exists()
        ]
        if missing:
            with ThreadPoolExecutor(max_workers=4) as pool:
                list(pool.map(lambda job: _download(*job), missing))
    sampled = sample_games(cache_dir, n_games, seed)
    write_manifest(cache_dir, sampled)
    entries = tuple(
        (archive, len(members)) for archive, members in sorted(sampled.items())
    )
    return ArchiveIndex(entries=entries)
