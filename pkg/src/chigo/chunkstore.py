"""Chunked binary storage of encoded (feature, label) samples.

A chunk file (extension .chg) holds up to ``chunk_size`` samples:

    header (32 bytes, little-endian):
        magic        4s   b"CHGO"
        version      u16  currently 1
        n_samples    u32
        n_planes     u16  11
        board_size   u16
        label_width  u16  2 (bytes per label)
        zobrist_seed u64  hash-table seed the producing engine used
        reserved     8s   zeros
    features: n_samples * n_planes * board_size**2 bytes, each 0 or 1,
              sample-major, plane-major, row-major
    labels:   n_samples little-endian u16, each < board_size**2

Reading streams one chunk at a time and hands out fixed-size training
batches; a chunk tail smaller than the batch size is dropped.
"""

from __future__ import annotations

import logging
import os
import struct
import zipfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import get_context
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from . import sgf
from .encoder import NUM_PLANES, encode, encode_label
from .zobrist import PRODUCTION_SEED

logger = logging.getLogger(__name__)

MAGIC = b"CHGO"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sHIHHHQ8s")
CHUNK_SIZE = 1024
BATCH_SIZE = 128
FILE_SUFFIX = ".chg"

# Each parallel encoding worker names its chunk files in its own index range
# so outputs never collide.
WORKER_INDEX_SPAN = 10_000


class ChunkError(Exception):
    """A chunk file that cannot be read; message names the file."""


@dataclass(frozen=True)
class ChunkHeader:
    n_samples: int
    n_planes: int
    board_size: int
    label_width: int
    zobrist_seed: int
    version: int = FORMAT_VERSION

    def pack(self) -> bytes:
        return HEADER.pack(
            MAGIC,
            self.version,
            self.n_samples,
            self.n_planes,
            self.board_size,
            self.label_width,
            self.zobrist_seed,
            b"\x00" * 8,
        )

    @classmethod
    def unpack(cls, raw: bytes, path: Path) -> "ChunkHeader":
        if len(raw) < HEADER.size:
            raise ChunkError(f"{path}: truncated header")
        magic, version, n_samples, n_planes, board_size, label_width, seed, _ = (
            HEADER.unpack(raw[: HEADER.size])
        )
        if magic != MAGIC:
            raise ChunkError(f"{path}: bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise ChunkError(f"{path}: unsupported version {version}")
        if n_samples < 1:
            raise ChunkError(f"{path}: empty chunk")
        return cls(
            n_samples=n_samples,
            n_planes=n_planes,
            board_size=board_size,
            label_width=label_width,
            zobrist_seed=seed,
            version=version,
        )


@dataclass(frozen=True)
class Batch:
    features: np.ndarray  # (batch, n_planes, size, size) uint8
    labels: np.ndarray  # (batch,) uint16

    def __len__(self) -> int:
        return len(self.labels)


def chunk_path(out_dir: Path, index: int) -> Path:
    return Path(out_dir) / f"chunk_{index:05d}{FILE_SUFFIX}"


def _write_chunk_file(
    path: Path,
    features: np.ndarray,
    labels: np.ndarray,
    board_size: int,
    zobrist_seed: int,
) -> None:
    header = ChunkHeader(
        n_samples=len(labels),
        n_planes=features.shape[1],
        board_size=board_size,
        label_width=2,
        zobrist_seed=zobrist_seed,
    )
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "wb") as f:
            f.write(header.pack())
            f.write(np.ascontiguousarray(features, dtype=np.uint8).tobytes())
            f.write(labels.astype("<u2").tobytes())
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def write_chunks(
    samples: Iterable[tuple[np.ndarray, int]],
    out_dir: str | Path,
    chunk_size: int = CHUNK_SIZE,
    board_size: int = 19,
    zobrist_seed: int = PRODUCTION_SEED,
    start_index: int = 0,
) -> list[Path]:
    """Spill a sample stream to consecutive chunk files.

    Every file holds exactly chunk_size samples except the last, which
    holds the remainder.  Each file is written to a temp name and renamed,
    so a crash never leaves a half-written chunk behind.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []
    buf_features: list[np.ndarray] = []
    buf_labels: list[int] = []
    index = start_index

    def flush() -> None:
        nonlocal index
        if not buf_labels:
            return
        path = chunk_path(out_dir, index)
        _write_chunk_file(
            path,
            np.stack(buf_features),
            np.asarray(buf_labels, dtype=np.uint16),
            board_size,
            zobrist_seed,
        )
        paths.append(path)
        index += 1
        buf_features.clear()
        buf_labels.clear()

    for features, label in samples:
        buf_features.append(features)
        buf_labels.append(int(label))
        if len(buf_labels) == chunk_size:
            flush()
    flush()
    return paths


def read_chunk(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Load one chunk file; raises ChunkError on any inconsistency."""
    path = Path(path)
    raw = path.read_bytes()
    header = ChunkHeader.unpack(raw, path)
    per_sample = header.n_planes * header.board_size**2
    expected = HEADER.size + header.n_samples * (per_sample + header.label_width)
    if len(raw) != expected:
        raise ChunkError(
            f"{path}: expected {expected} bytes, found {len(raw)}"
        )
    features_end = HEADER.size + header.n_samples * per_sample
    features = np.frombuffer(
        raw, dtype=np.uint8, count=header.n_samples * per_sample, offset=HEADER.size
    ).reshape(
        header.n_samples, header.n_planes, header.board_size, header.board_size
    )
    labels = np.frombuffer(raw, dtype="<u2", offset=features_end)
    if labels.size and labels.max() >= header.board_size**2:
        raise ChunkError(f"{path}: label out of range")
    return features, labels


def read_chunk_header(path: str | Path) -> ChunkHeader:
    path = Path(path)
    with open(path, "rb") as f:
        return ChunkHeader.unpack(f.read(HEADER.size), path)


def list_chunks(data_dir: str | Path) -> list[Path]:
    return sorted(Path(data_dir).glob(f"chunk_*{FILE_SUFFIX}"))


def read_batches(
    data_dir: str | Path,
    batch_size: int = BATCH_SIZE,
    shuffle_seed: int | None = None,
) -> Iterator[Batch]:
    """Stream fixed-size batches, one chunk resident at a time.

    Within each chunk, consecutive batch_size slices are emitted and any
    smaller tail is dropped.  With a shuffle seed, chunk order and the
    sample order inside each chunk are permuted deterministically; samples
    never move between chunks.
    """
    paths = list_chunks(data_dir)
    if not paths:
        raise ChunkError(f"no chunk files in {data_dir}")
    rng = None
    if shuffle_seed is not None:
        rng = np.random.default_rng(shuffle_seed)
        paths = [paths[i] for i in rng.permutation(len(paths))]
    for path in paths:
        features, labels = read_chunk(path)
        if rng is not None:
            order = rng.permutation(len(labels))
            features = features[order]
            labels = labels[order]
        for start in range(0, len(labels) - batch_size + 1, batch_size):
            stop = start + batch_size
            yield Batch(features[start:stop], labels[start:stop])


def count_batched_samples(data_dir: str | Path, batch_size: int = BATCH_SIZE) -> int:
    """Total samples the batch stream will deliver (tail drops included)."""
    total = 0
    for path in list_chunks(data_dir):
        header = read_chunk_header(path)
        total += (header.n_samples // batch_size) * batch_size
    return total


# ---------------------------------------------------------------------------
# Parallel archive encoding

@dataclass(frozen=True)
class ProcessSummary:
    n_games: int
    n_samples: int
    n_chunks: int
    n_skipped: int = 0


def iter_archive_games(
    archive: str | Path, members: list[str] | None = None
) -> Iterator[tuple[str, str]]:
    """Yield (member_name, sgf_text) for every game in a zip archive."""
    with zipfile.ZipFile(archive) as zf:
        names = sorted(n for n in zf.namelist() if n.lower().endswith(".sgf"))
        if members is not None:
            wanted = set(members)
            names = [n for n in names if n in wanted]
        for name in names:
            yield name, zf.read(name).decode("utf-8", errors="replace")


def encode_game(
    text: str, board_size: int, source_id: str = ""
) -> list[tuple[np.ndarray, int]]:
    """Samples for one game: every position paired with its next play.

    Games with real handicap (HA > 1) or a different board size yield
    nothing; pass moves produce no sample.
    """
    record = sgf.parse_sgf(text, source_id=source_id)
    if record.handicap > 1 or record.board_size != board_size:
        return []
    samples = []
    for state, move in sgf.replay(record):
        label = encode_label(move, board_size)
        if label is None:
            continue
        samples.append((encode(state), label))
    return samples


def _worker_encode(args) -> tuple[int, int, int, int]:
    (worker_index, tasks, out_dir, chunk_size, board_size) = args
    n_games = 0
    n_samples = 0
    n_skipped = 0

    def sample_stream() -> Iterator[tuple[np.ndarray, int]]:
        nonlocal n_games, n_samples, n_skipped
        for archive, members in tasks:
            try:
                for name, text in iter_archive_games(archive, members):
                    try:
                        game_samples = encode_game(text, board_size, name)
                    except sgf.SgfParseError as exc:
                        logger.warning(
                            "skipping game %s in %s: %s", name, archive, exc
                        )
                        n_skipped += 1
                        continue
                    n_games += 1
                    n_samples += len(game_samples)
                    yield from game_samples
            except (OSError, zipfile.BadZipFile) as exc:
                logger.warning("skipping archive %s: %s", archive, exc)
                n_skipped += 1

    paths = write_chunks(
        sample_stream(),
        out_dir,
        chunk_size=chunk_size,
        board_size=board_size,
        start_index=worker_index * WORKER_INDEX_SPAN,
    )
    return n_games, n_samples, len(paths), n_skipped


def process_archives(
    archives: list[str | Path],
    out_dir: str | Path,
    workers: int = 8,
    members: dict[str, list[str]] | None = None,
    board_size: int = 19,
    chunk_size: int = CHUNK_SIZE,
) -> ProcessSummary:
    """Parse, replay, and encode archives into chunk files in parallel.

    Archives are dealt round-robin to workers; each worker writes into its
    own chunk-name range, so the resulting sample multiset does not depend
    on the worker count.  ``members`` optionally restricts each archive to
    a sampled subset of its games.
    """
    archives = [Path(a) for a in archives]
    tasks = [
        (str(a), None if members is None else members.get(str(a), []))
        for a in archives
    ]
    groups = [
        (w, tasks[w::workers], str(out_dir), chunk_size, board_size)
        for w in range(workers)
        if tasks[w::workers]
    ]
    Path(out_dir).mkdir(parents=True, exist_ok=True)

    if len(groups) <= 1:
        results = [_worker_encode(g) for g in groups]
    else:
        with ProcessPoolExecutor(
            max_workers=len(groups), mp_context=get_context("spawn")
        ) as pool:
            results = list(pool.map(_worker_encode, groups))

    n_games = sum(r[0] for r in results)
    n_samples = sum(r[1] for r in results)
    n_chunks = sum(r[2] for r in results)
    n_skipped = sum(r[3] for r in results)
    return ProcessSummary(n_games, n_samples, n_chunks, n_skipped)
