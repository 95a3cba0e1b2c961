"""Shared fixtures: synthetic game corpora and encoded chunk datasets."""

from __future__ import annotations

from pathlib import Path

import pytest

from chigo import chunkstore, sgf
from corpus import build_corpus, teacher_game

CORPUS19_GAMES = 56
CORPUS19_SEED0 = 100
CORPUS9_GAMES = 10
CORPUS9_SEED0 = 300


@pytest.fixture(scope="session")
def corpus19_records() -> list[sgf.GameRecord]:
    """Full 19x19 teacher corpus, deterministic across runs."""
    return [
        teacher_game(19, CORPUS19_SEED0 + i) for i in range(CORPUS19_GAMES)
    ]


@pytest.fixture(scope="session")
def corpus19_archives(corpus19_records, tmp_path_factory) -> Path:
    """The same corpus packed into zip archives of SGF files."""
    out = tmp_path_factory.mktemp("corpus19")
    import zipfile

    per_archive = 13
    for start in range(0, len(corpus19_records), per_archive):
        index = start // per_archive
        with zipfile.ZipFile(out / f"teacher-{index:02d}.zip", "w") as zf:
            for i, record in enumerate(
                corpus19_records[start : start + per_archive]
            ):
                zf.writestr(
                    f"game_{start + i:04d}.sgf", sgf.serialize_sgf(record)
                )
    return out


@pytest.fixture(scope="session")
def corpus9_archives(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("corpus9")
    build_corpus(out, 9, CORPUS9_GAMES, games_per_archive=5, seed0=CORPUS9_SEED0)
    return out


def _encode_records(records, out_dir: Path) -> None:
    def samples():
        for record in records:
            yield from chunkstore.encode_game(
                sgf.serialize_sgf(record), record.board_size, record.source_id
            )

    chunkstore.write_chunks(samples(), out_dir, board_size=records[0].board_size)


@pytest.fixture(scope="session")
def sl_chunks(corpus19_records, tmp_path_factory) -> tuple[Path, Path]:
    """(train_dir, test_dir): 50 games for training, the rest held out."""
    train_dir = tmp_path_factory.mktemp("sl-train")
    test_dir = tmp_path_factory.mktemp("sl-test")
    _encode_records(corpus19_records[:50], train_dir)
    _encode_records(corpus19_records[50:], test_dir)
    return train_dir, test_dir


@pytest.fixture(scope="session")
def overfit_chunks(corpus19_records, tmp_path_factory) -> Path:
    """The two longest corpus games, encoded on their own."""
    longest = sorted(
        corpus19_records, key=lambda r: len(r.moves), reverse=True
    )[:2]
    out = tmp_path_factory.mktemp("sl-overfit")
    _encode_records(longest, out)
    return out
