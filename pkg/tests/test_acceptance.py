"""Acceptance gate: one test per release criterion.

Each test prints a single [PASS]/[FAIL] line (visible with ``pytest -s``)
and enforces its own wall-clock budget.  Sub-checks accumulate into a
failure list so one verdict line reports everything that went wrong.
"""

import gc
import hashlib
import struct
import time
import weakref
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest
from fastapi.testclient import TestClient

from boards import state_from_diagram
from corpus import build_corpus
from oracles import exact_binomial_two_sided, ladder_escape_oracle
from chigo import chunkstore, cli, zobrist
from chigo.checkpoint import load_checkpoint
from chigo.goboard import Board, GameState, IllegalMoveError, Move, Player
from chigo.gotypes import Point
from chigo.ladder import is_ladder_escape
from chigo.network import Network, NetworkConfig, softmax
from chigo.selfplay import (
    Agent,
    ExperienceBuffer,
    ExperienceGame,
    ExperienceStep,
    SamplerConfig,
    clip_distribution,
    reinforce_update,
)
from chigo.service import create_app, reconstruct_state
from chigo.stats import binomial_test
from chigo.zobrist import full_hash, hash_apply, table_for


@contextmanager
def criterion(name: str, budget_s: float):
    """Collect sub-check failures, time the body, print one verdict line."""
    failures: list[str] = []
    start = time.monotonic()
    try:
        yield failures
    except BaseException as exc:
        elapsed = time.monotonic() - start
        print(f"[FAIL] {name} ({elapsed:.1f}s): {exc!r}", flush=True)
        raise
    elapsed = time.monotonic() - start
    if elapsed >= budget_s:
        failures.append(
            f"runtime {elapsed:.1f}s exceeds budget {budget_s:.0f}s"
        )
    status = "FAIL" if failures else "PASS"
    print(
        f"[{status}] {name} ({elapsed:.1f}s / budget {budget_s:.0f}s)",
        flush=True,
    )
    assert not failures, f"{name}: " + "; ".join(failures)


def test_binomial_exact_significance():
    """Log-space p-value agrees with exact rational summation and the
    published 565-wins-in-1000 significance level."""
    with criterion("binomial-significance", 1.0) as failures:
        p = binomial_test(565, 1000)
        oracle = float(exact_binomial_two_sided(565, 1000, Fraction(1, 2)))
        rel = abs(p - oracle) / oracle
        if rel >= 1e-6:
            failures.append(f"oracle disagreement rel={rel:.2e}")
        published = 4.14e-05
        if abs(p - published) > 0.25 * published:
            failures.append(f"p={p:.3e} outside ±25% of {published:.2e}")


def _random_hash_checked_game(size: int, seed: int) -> str | None:
    """Play random legal moves, comparing the incremental hash to a full
    recomputation after every ply; returns an error string on mismatch."""
    rng = np.random.default_rng(seed)
    state = GameState.new_game(size)
    table = state.board.table
    while not state.is_over():
        move = Move.pass_turn()
        if rng.random() >= 0.03:
            for _ in range(8):
                point = Point(
                    int(rng.integers(size)), int(rng.integers(size))
                )
                if state.is_legal(Move.play(point)):
                    move = Move.play(point)
                    break
        state = state.apply_move(move)
        recomputed = full_hash(state.board.point_states(), table)
        if state.board.zobrist_hash != recomputed:
            return f"size={size} seed={seed} ply={state.move_number}"
    return None


def test_incremental_hash_fidelity():
    """1083-code table; incremental hash equals full recomputation at every
    ply of 1000+ random games; placing then removing a stone is a no-op."""
    with criterion("zobrist-incremental-hash", 30.0) as failures:
        table = table_for(19)
        if table.n_codes != 3 * 19 * 19:
            failures.append(f"table has {table.n_codes} codes, want 1083")

        games = [(5, seed) for seed in range(800)]
        games += [(9, seed) for seed in range(180)]
        games += [(13, seed) for seed in range(21)]
        assert len(games) >= 1000
        for size, seed in games:
            error = _random_hash_checked_game(size, seed)
            if error is not None:
                failures.append(f"hash mismatch at {error}")
                break

        rng = np.random.default_rng(0)
        for _ in range(50):
            point = Point(int(rng.integers(19)), int(rng.integers(19)))
            h0 = int(rng.integers(0, 2**63))
            placed = hash_apply(
                h0, point, zobrist.PointState.empty, zobrist.PointState.black, table
            )
            removed = hash_apply(
                placed, point, zobrist.PointState.black, zobrist.PointState.empty, table
            )
            if removed != h0 or placed == h0:
                failures.append(f"apply/remove not involutive at {point}")
                break


def _synthetic_samples(n: int, size: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        features = rng.integers(0, 2, size=(11, size, size), dtype=np.uint8)
        yield features, int(rng.integers(size * size))


def test_chunk_format_and_streaming(tmp_path, monkeypatch):
    """Byte-exact file layout, 1024-sample splitting, tail-dropping batch
    arithmetic, and the two-chunk streaming memory bound."""
    with criterion("chunk-format-streaming", 10.0) as failures:
        golden_dir = tmp_path / "golden"
        samples = list(_synthetic_samples(3, 5, seed=7))
        (path,) = chunkstore.write_chunks(
            iter(samples), golden_dir, board_size=5, zobrist_seed=77
        )
        expected = struct.pack(
            "<4sHIHHHQ8s", b"CHGO", 1, 3, 11, 5, 2, 77, b"\x00" * 8
        )
        expected += np.stack([f for f, _ in samples]).tobytes()
        expected += np.array(
            [label for _, label in samples], dtype="<u2"
        ).tobytes()
        if path.read_bytes() != expected:
            failures.append("chunk bytes differ from hand-packed layout")
        back_f, back_l = chunkstore.read_chunk(path)
        if not all(
            np.array_equal(back_f[i], samples[i][0])
            and back_l[i] == samples[i][1]
            for i in range(3)
        ):
            failures.append("round-tripped samples differ")

        split_dir = tmp_path / "split"
        paths = chunkstore.write_chunks(
            _synthetic_samples(2500, 5, seed=1), split_dir, board_size=5
        )
        counts = [chunkstore.read_chunk_header(p).n_samples for p in paths]
        if counts != [1024, 1024, 452]:
            failures.append(f"2500 samples split into {counts}")

        tail_dir = tmp_path / "tail"
        chunkstore.write_chunks(
            _synthetic_samples(452, 5, seed=2), tail_dir, board_size=5
        )
        batches = list(chunkstore.read_batches(tail_dir, 128))
        streamed = sum(len(b) for b in batches)
        if len(batches) != 3 or streamed != 384:
            failures.append(
                f"452-sample chunk gave {len(batches)} batches"
                f" of {streamed} samples, want 3 of 384"
            )
        if 452 - streamed != 68:
            failures.append("tail drop arithmetic changed")

        stream_dir = tmp_path / "stream"
        chunkstore.write_chunks(
            _synthetic_samples(5 * 256, 5, seed=3),
            stream_dir,
            board_size=5,
            chunk_size=256,
        )
        refs: list[weakref.ref] = []
        peak = 0
        real_read = chunkstore.read_chunk

        def tracking_read(p):
            nonlocal peak
            features, labels = real_read(p)
            refs.append(weakref.ref(features))
            gc.collect()
            alive = sum(1 for r in refs if r() is not None)
            peak = max(peak, alive)
            return features, labels

        monkeypatch.setattr(chunkstore, "read_chunk", tracking_read)
        for _ in chunkstore.read_batches(stream_dir, 128, shuffle_seed=0):
            pass
        monkeypatch.undo()
        if peak > 2:
            failures.append(f"{peak} chunks resident at once, bound is 2")


def _central_difference(network, name, index, features, labels, eps):
    array = network.params[name]
    original = array[index]
    array[index] = original + eps
    up, _ = network.loss_and_gradients(features, labels)
    array[index] = original - eps
    down, _ = network.loss_and_gradients(features, labels)
    array[index] = original
    return (up - down) / (2.0 * eps)


def test_network_shape_and_gradients():
    """Full-size layer chain (7x7 conv into six 5x5 convs into 1024-unit
    dense into 361-way softmax) plus finite-difference gradient agreement
    on a small float64 network."""
    with criterion("network-shape-gradients", 120.0) as failures:
        config = NetworkConfig()
        shapes = config.parameter_shapes()
        want = {
            "conv0/W": (64, 11, 7, 7),
            "dense0/W": (64 * 361, 1024),
            "dense1/W": (1024, 361),
        }
        for i in range(1, 7):
            want[f"conv{i}/W"] = (64, 64, 5, 5)
        for name, shape in want.items():
            if shapes.get(name) != shape:
                failures.append(
                    f"{name} shape {shapes.get(name)}, want {shape}"
                )
        # Same-padding arithmetic: a 19-line board is padded to 25 lines
        # for the 7x7 kernel and 23 lines for the 5x5 kernels.
        if 19 + config.kernel_size(0) - 1 != 25:
            failures.append("first-layer padded width is not 25")
        if 19 + config.kernel_size(1) - 1 != 23:
            failures.append("later-layer padded width is not 23")
        network = Network.initialize(config, seed=0)
        probs = network.forward(
            np.zeros((1, 11, 19, 19), dtype=np.float32)
        )
        if probs.shape != (1, 361) or abs(probs.sum() - 1.0) > 1e-4:
            failures.append("full-size forward is not a 361-way softmax")

        small = NetworkConfig(
            n_filters=4, board_size=5, dense_units=16, dtype="float64"
        )
        net = Network.initialize(small, seed=1)
        rng = np.random.default_rng(2)
        features = rng.integers(0, 2, size=(2, 11, 5, 5)).astype(np.float64)
        labels = np.array([3, 17])
        _, grads = net.loss_and_gradients(features, labels)
        checked = 0
        for name, array in sorted(net.params.items()):
            flat_indices = rng.choice(
                array.size, size=min(3, array.size), replace=False
            )
            for flat in flat_indices:
                index = np.unravel_index(flat, array.shape)
                analytic = grads[name][index]
                ok = False
                # Central differences sit on ReLU kinks at large steps;
                # retry with a smaller step before declaring a mismatch.
                for eps in (1e-6, 1e-7):
                    numeric = _central_difference(
                        net, name, index, features, labels, eps
                    )
                    rel = abs(numeric - analytic) / max(abs(analytic), 1e-8)
                    if rel < 1e-4:
                        ok = True
                        break
                checked += 1
                if not ok:
                    failures.append(
                        f"gradient mismatch {name}{list(index)}"
                        f" rel={rel:.2e}"
                    )
        if checked < 30:
            failures.append(f"only {checked} gradient entries checked")


def test_supervised_learnability(overfit_chunks, sl_chunks):
    """Desk-scale substitute for full-corpus accuracy: a 2-game subset is
    memorized to 95% top-1 within 200 epochs, and 50 games lift held-out
    top-1 to at least five times the 1/361 random baseline in 10 epochs."""
    with criterion("supervised-learnability", 1800.0) as failures:
        config = NetworkConfig(n_filters=4, board_size=19)
        from chigo.train import train_supervised

        overfit_net = Network.initialize(config, seed=0)
        _, history = train_supervised(
            overfit_net,
            overfit_chunks,
            overfit_chunks,
            epochs=200,
            seed=0,
            stop_accuracy=0.95,
        )
        best = max(m.top1_accuracy for m in history)
        if best < 0.95:
            failures.append(
                f"2-game training peaked at {best:.3f} top-1 in"
                f" {len(history)} epochs, want 0.95"
            )

        train_dir, test_dir = sl_chunks
        baseline5 = 5.0 / 361.0
        heldout_net = Network.initialize(config, seed=0)
        _, history = train_supervised(
            heldout_net,
            train_dir,
            test_dir,
            epochs=10,
            seed=0,
            stop_accuracy=baseline5,
        )
        best = max(m.top1_accuracy for m in history)
        if best < baseline5:
            failures.append(
                f"held-out top-1 {best:.4f} below 5x random {baseline5:.4f}"
            )


def test_sampler_properties():
    """Cube-and-clip sampling weights: worked two-entry example, exact
    normalization, entries inside (0,1), and no ordering inversions over
    100k random distributions."""
    with criterion("sampler-properties", 10.0) as failures:
        config = SamplerConfig()
        pair = clip_distribution(np.array([0.8, 0.2]), config)
        if not np.allclose(pair, [0.98462, 0.01538], atol=1e-5):
            failures.append(f"[0.8, 0.2] sharpened to {pair}")

        rng = np.random.default_rng(0)
        vectors = rng.dirichlet(np.ones(19), size=100_000)
        worst_sum = 0.0
        for row in vectors:
            out = clip_distribution(row, config)
            worst_sum = max(worst_sum, abs(out.sum() - 1.0))
            if out.min() <= 0.0 or out.max() >= 1.0:
                failures.append("output left the open interval (0,1)")
                break
            order = np.argsort(row)
            if (np.diff(out[order]) < -1e-15).any():
                failures.append(f"ordering inverted for input {row}")
                break
        if worst_sum > 1e-9:
            failures.append(f"normalization error {worst_sum:.2e}")


def _single_step_buffer(features, action, return_):
    game = ExperienceGame(
        steps=(
            ExperienceStep(
                features=features, action=action, return_=return_
            ),
        ),
        winner=Player.black if return_ > 0 else Player.white,
        n_moves=1,
    )
    return ExperienceBuffer(games=(game,))


def test_policy_gradient_direction():
    """A won action's probability strictly rises and a lost action's falls
    after one update; on a bias-only policy the update matches the
    closed-form softmax gradient to 1e-10."""
    with criterion("policy-gradient-direction", 60.0) as failures:
        config = NetworkConfig(n_filters=2, board_size=5, dense_units=8)
        features = np.random.default_rng(0).integers(
            0, 2, size=(11, 5, 5)
        ).astype(np.uint8)
        for sign, should_rise in ((+1.0, True), (-1.0, False)):
            network = Network.initialize(config, seed=0)
            before = network.forward(features[None].astype(np.float32))[0][7]
            reinforce_update(
                network, _single_step_buffer(features, 7, sign), alpha=0.05
            )
            after = network.forward(features[None].astype(np.float32))[0][7]
            rose = after > before
            if rose != should_rise:
                failures.append(
                    f"return {sign:+.0f} moved p from {before:.5f}"
                    f" to {after:.5f}"
                )

        wide = NetworkConfig(
            n_filters=2, board_size=5, dense_units=8, dtype="float64"
        )
        for sign in (+1.0, -1.0):
            network = Network.initialize(wide, seed=0)
            for name in network.params:
                network.params[name][:] = 0.0
            bias = np.linspace(-0.3, 0.3, 25)
            network.params["dense1/b"][:] = bias
            probs = softmax(bias[None])[0]
            alpha, action = 0.1, 12
            expected = bias.copy()
            expected[action] += alpha * sign
            expected -= alpha * sign * probs
            reinforce_update(
                network,
                _single_step_buffer(
                    np.ones((11, 5, 5), np.uint8), action, sign
                ),
                alpha=alpha,
            )
            error = np.abs(
                network.params["dense1/b"] - expected
            ).max()
            if error > 1e-10:
                failures.append(
                    f"closed-form mismatch {error:.2e} for G={sign:+.0f}"
                )


def test_rules_scenarios():
    """Published engine demonstrations: the atari escape that reaches three
    liberties, the capture on a last liberty, and the superko ban on an
    immediate ko recapture."""
    with criterion("rules-scenarios", 5.0) as failures:
        # White D16 in atari after Black C16; D15 must read as an escape.
        escape = Board.from_grid(
            19,
            {
                Point(15, 2): Player.black,  # C16
                Point(16, 3): Player.black,  # D17
                Point(15, 4): Player.black,  # E16
                Point(15, 3): Player.white,  # D16
            },
        )
        state = GameState.from_board(escape, Player.white)
        candidate = Point(14, 3)  # D15
        if not is_ladder_escape(state, candidate, Player.white):
            failures.append("three-liberty escape not recognized")
        if ladder_escape_oracle(state, candidate, Player.white) is not True:
            failures.append("escape oracle disagrees")

        # Black D17 in atari; White D18 takes the last liberty.
        capture = Board.from_grid(
            19,
            {
                Point(16, 3): Player.black,  # D17
                Point(16, 2): Player.white,  # C17
                Point(16, 4): Player.white,  # E17
                Point(15, 3): Player.white,  # D16
            },
        )
        state = GameState.from_board(capture, Player.white)
        after = state.apply_move(Move.play(Point(17, 3)))  # D18
        if after.board.get(Point(16, 3)) is not None:
            failures.append("stone on its last liberty was not captured")
        if after.board.get(Point(17, 3)) != Player.white:
            failures.append("capturing stone missing")

        # Build a ko by play, capture once, and demand the recapture
        # (which would repeat the position) is refused.
        state = GameState.new_game(5)
        for move in (
            Move.play(Point(1, 2)),
            Move.play(Point(1, 3)),
            Move.play(Point(2, 1)),
            Move.play(Point(2, 4)),
            Move.play(Point(3, 2)),
            Move.play(Point(3, 3)),
            Move.pass_turn(),
            Move.play(Point(2, 2)),
            Move.play(Point(2, 3)),  # captures White (2,2), opening the ko
        ):
            state = state.apply_move(move)
        if state.board.get(Point(2, 2)) is not None:
            failures.append("ko capture did not remove the stone")
        try:
            state.apply_move(Move.play(Point(2, 2)))
        except IllegalMoveError as exc:
            if exc.reason != "ko":
                failures.append(f"recapture refused as {exc.reason!r}")
        else:
            failures.append("immediate ko recapture was allowed")


def _digest_dir(directory) -> dict[str, str]:
    return {
        p.name: hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(directory.iterdir())
        if p.is_file()
    }


def test_end_to_end_smoke(tmp_path, capsys):
    """9x9 pipeline: encode 10 games, 3 supervised epochs, 2 policy-gradient
    iterations of 16 games, a 20-game head-to-head, and one served move —
    each stage byte-for-byte reproducible under its fixed seed."""
    with criterion("end-to-end-smoke", 900.0) as failures:

        def run(*argv) -> str:
            rc = cli.main(list(argv))
            out = capsys.readouterr().out
            if rc != 0:
                failures.append(f"{argv[0]} exited {rc}")
            return out

        cache = tmp_path / "cache"
        build_corpus(cache, 9, 10, games_per_archive=5, seed0=300)

        chunk_dirs = []
        for tag in ("a", "b"):
            out_dir = tmp_path / f"chunks-{tag}"
            line = run(
                "encode",
                "--cache", str(cache),
                "--out", str(out_dir),
                "--workers", "2",
                "--board-size", "9",
            )
            if "games=10" not in line or "skipped=0" not in line:
                failures.append(f"encode reported {line.strip()!r}")
            chunk_dirs.append(out_dir)
        if _digest_dir(chunk_dirs[0]) != _digest_dir(chunk_dirs[1]):
            failures.append("re-encoding changed chunk bytes")

        sl_paths = []
        for tag in ("a", "b"):
            ckpt = tmp_path / f"sl-{tag}.chkpt"
            run(
                "train-sl",
                "--data", str(chunk_dirs[0]),
                "--test", str(chunk_dirs[0]),
                "--epochs", "3",
                "--filters", "8",
                "--out", str(ckpt),
            )
            sl_paths.append(ckpt)
        if sl_paths[0].read_bytes() != sl_paths[1].read_bytes():
            failures.append("re-training wrote a different checkpoint")

        rl_paths, rl_logs = [], []
        for tag in ("a", "b"):
            ckpt = tmp_path / f"rl-{tag}.chkpt"
            rl_logs.append(
                run(
                    "train-rl",
                    "--model", str(sl_paths[0]),
                    "--iterations", "2",
                    "--games", "16",
                    "--screening", "8",
                    "--confirmation", "16",
                    "--out", str(ckpt),
                )
            )
            rl_paths.append(ckpt)
        if "version=1" not in rl_logs[0] or "version=2" not in rl_logs[0]:
            failures.append(f"policy-gradient log was {rl_logs[0]!r}")
        if rl_logs[0] != rl_logs[1]:
            failures.append("policy-gradient rerun diverged")
        if rl_paths[0].read_bytes() != rl_paths[1].read_bytes():
            failures.append("policy-gradient checkpoints differ")

        eval_lines = {
            run(
                "eval",
                "--a", str(rl_paths[0]),
                "--b", str(sl_paths[0]),
                "--games", "20",
            )
            for _ in range(2)
        }
        if len(eval_lines) != 1:
            failures.append(f"eval rerun diverged: {eval_lines}")
        if "games=20" not in next(iter(eval_lines)):
            failures.append(f"eval printed {eval_lines}")

        network, meta, _ = load_checkpoint(rl_paths[0])
        agent = Agent(network=network, version=int(meta["version"]))
        client = TestClient(create_app(agent))
        response = client.post(
            "/api/select-move", json={"board_size": 9, "moves": ["E5"]}
        )
        if response.status_code != 200:
            failures.append(f"serve returned {response.status_code}")
        else:
            bot_move = response.json()["bot_move"]
            if bot_move not in ("pass", "resign"):
                try:
                    reconstruct_state(9, ["E5", bot_move])
                except Exception as exc:
                    failures.append(f"served move {bot_move} illegal: {exc}")
