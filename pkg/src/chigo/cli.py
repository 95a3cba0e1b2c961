"""Command-line entry point tying the pipeline stages together.

Subcommands: download, encode, train-sl, selfplay, train-rl, eval, serve.
"""

from __future__ import annotations

import argparse
import logging
import socket
import sys


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chigo",
        description="Train and serve a convolutional Go policy network.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("download", help="fetch game archives into a cache")
    p.add_argument("--index", required=True, help="URL of the archive index page")
    p.add_argument("--games", type=int, required=True, help="games to sample")
    p.add_argument("--cache", required=True, help="archive cache directory")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")

    p = sub.add_parser("encode", help="encode cached games into chunk files")
    p.add_argument("--cache", required=True, help="archive cache directory")
    p.add_argument("--out", required=True, help="chunk output directory")
    p.add_argument(
        "--games",
        type=int,
        default=None,
        help="sample this many games (default: all cached games)",
    )
    p.add_argument("--workers", type=int, default=8, help="parallel workers")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--board-size", type=int, default=19, help="board size to keep")

    p = sub.add_parser("train-sl", help="supervised training on chunk data")
    p.add_argument("--data", required=True, help="training chunk directory")
    p.add_argument("--test", required=True, help="held-out chunk directory")
    p.add_argument("--epochs", type=int, required=True)
    p.add_argument("--filters", type=int, default=64, help="conv filters per layer")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument(
        "--stop-accuracy",
        type=float,
        default=None,
        help="stop early at this held-out accuracy",
    )

    p = sub.add_parser("selfplay", help="generate self-play experience")
    p.add_argument("--model", required=True, help="checkpoint to play with")
    p.add_argument("--games", type=int, default=128)
    p.add_argument("--out", required=True, help="experience buffer output path")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train-rl", help="REINFORCE self-play training")
    p.add_argument("--model", required=True, help="starting checkpoint")
    p.add_argument("--iterations", type=int, default=20)
    p.add_argument("--alpha", type=float, default=0.001, help="SGD step size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--games", type=int, default=128, help="games per iteration")
    p.add_argument("--screening", type=int, default=100, help="screening games")
    p.add_argument(
        "--confirmation", type=int, default=1000, help="confirmation games"
    )

    p = sub.add_parser("eval", help="match two checkpoints head to head")
    p.add_argument("--a", required=True, help="challenger checkpoint")
    p.add_argument("--b", required=True, help="reference checkpoint")
    p.add_argument("--games", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("serve", help="serve move selection over HTTP")
    p.add_argument("--model", required=True, help="checkpoint to serve")
    p.add_argument("--port", type=int, default=8080, help="0 picks a free port")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static", default=None, help="directory of webui files")
    p.add_argument(
        "--resign-deficit",
        type=float,
        default=50.0,
        help="resign when passing while trailing by more than this",
    )
    return parser


def _load_agent(path: str):
    from .checkpoint import load_checkpoint
    from .selfplay import Agent

    network, meta, _ = load_checkpoint(path)
    return Agent(network=network, version=int(meta.get("version", 0))), meta


def _cmd_download(args) -> int:
    from .archives import fetch_archives

    index = fetch_archives(args.index, args.games, args.cache, args.seed)
    print(f"archives={len(index.entries)} games={index.total_games}")
    return 0


def _cmd_encode(args) -> int:
    from .archives import sample_games, scan_cache
    from .chunkstore import process_archives

    if args.games is not None:
        sampled = sample_games(args.cache, args.games, args.seed)
        archives = sorted(sampled)
        members = sampled
    else:
        archives = [str(path) for path, _ in scan_cache(args.cache)]
        members = None
    summary = process_archives(
        archives,
        args.out,
        workers=args.workers,
        members=members,
        board_size=args.board_size,
    )
    print(
        f"games={summary.n_games} samples={summary.n_samples} "
        f"chunks={summary.n_chunks} skipped={summary.n_skipped}"
    )
    return 0


def _cmd_train_sl(args) -> int:
    from .chunkstore import list_chunks, read_chunk_header
    from .network import Network, NetworkConfig
    from .train import train_supervised

    chunks = list_chunks(args.data)
    if not chunks:
        print(f"no chunk files in {args.data}", file=sys.stderr)
        return 1
    header = read_chunk_header(chunks[0])
    config = NetworkConfig(
        n_filters=args.filters,
        board_size=header.board_size,
        n_planes=header.n_planes,
    )
    network = Network.initialize(config, args.seed)
    _, history = train_supervised(
        network,
        args.data,
        args.test,
        epochs=args.epochs,
        seed=args.seed,
        out=args.out,
        stop_accuracy=args.stop_accuracy,
    )
    for metrics in history:
        print(metrics.as_line())
    return 0


def _cmd_selfplay(args) -> int:
    from .selfplay import collect_experience, save_buffer

    agent, _ = _load_agent(args.model)
    buffer = collect_experience(agent, args.games, args.seed)
    save_buffer(args.out, buffer)
    print(f"games={len(buffer.games)} steps={buffer.total_steps}")
    return 0


def _cmd_train_rl(args) -> int:
    from .checkpoint import save_checkpoint
    from .selfplay import RLConfig, run_rl

    agent, _ = _load_agent(args.model)
    config = RLConfig(
        iterations=args.iterations,
        alpha=args.alpha,
        games_per_iteration=args.games,
        screening_games=args.screening,
        confirmation_games=args.confirmation,
    )
    result = run_rl(agent, config, args.seed)
    for report in result.reports:
        line = (
            f"version={report.version} "
            f"screen_wins={report.screening.wins}/{report.screening.games}"
        )
        if report.confirmation is not None:
            line += (
                f" confirm_wins={report.confirmation.wins}"
                f"/{report.confirmation.games}"
                f" p_value={report.confirmation.p_value:.3g}"
            )
        print(line)
    if result.final_vs_initial is not None:
        final = result.final_vs_initial
        print(
            f"final_vs_initial wins={final.wins} games={final.games} "
            f"p_value={final.p_value:.3g}"
        )
    save_checkpoint(
        args.out, result.agent.network, meta={"version": result.agent.version}
    )
    return 0


def _cmd_eval(args) -> int:
    from .selfplay import evaluate_agents

    agent_a, _ = _load_agent(args.a)
    agent_b, _ = _load_agent(args.b)
    report = evaluate_agents(agent_a, agent_b, args.games, args.seed)
    print(f"wins={report.wins} games={report.games} p_value={report.p_value:.6g}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    agent, meta = _load_agent(args.model)
    app = create_app(
        agent,
        model_version=str(meta.get("version", 0)),
        resign_deficit=args.resign_deficit,
        static_dir=args.static,
    )
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind((args.host, args.port))
    sock.listen(128)
    port = sock.getsockname()[1]
    print(f"listening on {args.host}:{port}", flush=True)
    server = uvicorn.Server(
        uvicorn.Config(app, log_level="warning", access_log=False)
    )
    server.run(sockets=[sock])
    return 0


_COMMANDS = {
    "download": _cmd_download,
    "encode": _cmd_encode,
    "train-sl": _cmd_train_sl,
    "selfplay": _cmd_selfplay,
    "train-rl": _cmd_train_rl,
    "eval": _cmd_eval,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:  # surface a one-line error, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
