"""Experiment command line.

The CLI is a thin client over the HTTP service: by default it mounts the
service in-process (no socket, same filesystem), and with ``--server`` it
talks to a remote instance instead. Either way experiments run through
the same job API, so results are identical between the two modes.

Exit codes: 0 success, 2 configuration/usage error, 1 runtime failure.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

import click
import httpx
import numpy as np

from .data import load_dataset, reduce_dataset, write_csv
from .errors import TopkBoostError
from .experiment import ALGOS, band_csv_text

POLL_SECONDS = 0.25

# Per-dataset defaults (learner count, exploration rate, loop count) for the
# potential-based and adaptive algorithm families, plus the label count the
# benchmark ARFF files carry.
PRESETS = {
    "emotions": {"label_count": 6, "bbm": (50, 0.02, 20), "ada": (50, 0.02, 10)},
    "scene": {"label_count": 6, "bbm": (50, 0.02, 10), "ada": (50, 0.04, 10)},
    "yeast": {"label_count": 14, "bbm": (30, 0.03, 10), "ada": (60, 0.04, 10)},
    "mediamill": {"label_count": 101, "bbm": (10, 0.02, 20), "ada": (10, 0.06, 20)},
    "m-reduced": {"label_count": 101, "bbm": (20, 0.04, 20), "ada": (60, 0.06, 20)},
}


def parse_seeds(text: str) -> list[int]:
    """'10' means seeds 0..9; '3,7,11' means exactly those seeds."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise click.UsageError(f"--seeds must be an integer count or comma list, got {text!r}")
    if not values:
        raise click.UsageError("--seeds must not be empty")
    if len(values) == 1 and "," not in text:
        count = values[0]
        if count < 1:
            raise click.UsageError("--seeds count must be >= 1")
        return list(range(count))
    return values


def make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=60.0)
    from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app())


def _fail_from_response(resp: httpx.Response):
    detail = resp.text.strip()
    if resp.status_code == 400:
        raise click.UsageError(detail or "invalid configuration")
    raise click.ClickException(f"service error {resp.status_code}: {detail}")


def submit_and_wait(client: httpx.Client, request: dict, quiet: bool = False) -> str:
    resp = client.post("/experiments", json=request)
    if resp.status_code != 200:
        _fail_from_response(resp)
    job_id = resp.json()["job_id"]
    last_line = ""
    while True:
        resp = client.get(f"/experiments/{job_id}")
        if resp.status_code != 200:
            _fail_from_response(resp)
        info = resp.json()
        if not quiet and info.get("progress"):
            p = info["progress"]
            line = f"seed {p['seed']}: round {p['round']}/{p['total_rounds']}"
            if line != last_line:
                click.echo(line, err=True)
                last_line = line
        if info["state"] == "done":
            return job_id
        if info["state"] == "error":
            detail = info.get("error") or "experiment failed"
            # configuration problems only become visible once the job has
            # loaded the data; keep them usage errors rather than failures
            if detail.startswith("ConfigError:"):
                raise click.UsageError(detail.split(":", 1)[1].strip())
            raise click.ClickException(detail)
        time.sleep(POLL_SECONDS)


def fetch_text(client: httpx.Client, path: str) -> str:
    resp = client.get(path)
    if resp.status_code != 200:
        _fail_from_response(resp)
    return resp.text


def _apply_preset(preset: str | None, algo: str, learners, rho, loops, label_count):
    """Fill unset hyperparameters from the preset; explicit flags win."""
    if preset is None:
        return (
            learners if learners is not None else 20,
            rho if rho is not None else 0.02,
            loops if loops is not None else 1,
            label_count,
        )
    if preset not in PRESETS:
        raise click.UsageError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    entry = PRESETS[preset]
    fam = "bbm" if algo.endswith("bbm") else "ada"
    p_learners, p_rho, p_loops = entry[fam]
    return (
        learners if learners is not None else p_learners,
        rho if rho is not None else p_rho,
        loops if loops is not None else p_loops,
        label_count if label_count is not None else entry["label_count"],
    )


def _prepare_reduced(dataset, test, label_count, reduce_seed, out):
    """Subsample the large benchmark pair and stage it as canonical CSVs."""
    train_full = load_dataset(dataset, labels=label_count, split="train")
    test_full = load_dataset(test, labels=label_count, split="test")
    train_red, test_red = reduce_dataset(train_full, test_full, reduce_seed)
    stage = Path(out) if out else Path(".")
    stage.mkdir(parents=True, exist_ok=True)
    train_path = stage / "m-reduced-train.csv"
    test_path = stage / "m-reduced-test.csv"
    write_csv(train_red, train_path)
    write_csv(test_red, test_path)
    return str(train_path), str(test_path)


def common_run_options(fn):
    opts = [
        click.option("--algo", type=click.Choice(ALGOS), required=True),
        click.option("--dataset", required=True, help="train split path (.arff or canonical .csv)"),
        click.option("--test", required=True, help="test split path"),
        click.option("--k", type=int, default=3, show_default=True),
        click.option("--rho", type=float, default=None, help="exploration rate [default: preset or 0.02]"),
        click.option("--gamma", type=float, default=0.2, show_default=True, help="assumed weak-learner edge (potential-based algorithms)"),
        click.option("--learners", type=int, default=None, help="weak learner count [default: preset or 20]"),
        click.option("--loops", type=int, default=None, help="train-split passes [default: preset or 1]"),
        click.option("--seeds", default="1", show_default=True, help="integer count (seeds 0..count-1) or comma list"),
        click.option("--rand", type=click.Choice(["uniform", "singleswap"]), default="uniform", show_default=True),
        click.option("--out", default=None, help="directory for curve.csv and summary.txt"),
        click.option("--freeze", is_flag=True, help="stop learning during the test stream"),
        click.option("--no-prob-clip", is_flag=True, help="disable clamping of inclusion probabilities"),
        click.option("--no-grad-clip", is_flag=True, help="disable gradient clipping (adaptive)"),
        click.option("--diagnostics", is_flag=True, help="record per-learner empirical edges"),
        click.option("--label-count", type=int, default=None, help="trailing label attributes in ARFF input"),
        click.option("--preset", default=None, help=f"hyperparameter preset: {', '.join(sorted(PRESETS))}"),
        click.option("--reduce-seed", type=int, default=7, show_default=True, help="subsample seed for the m-reduced preset"),
        click.option("--server", default=None, help="remote service URL (default: run in-process)"),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Online multilabel-ranking boosting with top-k feedback."""


@main.command()
@common_run_options
def run(algo, dataset, test, k, rho, gamma, learners, loops, seeds, rand, out,
        freeze, no_prob_clip, no_grad_clip, diagnostics, label_count, preset,
        reduce_seed, server):
    """Run one experiment and write its loss curve and summary."""
    learners, rho, loops, label_count = _apply_preset(
        preset, algo, learners, rho, loops, label_count
    )
    seed_list = parse_seeds(seeds)
    try:
        if preset == "m-reduced":
            dataset, test = _prepare_reduced(dataset, test, label_count, reduce_seed, out)
            label_count = None
        request = {
            "algo": algo,
            "train_path": dataset,
            "test_path": test,
            "label_count": label_count,
            "k": k,
            "rho": rho,
            "gamma": gamma,
            "learners": learners,
            "loops": loops,
            "seeds": seed_list,
            "rand": rand,
            "freeze": freeze,
            "prob_clip": not no_prob_clip,
            "grad_clip": not no_grad_clip,
            "diagnostics": diagnostics,
        }
        with make_client(server) as client:
            job_id = submit_and_wait(client, request)
            curve = fetch_text(client, f"/experiments/{job_id}/curve")
            summary = fetch_text(client, f"/experiments/{job_id}/summary")
    except TopkBoostError as exc:
        raise click.ClickException(str(exc))
    if out is not None:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "curve.csv").write_text(curve)
        (out_dir / "summary.txt").write_text(summary)
    click.echo(summary, nl=False)


@main.command("sweep-k")
@common_run_options
@click.option("--k-values", required=True, help="comma list of k values, e.g. 3,7,14")
def sweep_k_cmd(algo, dataset, test, k, rho, gamma, learners, loops, seeds, rand,
                out, freeze, no_prob_clip, no_grad_clip, diagnostics, label_count,
                preset, reduce_seed, server, k_values):
    """Repeat the experiment for several k and write mean/std curve bands."""
    learners, rho, loops, label_count = _apply_preset(
        preset, algo, learners, rho, loops, label_count
    )
    seed_list = parse_seeds(seeds)
    try:
        ks = [int(p) for p in k_values.split(",") if p.strip()]
    except ValueError:
        raise click.UsageError(f"--k-values must be a comma list of integers, got {k_values!r}")
    if not ks:
        raise click.UsageError("--k-values must not be empty")
    out_dir = Path(out) if out is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    try:
        if preset == "m-reduced":
            dataset, test = _prepare_reduced(dataset, test, label_count, reduce_seed, out)
            label_count = None
        with make_client(server) as client:
            for kv in ks:
                request = {
                    "algo": algo,
                    "train_path": dataset,
                    "test_path": test,
                    "label_count": label_count,
                    "k": kv,
                    "rho": rho,
                    "gamma": gamma,
                    "learners": learners,
                    "loops": loops,
                    "seeds": seed_list,
                    "rand": rand,
                    "freeze": freeze,
                    "prob_clip": not no_prob_clip,
                    "grad_clip": not no_grad_clip,
                    "diagnostics": diagnostics,
                }
                job_id = submit_and_wait(client, request)
                curve = fetch_text(client, f"/experiments/{job_id}/curve")
                info = client.get(f"/experiments/{job_id}").json()
                click.echo(
                    f"k={kv} test_loss_mean={info['test_loss_mean']!r} "
                    f"test_loss_std={info['test_loss_std']!r}"
                )
                if out_dir is not None:
                    (out_dir / f"seeds_k{kv}.csv").write_text(curve)
                    (out_dir / f"curve_k{kv}.csv").write_text(
                        band_csv_text(_per_seed_series(curve, seed_list))
                    )
    except TopkBoostError as exc:
        raise click.ClickException(str(exc))


def _per_seed_series(curve_text: str, seed_order: list[int]) -> list[np.ndarray]:
    """Split a merged curve CSV into one loss series per seed."""
    series: dict[int, list[float]] = {s: [] for s in seed_order}
    lines = curve_text.strip().splitlines()[1:]
    for line in lines:
        seed_s, _, avg_s, _, _ = line.split(",")
        series[int(seed_s)].append(float(avg_s))
    return [np.asarray(series[s]) for s in seed_order]


@main.command()
@click.option("--in", "src", required=True, help="ARFF input path")
@click.option("--label-count", type=int, required=True)
@click.option("--out", "dst", required=True, help="canonical CSV output path")
@click.option("--split", type=click.Choice(["train", "test"]), default="train", show_default=True)
def convert(src, label_count, dst, split):
    """Convert an ARFF file to the canonical CSV + sidecar pair."""
    try:
        ds = load_dataset(src, labels=label_count, split=split)
        write_csv(ds, dst)
    except (TopkBoostError, OSError) as exc:
        raise click.ClickException(str(exc))
    click.echo(f"wrote {dst} ({ds.n} rows, dim={ds.dim}, m={ds.m})")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Start the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
