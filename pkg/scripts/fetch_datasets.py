#!/usr/bin/env python3
"""Fetch the multilabel benchmark datasets used by the experiment suite.

The core library never touches the network; this script is the documented
one-time step that obtains the MULAN benchmark archives and lays them out
where the tests and CLI expect them:

    datasets/<name>-train.arff
    datasets/<name>-test.arff        (names: emotions, scene, yeast, mediamill)

Set the TOPKBOOST_DATA environment variable to use a different directory.

The MULAN project distributes most archives as .rar files, which the Python
standard library cannot extract. This script therefore works in layers:

  1. If a --base-url is given (e.g. an internal mirror that serves the
     files as plain ARFF or as .zip), fetch from there.
  2. Otherwise try the public mirrors listed below.
  3. Anything downloaded as .rar is saved under datasets/_downloads/ with
     instructions to extract it manually (unrar/7z), since no pure-Python
     extractor exists.

If you are offline, obtain the archives on another machine from
https://mulan.sourceforge.net/datasets-mlc.html and drop the extracted
<name>-train.arff / <name>-test.arff files into the datasets directory;
everything downstream only needs those files to exist.
"""

from __future__ import annotations

import argparse
import io
import os
import shutil
import sys
import urllib.error
import urllib.request
import zipfile
from pathlib import Path

DATASETS = ("emotions", "scene", "yeast", "mediamill")
SPLITS = ("train", "test")

# Public mirrors, tried in order. {name} is the dataset, {split} train/test.
# Sourceforge serves the original MULAN archives (rar); the others serve
# zip or raw ARFF when available.
CANDIDATE_URLS = (
    "https://downloads.sourceforge.net/project/mulan/datasets/{name}.rar",
    "https://sourceforge.net/projects/mulan/files/datasets/{name}.rar/download",
)

RAR_MAGIC = b"Rar!"
ZIP_MAGIC = b"PK\x03\x04"
TIMEOUT = 60


def default_dest() -> Path:
    env = os.environ.get("TOPKBOOST_DATA")
    if env:
        return Path(env)
    return Path(__file__).resolve().parent.parent / "datasets"


def have_pair(dest: Path, name: str) -> bool:
    return all(
        (dest / f"{name}-{split}.arff").is_file()
        or (dest / f"{name}-{split}.csv").is_file()
        for split in SPLITS
    )


def fetch(url: str) -> bytes | None:
    req = urllib.request.Request(url, headers={"User-Agent": "topkboost-fetch/1.0"})
    try:
        with urllib.request.urlopen(req, timeout=TIMEOUT) as resp:
            return resp.read()
    except (urllib.error.URLError, OSError, ValueError) as exc:
        print(f"    {url}: {exc}", file=sys.stderr)
        return None


def place_arff_members(dest: Path, name: str, zf: zipfile.ZipFile) -> bool:
    """Copy <name>-train/test.arff out of an archive, normalizing names."""
    placed = 0
    for split in SPLITS:
        wanted = f"{name}-{split}.arff".lower()
        for member in zf.namelist():
            if Path(member).name.lower() == wanted:
                target = dest / f"{name}-{split}.arff"
                with zf.open(member) as src, open(target, "wb") as out:
                    shutil.copyfileobj(src, out)
                placed += 1
                break
    return placed == len(SPLITS)


def install_payload(dest: Path, name: str, url: str, payload: bytes) -> bool:
    if payload.startswith(ZIP_MAGIC):
        with zipfile.ZipFile(io.BytesIO(payload)) as zf:
            if place_arff_members(dest, name, zf):
                print(f"  extracted {name}-train/test.arff from zip")
                return True
            print(f"    zip from {url} lacks {name}-train/test.arff", file=sys.stderr)
            return False
    if payload.startswith(RAR_MAGIC):
        downloads = dest / "_downloads"
        downloads.mkdir(parents=True, exist_ok=True)
        rar_path = downloads / f"{name}.rar"
        rar_path.write_bytes(payload)
        print(
            f"  downloaded {rar_path} (RAR archive).\n"
            f"  Extract it manually, e.g.:\n"
            f"    unrar x {rar_path} {dest}/\n"
            f"  or: 7z x -o{dest} {rar_path}\n"
            f"  so that {dest}/{name}-train.arff and {name}-test.arff exist."
        )
        return False
    if payload.lstrip()[:9].lower() in (b"@relation", b"% "):
        # a bare ARFF; only usable when the URL names the split
        print(f"    {url} returned a bare ARFF without split info; skipped",
              file=sys.stderr)
        return False
    print(f"    {url}: unrecognized payload ({payload[:8]!r})", file=sys.stderr)
    return False


def fetch_split_files(dest: Path, name: str, base_url: str) -> bool:
    """Mirror layout: <base>/<name>-train.arff etc., or <base>/<name>.zip."""
    got = 0
    for split in SPLITS:
        url = f"{base_url.rstrip('/')}/{name}-{split}.arff"
        payload = fetch(url)
        if payload and payload.lstrip()[:1] in (b"@", b"%"):
            (dest / f"{name}-{split}.arff").write_bytes(payload)
            print(f"  fetched {name}-{split}.arff")
            got += 1
    if got == len(SPLITS):
        return True
    payload = fetch(f"{base_url.rstrip('/')}/{name}.zip")
    if payload:
        return install_payload(dest, name, base_url, payload)
    return False


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n", 1)[0])
    parser.add_argument(
        "names",
        nargs="*",
        default=list(DATASETS),
        help=f"datasets to fetch (default: all of {', '.join(DATASETS)})",
    )
    parser.add_argument(
        "--dest",
        type=Path,
        default=default_dest(),
        help="target directory (default: $TOPKBOOST_DATA or repo datasets/)",
    )
    parser.add_argument(
        "--base-url",
        default=None,
        help="mirror serving <name>-train.arff/<name>-test.arff or <name>.zip",
    )
    args = parser.parse_args(argv)

    unknown = [n for n in args.names if n not in DATASETS]
    if unknown:
        parser.error(f"unknown dataset(s): {', '.join(unknown)}")

    dest: Path = args.dest
    dest.mkdir(parents=True, exist_ok=True)
    missing = []
    for name in args.names:
        if have_pair(dest, name):
            print(f"{name}: already present in {dest}")
            continue
        print(f"{name}: fetching ...")
        ok = False
        if args.base_url:
            ok = fetch_split_files(dest, name, args.base_url)
        if not ok:
            for pattern in CANDIDATE_URLS:
                url = pattern.format(name=name)
                payload = fetch(url)
                if payload and install_payload(dest, name, url, payload):
                    ok = True
                    break
        if not (ok and have_pair(dest, name)):
            missing.append(name)

    if missing:
        print(
            f"\nCould not complete: {', '.join(missing)}.\n"
            f"Place <name>-train.arff and <name>-test.arff under {dest} "
            "manually (see the module docstring) and re-run.",
            file=sys.stderr,
        )
        return 1
    print(f"\nAll requested datasets ready under {dest}.")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
