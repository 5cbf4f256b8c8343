#!/usr/bin/env python3
"""Smoke test for the Python bindings.

Builds the extension with `cargo build -p ulisse-py`, imports it, runs a
small generate -> build -> query pipeline, and checks exact k-NN and range
results against the brute-force scan.

Usage: python3 python/smoke_test.py [--release]
"""

import argparse
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def build_and_import(release: bool):
    profile = "release" if release else "debug"
    cmd = ["cargo", "build", "-p", "ulisse-py"]
    if release:
        cmd.append("--release")
    subprocess.run(cmd, cwd=REPO, check=True)
    built = REPO / "target" / profile / "libulisse.so"
    if not built.exists():  # e.g. macOS
        built = REPO / "target" / profile / "libulisse.dylib"
    stage = Path(tempfile.mkdtemp(prefix="ulisse-py-"))
    shutil.copy(built, stage / "ulisse.so")
    sys.path.insert(0, str(stage))
    import ulisse  # noqa: E402

    return ulisse


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--release", action="store_true")
    args = parser.parse_args()
    ulisse = build_and_import(args.release)

    data = ulisse.Dataset.generate(60, 256, seed=7)
    assert len(data) == 60

    index = ulisse.Index.build(data, l_min=160, l_max=256, gamma=96)
    assert index.envelope_count == 60
    assert index.length_range == (160, 256)

    # A planted query must come back at distance zero.
    query = data.subsequence(5, 3, 192)
    matches, stats = index.knn(query, k=5)
    assert matches[0] == (5, 3, 192, 0.0), matches[0]
    assert stats["leaves_visited"] >= 1

    # Exact k-NN equals the brute-force scan, including tie order.
    for measure in ("ed", "dtw"):
        got, _ = index.knn(query, k=5, measure=measure, warp_pct=5.0)
        want = data.scan_knn(query, k=5, measure=measure, warp_pct=5.0)
        assert got == want, f"{measure}: {got} != {want}"

    # Range search at twice the NN distance equals the brute-force scan.
    eps = 2.0 * data.scan_knn(query, k=2)[1][3]
    got, _ = index.range(query, epsilon=eps)
    want = data.scan_range(query, epsilon=eps)
    assert got == want and len(got) >= 1

    # Approximate search: distances bound the exact ones from above.
    approx, exact_flag, _ = index.knn_approx(query, k=5)
    exact, _ = index.knn(query, k=5)
    assert all(a[3] >= e[3] - 1e-12 for a, e in zip(approx, exact))
    assert isinstance(exact_flag, bool)

    # Persistence round-trip.
    with tempfile.TemporaryDirectory() as tmp:
        dpath = Path(tmp) / "d.ulsd"
        ipath = Path(tmp) / "i.ulsi"
        data.save(dpath)
        index.save(ipath)
        back = ulisse.Index.load(ipath, dpath)
        got, _ = back.knn(query, k=5)
        assert got == exact

    # Normalized mode agrees with its own oracle.
    nindex = ulisse.Index.build(data, l_min=160, l_max=256, gamma=96, normalized=True)
    got, _ = nindex.knn(query, k=3)
    want = data.scan_knn(query, k=3, normalized=True)
    assert got == want

    print("smoke test: PASS")


if __name__ == "__main__":
    main()
