#!/usr/bin/env python3
"""Compile-and-run harness for generated C++ sources.

Builds a generated file against the closure runtime header with
warnings-as-errors, runs the binary, and reports (exit code, stdout).
Also audits sources for dynamic-allocation constructs, which are banned:
the closure lowering must be purely stack-allocated.

Usage: harness.py generated.cpp [--expect TEXT]
Exit: 0 ok (and output matches --expect when given), 1 compile failure,
2 runtime failure, 3 audit failure, 4 usage.
"""

from __future__ import annotations

import argparse
import re
import subprocess
import sys
import tempfile
from pathlib import Path

HERE = Path(__file__).resolve().parent
INCLUDE_DIR = HERE / "include"
HEADER = INCLUDE_DIR / "closure.hpp"

CXX = "c++"
CXXFLAGS = ["-std=c++17", "-Wall", "-Wextra", "-Werror"]

# Disallowed dynamic-allocation constructs, matched on word boundaries.
ALLOCATION_PATTERNS = [
    r"\bnew\b",
    r"\bdelete\b",
    r"\bmalloc\b",
    r"\bcalloc\b",
    r"\brealloc\b",
    r"\bfree\s*\(",
    r"\bstd::function\b",
    r"\bmake_unique\b",
    r"\bmake_shared\b",
    r"\bunique_ptr\b",
    r"\bshared_ptr\b",
    r"\bstd::vector\b",
    r"\bstd::string\b",
]


class CompileFailure(Exception):
    def __init__(self, output: str) -> None:
        super().__init__("compilation failed")
        self.output = output


class RuntimeFailure(Exception):
    def __init__(self, exit_code: int, stdout: str, stderr: str) -> None:
        super().__init__(f"binary exited with {exit_code}")
        self.exit_code = exit_code
        self.stdout = stdout
        self.stderr = stderr


def audit_allocation_free(*paths: Path) -> list:
    """Return the list of (path, pattern) hits for banned constructs."""
    hits = []
    for path in paths:
        text = path.read_text(encoding="utf-8")
        for pat in ALLOCATION_PATTERNS:
            if re.search(pat, text):
                hits.append((str(path), pat))
    return hits


def build_and_run(source: Path, timeout: float = 60.0) -> tuple:
    """Compile `source` against the runtime header and run it.

    Returns (exit_code, stdout). Raises CompileFailure with the captured
    compiler output, or RuntimeFailure for a nonzero exit.
    """
    with tempfile.TemporaryDirectory(prefix="sfc-harness-") as td:
        exe = Path(td) / "a.out"
        proc = subprocess.run(
            [CXX, *CXXFLAGS, f"-I{INCLUDE_DIR}", str(source), "-o", str(exe)],
            capture_output=True,
            text=True,
            timeout=timeout,
        )
        if proc.returncode != 0:
            raise CompileFailure(proc.stderr)
        run = subprocess.run([str(exe)], capture_output=True, text=True, timeout=timeout)
        if run.returncode != 0:
            raise RuntimeFailure(run.returncode, run.stdout, run.stderr)
        return run.returncode, run.stdout


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("source", type=Path)
    ap.add_argument("--expect", help="require stdout to equal this (trailing newline ignored)")
    ap.add_argument("--skip-audit", action="store_true")
    try:
        args = ap.parse_args(argv)
    except SystemExit:
        return 4

    if not args.skip_audit:
        hits = audit_allocation_free(HEADER, args.source)
        if hits:
            for path, pat in hits:
                print(f"audit: {path}: banned construct {pat}", file=sys.stderr)
            return 3

    try:
        _, out = build_and_run(args.source)
    except CompileFailure as e:
        sys.stderr.write(e.output)
        return 1
    except RuntimeFailure as e:
        sys.stderr.write(e.stderr)
        return 2

    sys.stdout.write(out)
    if args.expect is not None and out.rstrip("\n") != args.expect.rstrip("\n"):
        print(f"harness: expected {args.expect!r}, got {out!r}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
