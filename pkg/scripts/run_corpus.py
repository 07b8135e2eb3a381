#!/usr/bin/env python3
"""Walk the fixture corpus end to end: check, evaluate, compile, run.

For every good fixture this prints the binding types, the evaluator's
result for `main` (when present and an Int), and — if a C++ toolchain is
available — the compiled program's output so the two can be eyeballed
side by side.  Fixtures under corpus/bad/ are expected to fail the
checker and are reported with their diagnostic kind.

Usage: python3 scripts/run_corpus.py [--no-cxx] [corpus_dir]
"""

import argparse
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "runtime"))

import harness  # noqa: E402
from sfc import IntVal, TyInt, check_program, eval_program, parse_program  # noqa: E402
from sfc.codegen import lower_program  # noqa: E402
from sfc.printer import print_type  # noqa: E402
from sfc.typecheck import TypeCheckError  # noqa: E402


def run_good(path: Path, use_cxx: bool) -> bool:
    program = parse_program(path.read_text())
    types = check_program(program)
    print(f"== {path.name}")
    for name, _ in program.bindings:
        print(f"   {name} : {print_type(types[name])}")
    if program.main is None or types.get("main") != TyInt():
        print("   (no Int main; nothing to run)")
        return True

    value = eval_program(program)["main"]
    assert isinstance(value, IntVal)
    print(f"   eval     -> {value.value}")

    if not use_cxx:
        return True
    with tempfile.TemporaryDirectory() as tmp:
        cpp = Path(tmp) / (path.stem + ".cpp")
        cpp.write_text(lower_program(program).text)
        exit_code, stdout = harness.build_and_run(cpp)
    compiled = stdout.strip()
    print(f"   compiled -> {compiled}")
    if exit_code != 0 or compiled != str(value.value):
        print("   MISMATCH")
        return False
    return True


def run_bad(path: Path) -> bool:
    program = parse_program(path.read_text())
    try:
        check_program(program)
    except TypeCheckError as e:
        print(f"== {path.name}: rejected ({e.kind})")
        return True
    print(f"== {path.name}: ACCEPTED but should have been rejected")
    return False


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("corpus", nargs="?", default=str(ROOT / "corpus"))
    ap.add_argument("--no-cxx", action="store_true", help="skip the compile-and-run half")
    args = ap.parse_args()

    corpus = Path(args.corpus)
    use_cxx = not args.no_cxx and shutil.which(harness.CXX) is not None
    if not use_cxx and not args.no_cxx:
        print(f"note: {harness.CXX} not found, skipping compilation", file=sys.stderr)

    ok = True
    for path in sorted(corpus.glob("*.sfc")):
        ok &= run_good(path, use_cxx)
    for path in sorted((corpus / "bad").glob("*.sfc")):
        ok &= run_bad(path)
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
