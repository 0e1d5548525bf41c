"""Smoke test for the `icap` extension module.

Build first with `cargo build --release -p icap-py`, then run
`python3 python/smoke_test.py`.
"""

import importlib
import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    lib = ROOT / "target" / "release" / "libicap.so"
    if not lib.exists():
        sys.exit(f"missing {lib}; run `cargo build --release -p icap-py`")
    tmp = Path(tempfile.mkdtemp())
    shutil.copy(lib, tmp / "icap.so")
    sys.path.insert(0, str(tmp))
    return importlib.import_module("icap")


def main():
    icap = load()

    assert len(icap.list_cases()) == 6
    assert icap.limit("superbee", 1.0, 0.75) == 1.0
    assert icap.limit("overbee", 1.0, 1.0) == 2.0
    assert icap.limit("superbee", 1.0, -1.0) == 0.0

    phi = icap.compat_project([1.7, 0.4], [(0.3, -1.2), (-0.3, 1.2)])
    assert phi == [0.4, 0.4], phi

    assert icap.smearing([0.0, 0.5, 1.0], 0.1) == 0.025
    assert math.isclose(icap.log_smearing(0.5), math.log10(0.25 + 1e-10))

    n = 8
    const = [[0.3] * n for _ in range(n)]
    rate = icap.mlp_rate(const, 1.0, 0.5)
    assert max(abs(v) for row in rate for v in row) < 1e-14

    r = icap.run_case("oblique_steady", n=16, t_end=0.5)
    assert r.steps > 0 and r.t_final == 0.5
    assert len(r.field) == 16 and len(r.field[0]) == 16
    assert r.l1 is not None and r.l1 >= 0.0

    l1, l2, linf, econs = icap.norms(r.field, r.field)
    assert (l1, l2, linf, econs) == (0.0, 0.0, 0.0, 0.0)

    try:
        icap.run_case("nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown case accepted")

    print("icap smoke test passed")


if __name__ == "__main__":
    main()
