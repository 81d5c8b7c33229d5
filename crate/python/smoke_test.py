"""Smoke test for the Python extension.

Build and run from the repository root:

    cargo build --release -p cvriqp-py --features extension-module
    python3 python/smoke_test.py
"""

import importlib.util
import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    try:
        import cvriqp  # installed wheel

        return cvriqp
    except ImportError:
        pass
    for name in ("libcvriqp.so", "libcvriqp.dylib", "cvriqp.dll"):
        built = ROOT / "target" / "release" / name
        if built.exists():
            break
    else:
        sys.exit("extension not built; run cargo build --release -p cvriqp-py --features extension-module")
    tmp = Path(tempfile.mkdtemp())
    target = tmp / ("cvriqp.pyd" if built.suffix == ".dll" else "cvriqp.so")
    shutil.copy(built, target)
    spec = importlib.util.spec_from_file_location("cvriqp", target)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def main():
    cv = load()
    grid = cv.Grid(4096, 80.0)
    psi = cv.vacuum(grid)
    assert abs(psi.norm_sq() - 1.0) < 1e-12

    r = cv.fourier_gadget(psi, 0.1, 0.01)
    lead = 2 * 0.01 * 0.1 / math.sqrt(math.pi)
    assert abs(r.success_probability / lead - 1) < 0.05, r.success_probability
    assert r.diagnostics["fidelity_target"] > 0.999
    weight, state = r.components[0]
    assert weight > 0 and state.representation == "position"

    g = cv.Grid(4096, 128.0)
    plus = cv.gkp_state("+", 0.25, g)
    _, _, _, err = cv.gkp_readout(plus, cv.SQRT_PI / 8)
    assert err < 3 * cv.pe_bound(0.25)

    ec_grid = cv.Grid(4096, 60.0)
    data = cv.displace_q(cv.gkp_state("+", 0.25, ec_grid), 0.2)
    rep = cv.gkp_error_correct(data, 0.25, cv.SQRT_PI / 8, seed=1, data_shift=0.2)
    assert rep.diagnostics["threshold_held"] == 1.0

    out, h, p = cv.dv_hadamard_gadget(1, 1j, seed=0, postselect=True)
    assert h == 1 and abs(p - 0.5) < 1e-12 and len(out) == 2

    db = cv.squeezing_db(cv.solve_ft_sigma(1e-6) ** 2)
    assert 20.0 <= db <= 21.0, db
    assert abs(cv.min_squeezing_db(100)[1] - 16.56) < 0.01
    assert cv.pe_budget_check(0.25, 10) and not cv.pe_budget_check(0.25, 30)

    try:
        cv.Grid(1000, 10.0)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid grid accepted")
    print("python smoke test passed")


if __name__ == "__main__":
    main()
