"""Smoke test for the pyqmonogamy extension.

Uses an installed `pyqmonogamy` if there is one, otherwise loads the shared
library from target/release (build it with
`cargo build -p pyqmonogamy --release`).
"""

import importlib.machinery
import importlib.util
import math
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    try:
        import pyqmonogamy

        return pyqmonogamy
    except ImportError:
        pass
    for profile in ("release", "debug"):
        for name in ("libpyqmonogamy.so", "libpyqmonogamy.dylib", "pyqmonogamy.dll"):
            path = ROOT / "target" / profile / name
            if path.exists():
                loader = importlib.machinery.ExtensionFileLoader("pyqmonogamy", str(path))
                spec = importlib.util.spec_from_file_location("pyqmonogamy", path, loader=loader)
                module = importlib.util.module_from_spec(spec)
                loader.exec_module(module)
                return module
    sys.exit("pyqmonogamy not found; run `cargo build -p pyqmonogamy --release` first")


def close(a, b, tol=1e-6):
    return abs(a - b) <= tol


def main():
    qm = load()

    ghz = qm.ghz()
    rho = ghz.to_density()
    assert rho.labels == ["A", "B", "C"]
    assert close(qm.von_neumann(rho.marginal(["A"])), 1.0)
    assert close(qm.von_neumann(rho), 0.0)

    pair = rho.marginal(["A", "B"])
    d = qm.discord(pair, ["A"], ["B"])
    assert close(d["discord"], 0.0), d
    assert close(d["mutual_info"], 1.0), d

    bell = qm.DensityMatrix(
        [[0.5, 0, 0, 0.5], [0, 0, 0, 0], [0, 0, 0, 0], [0.5, 0, 0, 0.5]]
    )
    assert close(qm.concurrence(bell), 1.0)
    assert close(qm.eof(bell), 1.0)
    assert close(qm.work_deficit(bell, ["A"]), 1.0)

    rep = qm.deficits(qm.psi_tilde(1.0, 0.5))
    assert close(rep["delta_right"], 1.0), rep
    assert rep["classification"] == "GHZ_class"

    assert qm.classify(qm.w_generalized(1 / 3, 1 / 3, 1 / 3))["verdict"] == "W_class"
    assert qm.classify(qm.ghz_generalized(0.4))["verdict"] == "GHZ_class"

    mixed = qm.random_mixed(3, 2, 5)
    assert qm.theorem1_residual(mixed)["residual"] <= 1e-9

    csv = qm.sweep(eps=[1.0], p_start=0.5, p_end=0.52)
    lines = csv.splitlines()
    assert lines[0] == "p,eps,delta_right_A,delta_left_A,D_AB,D_AC,E_BC,route,optimizer_spread"
    assert len([l for l in lines if not l.startswith("#")]) == 4

    report = qm.verify("tripartite", n=2, seed=1)
    assert report["passed"], report

    back = qm.DensityMatrix.from_json(pair.to_json())
    assert back.dims == [2, 2]

    try:
        qm.psi_tilde(2.0, 0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-range p accepted")

    assert math.isfinite(qm.mutual_information(mixed, ["A"], ["B", "C"]))
    print("python smoke test: ok")


if __name__ == "__main__":
    main()
