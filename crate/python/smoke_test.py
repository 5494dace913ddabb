#!/usr/bin/env python3
"""Smoke test for the disc_py extension module.

Builds nothing itself: expects `cargo build -p disc-py` (or --release) to have
produced target/{debug,release}/libdisc_py.so, which it stages as an
importable module.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def stage_module() -> None:
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libdisc_py.so"
        if lib.exists():
            stage = Path(tempfile.mkdtemp(prefix="disc_py_"))
            shutil.copy2(lib, stage / "disc_py.so")
            sys.path.insert(0, str(stage))
            return
    sys.exit("libdisc_py.so not found; run `cargo build -p disc-py` first")


def main() -> None:
    stage_module()
    import disc_py

    # Generator algebra.
    assert disc_py.parse_generator("5") == [1, 0, 1]
    assert disc_py.gsw("111") == 3
    assert disc_py.mhd_bound(["101", "111"]) == ([2, 3], 5)
    assert disc_py.exact_mhd(["101", "111"]) == 5
    assert disc_py.is_noncatastrophic(["101", "111"])
    assert not disc_py.is_noncatastrophic(["111", "111"])

    # Pairing: the larger-GSW code goes to the stronger first hop.
    pairing = disc_py.optimal_pairing(["101", "111"], [20.0, 10.0], [10.0, 10.0])
    assert pairing == [1, 0], pairing
    r = disc_py.rho(3, 10.0, 30.0)
    assert math.isclose(r, 10.0 * 30.0 / (30.0 / 3 + 10.0))
    assert disc_py.rho(3, 10.0, 30.0, exact=True) < r
    b_opt = disc_py.ber_approx(["101", "111"], pairing, [20.0, 10.0], [10.0, 10.0], 1.0)
    b_un = disc_py.ber_approx(["101", "111"], [0, 1], [20.0, 10.0], [10.0, 10.0], 1.0)
    assert 0.0 < b_opt <= b_un
    g_un, g_sir = disc_py.example2_gains(1.0, 2.0, 10.0)
    assert g_un > 0 and g_sir > 0

    # Soft coding.
    out = disc_py.siso_encode([0.5, -0.8, 1.0], "101")
    assert [round(v, 12) for v in out] == [0.5, -0.8, 0.5]
    llr = disc_py.llr_from_sbe(0.5)
    assert math.isclose(disc_py.sbe_from_llr(llr), 0.5)
    assert math.isclose(disc_py.boxplus([llr, 1e9]), llr, rel_tol=1e-9)

    # Simulation round trip on a tiny scenario.
    names = [n for n, _ in disc_py.list_presets()]
    assert "fig5" in names
    cfg = disc_py.preset_config("fig5")
    cfg = cfg.replace("snr_stop_db = 14", "snr_stop_db = 2")
    cfg = cfg.replace("min_frame_errors = 100", "min_frame_errors = 0")
    cfg = cfg.replace("max_frames = 2000000", "max_frames = 20")
    csv_a = disc_py.run_config(cfg)
    csv_b = disc_py.run_config(cfg)
    assert csv_a == csv_b
    header = csv_a.splitlines()[0]
    assert header == "scheme,scenario,snr_db,frames,frame_errors,bit_errors,fer,ber,seed"

    print("disc_py smoke test passed")


if __name__ == "__main__":
    main()
