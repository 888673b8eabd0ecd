#!/usr/bin/env python3
"""Regenerate the scenario files shipped under scenarios/.

Both files come from the seeded benchmark builder, so running this
script after a code change shows exactly how the shipped artifacts
drift (or that they don't).
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from foloc.bench import default_scenario, save_scenario  # noqa: E402


def main() -> None:
    out_dir = os.path.join(os.path.dirname(__file__), "..", "scenarios")
    os.makedirs(out_dir, exist_ok=True)

    noisy = default_scenario()
    save_scenario(noisy, os.path.join(out_dir, "default.json"))
    print(f"wrote scenarios/default.json (snr {noisy.snr_db} dB, "
          f"threshold {noisy.threshold:.6g})")

    clean = default_scenario(snr_db=float("inf"))
    save_scenario(clean, os.path.join(out_dir, "noise_free.json"))
    print(f"wrote scenarios/noise_free.json (noise free, "
          f"threshold {clean.threshold:.6g})")


if __name__ == "__main__":
    main()
