# scripts/reproduce_presets.py
import os
import sys
import tempfile
from io import StringIO
from pathlib import Path

import django

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings")
django.setup()

from django.core.management import call_command

# Примеры из README: (имя файла результата, аргументы команды zeno)
PRESETS = [
    ("quantum_n10.csv", ["quantum", "--rabi", "3.14159265", "--t", "1", "--n", "10"]),
    ("quantum_mc.csv", ["quantum", "--rabi", "3.14159265", "--t", "1", "--n-grid", "1,10,100",
                        "--trials", "10000", "--seed", "1"]),
    ("lc_analytic.csv", ["lc", "--L", "1", "--C", "1", "--q0", "1", "--t", "1", "--n", "4",
                         "--method", "analytic"]),
    ("lc_rk4.csv", ["lc", "--L", "1", "--C", "1", "--q0", "1", "--t", "1", "--n", "4",
                    "--method", "rk4", "--step", "1e-4"]),
    ("lc_scan.csv", ["lc", "--lc-unit", "--t", "1", "--n-grid", "100:100000"]),
    ("fit_report.json", ["fit", "--input", "{lc_scan.csv}", "--n-min", "100"]),
    ("lc_scan.svg", ["plot", "--input", "{lc_scan.csv}", "--log-log", "--annotate"]),
]


def run_presets(directory: Path) -> dict:
    outputs = {}
    for name, args in PRESETS:
        resolved = [str(directory / a[1:-1]) if a.startswith("{") else a for a in args]
        call_command("zeno", *resolved, "--output", str(directory / name),
                     stdout=StringIO())
        outputs[name] = (directory / name).read_bytes()
    return outputs


def reproduce():
    print("Replaying presets twice...")

    with tempfile.TemporaryDirectory() as first_dir, tempfile.TemporaryDirectory() as second_dir:
        first = run_presets(Path(first_dir))
        second = run_presets(Path(second_dir))

    # пути внутри SVG не пишутся, поэтому каталоги могут различаться
    mismatched = [name for name in first if first[name] != second[name]]
    for name in first:
        mark = "✗" if name in mismatched else "✓"
        print(f"{mark} {name}: {len(first[name])} bytes")

    if mismatched:
        print(f"❌ Outputs differ between runs: {', '.join(mismatched)}")
        return 1
    print("✅ All preset outputs are byte-identical")
    return 0


if __name__ == "__main__":
    sys.exit(reproduce())
