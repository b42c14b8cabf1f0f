"""Example designs and cost tables shipped with the package."""

from pathlib import Path

ROOT = Path(__file__).parent
DESIGNS = ROOT / "designs"
TABLES = ROOT / "tables"

EXAMPLE_NAMES = ("fft_array", "mac_array", "sfq_cnn", "sfq_fir", "systolic_array")


def bundled_examples():
    """Directories of every bundled example design, sorted by name."""
    return [DESIGNS / name for name in EXAMPLE_NAMES]


def bundled_design_dir(name):
    path = DESIGNS / name
    return path if (path / "event.desc").is_file() else None
