"""CSV and plot-script emission."""

import functools
import logging
import subprocess
from importlib import metadata
from pathlib import Path
from typing import Optional, Union

import pandas as pd

from fput_kdv import __version__

_logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def _package_version() -> str:
    try:
        return metadata.version("fput-kdv")
    except metadata.PackageNotFoundError:
        return __version__


def _vcs_revision() -> Optional[str]:
    """``git describe`` of the checkout holding the package, or None outside one."""
    try:
        result = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            check=True,
            timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return None
    return result.stdout.strip() or None


@functools.lru_cache(maxsize=None)
def version_string() -> str:
    """``fput-kdv v<package version>``, suffixed with ``-<git describe>`` inside a checkout."""
    revision = _vcs_revision()
    suffix = f"-{revision}" if revision else ""
    return f"fput-kdv v{_package_version()}{suffix}"


def write_csv(frame: pd.DataFrame, path: Union[str, Path], invocation: str) -> Path:
    """Write ``frame`` after a ``#`` header line naming the version and invocation.

    Floats carry 17 significant digits; missing values are written as empty fields.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="") as handle:
        handle.write(f"# {version_string()} | {invocation}\n")
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")
    _logger.info("Wrote %d rows to %s", len(frame), target)
    return target


def sibling(path: Union[str, Path], tag: str) -> Path:
    """``out.csv`` -> ``out.<tag>.csv``."""
    target = Path(path)
    return target.with_name(f"{target.stem}.{tag}{target.suffix or '.csv'}")


def write_gnuplot_script(
    csv_path: Union[str, Path], x: str, y: str, columns: pd.Index, logscale: bool = False, title: Optional[str] = None
) -> Path:
    """Write ``<csv>.gp`` plotting column ``y`` against ``x``."""
    target = Path(csv_path)
    script = target.with_suffix(".gp")
    x_col = list(columns).index(x) + 1
    y_col = list(columns).index(y) + 1
    lines = [
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        f"set xlabel '{x}'",
        f"set ylabel '{y}'",
    ]
    if title:
        lines.append(f"set title '{title}'")
    if logscale:
        lines.append("set logscale xy")
    lines.append(f"plot '{target.name}' using {x_col}:{y_col} with linespoints")
    script.write_text("\n".join(lines) + "\n")
    return script
