import logging
import os
from typing import Any, Dict, List, Self, Sequence, Tuple

import matplotlib
import numpy as np
import pandas as pd
from matplotlib.figure import Figure

from .simulation import SweepReport

RESULT_COLUMNS = ["sweep_value", "scheme", "success_rate", "rate_bps_hz", "overhead", "trials", "seed"]

_SVG_STYLE = {
    "svg.hashsalt": "xl-beam-training", # stable element ids, byte-identical reruns
    "svg.fonttype": "none",
}


class ResultTable:
    """One row per (sweep point, scheme)."""

    def __init__(self, rows: List[Dict[str, Any]]) -> None:
        self.rows = rows

    def __len__(self) -> int:
        return len(self.rows)

    @classmethod
    def from_report(cls, report: SweepReport) -> Self:
        rows = []
        for point, value in enumerate(report.values):
            for scheme in report.schemes:
                overhead = report.overhead[scheme][point]
                rows.append({
                    "sweep_value": value,
                    "scheme": scheme,
                    "success_rate": report.success_rate[scheme][point],
                    "rate_bps_hz": report.rate[scheme][point],
                    "overhead": int(overhead) if float(overhead).is_integer() else overhead,
                    "trials": report.trials,
                    "seed": report.seed,
                })
        return cls(rows)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=RESULT_COLUMNS)


def artifact_header(fields: Dict[str, Any]) -> str:
    """Comment line embedded in every artifact so a run can be repeated exactly."""

    return "# " + " ".join(f"{key}={value}" for key, value in fields.items())

def _report_header(report: SweepReport) -> str:
    fields: Dict[str, Any] = {
        "config_hash": report.metadata.get("config_hash", ""),
        "seed": report.seed,
        "sweep": report.kind,
        "trials": report.trials,
    }
    fields.update({k: v for k, v in report.metadata.items() if k != "config_hash"})
    return artifact_header(fields)

def write_csv(path: str, frame: pd.DataFrame, header: str) -> str:
    """Write frame with a leading # header line; floats keep full round-trip precision."""

    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(header + "\n")
            frame.to_csv(f, index=False, lineterminator="\n")
    except OSError as e:
        raise OSError(f"Couldn't write {path}: {e}") from e

    logging.debug(f"Wrote {len(frame)} rows to {path}")
    return path

def read_csv(path: str) -> Tuple[pd.DataFrame, Dict[str, str]]:
    """Read a CSV written by write_csv, returning the frame and the header fields."""

    with open(path, "r", encoding="utf-8") as f:
        first = f.readline().rstrip("\n")

    fields: Dict[str, str] = {}
    if first.startswith("#"):
        for token in first[1:].split():
            key, _, value = token.partition("=")
            fields[key] = value

    frame = pd.read_csv(path, comment="#", float_precision="round_trip")
    return frame, fields

def line_chart(
        path: str,
        x: Sequence[float],
        curves: Dict[str, Sequence[float]],
        xlabel: str,
        ylabel: str,
        description: str,
        markers: bool = True
    ) -> str:
    """SVG line chart with one line (gid curve-<label>) per curve."""

    with matplotlib.rc_context(_SVG_STYLE):
        fig = Figure(figsize=(6.4, 4.2))
        ax = fig.subplots()
        for label, values in curves.items():
            (line,) = ax.plot(x, values, marker="o" if markers else None, markersize=4, label=label)
            line.set_gid(f"curve-{label}")

        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize="small")
        fig.tight_layout()

        try:
            fig.savefig(path, format="svg", metadata={"Date": None, "Description": description})
        except OSError as e:
            raise OSError(f"Couldn't write {path}: {e}") from e

    logging.debug(f"Wrote chart {path}")
    return path

def emit_results(report: SweepReport, table: ResultTable, outdir: str) -> List[str]:
    """Write results.csv plus a success-rate and an achievable-rate chart into outdir."""

    try:
        os.makedirs(outdir, exist_ok=True)
    except OSError as e:
        raise OSError(f"Couldn't create output directory {outdir}: {e}") from e

    header = _report_header(report)
    xlabel = {"snr": "Reference SNR (dB)", "distance": "User distance (m)"}.get(report.kind, report.kind)

    paths = [write_csv(os.path.join(outdir, "results.csv"), table.to_frame(), header)]
    paths.append(line_chart(
        os.path.join(outdir, "success_rate.svg"),
        report.values,
        {scheme: report.success_rate[scheme] for scheme in report.schemes},
        xlabel,
        "Success rate",
        header[2:]
    ))
    paths.append(line_chart(
        os.path.join(outdir, "rate.svg"),
        report.values,
        {scheme: report.rate[scheme] for scheme in report.schemes},
        xlabel,
        "Achievable rate (bits/s/Hz)",
        header[2:]
    ))

    logging.info(f"Wrote results to {outdir}")
    return paths

def emit_beamgain(
        outdir: str,
        omegas: np.ndarray,
        curves: Dict[str, np.ndarray],
        header: str
    ) -> List[str]:
    """Write beamgain.csv (omega plus one column per curve) and beamgain.svg."""

    os.makedirs(outdir, exist_ok=True)

    frame = pd.DataFrame({"omega": omegas, **curves})
    paths = [write_csv(os.path.join(outdir, "beamgain.csv"), frame, header)]
    paths.append(line_chart(
        os.path.join(outdir, "beamgain.svg"),
        omegas,
        curves,
        "Spatial angle of the far-field beam",
        "Normalized beam gain",
        header[2:],
        markers=False
    ))
    return paths
