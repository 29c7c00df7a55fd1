"""Detection and accuracy tables as CSV or markdown."""

from __future__ import annotations

import csv
from pathlib import Path

from labelguard.experiment import MatrixResult, accuracy_summary, detection_summary

DETECTION_HEADER = ("noise_level", "standard", "rep", "ANM", "INM", "AINM", "P_D", "P_FA")
ACCURACY_HEADER = ("classifier", "noise_level", "condition", "rep", "accuracy")


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def _pct(x, digits: int = 2) -> str:
    return "n/a" if x is None else f"{100 * x:.{digits}f}"


def write_detection_csv(path: str | Path, result: MatrixResult) -> None:
    rows = sorted(result.detection, key=lambda d: (d.standard, d.noise_level, d.rep))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DETECTION_HEADER)
        for d in rows:
            r = d.report
            w.writerow([repr(float(d.noise_level)), d.standard, d.rep, r.anm, r.inm, r.ainm,
                        _num(r.p_d), _num(r.p_fa)])


def write_accuracy_csv(path: str | Path, result: MatrixResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ACCURACY_HEADER)
        for r in result.accuracy:
            w.writerow([r.classifier.value, repr(float(r.noise_level)), r.condition, r.rep,
                        _num(r.accuracy)])


def _check_header(path, reader, expected):
    if tuple(reader.fieldnames or ()) != expected:
        raise ValueError(f"{path}: header must be {','.join(expected)}")


def read_detection_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _check_header(path, reader, DETECTION_HEADER)
        return [{
            "noise_level": float(row["noise_level"]), "standard": int(row["standard"]),
            "rep": int(row["rep"]), "ANM": int(row["ANM"]), "INM": int(row["INM"]),
            "AINM": int(row["AINM"]),
            "P_D": float(row["P_D"]) if row["P_D"] else None,
            "P_FA": float(row["P_FA"]) if row["P_FA"] else None,
        } for row in reader]


def read_accuracy_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _check_header(path, reader, ACCURACY_HEADER)
        return [{
            "classifier": row["classifier"], "noise_level": float(row["noise_level"]),
            "condition": row["condition"], "rep": int(row["rep"]),
            "accuracy": float(row["accuracy"]) if row["accuracy"] else None,
        } for row in reader]


def _table(header: list[str], rows: list[list[str]]) -> list[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return lines


def render_markdown(result: MatrixResult) -> str:
    """Detection table per standard, then an accuracy table per final classifier (means over repetitions)."""
    lines = ["# Label-noise filtering results", ""]
    det = detection_summary(result)
    for standard in sorted({r["standard"] for r in det}):
        lines += [f"## Detection, standard {standard}", ""]
        rows = [[f"{100 * r['noise_level']:g}%", f"{r['ANM']:.1f}", f"{r['INM']:.1f}",
                 f"{r['AINM']:.1f}", _pct(r["P_D"]), _pct(r["P_FA"])]
                for r in det if r["standard"] == standard]
        lines += _table(["Noise", "ANM", "INM", "AINM", "P_D (%)", "P_FA (%)"], rows) + [""]
    acc = accuracy_summary(result)
    conditions = [c for c in ("NF", "IF", "S1", "S2", "S3") if any(r["condition"] == c for r in acc)]
    for clf in dict.fromkeys(r["classifier"] for r in acc):
        lines += [f"## Test accuracy (%), {clf}", ""]
        by_level: dict[float, dict[str, str]] = {}
        for r in acc:
            if r["classifier"] == clf:
                by_level.setdefault(r["noise_level"], {})[r["condition"]] = _pct(r["mean"])
        rows = [[f"{100 * level:g}%", *(cells.get(c, "") for c in conditions)]
                for level, cells in sorted(by_level.items())]
        lines += _table(["Noise", *conditions], rows) + [""]
    return "\n".join(lines)


def emit_reports(result: MatrixResult, out_dir: str | Path, fmt: str = "csv") -> list[Path]:
    """Write the result tables to ``out_dir``; returns the paths written."""
    if not result:
        raise ValueError("no results to report")
    if fmt not in ("csv", "markdown"):
        raise ValueError(f"unknown format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "markdown":
        path = out / "report.md"
        path.write_text(render_markdown(result))
        return [path]
    paths = [out / "detection.csv", out / "accuracy.csv"]
    write_detection_csv(paths[0], result)
    write_accuracy_csv(paths[1], result)
    return paths
