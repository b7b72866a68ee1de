"""CSV ingestion and emission of quarter series.

Three header-exact files describe a series:

    grades.csv    quarter,grade_id,asset_class,ead,lgd,pd,maturity_years,firm_size,rho_override
    accounts.csv  quarter,rwa_irb,rwa_credit,rwa_total,provisions,capital_base,non_irb_expected_loss
    losses.csv    quarter,credit_loss

Non-applicable cells are empty. Floats are written in shortest round-trip
form, so ``emit(ingest(x))`` reproduces a canonical file byte for byte.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from collections import defaultdict
from pathlib import Path
from typing import Optional

from .errors import ParseError, ValidationError
from .portfolio import (AssetClass, CapitalAccounts, LossRecord, ObligorGrade, PortfolioSnapshot,
                        QuarterSeries, parse_quarter, validate_series)

log = logging.getLogger(__name__)

GRADES_HEADER = ["quarter", "grade_id", "asset_class", "ead", "lgd", "pd",
                 "maturity_years", "firm_size", "rho_override"]
ACCOUNTS_HEADER = ["quarter", "rwa_irb", "rwa_credit", "rwa_total", "provisions",
                   "capital_base", "non_irb_expected_loss"]
LOSSES_HEADER = ["quarter", "credit_loss"]

FILES = {"grades": "grades.csv", "accounts": "accounts.csv", "losses": "losses.csv"}


def fmt(x: Optional[float]) -> str:
    if x is None:
        return ""
    return repr(float(x))


def _rows(path: Path, header: list[str]):
    """Yield (line number, {column: (col index, text)}) for each data row."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise ParseError(path, 1, 1, "empty file, expected header") from None
        if first != header:
            raise ParseError(path, 1, 1, f"header must be {','.join(header)}")
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(path, line, min(len(row), len(header)) + 1,
                                 f"expected {len(header)} fields, got {len(row)}")
            yield line, {name: (i + 1, cell) for i, (name, cell) in enumerate(zip(header, row))}


def _field(path, line, cells, name, convert, optional=False):
    col, text = cells[name]
    if text == "":
        if optional:
            return None
        raise ParseError(path, line, col, f"{name} is required")
    try:
        value = convert(text)
    except ValueError as exc:
        raise ParseError(path, line, col, f"bad {name}: {exc}") from None
    if isinstance(value, float) and not math.isfinite(value):
        raise ParseError(path, line, col, f"{name} must be finite")
    return value


def read_grades(path) -> list[PortfolioSnapshot]:
    path = Path(path)
    by_quarter = defaultdict(list)
    for line, cells in _rows(path, GRADES_HEADER):
        q = _field(path, line, cells, "quarter", parse_quarter)
        by_quarter[q].append(ObligorGrade(
            id=_field(path, line, cells, "grade_id", str),
            asset_class=_field(path, line, cells, "asset_class", AssetClass.parse),
            ead=_field(path, line, cells, "ead", float),
            lgd=_field(path, line, cells, "lgd", float),
            pd=_field(path, line, cells, "pd", float),
            maturity_years=_field(path, line, cells, "maturity_years", float, optional=True),
            firm_size=_field(path, line, cells, "firm_size", float, optional=True),
            rho_override=_field(path, line, cells, "rho_override", float, optional=True),
        ))
    return [PortfolioSnapshot(q, tuple(gs)) for q, gs in sorted(by_quarter.items())]


def _unique(path, line, col, q, seen):
    if q in seen:
        raise ParseError(path, line, col, f"duplicate quarter {q.isoformat()}")
    seen.add(q)


def read_accounts(path) -> list[CapitalAccounts]:
    path = Path(path)
    out, seen = [], set()
    for line, cells in _rows(path, ACCOUNTS_HEADER):
        q = _field(path, line, cells, "quarter", parse_quarter)
        _unique(path, line, 1, q, seen)
        out.append(CapitalAccounts(
            as_of=q,
            **{name: _field(path, line, cells, name, float) for name in ACCOUNTS_HEADER[1:]},
        ))
    return out


def read_losses(path) -> list[LossRecord]:
    path = Path(path)
    out, seen = [], set()
    for line, cells in _rows(path, LOSSES_HEADER):
        q = _field(path, line, cells, "quarter", parse_quarter)
        _unique(path, line, 1, q, seen)
        out.append(LossRecord(q, _field(path, line, cells, "credit_loss", float)))
    return out


def ingest(directory=None, *, grades=None, accounts=None, losses=None) -> QuarterSeries:
    """Read and validate a series from a directory or explicit file paths.

    Invariant violations raise ValidationError; coverage gaps are logged.
    """
    d = Path(directory) if directory is not None else None
    paths = {
        "grades": grades or (d / FILES["grades"] if d else None),
        "accounts": accounts or (d / FILES["accounts"] if d else None),
        "losses": losses or (d / FILES["losses"] if d else None),
    }
    series = QuarterSeries.build(
        read_grades(paths["grades"]) if paths["grades"] else (),
        read_accounts(paths["accounts"]) if paths["accounts"] else (),
        read_losses(paths["losses"]) if paths["losses"] else (),
    )
    problems = validate_series(series)
    hard = [v for v in problems if v.kind == "invariant"]
    if hard:
        raise ValidationError([v.message for v in hard])
    for v in problems:
        log.warning("%s", v.message)
    return series


def _write(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def grades_csv(series: QuarterSeries) -> str:
    rows = []
    for q, snap in sorted(series.snapshots.items()):
        for g in snap.grades:
            rows.append([q.isoformat(), g.id, g.asset_class.value, fmt(g.ead), fmt(g.lgd), fmt(g.pd),
                         fmt(g.maturity_years), fmt(g.firm_size), fmt(g.rho_override)])
    return _write(rows, GRADES_HEADER)


def accounts_csv(series: QuarterSeries) -> str:
    rows = [[q.isoformat(), fmt(a.rwa_irb), fmt(a.rwa_credit), fmt(a.rwa_total), fmt(a.provisions),
             fmt(a.capital_base), fmt(a.non_irb_expected_loss)]
            for q, a in sorted(series.accounts.items())]
    return _write(rows, ACCOUNTS_HEADER)


def losses_csv(series: QuarterSeries) -> str:
    rows = [[q.isoformat(), fmt(r.credit_loss)] for q, r in sorted(series.losses.items())]
    return _write(rows, LOSSES_HEADER)


def emit(series: QuarterSeries, directory) -> dict:
    """Write the three canonical CSV files; returns {kind: path}."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    out = {}
    for kind, text in (("grades", grades_csv(series)), ("accounts", accounts_csv(series)),
                       ("losses", losses_csv(series))):
        p = d / FILES[kind]
        p.write_text(text, encoding="utf-8")
        out[kind] = p
    return out
