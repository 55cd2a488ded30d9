"""Text formats: complex literals, parameter files, tabulated families, CSV.

Complex numbers are written ``re+imi`` (``1.5-0.25i``, ``2i``, ``-3``).

Parameter file::

    # comment
    alphas: [0.1+0.2i, -0.3i, 0.5]
    tau: 1+0i

Tabulated family (one row per t, strictly increasing)::

    # popuc-table kind=schur n=2
    0.0,0.1+0i,0.2i,1+0i          t, alpha_0..alpha_{n-1}, tau
    # popuc-table kind=matrix order=2
    0.0,1+1i,0+0i,0+0i,1+1i       t, entries row-major
"""

from __future__ import annotations

import os
import re
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ParameterError
from .schur import SchurParameters

_NUM = r"[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?|[0-9]+\.(?:[eE][+-]?[0-9]+)?|inf|nan"
_COMPLEX = re.compile(
    rf"^\s*(?:(?P<re>[+-]?(?:{_NUM}))(?P<im>[+-](?:{_NUM})?i)?|(?P<only>[+-]?(?:{_NUM})?i))\s*$"
)


class FormatError(ParameterError):
    """Malformed text input; ``line`` is 1-based when known."""

    def __init__(self, message, line=None, index=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, index=index)
        self.line = line


def parse_complex(text: str) -> complex:
    m = _COMPLEX.match(text)
    if not m:
        raise ValueError(f"not a complex literal: {text!r}")

    def coef(s):
        s = s[:-1]
        if s in ("", "+"):
            return 1.0
        if s == "-":
            return -1.0
        return float(s)

    if m.group("only") is not None:
        return complex(0.0, coef(m.group("only")))
    re_part = float(m.group("re"))
    im = m.group("im")
    return complex(re_part, coef(im) if im else 0.0)


def format_complex(z: complex, digits: int = 17) -> str:
    z = complex(z)
    return f"{z.real:.{digits}g}{z.imag:+.{digits}g}i"


def format_real(x: float, digits: int = 9) -> str:
    return f"{float(x):.{digits}g}"


# -- parameter files -------------------------------------------------------


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_parameters(text: str) -> SchurParameters:
    fields = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line:
            continue
        if ":" not in line:
            raise FormatError(f"expected 'key: value', got {raw.strip()!r}", no)
        key, value = (s.strip() for s in line.split(":", 1))
        if key in fields:
            raise FormatError(f"duplicate key {key!r}", no)
        if key == "alphas":
            if not (value.startswith("[") and value.endswith("]")):
                raise FormatError("alphas must be a bracketed list", no)
            body = value[1:-1].strip()
            items = [s for s in body.split(",")] if body else []
            try:
                fields[key] = ([parse_complex(s) for s in items], no)
            except ValueError as exc:
                raise FormatError(str(exc), no) from None
        elif key == "tau":
            try:
                fields[key] = (parse_complex(value), no)
            except ValueError as exc:
                raise FormatError(str(exc), no) from None
        else:
            raise FormatError(f"unknown key {key!r}", no)
    for key in ("alphas", "tau"):
        if key not in fields:
            raise FormatError(f"missing key {key!r}")
    alphas, a_line = fields["alphas"]
    tau, t_line = fields["tau"]
    try:
        return SchurParameters(np.array(alphas, dtype=complex), tau)
    except ParameterError as exc:
        line = t_line if exc.index is not None and exc.index == len(alphas) else a_line
        raise FormatError(str(exc), line, exc.index) from None


def read_parameters(path) -> SchurParameters:
    return parse_parameters(Path(path).read_text())


def format_parameters(params: SchurParameters) -> str:
    alphas = ", ".join(format_complex(a) for a in params.alphas)
    return f"alphas: [{alphas}]\ntau: {format_complex(params.tau)}\n"


# -- tabulated families ----------------------------------------------------

_HEADER = re.compile(r"^#\s*popuc-table\s+(?P<body>.*)$")


def parse_table(text: str, name: str = "tabulated"):
    from .families import TabulatedMatrixFamily, TabulatedSchurFamily

    lines = text.splitlines()
    header = None
    meta = {}
    rows = []
    for no, raw in enumerate(lines, 1):
        s = raw.strip()
        if not s:
            continue
        m = _HEADER.match(s)
        if m:
            if header is not None:
                raise FormatError("second popuc-table header", no)
            header = no
            for tok in m.group("body").split():
                if "=" not in tok:
                    raise FormatError(f"bad header token {tok!r}", no)
                k, v = tok.split("=", 1)
                meta[k] = v
            continue
        if s.startswith("#"):
            continue
        if header is None:
            raise FormatError("data before '# popuc-table' header", no)
        rows.append((no, [c.strip() for c in s.split(",")]))
    if header is None:
        raise FormatError("missing '# popuc-table' header")
    kind = meta.get("kind")
    try:
        if kind == "schur":
            size = int(meta["n"])
            width = size + 2
        elif kind == "matrix":
            size = int(meta["order"])
            width = size * size + 1
        else:
            raise FormatError(f"kind must be 'schur' or 'matrix', got {kind!r}", header)
    except (KeyError, ValueError):
        raise FormatError("header needs n=<int> (schur) or order=<int> (matrix)", header) from None
    if size < 1:
        raise FormatError("declared size must be >= 1", header)
    if not rows:
        raise FormatError("table has no rows", header)
    ts, values = [], []
    for idx, (no, cells) in enumerate(rows):
        if len(cells) != width:
            raise FormatError(f"expected {width} fields, got {len(cells)}", no, idx)
        try:
            t = float(cells[0])
            nums = [parse_complex(c) for c in cells[1:]]
        except ValueError as exc:
            raise FormatError(str(exc), no, idx) from None
        if ts and not t > ts[-1]:
            raise FormatError(f"t column must be strictly increasing (row {idx})", no, idx)
        ts.append(t)
        if kind == "schur":
            try:
                values.append(SchurParameters(np.array(nums[:-1]), nums[-1]))
            except ParameterError as exc:
                raise FormatError(f"row {idx}: {exc}", no, idx) from None
        else:
            values.append(np.array(nums, dtype=complex).reshape(size, size))
    if kind == "schur":
        return TabulatedSchurFamily(ts, values, name=name)
    return TabulatedMatrixFamily(ts, values, name=name)


def read_table(source):
    """Path or text (text is recognized by a leading '#')."""
    if isinstance(source, str) and source.lstrip().startswith("#"):
        return parse_table(source)
    p = Path(source)
    return parse_table(p.read_text(), name=f"file:{p.name}")


def emit_table(family, ts: Sequence[float]) -> str:
    """Serialize a family on a grid in the tabulated format."""
    ts = [float(t) for t in ts]
    out = []
    if family.kind == "matrix":
        A0 = family.matrix(ts[0])
        out.append(f"# popuc-table kind=matrix order={A0.shape[0]}")
        for t in ts:
            A = family.matrix(t)
            out.append(",".join([repr(t)] + [format_complex(z) for z in A.reshape(-1)]))
    elif hasattr(family, "params"):
        p0 = family.params(ts[0])
        out.append(f"# popuc-table kind=schur n={p0.n}")
        for t in ts:
            p = family.params(t)
            out.append(",".join([repr(t)] + [format_complex(a) for a in p.alphas] + [format_complex(p.tau)]))
    else:
        raise ParameterError("only matrix families and Schur-parameter families can be tabulated")
    return "\n".join(out) + "\n"


# -- output ----------------------------------------------------------------


def write_atomic(path, data, binary: bool = False) -> None:
    """Write to a temporary file beside ``path`` and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb" if binary else "w", **({} if binary else {"newline": ""})) as fh:
            fh.write(data)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_real(c) if isinstance(c, (float, np.floating)) else str(c) for c in row))
    return "\n".join(lines) + "\n"


def aligned_table(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    cells = [list(header)] + [
        [format_real(c) if isinstance(c, (float, np.floating)) else str(c) for c in row] for row in rows
    ]
    widths = [max(len(r[k]) for r in cells) for k in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() for r in cells) + "\n"
