"""Raw pattern ingestion (CSV and PGM) and CSV emission of vectors."""

import csv
import io
import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, TextIO, Union

import numpy as np

logger = logging.getLogger(__name__)

PGM_MAGICS = (b"P2", b"P5")
PGM_MAX_MAXVAL = 65535
DECIMAL_REAL = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


class PatternError(ValueError):
    """Raised when a raw pattern violates its invariants."""

    pass


class PatternFormatError(PatternError):
    """Raised when a pattern file cannot be parsed.

    Carries the offending path and, where known, the 1-based line and column.
    """

    def __init__(self, message: str, path: Optional[Path] = None, line: Optional[int] = None, column: Optional[int] = None):
        self.path = path
        self.line = line
        self.column = column
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
                if column is not None:
                    where += f":{column}"
            where += ": "
        super().__init__(f"{where}{message}")


@dataclass(frozen=True, eq=False)
class RawPattern:
    """A vector of real data values, one per unit, before encoding."""

    values: np.ndarray
    label: Optional[str] = None

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.size < 1:
            raise PatternError("pattern must have at least one value")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise PatternError(f"pattern value at index {bad} is not finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def dimension(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.dimension

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RawPattern):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]


def load_csv(path: Path) -> List[RawPattern]:
    """Load one pattern per CSV row.

    Args:
        path: UTF-8 file of comma-separated decimal reals, no header

    Returns:
        Patterns in row order; blank lines are skipped

    Raises:
        FileNotFoundError: If the file does not exist
        PatternFormatError: On an empty file, ragged rows or non-numeric cells
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")

    data = path.read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        line = data.count(b"\n", 0, e.start) + 1
        raise PatternFormatError(f"invalid UTF-8 byte 0x{data[e.start]:02x}", path=path, line=line)
    rows = list(csv.reader(io.StringIO(text, newline="")))

    patterns: List[RawPattern] = []
    width: Optional[int] = None
    for line_no, row in enumerate(rows, 1):
        if not row or all(not cell.strip() for cell in row):
            continue

        if width is None:
            width = len(row)
        elif len(row) != width:
            raise PatternFormatError(
                f"ragged row: expected {width} columns, found {len(row)}", path=path, line=line_no
            )

        values = []
        for col_no, cell in enumerate(row, 1):
            try:
                value = float(cell.strip())
            except ValueError:
                raise PatternFormatError(f"non-numeric cell {cell.strip()!r}", path=path, line=line_no, column=col_no)
            if not math.isfinite(value):
                raise PatternFormatError(f"non-finite cell {cell.strip()!r}", path=path, line=line_no, column=col_no)
            if not DECIMAL_REAL.fullmatch(cell.strip()):
                raise PatternFormatError(f"non-numeric cell {cell.strip()!r}", path=path, line=line_no, column=col_no)
            values.append(value)

        patterns.append(RawPattern(np.asarray(values)))

    if not patterns:
        raise PatternFormatError("empty file: no patterns found", path=path)

    logger.info(f"Loaded {len(patterns)} patterns of dimension {width} from {path}")
    return patterns


class _HeaderReader:
    """Tokenizer for the whitespace/comment-separated PGM header."""

    def __init__(self, data: bytes, path: Path):
        self.data = data
        self.path = path
        self.pos = 0

    def _skip_whitespace_and_comments(self) -> None:
        while self.pos < len(self.data):
            byte = self.data[self.pos : self.pos + 1]
            if byte.isspace():
                self.pos += 1
            elif byte == b"#":
                end = self.data.find(b"\n", self.pos)
                self.pos = len(self.data) if end < 0 else end + 1
            else:
                break

    def next_token(self) -> bytes:
        self._skip_whitespace_and_comments()
        start = self.pos
        while self.pos < len(self.data) and not self.data[self.pos : self.pos + 1].isspace():
            if self.data[self.pos : self.pos + 1] == b"#":
                break
            self.pos += 1
        if start == self.pos:
            raise PatternFormatError("truncated header", path=self.path)
        return self.data[start : self.pos]

    def next_int(self, field: str) -> int:
        token = self.next_token()
        try:
            return int(token)
        except ValueError:
            raise PatternFormatError(f"invalid {field} {token!r}", path=self.path)


def load_pgm(path: Path) -> RawPattern:
    """Load a P2 (ASCII) or P5 (binary) greyscale image.

    Pixels are flattened row-major and scaled to [0, 1] by division by maxval.
    P5 samples are 8-bit when maxval < 256, otherwise 16-bit big-endian.

    Raises:
        FileNotFoundError: If the file does not exist
        PatternFormatError: On bad magic, bad header, maxval out of range or a truncated payload
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")

    data = path.read_bytes()
    magic = data[:2]
    if magic not in PGM_MAGICS:
        raise PatternFormatError(f"bad magic {magic!r} (expected P2 or P5)", path=path)

    header = _HeaderReader(data, path)
    header.pos = 2
    width = header.next_int("width")
    height = header.next_int("height")
    maxval = header.next_int("maxval")

    if width < 1 or height < 1:
        raise PatternFormatError(f"invalid image size {width}x{height}", path=path)
    if maxval == 0:
        raise PatternFormatError("maxval is 0", path=path)
    if maxval < 0 or maxval > PGM_MAX_MAXVAL:
        raise PatternFormatError(f"maxval {maxval} outside 1..{PGM_MAX_MAXVAL}", path=path)

    count = width * height
    if magic == b"P2":
        samples = []
        for _ in range(count):
            try:
                token = header.next_token()
            except PatternFormatError:
                raise PatternFormatError(
                    f"truncated payload: expected {count} samples, found {len(samples)}", path=path
                )
            if not token.isdigit():
                raise PatternFormatError(f"invalid sample {token!r} at index {len(samples)}", path=path)
            samples.append(int(token))
        pixels = np.asarray(samples, dtype=np.float64)
    else:
        # Exactly one whitespace byte separates maxval from the raster
        start = header.pos + 1
        dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
        needed = count * dtype.itemsize
        payload = data[start : start + needed]
        if len(payload) < needed:
            raise PatternFormatError(f"truncated payload: expected {needed} bytes, found {len(payload)}", path=path)
        pixels = np.frombuffer(payload, dtype=dtype).astype(np.float64)

    if np.any(pixels < 0) or np.any(pixels > maxval):
        raise PatternFormatError(f"sample outside 0..{maxval}", path=path)

    logger.info(f"Loaded {width}x{height} PGM image from {path}")
    return RawPattern(pixels / maxval, label=path.stem)


def load_patterns(path: Path) -> List[RawPattern]:
    """Load patterns from a CSV file or a single PGM image, by suffix."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return [load_pgm(path)]
    return load_csv(path)


def _format_real(value: float) -> str:
    return repr(float(value))


def format_csv(rows: Iterable[Sequence[Union[float, int, str]]]) -> str:
    """Render rows as CSV text with round-trippable float formatting."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for row in rows:
        writer.writerow([_format_real(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buffer.getvalue()


def state_rows(vectors: Iterable[np.ndarray], complex_pairs: bool) -> List[List[float]]:
    """Flatten complex vectors to CSV rows.

    With complex_pairs each component becomes two cells (real, imag);
    otherwise only the real parts are written.
    """
    rows = []
    for vector in vectors:
        vector = np.asarray(vector, dtype=np.complex128)
        if complex_pairs:
            rows.append([float(x) for pair in zip(vector.real, vector.imag) for x in pair])
        else:
            rows.append([float(x) for x in vector.real])
    return rows


def write_text(text: str, out: Optional[Path], stream: TextIO) -> None:
    """Write text to a file when a path is given, else to the stream."""
    if out is None:
        stream.write(text)
        return
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as f:
        f.write(text)
