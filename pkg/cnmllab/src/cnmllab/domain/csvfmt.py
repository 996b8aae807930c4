import math
from typing import Iterable, Sequence, Union

Number = Union[int, float]


def fmt_number(x: Number) -> str:
    """17 significant digits, enough to parse back to the same double."""
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def fmt_point(p) -> str:
    """Scalars print as numbers, vectors as ';'-joined numbers."""
    if isinstance(p, (tuple, list)):
        return ";".join(fmt_number(v) for v in p)
    return fmt_number(p)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(r) for r in rows)
    return "\n".join(lines) + "\n"
