"""Reading and writing integrals in the FCIDUMP text format."""
import re
from pathlib import Path

import numpy as np

from ..errors import FcidumpParseError
from .mo import MOIntegrals

_KEY = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([^=]*?)(?=,?\s*[A-Za-z_][A-Za-z0-9_]*\s*=|,?\s*$)")


def _parse_header(text, first_line):
    body = re.sub(r"^\s*&FCI", "", text, flags=re.IGNORECASE).strip()
    fields = {}
    for key, val in _KEY.findall(body):
        fields[key.upper()] = val.strip().rstrip(",")
    for key in ("NORB", "NELEC"):
        if key not in fields:
            raise FcidumpParseError(f"header lacks {key}", first_line)
    try:
        norb = int(fields["NORB"])
        nelec = int(fields["NELEC"])
        ms2 = int(fields.get("MS2", "0"))
        isym = int(fields.get("ISYM", "1"))
        orbsym = [int(v) for v in re.split(r"[,\s]+", fields.get("ORBSYM", "")) if v]
    except ValueError as exc:
        raise FcidumpParseError(f"non-integer header field ({exc})", first_line) from exc
    if norb < 1 or nelec < 0:
        raise FcidumpParseError(f"invalid NORB={norb} or NELEC={nelec}", first_line)
    return norb, nelec, {"MS2": ms2, "ISYM": isym, "ORBSYM": orbsym or [1] * norb}


def read_fcidump(path):
    """Parse an FCIDUMP file.

    Returns
    -------
    (MOIntegrals, n_electrons, metadata)
    """
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].lstrip().upper().startswith("&FCI"):
        raise FcidumpParseError("file must start with an &FCI header", 1)
    header, end = [], None
    for idx, line in enumerate(lines):
        stripped = line.strip()
        if stripped.upper().startswith("&END") or stripped == "/":
            end = idx
            break
        header.append(line)
    if end is None:
        raise FcidumpParseError("header is not terminated by &END or /", len(lines))
    norb, nelec, meta = _parse_header(" ".join(header), 1)

    h = np.zeros((norb, norb))
    g = np.zeros((norb, norb, norb, norb))
    e_core = 0.0
    for lineno, line in enumerate(lines[end + 1 :], start=end + 2):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 5:
            raise FcidumpParseError(f"expected 'value i j k l', got {line.strip()!r}", lineno)
        try:
            val = float(parts[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(p) for p in parts[1:])
        except ValueError as exc:
            raise FcidumpParseError(f"non-numeric record {line.strip()!r}", lineno) from exc
        if not np.isfinite(val):
            raise FcidumpParseError("non-finite value", lineno)
        if min(i, j, k, l) < 0 or max(i, j, k, l) > norb:
            raise FcidumpParseError(f"index out of range 0..{norb}", lineno)
        if i == j == k == l == 0:
            e_core = val
        elif j == k == l == 0:
            continue  # orbital-energy record, not needed
        elif k == l == 0 and i and j:
            h[i - 1, j - 1] = h[j - 1, i - 1] = val
        elif 0 in (i, j, k, l):
            raise FcidumpParseError("mixed zero and nonzero indices", lineno)
        else:
            p, q, r, s = i - 1, j - 1, k - 1, l - 1
            for a, b, c, d in (
                (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
                (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
            ):
                g[a, b, c, d] = val
    return MOIntegrals(h=h, g=g, e_core=e_core), nelec, meta


def write_fcidump(path, mo, n_electrons, ms2=0, orbsym=None, isym=1, tol=0.0):
    """Write ``mo`` with unique two-body entries (i>=j, k>=l, ij>=kl).

    Values are written with ``repr`` so a round trip is exact. Entries with
    magnitude at or below ``tol`` are skipped.
    """
    n = mo.n_orb
    orbsym = orbsym or [1] * n
    out = [
        f"&FCI NORB={n},NELEC={n_electrons},MS2={ms2},",
        " ORBSYM=" + ",".join(str(s) for s in orbsym) + ",",
        f" ISYM={isym},",
        "&END",
    ]
    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(n):
                for l in range(k + 1):
                    if k * (k + 1) // 2 + l > ij:
                        continue
                    v = mo.g[i, j, k, l]
                    if abs(v) > tol:
                        out.append(f"{float(v)!r} {i + 1} {j + 1} {k + 1} {l + 1}")
    for i in range(n):
        for j in range(i + 1):
            v = mo.h[i, j]
            if abs(v) > tol:
                out.append(f"{float(v)!r} {i + 1} {j + 1} 0 0")
    out.append(f"{float(mo.e_core)!r} 0 0 0 0")
    Path(path).write_text("\n".join(out) + "\n")
