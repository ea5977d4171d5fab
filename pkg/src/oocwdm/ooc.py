"""One-dimensional optical orthogonal codes (OOC).

A codeword of length F and weight W is stored as the sorted tuple of its W
pulse positions. Families built here always have auto- and cross-correlation
constraints equal to one, which is equivalent to every codeword having
distinct cyclic differences and no two codewords sharing a difference.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable


@dataclass(frozen=True)
class Codeword:
    length: int
    positions: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.length < 1:
            raise ValueError(f"code length must be positive, got {self.length}")
        pos = tuple(int(p) for p in self.positions)
        object.__setattr__(self, "positions", pos)
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError(f"positions must be strictly ascending: {pos}")
        if pos and (pos[0] < 0 or pos[-1] >= self.length):
            raise ValueError(f"positions must lie in [0, {self.length}): {pos}")

    @property
    def weight(self) -> int:
        return len(self.positions)

    def shifted(self, shift: int) -> frozenset[int]:
        return frozenset((p + shift) % self.length for p in self.positions)

    def differences(self) -> list[int]:
        """All cyclic differences (x - y) mod F over ordered pairs x != y."""
        F = self.length
        return [(x - y) % F for x in self.positions for y in self.positions if x != y]

    def to_bits(self) -> list[int]:
        bits = [0] * self.length
        for p in self.positions:
            bits[p] = 1
        return bits


@dataclass(frozen=True)
class CodeFamily:
    length: int
    weight: int
    ha: int = 1
    hc: int = 1
    codewords: tuple[Codeword, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.length < 1:
            raise ValueError("code length must be positive")
        if self.weight < 2:
            raise ValueError("code weight must be at least 2")
        if self.ha < 1 or self.hc < 1:
            raise ValueError("correlation constraints must be at least 1")
        object.__setattr__(self, "codewords", tuple(self.codewords))

    def __len__(self) -> int:
        return len(self.codewords)

    def __iter__(self):
        return iter(self.codewords)

    def __getitem__(self, idx: int) -> Codeword:
        return self.codewords[idx]


def max_cardinality(F: int, W: int) -> int:
    """Johnson-bound family size floor((F-1) / (W(W-1))) for ha = hc = 1."""
    if F < 2:
        raise ValueError(f"code length must be >= 2, got {F}")
    if W < 2:
        raise ValueError(f"code weight must be >= 2, got {W}")
    return (F - 1) // (W * (W - 1))


def _check_shift(shift: int, F: int) -> None:
    if not 0 <= shift < F:
        raise ValueError(f"shift {shift} outside [0, {F})")


def autocorrelation(cw: Codeword, shift: int) -> int:
    _check_shift(shift, cw.length)
    return len(set(cw.positions) & cw.shifted(shift))


def crosscorrelation(a: Codeword, b: Codeword, shift: int) -> int:
    """Overlap of ``a`` with ``b`` cyclically shifted by ``shift`` chips."""
    if a.length != b.length:
        raise ValueError(f"length mismatch: {a.length} vs {b.length}")
    _check_shift(shift, a.length)
    return len(set(a.positions) & b.shifted(shift))


def correlation_table(a: Codeword, b: Codeword) -> list[int]:
    """crosscorrelation(a, b, s) for every shift s, in O(W^2)."""
    if a.length != b.length:
        raise ValueError(f"length mismatch: {a.length} vs {b.length}")
    F = a.length
    table = [0] * F
    for x in a.positions:
        for y in b.positions:
            table[(x - y) % F] += 1
    return table


def _next_codeword(F: int, W: int, used: set[int]) -> tuple[int, ...] | None:
    """Lexicographically first canonical codeword whose differences avoid ``used``.

    Depth-first over ascending positions starting at 0; a partial codeword is
    extended only if every new difference is fresh and pairwise distinct.
    """
    chosen = [0]
    own: list[int] = []

    def extend(start: int) -> bool:
        if len(chosen) == W:
            return True
        for cand in range(start, F - (W - len(chosen) - 1)):
            new = []
            ok = True
            for q in chosen:
                for d in ((cand - q) % F, (q - cand) % F):
                    if d in used or d in own or d in new:
                        ok = False
                        break
                    new.append(d)
                if not ok:
                    break
            if not ok:
                continue
            chosen.append(cand)
            own.extend(new)
            if extend(cand + 1):
                return True
            chosen.pop()
            del own[len(own) - len(new):]
        return False

    if extend(1):
        return tuple(chosen)
    return None


def generate_family(F: int, W: int) -> CodeFamily:
    """Greedy difference-set construction of an (F, W, 1, 1) family.

    Codewords are found one at a time in lexicographic order, each the first
    canonical set (smallest position 0) whose cyclic differences are new.
    The result is deterministic and never exceeds ``max_cardinality(F, W)``.
    """
    bound = max_cardinality(F, W)
    used: set[int] = set()
    words: list[Codeword] = []
    while len(words) < bound:
        pos = _next_codeword(F, W, used)
        if pos is None:
            break
        cw = Codeword(F, pos)
        used.update(cw.differences())
        words.append(cw)
    return CodeFamily(F, W, 1, 1, tuple(words))


@dataclass(frozen=True)
class Violation:
    kind: str  # "length", "weight", "auto", "cross", "cardinality"
    i: int
    j: int | None = None
    shift: int | None = None
    value: int | None = None


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.passed


def validate_family(fam: CodeFamily) -> ValidationReport:
    """Exhaustive check of every invariant of ``fam``; violations are returned, never raised."""
    out: list[Violation] = []
    F = fam.length
    well_formed = []
    for i, cw in enumerate(fam.codewords):
        if cw.length != F:
            out.append(Violation("length", i, value=cw.length))
            continue
        if cw.weight != fam.weight:
            out.append(Violation("weight", i, value=cw.weight))
        well_formed.append((i, cw))

    for i, cw in well_formed:
        table = correlation_table(cw, cw)
        for s in range(1, F):
            if table[s] > fam.ha:
                out.append(Violation("auto", i, i, s, table[s]))
    for (i, a), (j, b) in itertools.permutations(well_formed, 2):
        table = correlation_table(a, b)
        for s in range(F):
            if table[s] > fam.hc:
                out.append(Violation("cross", i, j, s, table[s]))

    if fam.ha == 1 and fam.hc == 1 and F >= 2:
        bound = max_cardinality(F, fam.weight)
        if len(fam.codewords) > bound:
            out.append(Violation("cardinality", len(fam.codewords), value=bound))
    return ValidationReport(tuple(out))


# -- text format: "F W ha hc" header, then one codeword per line ------------

def format_family(fam: CodeFamily) -> str:
    lines = [f"{fam.length} {fam.weight} {fam.ha} {fam.hc}"]
    lines += [" ".join(str(p) for p in cw.positions) for cw in fam.codewords]
    return "\n".join(lines) + "\n"


def parse_family(text: str) -> CodeFamily:
    rows = text.split("\n")
    if rows and rows[-1] == "":
        rows.pop()
    if not rows:
        raise ValueError("empty code-family file")
    try:
        header = [int(t) for t in rows[0].split(" ")]
    except ValueError as exc:
        raise ValueError(f"line 1: bad header {rows[0]!r}") from exc
    if len(header) != 4:
        raise ValueError(f"line 1: expected 'F W ha hc', got {rows[0]!r}")
    F, W, ha, hc = header
    words = []
    for n, row in enumerate(rows[1:], start=2):
        if row != row.strip() or "\r" in row:
            raise ValueError(f"line {n}: stray whitespace")
        try:
            pos = tuple(int(t) for t in row.split(" "))
            words.append(Codeword(F, pos))
        except ValueError as exc:
            raise ValueError(f"line {n}: {exc}") from exc
    return CodeFamily(F, W, ha, hc, tuple(words))


def write_family(fam: CodeFamily, path: str | Path) -> None:
    Path(path).write_bytes(format_family(fam).encode("ascii"))


def read_family(path: str | Path) -> CodeFamily:
    return parse_family(Path(path).read_bytes().decode("ascii"))


def family_from_positions(F: int, W: int, rows: Iterable[Iterable[int]], ha: int = 1, hc: int = 1) -> CodeFamily:
    return CodeFamily(F, W, ha, hc, tuple(Codeword(F, tuple(r)) for r in rows))
