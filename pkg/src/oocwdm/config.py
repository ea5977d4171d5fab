"""Line-oriented experiment config.

Example::

    # 2 nm sources, threshold 24
    [code]
    length = 64
    weight = 2

    [receiver]
    ccr = 24

    [sweep]
    users = 2..32
    methods = analytic
    mode = permissive

    [channels]
    fwhm = 2.0
    spacing = 0.8
    filter_bw = 0.8
    plan.nowdm = none
    plan.two = @-1, @1
    plan.fixed = 1/2, 1/4

    [output]
    csv = results.csv
    group_by = plan

Lists are comma separated; ``a..b`` is an inclusive integer range. A channel
plan entry is either a rational ``b/a`` in (0, 1] or ``@k``, the adjacent
channel k grid slots away with its coefficient taken from the Gaussian
spectral-overlap model.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .analytic import alpha_from_spectrum
from .ooc import CodeFamily, read_family

METHODS = ("analytic", "exact", "mc")
U64_MAX = 2**64 - 1

_SECTIONS = {
    "code": {"length", "weight", "file"},
    "receiver": {"ccr", "pic_s1", "pic_s2"},
    "sweep": {"users", "methods", "mode", "trials", "seed", "mc_mode", "workers"},
    "channels": {"fwhm", "spacing", "filter_bw"},  # plus plan.<name>
    "output": {"csv", "group_by", "plotdata"},
}


class ConfigError(ValueError):
    """Carries every located problem found in a config, as (line, message) pairs."""

    def __init__(self, errors: list[tuple[int, str]]):
        self.errors = list(errors)
        super().__init__("\n".join(f"line {n}: {msg}" if n else msg for n, msg in self.errors))


@dataclass(frozen=True)
class ReceiverSpec:
    kind: str  # "ccr" or "pic"
    S: int
    S2: int | None = None


@dataclass(frozen=True)
class ChannelPlan:
    name: str
    alphas: tuple[Fraction, ...]
    source: str = ""

    @property
    def alpha_text(self) -> str:
        return ";".join(str(a) for a in self.alphas)


@dataclass(frozen=True)
class SweepSpec:
    codes: tuple[tuple[int, int], ...]
    receivers: tuple[ReceiverSpec, ...]
    users: tuple[int, ...]
    plans: tuple[ChannelPlan, ...]
    methods: tuple[str, ...] = ("analytic",)
    trials: int = 100_000
    seed: int = 0
    mode: str = "strict"
    mc_mode: str = "model"
    workers: int = 1
    code_file: str | None = None
    family: CodeFamily | None = field(default=None, compare=False, repr=False)
    fwhm: float = 2.0
    spacing: float = 0.8
    filter_bw: float = 0.8
    csv_name: str = "results.csv"
    group_by: tuple[str, ...] | None = None
    plotdata: bool = True

    @property
    def strict(self) -> bool:
        return self.mode == "strict"

    def with_seed(self, seed: int) -> "SweepSpec":
        return replace(self, seed=seed)

    def canonical(self) -> str:
        d = asdict(self)
        d.pop("family")
        d.pop("workers")  # cannot change any output
        if self.family is not None:
            d["family_codewords"] = [list(cw.positions) for cw in self.family]
        return json.dumps(d, sort_keys=True, default=str, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


_RANGE = re.compile(r"^(-?\d+)\s*\.\.\s*(-?\d+)$")


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _int_list(value: str) -> list[int]:
    out: list[int] = []
    for tok in _split(value):
        m = _RANGE.match(tok)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            if hi < lo:
                raise ValueError(f"empty range {tok!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(tok))
    if not out:
        raise ValueError("empty list")
    return out


def _positive_ints(value: str, what: str) -> list[int]:
    vals = _int_list(value)
    bad = [v for v in vals if v < 1]
    if bad:
        raise ValueError(f"{what} must be positive integers, got {bad}")
    return vals


def _parse_lines(text: str):
    """Yield (line_no, section, key, value) and collect syntax errors."""
    errors: list[tuple[int, str]] = []
    entries = []
    section = None
    seen: set[tuple[str, str]] = set()
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                errors.append((n, f"malformed section header {raw.strip()!r}"))
                continue
            section = line[1:-1].strip()
            if section not in _SECTIONS:
                errors.append((n, f"unknown section [{section}]"))
            continue
        if "=" not in line:
            errors.append((n, f"expected 'key = value', got {line!r}"))
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if section is None:
            errors.append((n, f"key {key!r} outside any section"))
            continue
        if section not in _SECTIONS:
            continue
        allowed = _SECTIONS[section]
        if key not in allowed and not (section == "channels" and key.startswith("plan.") and len(key) > 5):
            errors.append((n, f"unknown key {key!r} in [{section}]"))
            continue
        if (section, key) in seen:
            errors.append((n, f"duplicate key {key!r} in [{section}]"))
            continue
        seen.add((section, key))
        entries.append((n, section, key, value))
    return entries, errors


def parse_config(text: str, base_dir: str | Path | None = None) -> SweepSpec:
    """Parse and validate a config; raises :class:`ConfigError` listing every problem."""
    entries, errors = _parse_lines(text)
    vals: dict[tuple[str, str], tuple[int, str]] = {(s, k): (n, v) for n, s, k, v in entries}

    def get(section, key):
        return vals.get((section, key), (0, None))

    def conv(section, key, fn, default=None):
        n, raw = get(section, key)
        if raw is None:
            return default
        try:
            return fn(raw)
        except (ValueError, ZeroDivisionError) as exc:
            errors.append((n, f"{key}: {exc}"))
            return default

    # [code]
    codes: list[tuple[int, int]] = []
    family = None
    code_file = None
    n_file, file_raw = get("code", "file")
    lengths = conv("code", "length", lambda v: _positive_ints(v, "length"))
    weights = conv("code", "weight", lambda v: _positive_ints(v, "weight"))
    if file_raw is not None:
        path = Path(file_raw)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        code_file = file_raw
        try:
            family = read_family(path)
            codes = [(family.length, family.weight)]
        except (OSError, ValueError) as exc:
            errors.append((n_file, f"file: {exc}"))
        if family is not None and (lengths or weights):
            if (lengths and lengths != [family.length]) or (weights and weights != [family.weight]):
                errors.append((n_file, "length/weight disagree with the code file"))
    elif lengths and weights:
        for F in lengths:
            for W in weights:
                if F < 2 or W < 2:
                    errors.append((get("code", "length")[0], f"need F >= 2 and W >= 2, got ({F}, {W})"))
                else:
                    codes.append((F, W))
    elif get("code", "length")[1] is None or get("code", "weight")[1] is None:
        errors.append((0, "[code] needs either 'file' or both 'length' and 'weight'"))

    # [receiver]
    receivers: list[ReceiverSpec] = []
    ccr = conv("receiver", "ccr", lambda v: _positive_ints(v, "CCR thresholds"))
    s1 = conv("receiver", "pic_s1", lambda v: _positive_ints(v, "PIC thresholds"))
    s2 = conv("receiver", "pic_s2", lambda v: _positive_ints(v, "PIC thresholds"))
    if ccr:
        receivers += [ReceiverSpec("ccr", s) for s in ccr]
    has_s1 = get("receiver", "pic_s1")[1] is not None
    has_s2 = get("receiver", "pic_s2")[1] is not None
    if has_s1 != has_s2:
        n = get("receiver", "pic_s1" if has_s1 else "pic_s2")[0]
        errors.append((n, "PIC receiver needs both pic_s1 and pic_s2"))
    elif s1 and s2:
        receivers += [ReceiverSpec("pic", a, b) for a in s1 for b in s2]
    if not receivers and get("receiver", "ccr")[1] is None and not (has_s1 or has_s2):
        errors.append((0, "[receiver] needs 'ccr' thresholds or 'pic_s1' and 'pic_s2'"))

    # [sweep]
    users = conv("sweep", "users", lambda v: _positive_ints(v, "users"))
    if users is None and get("sweep", "users")[1] is None:
        errors.append((0, "[sweep] needs 'users'"))

    def methods_of(v):
        ms = _split(v)
        bad = [m for m in ms if m not in METHODS]
        if bad or not ms:
            raise ValueError(f"methods must be a nonempty subset of {METHODS}, got {ms}")
        return tuple(m for m in METHODS if m in ms)

    def choice(options):
        def fn(v):
            if v not in options:
                raise ValueError(f"expected one of {options}, got {v!r}")
            return v

        return fn

    def positive_int(v):
        x = int(v)
        if x < 1:
            raise ValueError(f"must be >= 1, got {x}")
        return x

    def seed_of(v):
        x = int(v)
        if not 0 <= x <= U64_MAX:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {x}")
        return x

    methods = conv("sweep", "methods", methods_of, ("analytic",))
    mode = conv("sweep", "mode", choice(("strict", "permissive")), "strict")
    trials = conv("sweep", "trials", positive_int, 100_000)
    seed = conv("sweep", "seed", seed_of, 0)
    mc_mode = conv("sweep", "mc_mode", choice(("model", "code")), "model")
    workers = conv("sweep", "workers", positive_int, 1)

    # [channels]
    def positive_float(v):
        x = float(v)
        if not x > 0:
            raise ValueError(f"must be positive, got {v}")
        return x

    fwhm = conv("channels", "fwhm", positive_float, 2.0)
    spacing = conv("channels", "spacing", positive_float, 0.8)
    filter_bw = conv("channels", "filter_bw", positive_float, 0.8)
    plans: list[ChannelPlan] = []
    for n, section, key, value in entries:
        if section != "channels" or not key.startswith("plan."):
            continue
        name = key[5:]
        try:
            plans.append(_parse_plan(name, value, fwhm, spacing, filter_bw))
        except (ValueError, ZeroDivisionError) as exc:
            errors.append((n, f"{key}: {exc}"))
    if not plans and not any(k.startswith("plan.") for _, s, k, _ in entries if s == "channels"):
        plans = [ChannelPlan("nowdm", (), "none")]

    # [output]
    csv_name = conv("output", "csv", str, "results.csv")
    if csv_name is not None and ("/" in csv_name or "\\" in csv_name or not csv_name):
        errors.append((get("output", "csv")[0], "csv must be a plain file name"))

    def bool_of(v):
        low = v.lower()
        if low in ("yes", "true", "1", "on"):
            return True
        if low in ("no", "false", "0", "off"):
            return False
        raise ValueError(f"expected yes/no, got {v!r}")

    plotdata = conv("output", "plotdata", bool_of, True)
    group_by = conv("output", "group_by", lambda v: tuple(_split(v)) or None)

    if errors:
        errors.sort(key=lambda e: e[0])
        raise ConfigError(errors)
    return SweepSpec(
        codes=tuple(codes),
        receivers=tuple(receivers),
        users=tuple(users),
        plans=tuple(plans),
        methods=methods,
        trials=trials,
        seed=seed,
        mode=mode,
        mc_mode=mc_mode,
        workers=workers,
        code_file=code_file,
        family=family,
        fwhm=fwhm,
        spacing=spacing,
        filter_bw=filter_bw,
        csv_name=csv_name,
        group_by=group_by,
        plotdata=plotdata,
    )


def _parse_plan(name: str, value: str, fwhm: float, spacing: float, filter_bw: float) -> ChannelPlan:
    if not re.fullmatch(r"[A-Za-z0-9_\-]+", name):
        raise ValueError(f"plan name {name!r} may only use letters, digits, '_' and '-'")
    if value.strip().lower() == "none":
        return ChannelPlan(name, (), "none")
    alphas = []
    spectral = False
    for tok in _split(value):
        if tok.startswith("@"):
            offset = int(tok[1:])
            if offset == 0:
                raise ValueError("channel offset must be nonzero")
            a = alpha_from_spectrum(fwhm, spacing, offset, filter_bw)
            if a == 0:
                raise ValueError(f"spectral model gives alpha = 0 for offset {offset}; drop the channel")
            spectral = True
        else:
            a = Fraction(tok)
            if not 0 < a <= 1:
                raise ValueError(f"alpha must lie in (0, 1], got {tok}")
        alphas.append(a)
    if not alphas:
        raise ValueError("empty plan; write 'none' for the no-WDM plan")
    source = value.strip()
    if spectral:
        source += f" [gaussian fwhm={fwhm} spacing={spacing} filter_bw={filter_bw}]"
    return ChannelPlan(name, tuple(alphas), source)


def load_config(path: str | Path) -> SweepSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([(0, f"cannot read {path}: {exc}")]) from exc
    return parse_config(text, base_dir=path.parent)
