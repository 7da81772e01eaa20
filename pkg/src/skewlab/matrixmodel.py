"""Frequency sequences, compensated phase arithmetic and skew-shift phase matrices.

Entries of the phase matrix are ``N**-0.5 * e[q(j) * w_i + j * y_i + x_i]`` with
``e[t] = exp(2 pi i t)``.  At N = 8000 the argument ``j**2 * w_i`` reaches ~1e12, so
plain doubles keep only ~1e-4 of the fractional part.  Frequencies are therefore
stored as unevaluated double-double pairs (hi + lo) and every integer multiple is
reduced modulo one with an exact splitting of the multiplier against both words.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np

from .errors import DomainError, InputError

_MP_PREC = 200
_MAX_MULT = 2**62
_LOW31 = 2**31 - 1


# ---------------------------------------------------------------------------
# double-double helpers (work elementwise on floats and numpy arrays)
# ---------------------------------------------------------------------------

def two_sum(a, b):
    """Error-free transformation ``a + b = s + err``."""
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _normalize(hi, lo):
    s, e = two_sum(hi, lo)
    return s, e


@dataclass(frozen=True)
class ExtReal:
    """A real number carried as the unevaluated sum ``hi + lo`` of two doubles."""

    hi: float
    lo: float = 0.0

    @classmethod
    def from_mpf(cls, x) -> "ExtReal":
        with mpmath.workprec(_MP_PREC):
            x = mpmath.mpf(x)
            hi = float(x)
            lo = float(x - mpmath.mpf(hi))
        return cls(hi, lo)

    @classmethod
    def from_decimal(cls, text: str) -> "ExtReal":
        with mpmath.workprec(_MP_PREC):
            try:
                x = mpmath.mpf(text.strip())
            except (ValueError, TypeError) as exc:
                raise InputError(f"not a decimal real: {text!r}") from exc
            if not mpmath.isfinite(x):
                raise InputError(f"not a finite real: {text!r}")
            return cls.from_mpf(x)

    def to_mpf(self):
        with mpmath.workprec(_MP_PREC):
            return mpmath.mpf(self.hi) + mpmath.mpf(self.lo)

    def __float__(self) -> float:
        return self.hi + self.lo

    def __add__(self, other) -> "ExtReal":
        other = _as_ext(other)
        s, e = two_sum(self.hi, other.hi)
        e += self.lo + other.lo
        return ExtReal(*_normalize(s, e))

    def __neg__(self) -> "ExtReal":
        return ExtReal(-self.hi, -self.lo)

    def __sub__(self, other) -> "ExtReal":
        return self + (-_as_ext(other))


def _as_ext(x) -> ExtReal:
    if isinstance(x, ExtReal):
        return x
    return ExtReal(float(x), 0.0)


# ---------------------------------------------------------------------------
# phase reduction
# ---------------------------------------------------------------------------

def _frac_mul_small(m, hi, lo):
    # m: integer-valued floats in [0, 2**31).  hi is cut into two 22-bit
    # slices so that m*slice is exact; only the tail products round.
    hi = hi - np.floor(hi)
    s, e = two_sum(hi, lo)
    s = s - np.floor(s)
    hi, lo = two_sum(s, e)
    a = np.floor(hi * 2.0**22) * 2.0**-22
    r = hi - a
    b = np.floor(r * 2.0**44) * 2.0**-44
    c = r - b
    p1 = m * a
    p1 = p1 - np.floor(p1)
    p2 = m * b
    p2 = p2 - np.floor(p2)
    p3 = m * c + m * lo
    p3 = p3 - np.floor(p3)
    total = p1 + p2 + p3
    return total - np.floor(total)


def phase_frac_array(m, hi, lo=0.0) -> np.ndarray:
    """Vectorised ``frac(m * (hi + lo))`` for integer arrays ``|m| <= 2**62``.

    ``hi``/``lo`` broadcast against ``m``.  Absolute error is a few units of 2**-53
    plus ``|m| * |lo| * 2**-53``.
    """
    m = np.asarray(m)
    if m.dtype.kind not in "iu":
        raise DomainError("phase multipliers must be integers")
    m = m.astype(np.int64)
    am = np.abs(m)
    if am.size and int(am.max()) > _MAX_MULT:
        raise OverflowError("phase multiplier exceeds 2**62")
    hi = np.asarray(hi, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    m_hi = (am >> 31).astype(np.float64)
    m_lo = (am & _LOW31).astype(np.float64)
    res = _frac_mul_small(m_lo, hi, lo)
    if np.any(m_hi):
        big = hi * 2.0**31
        big = big - np.floor(big)
        bh, bl = two_sum(big, lo * 2.0**31)
        res = res + _frac_mul_small(m_hi, bh, bl)
        res = res - np.floor(res)
    res = np.where(m < 0, -res, res)
    res = res - np.floor(res)
    # floor(-tiny) can leave exactly 1.0
    return np.where(res >= 1.0, 0.0, res)


def phase_frac(m: int, w) -> float:
    """``frac(m * w)`` in [0, 1) for a non-negative integer ``m <= 2**62``."""
    if isinstance(m, (bool, float)) or int(m) != m:
        raise DomainError("multiplier must be an integer")
    m = int(m)
    if m < 0:
        raise DomainError("multiplier must be non-negative")
    if m > _MAX_MULT:
        raise OverflowError("phase multiplier exceeds 2**62")
    w = _as_ext(w)
    return float(phase_frac_array(np.int64(m), w.hi, w.lo))


# ---------------------------------------------------------------------------
# random streams
# ---------------------------------------------------------------------------

STREAM_FREQUENCIES = 0
STREAM_OFFSETS = 1


def philox_rng(seed: int, stream: int = STREAM_FREQUENCIES, draw: int = 0) -> np.random.Generator:
    """Counter-based generator: Philox-4x64 keyed by ``seed + draw*2**64 + stream*2**112``.

    The key layout keeps frequency draws and y-offset draws from the same seed
    independent, and lets Monte Carlo sample ``draw`` be regenerated in isolation.
    """
    if not 0 <= seed < 2**64:
        raise DomainError("seed must be an unsigned 64-bit integer")
    if not 0 <= draw < 2**48:
        raise DomainError("draw index out of range")
    key = seed + (draw << 64) + (stream << 112)
    return np.random.Generator(np.random.Philox(key=key))


# ---------------------------------------------------------------------------
# frequency sequences
# ---------------------------------------------------------------------------

class FreqKind(str, enum.Enum):
    IALPHA = "ialpha"
    SQRTI = "sqrti"
    POWER = "power"
    RANDOM = "random"
    CONSTANT = "constant"
    FILE = "file"


def _mp_number(text: str):
    """Parse ``sqrt2``, ``sqrt<k>`` or a decimal into a high-precision mpf."""
    t = text.strip().lower()
    with mpmath.workprec(_MP_PREC):
        if t.startswith("sqrt"):
            arg = t[4:].strip("()") or "2"
            try:
                return mpmath.sqrt(mpmath.mpf(arg))
            except (ValueError, TypeError) as exc:
                raise InputError(f"bad sqrt argument in {text!r}") from exc
        try:
            return mpmath.mpf(t)
        except (ValueError, TypeError) as exc:
            raise InputError(f"not a number: {text!r}") from exc


@dataclass(frozen=True)
class FreqSpec:
    """Generating rule of a frequency sequence (the ``--freq`` mini-language).

    ``ialpha:<float|sqrt2>``, ``sqrti``, ``power:<alpha>:<beta>``,
    ``random:seed=<u64>``, ``constant:<float>``, ``file:<path>``.
    """

    kind: FreqKind
    alpha: str | None = None
    beta: str | None = None
    seed: int | None = None
    value: str | None = None
    path: str | None = None

    @classmethod
    def parse(cls, text: str) -> "FreqSpec":
        head, _, rest = text.strip().partition(":")
        head = head.lower()
        try:
            kind = FreqKind(head)
        except ValueError:
            raise InputError(f"unknown frequency kind {head!r}") from None
        if kind is FreqKind.IALPHA:
            if not rest:
                raise InputError("ialpha needs a value, e.g. ialpha:sqrt2")
            _mp_number(rest)
            return cls(kind, alpha=rest)
        if kind is FreqKind.SQRTI:
            if rest:
                raise InputError("sqrti takes no parameter")
            return cls(kind)
        if kind is FreqKind.POWER:
            parts = rest.split(":")
            if len(parts) != 2:
                raise InputError("power needs alpha and beta, e.g. power:0.5:0.25")
            for p in parts:
                _mp_number(p)
            return cls(kind, alpha=parts[0], beta=parts[1])
        if kind is FreqKind.RANDOM:
            key, _, val = rest.partition("=")
            if key.strip() != "seed" or not val.strip().isdigit():
                raise InputError("random needs random:seed=<u64>")
            return cls(kind, seed=int(val))
        if kind is FreqKind.CONSTANT:
            if not rest:
                raise InputError("constant needs a value")
            _mp_number(rest)
            return cls(kind, value=rest)
        if not rest:
            raise InputError("file needs a path")
        return cls(kind, path=rest)

    def __str__(self) -> str:
        k = self.kind.value
        if self.kind is FreqKind.IALPHA:
            return f"{k}:{self.alpha}"
        if self.kind is FreqKind.POWER:
            return f"{k}:{self.alpha}:{self.beta}"
        if self.kind is FreqKind.RANDOM:
            return f"{k}:seed={self.seed}"
        if self.kind is FreqKind.CONSTANT:
            return f"{k}:{self.value}"
        if self.kind is FreqKind.FILE:
            return f"{k}:{self.path}"
        return k

    @property
    def depends_on_n(self) -> bool:
        return self.kind is FreqKind.POWER

    @property
    def difference_only(self) -> bool:
        """True when ``w_a - w_b`` depends only on ``a - b``."""
        return self.kind in (FreqKind.IALPHA, FreqKind.CONSTANT)


@dataclass(frozen=True, eq=False)
class FrequencySequence:
    spec: FreqSpec
    M: int
    N: int | None
    hi: np.ndarray
    lo: np.ndarray

    def __len__(self) -> int:
        return self.M

    @property
    def values(self) -> list[ExtReal]:
        return [ExtReal(float(h), float(l)) for h, l in zip(self.hi, self.lo)]

    def __getitem__(self, i: int) -> ExtReal:
        return ExtReal(float(self.hi[i]), float(self.lo[i]))

    def as_float(self) -> np.ndarray:
        return self.hi + self.lo


def _from_mpfs(values) -> tuple[np.ndarray, np.ndarray]:
    hi = np.empty(len(values))
    lo = np.empty(len(values))
    for n, v in enumerate(values):
        e = ExtReal.from_mpf(v)
        hi[n], lo[n] = e.hi, e.lo
    return hi, lo


def _read_frequency_file(path: str, M: int) -> tuple[np.ndarray, np.ndarray]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read frequency file {path}: {exc}") from exc
    hi, lo = [], []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text:
            continue
        try:
            e = ExtReal.from_decimal(text)
        except InputError:
            raise InputError(f"{path}:{lineno}: not a decimal real: {text!r}") from None
        hi.append(e.hi)
        lo.append(e.lo)
        if len(hi) == M:
            break
    if len(hi) < M:
        raise InputError(f"{path}: needs {M} frequencies, found {len(hi)}")
    return np.array(hi), np.array(lo)


def make_frequencies(spec: FreqSpec | str, M: int, N: int | None = None) -> FrequencySequence:
    """Generate ``M`` frequencies for the given rule (unreduced, extended precision)."""
    if isinstance(spec, str):
        spec = FreqSpec.parse(spec)
    if M < 1:
        raise DomainError("M must be positive")
    idx = range(1, M + 1)
    with mpmath.workprec(_MP_PREC):
        if spec.kind is FreqKind.IALPHA:
            a = _mp_number(spec.alpha)
            hi, lo = _from_mpfs([i * a for i in idx])
        elif spec.kind is FreqKind.SQRTI:
            hi, lo = _from_mpfs([mpmath.sqrt(i) for i in idx])
        elif spec.kind is FreqKind.POWER:
            if N is None:
                raise DomainError("power-law frequencies need N")
            a = _mp_number(spec.alpha)
            b = _mp_number(spec.beta)
            if a == mpmath.floor(a) or b == mpmath.floor(b):
                raise DomainError("power-law exponents must be non-integers")
            if not a > b - 2:
                raise DomainError("power-law exponents need alpha > beta - 2")
            scale = mpmath.mpf(N) ** b
            hi, lo = _from_mpfs([mpmath.mpf(i) ** a / scale for i in idx])
        elif spec.kind is FreqKind.RANDOM:
            hi = 2.0 * philox_rng(spec.seed, STREAM_FREQUENCIES).random(M)
            lo = np.zeros(M)
        elif spec.kind is FreqKind.CONSTANT:
            c = ExtReal.from_mpf(_mp_number(spec.value))
            hi = np.full(M, c.hi)
            lo = np.full(M, c.lo)
        else:
            hi, lo = _read_frequency_file(spec.path, M)
    return FrequencySequence(spec, M, N, hi, lo)


def random_frequencies(M: int, seed: int, draw: int) -> FrequencySequence:
    """Draw ``draw`` of the Monte Carlo family of uniform frequencies on [0, 2)."""
    hi = 2.0 * philox_rng(seed, STREAM_FREQUENCIES, draw).random(M)
    return FrequencySequence(FreqSpec(FreqKind.RANDOM, seed=seed), M, None, hi, np.zeros(M))


# ---------------------------------------------------------------------------
# model configuration and matrix construction
# ---------------------------------------------------------------------------

class QuadForm(str, enum.Enum):
    BINOMIAL = "binomial"   # C(j, 2) * w, the skew-shift orbit
    SQUARE = "square"       # j**2 * w, deterministic models A and B
    LINEAR = "linear"       # j * w, deterministic model C


def _as_fraction(rho) -> Fraction:
    if isinstance(rho, Fraction):
        r = rho
    elif isinstance(rho, int):
        r = Fraction(rho)
    elif isinstance(rho, float):
        r = Fraction(repr(rho))
    else:
        r = Fraction(str(rho))
    if r <= 0:
        raise DomainError("rho must be positive")
    return r


def rows_for(rho, N: int) -> int:
    """``M = floor(rho * N)`` computed exactly."""
    return math.floor(_as_fraction(rho) * N)


@dataclass(frozen=True)
class ModelConfig:
    N: int
    rho: Fraction
    freq: FreqSpec
    quad_form: QuadForm = QuadForm.BINOMIAL
    y_seed: int | None = None
    y_draw: int = 0
    x: tuple[float, ...] | None = None
    M: int = field(default=0)

    def __post_init__(self):
        if self.N < 1:
            raise DomainError("N must be positive")
        rho = _as_fraction(self.rho)
        object.__setattr__(self, "rho", rho)
        M = math.floor(rho * self.N)
        if M < 1:
            raise DomainError(f"floor(rho*N) = {M}; need at least one row")
        if self.M and self.M != M:
            raise DomainError(f"M={self.M} but floor(rho*N)={M}")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "quad_form", QuadForm(self.quad_form))
        if isinstance(self.freq, str):
            object.__setattr__(self, "freq", FreqSpec.parse(self.freq))
        if self.x is not None:
            if len(self.x) != M:
                raise DomainError("x offsets must have length M")
            object.__setattr__(self, "x", tuple(float(v) for v in self.x))

    def with_draw(self, draw: int) -> "ModelConfig":
        return ModelConfig(self.N, self.rho, self.freq, self.quad_form, self.y_seed, draw, self.x)

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "N": self.N,
            "rho": str(self.rho),
            "freq": str(self.freq),
            "quad_form": self.quad_form.value,
            "linear": {"kind": "zero"} if self.y_seed is None
            else {"kind": "random_y", "seed": self.y_seed, "draw": self.y_draw},
            "x": None if self.x is None else list(self.x),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        lin = d.get("linear") or {"kind": "zero"}
        seed = lin.get("seed") if lin.get("kind") == "random_y" else None
        return cls(
            N=int(d["N"]),
            rho=Fraction(d["rho"]),
            freq=FreqSpec.parse(d["freq"]),
            quad_form=QuadForm(d["quad_form"]),
            y_seed=seed,
            y_draw=int(lin.get("draw", 0)),
            x=None if d.get("x") is None else tuple(d["x"]),
            M=int(d.get("M", 0)),
        )


MODELS = {
    "A": (QuadForm.SQUARE, "sqrti"),
    "B": (QuadForm.SQUARE, "ialpha:sqrt2"),
    "C": (QuadForm.LINEAR, "sqrti"),
}


def model_config(model: str, N: int, rho=1, freq: str | FreqSpec | None = None,
                 seed: int | None = None) -> ModelConfig:
    """Preset configurations: ``skewshift`` (random y, binomial) and deterministic A/B/C."""
    if model == "skewshift":
        return ModelConfig(N, rho, freq or "ialpha:sqrt2", QuadForm.BINOMIAL,
                           y_seed=0 if seed is None else seed)
    try:
        form, default = MODELS[model]
    except KeyError:
        raise InputError(f"unknown model {model!r}") from None
    return ModelConfig(N, rho, freq or default, form, y_seed=None)


@dataclass(frozen=True, eq=False)
class PhaseMatrix:
    entries: np.ndarray
    config: ModelConfig
    y: np.ndarray
    freq: FrequencySequence

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def quadratic_multipliers(form: QuadForm, N: int) -> np.ndarray:
    j = np.arange(1, N + 1, dtype=np.int64)
    if form is QuadForm.BINOMIAL:
        return j * (j - 1) // 2
    if form is QuadForm.SQUARE:
        return j * j
    return j


def sample_offsets(config: ModelConfig) -> np.ndarray:
    if config.y_seed is None:
        return np.zeros(config.M)
    return philox_rng(config.y_seed, STREAM_OFFSETS, config.y_draw).random(config.M)


def phase_table(config: ModelConfig, freq: FrequencySequence | None = None,
                y: np.ndarray | None = None, rows: slice | None = None) -> np.ndarray:
    """Fractional phases in [0, 1) of the (sub)matrix rows."""
    if freq is None:
        freq = make_frequencies(config.freq, config.M, config.N)
    if y is None:
        y = sample_offsets(config)
    rows = rows or slice(0, config.M)
    q = quadratic_multipliers(config.quad_form, config.N)
    j = np.arange(1, config.N + 1, dtype=np.int64)
    hi = freq.hi[rows, None]
    lo = freq.lo[rows, None]
    ph = phase_frac_array(q[None, :], hi, lo)
    if config.y_seed is not None:
        ph = ph + phase_frac_array(j[None, :], y[rows, None], 0.0)
    if config.x is not None:
        ph = ph + np.asarray(config.x)[rows, None]
    ph = ph - np.floor(ph)
    return np.where(ph >= 1.0, 0.0, ph)


def build_matrix(config: ModelConfig, freq: FrequencySequence | None = None,
                 chunk_rows: int = 256) -> PhaseMatrix:
    """Construct ``X`` with ``X[i, j] = N**-0.5 * e[q(j) w_i + j y_i + x_i]``.

    Rows are filled in fixed-size chunks; each entry depends only on its own
    indices, so the result is independent of the chunking.
    """
    if freq is None:
        freq = make_frequencies(config.freq, config.M, config.N)
    if len(freq) < config.M:
        raise DomainError("frequency sequence shorter than M")
    y = sample_offsets(config)
    X = np.empty((config.M, config.N), dtype=np.complex128)
    scale = 1.0 / math.sqrt(config.N)
    for start in range(0, config.M, chunk_rows):
        sl = slice(start, min(start + chunk_rows, config.M))
        ph = phase_table(config, freq, y, sl)
        X[sl] = scale * np.exp(2j * np.pi * ph)
    return PhaseMatrix(X, config, y, freq)
