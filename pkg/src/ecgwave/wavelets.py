"""Orthogonal wavelet filter banks, multilevel DWT and a direct Ricker CWT.

Conventions
-----------
* Boundary handling is half-sample symmetric extension: the signal is
  mirrored without repeating the edge sample, so ``[a, b, c]`` extends to
  ``... c, b, a | a, b, c | c, b, a ...``.
* One analysis step convolves the extended signal with ``dec_lo`` /
  ``dec_hi`` and keeps the odd-indexed outputs of the full convolution,
  ``approx[j] = sum_k dec_lo[k] * x_ext[2j + 1 - k]``, which gives
  ``floor((n + filter_len - 1) / 2)`` coefficients.
* ``dec_hi[k] = (-1) ** (k + 1) * dec_lo[filter_len - 1 - k]`` and the
  reconstruction filters are the time-reversed decomposition filters.

These match the PyWavelets ``"symmetric"`` mode, so coefficients are
directly comparable with features computed by that library.
"""

import functools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validation import check_signal
from .exceptions import UnsupportedWaveletError, ValidationError

_SQRT3 = math.sqrt(3.0)

# Least-asymmetric Daubechies filter with 5 vanishing moments (low-pass
# decomposition taps), from a 60-digit spectral factorization.
_SYM5_DEC_LO = (
    0.027333068344998768818,
    0.02951949092570626125,
    -0.039134249302313843624,
    0.1993975339768555969,
    0.72340769040404079207,
    0.63397896345679206372,
    0.016602105764510848133,
    -0.17532808990805622424,
    -0.021101834024689041001,
    0.019538882735249826776,
)

_DEC_LO = {
    "haar": (1 / math.sqrt(2.0), 1 / math.sqrt(2.0)),
    "db2": tuple(
        c / (4 * math.sqrt(2.0))
        for c in (1 - _SQRT3, 3 - _SQRT3, 3 + _SQRT3, 1 + _SQRT3)
    ),
    "sym5": _SYM5_DEC_LO,
}

SUPPORTED_WAVELETS = tuple(_DEC_LO)


@dataclass(frozen=True, eq=False)
class FilterPair:
    name: str
    dec_lo: np.ndarray
    dec_hi: np.ndarray
    rec_lo: np.ndarray
    rec_hi: np.ndarray

    @property
    def filter_len(self):
        return self.dec_lo.shape[0]

    def check(self, tol=1e-12):
        """Assert the orthogonal filter-bank identities; returns ``self``."""
        n = self.filter_len
        if n % 2 or any(f.shape != (n,) for f in (self.dec_hi, self.rec_lo, self.rec_hi)):
            raise ValidationError(f"{self.name}: filters must share one even length")
        k = np.arange(n)
        qmf = ((-1.0) ** (k + 1)) * self.dec_lo[::-1]
        problems = {
            "sum(dec_lo) != sqrt(2)": abs(self.dec_lo.sum() - math.sqrt(2.0)),
            "sum(dec_hi) != 0": abs(self.dec_hi.sum()),
            "sum(dec_lo**2) != 1": abs((self.dec_lo**2).sum() - 1.0),
            "QMF relation": np.max(np.abs(self.dec_hi - qmf)),
            "rec_lo != reversed dec_lo": np.max(np.abs(self.rec_lo - self.dec_lo[::-1])),
            "rec_hi != reversed dec_hi": np.max(np.abs(self.rec_hi - self.dec_hi[::-1])),
        }
        failed = [msg for msg, err in problems.items() if err > tol]
        if failed:
            raise ValidationError(f"{self.name}: filter invariants violated: {', '.join(failed)}")
        return self


def make_wavelet(name):
    """Build the :class:`FilterPair` for ``name`` ("haar", "db2" or "sym5")."""
    if isinstance(name, FilterPair):
        return name
    if not isinstance(name, str):
        raise UnsupportedWaveletError(
            f"unsupported wavelet {name!r}; choose one of {', '.join(SUPPORTED_WAVELETS)}"
        )
    return _build_wavelet(name)


@functools.lru_cache(maxsize=None)
def _build_wavelet(name):
    # Filters are read-only, so one validated instance per name is shared.
    try:
        lo = np.array(_DEC_LO[name], dtype=np.float64)
    except (KeyError, TypeError):
        raise UnsupportedWaveletError(
            f"unsupported wavelet {name!r}; choose one of {', '.join(SUPPORTED_WAVELETS)}"
        ) from None
    k = np.arange(lo.size)
    hi = ((-1.0) ** (k + 1)) * lo[::-1]
    fp = FilterPair(name, lo, hi, lo[::-1].copy(), hi[::-1].copy())
    for arr in (fp.dec_lo, fp.dec_hi, fp.rec_lo, fp.rec_hi):
        arr.setflags(write=False)
    return fp.check()


def coeff_len(n, filter_len):
    """Length of one analysis output for an ``n``-sample input."""
    return (n + filter_len - 1) // 2


def max_depth(n, wavelet):
    """Deepest decomposition in which every level shortens its input.

    A level is feasible while its input holds at least ``filter_len``
    samples; below that the symmetric extension dominates and the output
    is no shorter than the input.
    """
    flen = make_wavelet(wavelet).filter_len
    depth = 0
    while n >= flen:
        n = coeff_len(n, flen)
        depth += 1
    return depth


def _symmetric_index(idx, n):
    idx = np.mod(idx, 2 * n)
    return np.where(idx >= n, 2 * n - 1 - idx, idx)


def _analysis_matrix_index(n, flen):
    """Row ``j`` lists the signal positions ``2j + 1 - k``, ``k = 0 .. flen - 1``,
    folded into range, so ``x[..., idx] @ h`` is one filtered-and-decimated step.
    """
    out = coeff_len(n, flen)
    pos = 2 * np.arange(out)[:, None] + 1 - np.arange(flen)[None, :]
    return _symmetric_index(pos, n)


def _dwt_rows(x, fp):
    """One analysis step along the last axis of ``x`` (1-D or 2-D)."""
    gathered = x[..., _analysis_matrix_index(x.shape[-1], fp.filter_len)]
    return gathered @ fp.dec_lo, gathered @ fp.dec_hi


def dwt_step(signal, wavelet):
    """Single-level DWT.

    Parameters
    ----------
    signal : array_like
        Finite, non-empty 1-D signal.
    wavelet : str or FilterPair

    Returns
    -------
    approx, detail : ndarray
        Each of length ``floor((n + filter_len - 1) / 2)``.
    """
    x = check_signal(signal)
    return _dwt_rows(x, make_wavelet(wavelet))


def _upsample_filter(coeffs, filt, target_len):
    flen = filt.shape[0]
    up = np.zeros(coeffs.shape[:-1] + (2 * coeffs.shape[-1] - 1,))
    up[..., ::2] = coeffs
    if up.ndim == 1:
        full = np.convolve(up, filt)
    else:
        full = np.stack([np.convolve(row, filt) for row in up])
    return full[..., flen - 2 : flen - 2 + target_len]


def valid_target_lengths(n_coeffs, filter_len):
    """Signal lengths whose analysis step yields ``n_coeffs`` coefficients."""
    return [m for m in (2 * n_coeffs - filter_len + 1, 2 * n_coeffs - filter_len + 2) if m >= 1]


def idwt_step(approx, detail, wavelet, target_len=None):
    """Invert :func:`dwt_step`.

    ``target_len`` picks between the two signal lengths consistent with the
    coefficient count; it defaults to the longer one.
    """
    fp = make_wavelet(wavelet)
    a = check_signal(approx, "approx")
    d = check_signal(detail, "detail")
    if a.shape != d.shape:
        raise ValidationError(
            f"approx and detail lengths differ ({a.shape[0]} vs {d.shape[0]})"
        )
    options = valid_target_lengths(a.shape[0], fp.filter_len)
    if target_len is None:
        target_len = options[-1]
    if target_len not in options:
        raise ValidationError(
            f"target_len {target_len} is inconsistent with {a.shape[0]} coefficients "
            f"for {fp.name}; expected one of {options}"
        )
    return _upsample_filter(a, fp.rec_lo, target_len) + _upsample_filter(d, fp.rec_hi, target_len)


@dataclass(frozen=True, eq=False)
class WaveletDecomposition:
    """Coefficient bands ``[approx_L, detail_L, ..., detail_1]`` of one signal."""

    bands: tuple
    wavelet: str
    original_length: int

    @property
    def depth(self):
        return len(self.bands) - 1

    @property
    def lengths(self):
        return [b.shape[-1] for b in self.bands]

    @property
    def band_names(self):
        return band_names(self.depth)

    def expected_lengths(self):
        flen = make_wavelet(self.wavelet).filter_len
        sizes = [self.original_length]
        for _ in range(self.depth):
            sizes.append(coeff_len(sizes[-1], flen))
        return [sizes[-1]] + sizes[:0:-1]


def band_names(depth):
    return [f"a{depth}"] + [f"d{j}" for j in range(depth, 0, -1)]


def _check_depth(n, fp, depth):
    if int(depth) != depth or depth < 1:
        raise ValidationError(f"depth must be a positive integer, got {depth!r}")
    limit = max_depth(n, fp)
    if depth > limit:
        raise ValidationError(
            f"depth {depth} is infeasible for a {n}-sample signal with {fp.name}; "
            f"maximum feasible depth is {limit}"
        )


def wavedec(signal, wavelet, depth):
    """Multilevel DWT: re-decompose the approximation ``depth`` times."""
    fp = make_wavelet(wavelet)
    x = check_signal(signal)
    _check_depth(x.shape[0], fp, depth)
    details = []
    approx = x
    for _ in range(depth):
        approx, detail = _dwt_rows(approx, fp)
        details.append(detail)
    return WaveletDecomposition((approx, *details[::-1]), fp.name, x.shape[0])


def wavedec_rows(X, wavelet, depth):
    """Row-wise :func:`wavedec` for a 2-D array of equal-length signals.

    Returns the list of band matrices ``[approx_L, detail_L, ..., detail_1]``.
    """
    fp = make_wavelet(wavelet)
    X = np.asarray(X, dtype=np.float64)
    _check_depth(X.shape[1], fp, depth)
    details = []
    approx = X
    for _ in range(depth):
        approx, detail = _dwt_rows(approx, fp)
        details.append(detail)
    return [approx, *details[::-1]]


def waverec(decomp, wavelet=None):
    """Invert :func:`wavedec`. The wavelet defaults to the one recorded in ``decomp``."""
    fp = make_wavelet(wavelet if wavelet is not None else decomp.wavelet)
    if fp.name != decomp.wavelet:
        raise ValidationError(f"decomposition used {decomp.wavelet}, not {fp.name}")
    if decomp.depth < 1:
        raise ValidationError("decomposition must contain at least one detail band")
    expected = decomp.expected_lengths()
    if decomp.lengths != expected:
        raise ValidationError(
            f"inconsistent band lengths {decomp.lengths}; expected {expected} "
            f"for a {decomp.original_length}-sample signal"
        )
    # Output lengths for each synthesis step, deepest level first.
    targets = [decomp.original_length]
    for _ in range(decomp.depth - 1):
        targets.append(coeff_len(targets[-1], fp.filter_len))
    approx = decomp.bands[0]
    for detail, target in zip(decomp.bands[1:], targets[::-1]):
        approx = idwt_step(approx, detail, fp, target)
    return approx


def export_decomposition(decomp, out_dir):
    """Write one CSV per band plus ``decomposition.json`` into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for name, band in zip(decomp.band_names, decomp.bands):
        fname = f"{name}.csv"
        np.savetxt(out_dir / fname, np.atleast_2d(band), delimiter=",", fmt="%.17g")
        files.append(fname)
    manifest = {
        "wavelet": decomp.wavelet,
        "depth": decomp.depth,
        "original_length": decomp.original_length,
        "bands": decomp.band_names,
        "lengths": decomp.lengths,
        "files": files,
        "boundary": "half-sample symmetric",
    }
    (out_dir / "decomposition.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


# --- continuous transform -------------------------------------------------

_RICKER_NORM = 2.0 / (math.sqrt(3.0) * math.pi**0.25)

# Ricker energy response to a sinusoid of angular frequency w at scale a is
# proportional to a * (a w)^4 exp(-(a w)^2), maximal at a w = sqrt(5/2).
RICKER_PEAK_OMEGA_SCALE = math.sqrt(2.5)


def ricker(t):
    """Mexican-hat mother wavelet with unit L2 norm."""
    t = np.asarray(t, dtype=np.float64)
    return _RICKER_NORM * (1.0 - t**2) * np.exp(-0.5 * t**2)


def ricker_peak_scale(period, dt=1.0):
    """Scale maximizing CWT energy for a sinusoid of ``period`` samples."""
    omega = 2.0 * math.pi / (period * dt)
    return RICKER_PEAK_OMEGA_SCALE / omega


@dataclass(frozen=True, eq=False)
class Scalogram:
    scales: np.ndarray
    coefficients: np.ndarray
    dt: float = 1.0
    wavelet: str = "ricker"

    def energy(self):
        """Per-scale energy ``sum_b gamma(a, b)**2``."""
        return (self.coefficients**2).sum(axis=1)


def cwt(signal, scales, dt=1.0):
    """Continuous wavelet transform with the Ricker wavelet.

    ``gamma(a, b) = sum_t f(t) * a**-0.5 * ricker((t - b) / a) * dt`` with
    ``t`` and ``b`` running over the sample times ``0, dt, 2 dt, ...`` and
    scales ``a`` in the same time unit as ``dt``.
    """
    f = check_signal(signal)
    scales = np.atleast_1d(np.asarray(scales, dtype=np.float64))
    if scales.ndim != 1 or scales.size == 0:
        raise ValidationError("scales must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(scales)) or np.any(scales <= 0):
        raise ValidationError("all scales must be finite and > 0")
    if not dt > 0:
        raise ValidationError(f"dt must be > 0, got {dt}")
    n = f.shape[0]
    lags = np.arange(-(n - 1), n) * dt
    out = np.empty((scales.size, n))
    for i, a in enumerate(scales):
        # ricker is even, so correlation equals convolution.
        kernel = ricker(lags / a)
        out[i] = np.convolve(f, kernel)[n - 1 : 2 * n - 1] * (dt / math.sqrt(a))
    return Scalogram(scales, out, float(dt))


def export_scalogram(scalogram, path):
    """Write the coefficient matrix as CSV and a JSON header next to it.

    The header goes to ``<path>.json`` (e.g. ``beat.csv`` -> ``beat.csv.json``).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, scalogram.coefficients, delimiter=",", fmt="%.17g")
    header = {
        "wavelet": scalogram.wavelet,
        "scales": scalogram.scales.tolist(),
        "dt": scalogram.dt,
        "rows": "scales",
        "columns": "positions",
        "shape": list(scalogram.coefficients.shape),
    }
    meta = path.with_name(path.name + ".json")
    meta.write_text(json.dumps(header, indent=2) + "\n")
    return path, meta
