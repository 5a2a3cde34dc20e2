"""Tangent-direction codebooks and the adaptive magnitude quantizer.

Direction codewords are stored once in canonical form: unit vectors of the
shape ``[0, v]`` orthogonal to the fixed pivot ``x_b = [1, 0, ..., 0]``.  At
run time the canonical book is carried into the tangent plane of the current
base point by a Householder rotation, so a single stored codebook serves
every point on the manifold.

Arc lengths are quantized uniformly over a sliding window ``[alpha*e_min,
beta*e_max]`` whose limits track a running average of past quantized
magnitudes; on a static channel the window collapses and the quantization
error vanishes with it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from ._rng import crandn, rng_stream
from .grassmann import householder_rotation

CODEBOOK_FORMAT_VERSION = 1


class CodebookFormatError(ValueError):
    """A codebook file does not match the documented JSON schema."""


@dataclass(frozen=True)
class CanonicalDirectionCodebook:
    """Direction codebook at the canonical pivot ``[1, 0, ..., 0]``.

    ``words`` has shape ``(2**n_bits, L)``; every row is unit norm with a
    structurally zero leading entry.
    """

    words: np.ndarray

    @property
    def n_bits(self) -> int:
        return int(self.words.shape[0]).bit_length() - 1

    @property
    def length(self) -> int:
        return self.words.shape[1]

    @property
    def size(self) -> int:
        return self.words.shape[0]

    def save(self, path):
        doc = {
            "version": CODEBOOK_FORMAT_VERSION,
            "L": int(self.length),
            "n_bits": int(self.n_bits),
            "words": [[[float(z.real), float(z.imag)] for z in row] for row in self.words],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)

    @classmethod
    def load(cls, path) -> "CanonicalDirectionCodebook":
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise CodebookFormatError(f"not valid JSON: {exc}") from exc
        for key in ("version", "L", "n_bits", "words"):
            if key not in doc:
                raise CodebookFormatError(f"missing field {key!r}")
        if doc["version"] != CODEBOOK_FORMAT_VERSION:
            raise CodebookFormatError(f"unsupported version {doc['version']!r}")
        length, n_bits = int(doc["L"]), int(doc["n_bits"])
        rows = doc["words"]
        if len(rows) != 2 ** n_bits:
            raise CodebookFormatError("word count does not match n_bits")
        try:
            words = np.array(
                [[complex(re, im) for re, im in row] for row in rows], dtype=complex
            )
        except (TypeError, ValueError) as exc:
            raise CodebookFormatError(f"malformed word entries: {exc}") from exc
        if words.shape != (2 ** n_bits, length):
            raise CodebookFormatError("word length does not match L")
        return cls(words)


def validate_codebook(cb: CanonicalDirectionCodebook) -> list:
    """Invariant violations of a direction codebook (empty list if clean)."""
    problems = []
    if np.max(np.abs(cb.words[:, 0])) > 1e-12:
        problems.append("leading entry of a codeword is not zero")
    norms = np.linalg.norm(cb.words, axis=1)
    if np.max(np.abs(norms - 1.0)) > 1e-9:
        problems.append("a codeword is not unit norm")
    if cb.words.shape[0] != 2 ** cb.n_bits:
        problems.append("word count is not a power of two")
    return problems


def random_codebook(length: int, n_bits: int, seed: int) -> CanonicalDirectionCodebook:
    """Isotropic random canonical codebook: ``2**n_bits`` rotated-sphere words."""
    if length < 2:
        raise ValueError("need length >= 2")
    if n_bits < 1:
        raise ValueError("need n_bits >= 1")
    rng = rng_stream(seed, "canonical-codebook", length, n_bits)
    sub = crandn(rng, 2 ** n_bits, length - 1)
    sub /= np.linalg.norm(sub, axis=1, keepdims=True)
    words = np.hstack([np.zeros((2 ** n_bits, 1), dtype=complex), sub])
    return CanonicalDirectionCodebook(words)


def random_unit_codebook(length: int, n_bits: int, seed: int) -> np.ndarray:
    """Plain random codebook of full-length unit vectors (memoryless baseline)."""
    rng = rng_stream(seed, "unit-codebook", length, n_bits)
    words = crandn(rng, 2 ** n_bits, length)
    return words / np.linalg.norm(words, axis=1, keepdims=True)


def _sub_distortion(training: np.ndarray, sub_words: np.ndarray):
    """Assignment and mean squared distance ``||e - v||^2`` for a training set."""
    scores = (training @ sub_words.conj().T).real
    assign = np.argmax(scores, axis=1)
    best = scores[np.arange(training.shape[0]), assign]
    return assign, float(np.mean(2.0 - 2.0 * best))


def lloyd_distortion(training, cb: CanonicalDirectionCodebook) -> float:
    """Mean training distortion of a codebook under the direction metric."""
    training = np.asarray(training, dtype=complex)
    return _sub_distortion(training, cb.words[:, 1:])[1]


def lloyd_train(training, n_bits: int, iters: int = 25, seed: int = 0) -> CanonicalDirectionCodebook:
    """Train a canonical codebook on sample tangent directions.

    ``training`` holds unit-norm ``(L-1)``-dimensional subvectors, one per
    row, expressed in the canonical frame.  Assignment maximizes
    ``Re <v, e>`` (equivalently minimizes ``||e - v||^2``, the small-angle
    form of the direction-quantizer objective) and centroids are normalized
    cell means, so the training distortion never increases between
    iterations.  An empty cell is refilled with the member of the most
    populated cell farthest from its centroid.  ``iters == 0`` returns the
    random initial codebook unchanged.
    """
    training = np.asarray(training, dtype=complex)
    if training.ndim != 2 or training.shape[0] == 0:
        raise ValueError("training must be a nonempty (n, L-1) array")
    length = training.shape[1] + 1
    words = random_codebook(length, n_bits, seed).words.copy()
    sub = words[:, 1:]
    n_words = sub.shape[0]

    for _ in range(iters):
        scores = (training @ sub.conj().T).real
        assign = np.argmax(scores, axis=1)
        counts = np.bincount(assign, minlength=n_words)
        for w in range(n_words):
            if counts[w] == 0:
                continue
            mean = training[assign == w].mean(axis=0)
            norm = np.linalg.norm(mean)
            if norm > 0:
                sub[w] = mean / norm
        empties = np.flatnonzero(counts == 0)
        if empties.size:
            donor = int(np.argmax(counts))
            members = np.flatnonzero(assign == donor)
            farthest_first = members[np.argsort(scores[members, donor])]
            for j, w in enumerate(empties):
                sub[w] = training[farthest_first[j % farthest_first.size]]
    return CanonicalDirectionCodebook(words)


@dataclass(frozen=True)
class MagnitudeWindow:
    """Adaptive quantization range for tangent arc lengths.

    The quantizer places ``2**n_bits`` levels at the midpoints of equal cells
    of ``[alpha*e_min, beta*e_max]``.  The statistics are running averages of
    past quantized magnitudes with smoothing factor ``tau``.
    """

    e_min: float
    e_max: float
    e_avg: float
    tau: float = 5.0
    alpha: float = 0.5
    beta: float = 2.0
    n_bits: int = 2

    def levels(self) -> np.ndarray:
        lo = self.alpha * self.e_min
        hi = self.beta * self.e_max
        n = 2 ** self.n_bits
        cell = (hi - lo) / n
        return lo + (np.arange(n) + 0.5) * cell


def default_window(n_bits: int, tau: float = 5.0, alpha: float = 0.5,
                   beta: float = 2.0) -> MagnitudeWindow:
    """Fresh window spanning the full possible arc range [0, pi/2]."""
    if n_bits < 1:
        raise ValueError("need n_bits >= 1")
    return MagnitudeWindow(e_min=0.0, e_max=np.pi / 2, e_avg=np.pi / 4,
                           tau=tau, alpha=alpha, beta=beta, n_bits=n_bits)


def fixed_window(n_bits: int) -> MagnitudeWindow:
    """Non-adaptive window quantizing magnitudes uniformly on [0, 1]."""
    if n_bits < 1:
        raise ValueError("need n_bits >= 1")
    return MagnitudeWindow(e_min=0.0, e_max=1.0, e_avg=0.5,
                           tau=5.0, alpha=1.0, beta=1.0, n_bits=n_bits)


def quantize_magnitude(mag: float, window: MagnitudeWindow):
    """Nearest uniform level to ``mag``; ties break to the lower index.

    Out-of-range magnitudes clamp to the nearest end level.  Returns
    ``(index, level_value)``.
    """
    if mag < 0:
        raise ValueError("magnitude must be nonnegative")
    levels = window.levels()
    idx = int(np.argmin(np.abs(mag - levels)))
    return idx, float(levels[idx])


def update_window(window: MagnitudeWindow, quantized_mag: float) -> MagnitudeWindow:
    """Advance the sliding window with one quantized magnitude.

    The average always moves by the convex rule
    ``(1 - 1/tau) * e_avg + (1/tau) * q``; the lower limit moves only when
    ``q`` is at or below the pre-update average, the upper limit only when it
    is at or above it (both at equality).  Ordering ``e_min <= e_avg <=
    e_max`` is re-enforced by clamping.
    """
    q = float(quantized_mag)
    lam = 1.0 / window.tau
    e_avg = (1.0 - lam) * window.e_avg + lam * q
    e_min = window.e_min
    e_max = window.e_max
    if q <= window.e_avg:
        e_min = (1.0 - lam) * window.e_min + lam * q
    if q >= window.e_avg:
        e_max = (1.0 - lam) * window.e_max + lam * q
    e_avg = max(e_avg, 0.0)
    e_min = min(max(e_min, 0.0), e_avg)
    e_max = max(e_max, e_avg)
    return replace(window, e_min=e_min, e_max=e_max, e_avg=e_avg)


def direction_scores(base, target, mag: float, cb: CanonicalDirectionCodebook) -> np.ndarray:
    """Objective of every codeword: ``|G(base, mag * U v_i, 1)^* target|^2``.

    Evaluated without forming the rotated codebook: rotating the channels
    into the canonical frame by the inverse (adjoint) rotation gives the
    identical scores, since the rotation is unitary.
    """
    base = np.asarray(base, dtype=complex)
    target = np.asarray(target, dtype=complex)
    U = householder_rotation(base)
    back = U.conj().T @ target
    rho = np.vdot(base, target)
    inner = np.cos(mag) * rho + np.sin(mag) * (cb.words.conj() @ back)
    return np.abs(inner) ** 2


def quantize_direction(base, target, mag: float, cb: CanonicalDirectionCodebook):
    """Best codeword index for the quantized arc, and its rotated direction.

    Maximizes the overlap of the reconstructed point with ``target``; ties
    break to the lowest index (so with ``mag == 0`` index 0 is returned).
    Returns ``(index, rotated_word)`` where the rotated word lies in the
    tangent plane at ``base``.
    """
    scores = direction_scores(base, target, mag, cb)
    idx = int(np.argmax(scores))
    rotated = householder_rotation(base) @ cb.words[idx]
    return idx, rotated
