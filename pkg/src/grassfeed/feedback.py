"""Differential codec for channel directions.

The receiver-side encoder computes the tangent from the previous quantized
direction to the current one, quantizes its arc length against the sliding
window and its direction against the rotated canonical codebook, and sends
the two indices.  Both sides then apply the identical reconstruction step,
so encoder and decoder states stay bit-for-bit synchronized as long as the
message stream is delivered in order.

A reserved message (all index bits set) reinitializes both sides to the
common all-ones direction; the encoder emits it when the current channel is
orthogonal to the tracked direction and no geodesic exists.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .codebook import (
    CanonicalDirectionCodebook,
    MagnitudeWindow,
    default_window,
    direction_scores,
    fixed_window,
    quantize_magnitude,
    update_window,
)
from .grassmann import OrthogonalPoints, TangentVector, exp_map, householder_rotation, log_map


class OutOfOrder(Exception):
    """A feedback message arrived with an unexpected time index."""


@dataclass(frozen=True)
class FeedbackMessage:
    """One feedback payload: ``n_mag + n_dir`` bits plus its time index."""

    mag_index: int
    dir_index: int
    t: int


@dataclass(frozen=True)
class CodecState:
    """Synchronized codec state: tracked direction, window, codebook, time."""

    g_hat: np.ndarray
    window: MagnitudeWindow
    dir_cb: CanonicalDirectionCodebook
    t: int = 0
    adaptive_window: bool = True

    def signature(self):
        """Hashable bit-exact fingerprint, for lockstep verification."""
        w = self.window
        return (self.t, self.adaptive_window, self.g_hat.tobytes(),
                w.e_min, w.e_max, w.e_avg, w.n_bits)


def all_ones_direction(length: int) -> np.ndarray:
    return np.full(length, 1.0 / np.sqrt(length), dtype=complex)


def init_all_ones(dir_cb: CanonicalDirectionCodebook,
                  window: MagnitudeWindow) -> CodecState:
    """Common deterministic start: the normalized all-ones vector."""
    return CodecState(all_ones_direction(dir_cb.length), window, dir_cb)


def init_memoryless(g0, init_codebook: np.ndarray, dir_cb: CanonicalDirectionCodebook,
                    window: MagnitudeWindow):
    """Encoder-side start from a memoryless quantization of the first channel.

    Returns ``(state, index)``; the index is conveyed out of band and fed to
    :func:`init_from_index` on the decoder side.
    """
    idx, word = nearest_codeword(g0, init_codebook)
    return CodecState(word.copy(), window, dir_cb), idx


def init_from_index(index: int, init_codebook: np.ndarray,
                    dir_cb: CanonicalDirectionCodebook,
                    window: MagnitudeWindow) -> CodecState:
    """Decoder-side counterpart of :func:`init_memoryless`."""
    return CodecState(init_codebook[index].copy(), window, dir_cb)


def init_fixed_range(dir_cb: CanonicalDirectionCodebook, n_mag_bits: int) -> CodecState:
    """Baseline codec: magnitudes quantized on the fixed range [0, 1].

    The window never updates, which is the defect the adaptive window
    removes: on a static channel the distortion floors at the lowest level
    instead of converging to zero.
    """
    return CodecState(all_ones_direction(dir_cb.length), fixed_window(n_mag_bits),
                      dir_cb, adaptive_window=False)


def reserved_message_indices(state: CodecState):
    """Index pair reserved for the reinitialization message."""
    return 2 ** state.window.n_bits - 1, 2 ** state.dir_cb.n_bits - 1


def _fresh_window(state: CodecState) -> MagnitudeWindow:
    w = state.window
    if state.adaptive_window:
        return default_window(w.n_bits, tau=w.tau, alpha=w.alpha, beta=w.beta)
    return fixed_window(w.n_bits)


def _reinitialize(state: CodecState) -> CodecState:
    return replace(state, g_hat=all_ones_direction(state.dir_cb.length),
                   window=_fresh_window(state), t=state.t + 1)


def _apply(state: CodecState, mag_index: int, dir_index: int) -> CodecState:
    """Shared reconstruction step; the single code path keeps both sides bit-identical."""
    mag_q = float(state.window.levels()[mag_index])
    rotated = householder_rotation(state.g_hat) @ state.dir_cb.words[dir_index]
    g_new = exp_map(state.g_hat, TangentVector(state.g_hat, rotated, mag_q), 1.0)
    window = update_window(state.window, mag_q) if state.adaptive_window else state.window
    return replace(state, g_hat=g_new, window=window, t=state.t + 1)


def encode(state: CodecState, g) -> tuple:
    """Quantize the step from the tracked direction to ``g``.

    The arc length is quantized first and the direction search is run with
    the quantized arc, since that is the quantity the reconstruction uses.
    If ``g`` is orthogonal to the tracked direction the reserved
    reinitialization message is emitted instead and the local state resets;
    a natural encoding that would collide with the reserved index pair is
    demoted to the runner-up direction codeword.

    Returns ``(message, new_state)``.
    """
    g = np.asarray(g, dtype=complex)
    try:
        tangent = log_map(state.g_hat, g)
    except OrthogonalPoints:
        new_state = _reinitialize(state)
        mag_idx, dir_idx = reserved_message_indices(state)
        return FeedbackMessage(mag_idx, dir_idx, new_state.t), new_state

    mag_idx, mag_q = quantize_magnitude(tangent.mag, state.window)
    scores = direction_scores(state.g_hat, g, mag_q, state.dir_cb)
    dir_idx = int(np.argmax(scores))
    if (mag_idx, dir_idx) == reserved_message_indices(state) and scores.size > 1:
        scores[dir_idx] = -np.inf
        dir_idx = int(np.argmax(scores))
    new_state = _apply(state, mag_idx, dir_idx)
    return FeedbackMessage(mag_idx, dir_idx, new_state.t), new_state


def decode(state: CodecState, msg: FeedbackMessage) -> tuple:
    """Reconstruct the quantized direction from one in-order message.

    Returns ``(g_hat, new_state)``; the state update is the same computation
    the encoder performed, so both sides remain synchronized.

    Raises
    ------
    OutOfOrder
        If the message time index is not ``state.t + 1``.
    """
    if msg.t != state.t + 1:
        raise OutOfOrder(f"expected t={state.t + 1}, got t={msg.t}")
    if (msg.mag_index, msg.dir_index) == reserved_message_indices(state):
        new_state = _reinitialize(state)
    else:
        new_state = _apply(state, msg.mag_index, msg.dir_index)
    return new_state.g_hat, new_state


def nearest_codeword(g, codebook_words: np.ndarray):
    """Chordal-nearest word of a full-vector codebook; ties to the lowest index."""
    overlaps = np.abs(codebook_words.conj() @ np.asarray(g, dtype=complex))
    idx = int(np.argmax(overlaps))
    return idx, codebook_words[idx]


def memoryless_rvq(g, codebook_words: np.ndarray) -> np.ndarray:
    """Memoryless baseline: quantize ``g`` to the chordal-nearest random word."""
    return nearest_codeword(g, codebook_words)[1]
