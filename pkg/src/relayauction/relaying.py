"""Achievable rates of the four relaying schemes.

Every rate is a half-slot Shannon rate: the source talks in the first
mini-slot, the relay in the second. Functions broadcast over numpy arrays.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel import LinkBudget


class SchemeTag(str, enum.Enum):
    NORMAL = "Normal"
    AMPLIFY_FORWARD = "AmplifyForward"
    DECODE_FORWARD = "DecodeForward"
    SELECTION = "SelectionRelaying"


@dataclass(frozen=True)
class Scheme:
    tag: SchemeTag
    zeta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "tag", SchemeTag(self.tag))
        if self.tag is SchemeTag.SELECTION and not self.zeta > 0:
            raise ValueError("selection relaying needs a positive threshold zeta")

    @classmethod
    def parse(cls, text: str, zeta: float = 1.0) -> "Scheme":
        aliases = {
            "normal": SchemeTag.NORMAL,
            "af": SchemeTag.AMPLIFY_FORWARD,
            "amplifyforward": SchemeTag.AMPLIFY_FORWARD,
            "df": SchemeTag.DECODE_FORWARD,
            "decodeforward": SchemeTag.DECODE_FORWARD,
            "selection": SchemeTag.SELECTION,
            "selectionrelaying": SchemeTag.SELECTION,
        }
        key = text.replace("-", "").replace("_", "").lower()
        if key not in aliases:
            raise ValueError(f"unknown relaying scheme {text!r}")
        return cls(aliases[key], zeta)

    def __str__(self) -> str:
        return self.tag.value


NORMAL = Scheme(SchemeTag.NORMAL)
AF = Scheme(SchemeTag.AMPLIFY_FORWARD)
DF = Scheme(SchemeTag.DECODE_FORWARD)
SELECTION = Scheme(SchemeTag.SELECTION)
ALL_SCHEMES = (NORMAL, AF, DF, SELECTION)


def _half_rate(W, x):
    return 0.5 * W * np.log2(1.0 + x)


def af_relay_term(sinr_si, sinr_ij):
    """Effective SINR contributed by an amplify-and-forward relay."""
    sinr_si = np.asarray(sinr_si, dtype=float)
    sinr_ij = np.asarray(sinr_ij, dtype=float)
    return sinr_si * sinr_ij / (1.0 + sinr_si + sinr_ij)


def eligible(scheme: Scheme, lb: LinkBudget):
    """Whether the relay may serve the link at all (only selection relaying gates)."""
    shape = np.shape(lb.sinr_si)
    if scheme.tag is SchemeTag.SELECTION:
        out = np.asarray(lb.sinr_si) >= scheme.zeta
    else:
        out = np.ones(shape, dtype=bool)
    return bool(out) if out.ndim == 0 else out


def rate(scheme: Scheme, lb: LinkBudget, p):
    """Rate in bit/s at relay transmit power ``p`` and the eligibility flag.

    For selection relaying below the threshold the direct-retransmission
    rate is reported but the relay is flagged ineligible.
    """
    p = np.asarray(p, dtype=float)
    W = lb.bandwidth_w
    s_ij = p * lb.gamma_ij
    tag = scheme.tag
    if tag is SchemeTag.NORMAL:
        out = _half_rate(W, s_ij)
    elif tag is SchemeTag.AMPLIFY_FORWARD:
        out = _half_rate(W, lb.sinr_sj + af_relay_term(lb.sinr_si, s_ij))
    elif tag is SchemeTag.DECODE_FORWARD:
        out = np.minimum(_half_rate(W, lb.sinr_si), _half_rate(W, lb.sinr_sj + s_ij))
    else:
        ok = np.asarray(lb.sinr_si) >= scheme.zeta
        out = np.where(ok, _half_rate(W, lb.sinr_sj + s_ij),
                       _half_rate(W, 2.0 * np.asarray(lb.sinr_sj)))
    ok = eligible(scheme, lb)
    out = np.broadcast_to(out, np.broadcast(out, ok).shape)
    if out.ndim == 0:
        return float(out), bool(ok)
    return np.array(out), np.broadcast_to(ok, out.shape).copy()


def df_crossover_power(lb: LinkBudget):
    """Power above which the source->relay cap limits decode-and-forward."""
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (np.asarray(lb.sinr_si) - lb.sinr_sj) / lb.gamma_ij
    return float(out) if np.ndim(out) == 0 else out
