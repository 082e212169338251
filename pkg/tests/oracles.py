"""Independent reference implementations used only by the tests."""

import math
from collections import Counter

import numpy as np


def _rx(deg):
    a = math.radians(deg)
    c, s = math.cos(a), math.sin(a)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])


def _ry(deg):
    a = math.radians(deg)
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])


EZ = np.array([0.0, 0.0, 1.0])


def face_position_dir(alpha, beta):
    # start on the optical axis, tilt up by beta, then swing right by alpha
    return _ry(alpha) @ _rx(-beta) @ EZ


def head_facing_dir(yaw, pitch):
    # neutral head looks back along -z; pitch tilts up, yaw turns toward +x
    return _ry(-yaw) @ _rx(pitch) @ (-EZ)


def vector_angle_deg(u, v):
    # chord formula, stable for tiny and large angles alike
    chord = np.linalg.norm(u / np.linalg.norm(u) - v / np.linalg.norm(v))
    return math.degrees(2.0 * math.asin(min(1.0, chord / 2.0)))


def deviation_bruteforce(yaw, pitch, alpha, beta):
    return vector_angle_deg(head_facing_dir(yaw, pitch), -face_position_dir(alpha, beta))


def filter_bruteforce(votes, window, dwell, majority_count):
    """Replay the window/dwell rule from scratch at every frame.

    Returns the filtered state after each vote (None before the first switch).
    """
    current = None
    out = []
    for k in range(len(votes)):
        win = votes[max(0, k + 1 - window): k + 1]
        counts = Counter(win)
        top = max(counts.values())
        tied = {s for s, c in counts.items() if c == top}
        if len(tied) == 1:
            cand = next(iter(tied))
        elif current in tied:
            cand = current
        else:
            cand = next(v for v in reversed(win) if v in tied)
        run = 0
        for v in reversed(votes[: k + 1]):
            if v != cand:
                break
            run += 1
        if cand != current and counts[cand] >= majority_count and run >= dwell:
            current = cand
        out.append(current)
    return out
