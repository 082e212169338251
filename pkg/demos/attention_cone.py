"""
Who is looking at the robot?
============================

A face's box position gives its bearing from the optical axis. Its head
pose gives where it points. Attention is the angle between the head's
facing direction and the direction back to the camera.
"""

from engage import EngineConfig
from engage.attention import attention_score, bearing_from_bbox

cfg = EngineConfig()

# a face slightly right of center
bearing = bearing_from_bbox((0.7, 0.5, 0.1, 0.12), cfg.hfov, cfg.vfov)
print(f"bearing: alpha={bearing.alpha:.2f} beta={bearing.beta:.2f}")

# to look at the lens, the head must turn back toward the center by about alpha
for yaw in (0.0, -bearing.alpha, -bearing.alpha - 10, -bearing.alpha - 25):
    est = attention_score(yaw, 0.0, bearing, cfg)
    print(f"yaw {yaw:7.2f}: deviation {est.deviation:6.2f} score {est.score:.2f} attentive={est.attentive}")
