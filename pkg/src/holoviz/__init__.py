"""Headset-independent robot visualization engine.

Connects to a rosbridge endpoint, buffers transform frames, aligns the
virtual world with the real one from fiducial detections, and streams an
epoch-tagged scene diff to any number of UI sessions.
"""

__version__ = "0.1.0"
