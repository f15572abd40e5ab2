"""Real-time singing tutor engine.

Detects pitch from 50 ms audio frames and breathing state from a
5-channel wearable force belt (real or simulated), scores takes against
breath-annotated pipe scores, and streams live feedback events to a
browser UI.
"""

__version__ = "0.1.0"
