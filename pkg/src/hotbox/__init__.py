"""Desk-scale dual-arm teleoperation stack.

A JSON pub/sub bridge carries hand poses and joint states between a browser
console and a kinematic dual-arm simulator; a clutched controller turns hand
motion into bounded twist commands filtered through virtual plane fixtures.
"""

__version__ = "0.1.0"
