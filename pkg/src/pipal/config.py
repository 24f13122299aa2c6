"""Global verify-mode switch.

Full precondition checks (element distinctness, sentinel collisions) cost
O(n log n) and are therefore opt-in: set PIPAL_VERIFY=1 or call
set_verify(True).  Algorithms consult verify_enabled() at their entry points.
"""

import os

_verify = os.environ.get("PIPAL_VERIFY", "0") not in ("", "0", "false", "no")


def verify_enabled() -> bool:
    return _verify


def set_verify(on: bool) -> None:
    global _verify
    _verify = bool(on)
