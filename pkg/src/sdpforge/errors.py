"""Shared exception base for the package.

Module-specific exceptions live next to the code that raises them; they all
derive from SdpforgeError so callers (and the CLI) can catch one type.
"""


class SdpforgeError(Exception):
    pass
