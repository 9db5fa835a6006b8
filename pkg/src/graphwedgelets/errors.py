"""Exception types shared across the package.

The split matters for the CLI exit codes: malformed input files map to
I/O failures, violated structural guarantees map to data errors.
"""


class FormatError(ValueError):
    """An input file or byte stream does not conform to its documented format."""


class InvariantError(ValueError):
    """A structural guarantee (connectivity, partition validity, codec layout) is violated."""
