import sys

from . import main


def _entry() -> int:
    return main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(_entry())
