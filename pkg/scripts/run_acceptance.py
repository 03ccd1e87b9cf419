"""Run the acceptance suite and print one verdict line per criterion."""
import os
import sys

import pytest

HERE = os.path.dirname(os.path.abspath(__file__))


def main(argv=None):
    args = [os.path.join(HERE, "..", "tests", "test_acceptance.py"), "-q", "-p", "no:cacheprovider"]
    return pytest.main(args + list(argv or []))


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
