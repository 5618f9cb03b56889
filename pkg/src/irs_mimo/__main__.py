import sys

from irs_mimo.cli import main

if __name__ == "__main__":
    sys.exit(main())
