"""Allow ``python -m oscnorm`` as an alias for the console script."""

import sys

from oscnorm.cli import main

if __name__ == "__main__":
    sys.exit(main())
