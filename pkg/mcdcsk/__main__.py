"""Entry point for ``python -m mcdcsk``."""

import sys

from mcdcsk.cli import main

sys.exit(main())
