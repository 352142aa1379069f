import sys

from dpleak.cli import main

sys.exit(main())
