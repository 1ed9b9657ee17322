import sys

from monogrid.cli import main

sys.exit(main())
