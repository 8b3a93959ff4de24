import sys

from frontpulse.cli import main

sys.exit(main())
