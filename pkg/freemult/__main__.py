import sys

from freemult.cli import main

sys.exit(main())
