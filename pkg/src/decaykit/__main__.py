import sys

from decaykit.cli import main

sys.exit(main())
