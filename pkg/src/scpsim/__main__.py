import sys

from scpsim.cli import main

sys.exit(main())
