import sys

from macbench.cli import main

sys.exit(main())
