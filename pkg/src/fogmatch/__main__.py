import sys

from fogmatch.cli import main

sys.exit(main())
