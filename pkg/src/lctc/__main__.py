import sys

from lctc.cli import main

sys.exit(main())
